//! Derivative-free minimizers: golden-section search for one-dimensional
//! profiles and a Nelder-Mead simplex for the low-dimensional marginal
//! likelihoods. Objectives may return `f64::INFINITY` to mark invalid
//! regions; both routines treat such points as arbitrarily bad.

/// Result of a one-dimensional minimization.
#[derive(Debug, Clone, Copy)]
pub struct GoldenResult {
    pub x: f64,
    pub f: f64,
    pub iterations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search on `[lo, hi]`.
///
/// Shrinks the interval until its width drops below
/// `tol * |midpoint| + tol_abs` or `max_iter` is reached, then returns the
/// best point seen (interval midpoint or an endpoint, whichever evaluates
/// lowest).
pub fn golden_section_min<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    tol_abs: f64,
    max_iter: usize,
) -> GoldenResult {
    debug_assert!(lo <= hi);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while iters < max_iter {
        iters += 1;
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        let mid = 0.5 * (a + b);
        if (b - a) <= tol * mid.abs() + tol_abs {
            break;
        }
    }
    let x = 0.5 * (a + b);
    GoldenResult {
        x,
        f: f(x),
        iterations: iters,
    }
}

/// Line minimization along one coordinate: expands a bracket around `x0`
/// (clipped to `[lo, hi]`), then refines it by golden section.
pub fn bracket_and_golden<F: FnMut(f64) -> f64>(
    mut f: F,
    x0: f64,
    step: f64,
    lo: f64,
    hi: f64,
    tol: f64,
    tol_abs: f64,
) -> GoldenResult {
    let clamp = |x: f64| x.clamp(lo, hi);
    let f0 = f(x0);
    let mut h = step;
    let (mut a, mut b) = (x0, x0);
    let (mut fa, mut fb) = (f0, f0);
    // grow the bracket until both ends sit above the best interior value
    for _ in 0..60 {
        let na = clamp(x0 - h);
        let nb = clamp(x0 + h);
        let (nfa, nfb) = (f(na), f(nb));
        a = na;
        b = nb;
        fa = nfa;
        fb = nfb;
        if (fa >= f0 && fb >= f0) || (a <= lo && b >= hi) {
            break;
        }
        h *= 2.0;
    }
    let _ = (fa, fb);
    let res = golden_section_min(&mut f, a, b, tol, tol_abs, 200);
    if res.f <= f0 {
        res
    } else {
        GoldenResult {
            x: x0,
            f: f0,
            iterations: res.iterations,
        }
    }
}

/// Result of a simplex minimization.
#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder-Mead with the standard reflection/expansion/contraction/shrink
/// coefficients. Stops when the spread of vertex values falls below `f_tol`
/// and the simplex diameter below `x_tol`, or after `max_evals` objective
/// evaluations.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    steps: &[f64],
    f_tol: f64,
    x_tol: f64,
    max_evals: usize,
) -> SimplexResult {
    assert_eq!(x0.len(), steps.len());
    let dim = x0.len();
    let mut evals = 0;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let fx0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), fx0));
    for j in 0..dim {
        let mut v = x0.to_vec();
        v[j] += steps[j];
        let fv = eval(&v, &mut evals);
        simplex.push((v, fv));
    }

    let mut converged = false;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let f_best = simplex[0].1;
        let f_worst = simplex[dim].1;
        let diam = simplex[1..]
            .iter()
            .map(|(v, _)| {
                v.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if f_worst.is_finite() && (f_worst - f_best).abs() <= f_tol && diam <= x_tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(v, _)| v[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let reflect: Vec<f64> = (0..dim)
            .map(|j| centroid[j] + (centroid[j] - worst.0[j]))
            .collect();
        let fr = eval(&reflect, &mut evals);

        if fr < simplex[0].1 {
            // try to expand
            let expand: Vec<f64> = (0..dim)
                .map(|j| centroid[j] + 2.0 * (centroid[j] - worst.0[j]))
                .collect();
            let fe = eval(&expand, &mut evals);
            simplex[dim] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflect, fr);
        } else {
            // contract toward the better of worst/reflected
            let (towards, f_towards) = if fr < worst.1 {
                (&reflect, fr)
            } else {
                (&worst.0, worst.1)
            };
            let contract: Vec<f64> = (0..dim)
                .map(|j| centroid[j] + 0.5 * (towards[j] - centroid[j]))
                .collect();
            let fc = eval(&contract, &mut evals);
            if fc < f_towards {
                simplex[dim] = (contract, fc);
            } else {
                // shrink toward the best vertex
                let best = simplex[0].0.clone();
                for (v, fv) in simplex.iter_mut().skip(1) {
                    for j in 0..dim {
                        v[j] = best[j] + 0.5 * (v[j] - best[j]);
                    }
                    *fv = eval(v, &mut evals);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    SimplexResult {
        x: simplex[0].0.clone(),
        f: simplex[0].1,
        evaluations: evals,
        converged,
    }
}
