//! Derivative-free Nelder-Mead minimization with restarts.

/// Options for [`nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Converged once every vertex lies within this distance of the best one.
    pub x_tol: f64,
    pub max_evals: usize,
    /// Fresh-simplex restarts from the best point after convergence; the
    /// loop stops early once a restart gains less than `restart_gain`.
    pub restarts: usize,
    pub restart_gain: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            initial_step: 0.5,
            x_tol: 1e-9,
            max_evals: 20_000,
            restarts: 3,
            restart_gain: 1e-15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let best = &simplex[0];
    simplex[1..]
        .iter()
        .map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

fn single_run<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    x0: &[f64],
    opts: &NelderMeadOptions,
    budget: usize,
) -> NelderMeadResult {
    let n = x0.len();
    let nf = n as f64;
    // Dimension-adaptive coefficients (Gao & Han).
    let (alpha, gamma, rho, sigma) = if n > 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

    let mut converged = false;
    while evals < budget {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if diameter(&simplex) < opts.x_tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / nf)
            .collect();
        let toward = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = toward(alpha);
        let fr = eval(&reflected, &mut evals);
        if fr < values[0] {
            let expanded = toward(alpha * gamma);
            let fe = eval(&expanded, &mut evals);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc_ref) = if fr < values[n] {
            (toward(alpha * rho), fr)
        } else {
            (toward(-rho), values[n])
        };
        let fc = eval(&contracted, &mut evals);
        if fc <= fc_ref {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        // Shrink toward the best vertex.
        let best = simplex[0].clone();
        for i in 1..=n {
            simplex[i] = best
                .iter()
                .zip(&simplex[i])
                .map(|(b, v)| b + sigma * (v - b))
                .collect();
            values[i] = eval(&simplex[i], &mut evals);
        }
    }

    let (best_i, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty simplex");
    NelderMeadResult {
        x: simplex[best_i].clone(),
        f: values[best_i],
        evals,
        converged,
    }
}

/// Minimizes `f` from `x0`, restarting from the best point with a fresh
/// simplex until a restart stops paying off.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult {
    let mut best = single_run(&mut f, x0, opts, opts.max_evals);
    let mut total = best.evals;
    for _ in 0..opts.restarts {
        if total >= opts.max_evals {
            break;
        }
        let step = NelderMeadOptions {
            initial_step: opts.initial_step * 0.1,
            ..*opts
        };
        let next = single_run(&mut f, &best.x, &step, opts.max_evals - total);
        total += next.evals;
        let gain = best.f - next.f;
        if next.f <= best.f {
            best = NelderMeadResult { evals: total, ..next };
        } else {
            best.evals = total;
        }
        if gain < opts.restart_gain {
            break;
        }
    }
    best.evals = total;
    best
}
