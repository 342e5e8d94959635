//! Nelder–Mead simplex descent with a hard evaluation budget.

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimize `f` from `x0` using an axis-aligned initial simplex of edge
/// `step`. Never evaluates `f` more than `budget` times; the start point is
/// always evaluated first, so the returned value never exceeds `f(x0)`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: f64, budget: usize, ftol: f64) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    let f0 = eval(x0, &mut evals);
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for d in 0..dim {
        if evals >= budget {
            break;
        }
        let mut v = x0.to_vec();
        v[d] += step;
        let fv = eval(&v, &mut evals);
        simplex.push((v, fv));
    }
    if simplex.len() < dim + 1 || dim == 0 {
        return best_of(simplex, evals);
    }

    while evals < budget {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[dim].1);
        if (worst - best).abs() <= ftol * (best.abs() + worst.abs()).max(1e-300) {
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|d| simplex[..dim].iter().map(|p| p.0[d]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(REFLECT);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            if evals >= budget {
                simplex[dim] = (xr, fr);
                break;
            }
            let xe = along(EXPAND);
            let fe = eval(&xe, &mut evals);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        if evals >= budget {
            break;
        }
        let (xc, fc) = if fr < simplex[dim].1 {
            let xc = along(CONTRACT);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-CONTRACT);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < fr.min(simplex[dim].1) {
            simplex[dim] = (xc, fc);
            continue;
        }
        // shrink toward the best vertex
        let anchor = simplex[0].0.clone();
        for p in simplex.iter_mut().skip(1) {
            if evals >= budget {
                break;
            }
            for (v, a) in p.0.iter_mut().zip(&anchor) {
                *v = a + SHRINK * (*v - a);
            }
            p.1 = eval(&p.0, &mut evals);
        }
    }
    best_of(simplex, evals)
}

fn best_of(simplex: Vec<(Vec<f64>, f64)>, evaluations: usize) -> Minimum {
    let (x, value) = simplex
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("simplex is never empty");
    Minimum {
        x,
        value,
        evaluations,
    }
}
