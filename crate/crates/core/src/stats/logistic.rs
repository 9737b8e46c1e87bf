use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_ITER: usize = 500;
const PARAM_TOL: f64 = 1e-8;

/// `100 / (1 + exp(a (d - b)))`; increasing in `d` for `a < 0`.
pub fn logistic(a: f64, b: f64, d: f64) -> f64 {
    100.0 / (1.0 + (a * (d - b)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Ok,
    /// All metric scores were equal; the mapping is the constant 50.
    ConstantInput,
    /// The best non-decreasing mapping is flat (`a == 0`).
    NonIncreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappingFit {
    pub a: f64,
    pub b: f64,
    pub rmse: f64,
    pub status: FitStatus,
}

impl MappingFit {
    pub fn eval(&self, d: f64) -> f64 {
        logistic(self.a, self.b, d)
    }
}

/// Least-squares fit of the logistic mapping from metric scores `d` to
/// intelligibility `p` (percent). The slope is constrained to `a <= 0` so
/// the mapping never reverses the metric's ordering; a metric that is
/// anti-correlated with intelligibility gets a flat or near-flat fit.
///
/// Optimisation runs Nelder-Mead in coordinates normalised to the range of
/// `d`, from nine starting points, followed by a restart from the best.
pub fn fit_logistic(d: &[f64], p: &[f64]) -> Result<MappingFit> {
    let Some(problem) = Problem::new(d, p)? else {
        return Ok(constant_fit(d, p));
    };
    let mut best = None;
    for alpha in [-4.0, -1.0, -0.25] {
        for beta in problem.quartiles() {
            let x = nelder_mead(&|x| problem.sse(x), [alpha, beta]);
            if best.is_none_or(|(_, f)| x.1 < f) {
                best = Some(x);
            }
        }
    }
    let (x, _) = best.expect("at least one start");
    Ok(problem.finish(nelder_mead(&|x| problem.sse(x), x).0))
}

/// Refits starting from an earlier fit only (no multi-start), for bootstrap
/// replicates of a dataset whose full-data fit is `start`.
pub fn fit_logistic_from(d: &[f64], p: &[f64], start: &MappingFit) -> Result<MappingFit> {
    let Some(problem) = Problem::new(d, p)? else {
        return Ok(constant_fit(d, p));
    };
    let x0 = [start.a * problem.range, (start.b - problem.lo) / problem.range];
    let x0 = if x0.iter().all(|v| v.is_finite()) { x0 } else { [-1.0, 0.5] };
    let (x, _) = nelder_mead(&|x| problem.sse(x), x0);
    Ok(problem.finish(nelder_mead(&|x| problem.sse(x), x).0))
}

fn constant_fit(d: &[f64], p: &[f64]) -> MappingFit {
    let sse: f64 = p.iter().map(|v| (v - 50.0) * (v - 50.0)).sum();
    MappingFit {
        a: 0.0,
        b: d[0],
        rmse: (sse / p.len() as f64).sqrt(),
        status: FitStatus::ConstantInput,
    }
}

/// Scores rescaled to `z = (d - lo) / range`, so the slope `alpha` and
/// midpoint `beta` are O(1) whatever the metric's units.
struct Problem {
    z: Vec<f64>,
    p: Vec<f64>,
    lo: f64,
    range: f64,
}

impl Problem {
    fn new(d: &[f64], p: &[f64]) -> Result<Option<Self>> {
        if d.len() != p.len() {
            return Err(Error::LengthMismatch(d.len(), p.len()));
        }
        if d.len() < 3 {
            return Err(Error::TooFewSamples { n: d.len(), k: 2 });
        }
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput("non-finite metric score".into()));
        }
        if p.iter().any(|v| !(0.0..=100.0).contains(v)) {
            return Err(Error::InvalidArgument("intelligibility must lie in [0, 100]".into()));
        }
        let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi == lo {
            return Ok(None);
        }
        let range = hi - lo;
        Ok(Some(Self {
            z: d.iter().map(|v| (v - lo) / range).collect(),
            p: p.to_vec(),
            lo,
            range,
        }))
    }

    fn quartiles(&self) -> [f64; 3] {
        let mut s = self.z.clone();
        s.sort_by(f64::total_cmp);
        let q = |f: f64| {
            let pos = f * (s.len() - 1) as f64;
            let (i, frac) = (pos.floor() as usize, pos.fract());
            if i + 1 < s.len() {
                s[i] + frac * (s[i + 1] - s[i])
            } else {
                s[i]
            }
        };
        [q(0.25), q(0.5), q(0.75)]
    }

    fn sse(&self, [alpha, beta]: [f64; 2]) -> f64 {
        let alpha = alpha.min(0.0);
        self.z
            .iter()
            .zip(&self.p)
            .map(|(z, p)| {
                let r = p - logistic(alpha, beta, *z);
                r * r
            })
            .sum()
    }

    fn finish(&self, [alpha, beta]: [f64; 2]) -> MappingFit {
        let alpha = alpha.min(0.0);
        let rmse = (self.sse([alpha, beta]) / self.z.len() as f64).sqrt();
        MappingFit {
            a: alpha / self.range,
            b: self.lo + beta * self.range,
            rmse,
            status: if alpha == 0.0 { FitStatus::NonIncreasing } else { FitStatus::Ok },
        }
    }
}

/// Plain Nelder-Mead on two parameters. Returns the best vertex and its
/// objective; this is never worse than the starting point.
fn nelder_mead(f: &dyn Fn([f64; 2]) -> f64, x0: [f64; 2]) -> ([f64; 2], f64) {
    let step = |v: f64, min: f64| (0.25 * v.abs()).max(min);
    let mut simplex = [
        x0,
        [x0[0] + step(x0[0], 0.25), x0[1]],
        [x0[0], x0[1] + step(x0[1], 0.1)],
    ];
    let mut values = simplex.map(f);
    let comb = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];

    for _ in 0..MAX_ITER {
        let mut order = [0, 1, 2];
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);

        let best = simplex[0];
        let diameter = simplex[1..]
            .iter()
            .map(|x| (x[0] - best[0]).abs().max((x[1] - best[1]).abs()))
            .fold(0.0, f64::max);
        let scale = 1.0 + best[0].abs().max(best[1].abs());
        if diameter <= PARAM_TOL * scale || values[2] == values[0] {
            break;
        }

        let centroid = comb(simplex[0], simplex[1], 0.5);
        let reflected = comb(centroid, simplex[2], -1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = comb(centroid, simplex[2], -2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let (target, ft) = if fr < values[2] { (reflected, fr) } else { (simplex[2], values[2]) };
            let contracted = comb(centroid, target, 0.5);
            let fc = f(contracted);
            if fc < ft {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = comb(simplex[0], simplex[i], 0.5);
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    let mut i_best = 0;
    for i in 1..3 {
        if values[i] < values[i_best] {
            i_best = i;
        }
    }
    (simplex[i_best], values[i_best])
}
