//! Expressions in `t`, forward jets of arbitrary order, and sampled
//! sup-norm estimators.

mod expr;
mod jet;
mod parse;

pub use expr::{Expr, Func};
pub use jet::{Jet, Scalar};
pub use parse::parse;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum TaylorError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("{op} undefined at t = {t}")]
    Domain { op: &'static str, t: f64 },
    #[error("invalid sampling request: {0}")]
    Sampling(String),
}

/// Jet of the expression at `t` with derivatives up to `k`.
pub fn jet_eval(e: &Expr, t: f64, k: usize) -> Result<Jet, TaylorError> {
    e.jet(t, k)
}

pub const DEFAULT_SAMPLES: usize = 4097;
pub const DEFAULT_INFLATION: f64 = 1.05;
const REFINE_STEPS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    LowerSample,
    Inflated,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
    /// Golden-section refinement around each per-order arg-max.
    pub refined: bool,
}

/// A sampled sup norm.
///
/// `value` is the largest sampled magnitude when `kind` is `LowerSample`.
/// [`NormEstimate::inflated`] multiplies by `inflation` for the
/// conservative figure used in ledger formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub kind: NormKind,
    pub grid: SampleGrid,
    pub inflation: f64,
    pub argmax: f64,
}

impl NormEstimate {
    pub fn lower(&self) -> f64 {
        match self.kind {
            NormKind::LowerSample => self.value,
            NormKind::Inflated => self.value / self.inflation,
        }
    }

    pub fn inflated(&self) -> f64 {
        match self.kind {
            NormKind::LowerSample => self.value * self.inflation,
            NormKind::Inflated => self.value,
        }
    }

    pub fn to_inflated(self) -> Self {
        Self { value: self.inflated(), kind: NormKind::Inflated, ..self }
    }
}

fn grid(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    if lo == hi {
        return vec![lo];
    }
    let n = samples - 1;
    (0..=n)
        .map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 })
        .collect()
}

fn magnitude(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        x.abs()
    }
}

/// Golden-section search for a local maximum of `g` on [lo, hi]; returns
/// the best sampled value and its location.
fn refine<E>(
    g: &dyn Fn(f64) -> Result<f64, E>,
    lo: f64,
    hi: f64,
    best: (f64, f64),
) -> Result<(f64, f64), E> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut best = best;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let mut f1 = g(x1)?;
    let mut f2 = g(x2)?;
    for _ in 0..REFINE_STEPS {
        for (x, v) in [(x1, f1), (x2, f2)] {
            if v > best.0 {
                best = (v, x);
            }
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = g(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = g(x2)?;
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v > best.0 {
            best = (v, x);
        }
    }
    Ok(best)
}

/// Sampled sup|f^{(n)}| on [lo, hi] for each order n ≤ m, each refined
/// around its own grid arg-max.
pub fn sup_norms_by_order<F, E>(f: F, interval: (f64, f64), m: usize, samples: usize) -> Result<Vec<NormEstimate>, E>
where
    F: Fn(f64, usize) -> Result<Jet, E> + Sync,
    E: Send + From<TaylorError>,
{
    let (lo, hi) = interval;
    if !(lo <= hi) || samples < 2 {
        return Err(TaylorError::Sampling(format!(
            "need lo <= hi and at least 2 samples, got [{lo}, {hi}] with {samples}"
        ))
        .into());
    }
    let xs = grid(lo, hi, samples);
    let jets: Vec<Jet> = xs.par_iter().map(|&x| f(x, m)).collect::<Result<_, E>>()?;
    let mut out = Vec::with_capacity(m + 1);
    for n in 0..=m {
        let (i, v) = jets
            .iter()
            .enumerate()
            .map(|(i, j)| (i, magnitude(j[n])))
            .fold((0, -1.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        let mut local = (v, xs[i]);
        if xs.len() > 1 && v.is_finite() && v > 0.0 {
            let a = xs[i.saturating_sub(1)];
            let b = xs[(i + 1).min(xs.len() - 1)];
            let g = |x: f64| f(x, n).map(|j| magnitude(j[n]));
            local = refine(&g, a, b, local)?;
        }
        out.push(NormEstimate {
            value: local.0,
            kind: NormKind::LowerSample,
            grid: SampleGrid { lo, hi, samples, refined: true },
            inflation: DEFAULT_INFLATION,
            argmax: local.1,
        });
    }
    Ok(out)
}

/// Sampled ‖f‖_{[lo,hi]; m} for any jet evaluator.
///
/// Each order n ≤ m is maximized separately on the shared grid and then
/// refined, so the estimate can only grow with m.
pub fn sup_norm_with<F, E>(f: F, interval: (f64, f64), m: usize, samples: usize) -> Result<NormEstimate, E>
where
    F: Fn(f64, usize) -> Result<Jet, E> + Sync,
    E: Send + From<TaylorError>,
{
    let per = sup_norms_by_order(f, interval, m, samples)?;
    let best = per.iter().fold(per[0], |acc, e| if e.value > acc.value { *e } else { acc });
    Ok(best)
}

/// Sampled ‖e‖_{[a,b]; m}.
pub fn sup_norm(e: &Expr, interval: (f64, f64), m: usize, samples: usize) -> Result<NormEstimate, TaylorError> {
    sup_norm_with(|t, k| e.jet(t, k), interval, m, samples)
}

/// Sampled sup of |t^m e^{(n)}(t)| over [−T, T]. Only a lower sample of the
/// seminorm over the whole line.
pub fn schwartz_seminorm(e: &Expr, m: usize, n: usize, window: (f64, usize)) -> Result<NormEstimate, TaylorError> {
    let (big_t, samples) = window;
    if !(big_t > 0.0) {
        return Err(TaylorError::Sampling(format!("window must be positive, got {big_t}")));
    }
    sup_norm_with(
        |t, _| {
            let j = e.jet(t, n)?;
            Ok::<_, TaylorError>(Jet::constant(t, t.powi(m as i32) * j[n], 0))
        },
        (-big_t, big_t),
        0,
        samples,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2};

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn jet_eval_examples() {
        assert_eq!(jet_eval(&p("exp(t)"), 0.0, 3).unwrap().coeffs(), &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(jet_eval(&p("sin(t)"), 0.0, 3).unwrap().coeffs(), &[0.0, 1.0, 0.0, -1.0]);
        let e = p("t^2*exp(t)");
        let j = jet_eval(&e, 1.0, 2).unwrap();
        let h = 1e-4;
        let f = |x: f64| e.eval(x).unwrap();
        let d1 = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h);
        let d2 = (f(1.0 + h) - 2.0 * f(1.0) + f(1.0 - h)) / (h * h);
        assert!(((j[1] - d1) / j[1]).abs() < 1e-6);
        assert!(((j[2] - d2) / j[2]).abs() < 1e-6);
        // Closed form: (t^2 + 4t + 2) e^t at 1.
        assert!((j[2] - 7.0 * E).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(jet_eval(&p("log(t)"), 0.0, 1), Err(TaylorError::Domain { op: "log", .. })));
        assert!(matches!(jet_eval(&p("sqrt(t)"), -1.0, 1), Err(TaylorError::Domain { .. })));
        assert!(matches!(jet_eval(&p("1/t"), 0.0, 1), Err(TaylorError::Domain { .. })));
        assert!(p("1/t").eval(0.0).is_err());
    }

    #[test]
    fn sup_norm_examples() {
        let n = sup_norm(&p("3"), (0.0, 1.0), 0, DEFAULT_SAMPLES).unwrap();
        assert_eq!(n.value, 3.0);
        assert!((n.inflated() - 3.15).abs() < 1e-12);
        let n = sup_norm(&p("sin(t)"), (0.0, FRAC_PI_2), 1, DEFAULT_SAMPLES).unwrap();
        assert!((n.value - 1.0).abs() < 1e-15);
        let n = sup_norm(&p("t^3"), (-2.0, 2.0), 2, DEFAULT_SAMPLES).unwrap();
        assert_eq!(n.value, 12.0);
        assert!(sup_norm(&p("t"), (1.0, 0.0), 0, 10).is_err());
    }

    #[test]
    fn sup_norm_refinement_finds_interior_peak() {
        // Peak of t e^{-t} at t = 1 sits between grid points of a coarse grid.
        let n = sup_norm(&p("t*exp(-t)"), (0.0, 3.3), 0, 5).unwrap();
        assert!((n.value - 1.0 / E).abs() < 1e-12, "{}", n.value);
    }

    #[test]
    fn schwartz_examples() {
        let n = schwartz_seminorm(&p("0"), 2, 3, (5.0, 1001)).unwrap();
        assert_eq!(n.value, 0.0);
        let g = p("exp(-t^2)");
        let n = schwartz_seminorm(&g, 0, 0, (1.0, 1001)).unwrap();
        assert!((n.value - 1.0).abs() < 1e-15);
        let n = schwartz_seminorm(&g, 1, 0, (3.0, 1001)).unwrap();
        assert!((n.value - (2.0 * E).powf(-0.5)).abs() < 1e-12);
        assert!(schwartz_seminorm(&g, 1, 0, (0.0, 10)).is_err());
    }
}
