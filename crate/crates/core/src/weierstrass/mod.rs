//! The Gaussian transform W_λ f(z) = (λ/π)^{1/2} ∫ f(s) e^{−λ(s−z)²} ds of
//! compactly supported functions: real jets, complex values, and the
//! parameter threshold that makes W_λ f close to f in C^m.

pub mod quadrature;

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bump::{hump_jet, Hump};
use crate::taylor::{sup_norm_with, Expr, Jet, TaylorError};
use quadrature::{hermite64, integrate_panels};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum WeierstrassError {
    #[error("lambda must be positive, got {0}")]
    Lambda(f64),
    #[error("epsilon must be positive, got {0}")]
    Eps(f64),
    #[error("panel quadrature did not converge on [{lo}, {hi}] at depth {depth}")]
    Quadrature { lo: f64, hi: f64, depth: usize },
    #[error("precondition refused: lambda = {lambda} does not exceed the threshold {threshold}")]
    Precondition { lambda: f64, threshold: f64 },
    #[error("heat-series rule needs {need} derivatives, integrand provides {have}")]
    Smoothness { have: usize, need: usize },
    #[error(transparent)]
    Taylor(#[from] TaylorError),
    #[error("{0}")]
    Eval(String),
}

/// A function with a jet evaluator that vanishes outside `support()`.
pub trait Supported: Sync {
    fn support(&self) -> (f64, f64);
    /// Jet at `t`; callers may assume zero outside the support.
    fn jet(&self, t: f64, k: usize) -> Result<Jet, WeierstrassError>;
    /// Highest derivative order available, `None` for C^∞.
    fn smoothness(&self) -> Option<usize> {
        None
    }
}

/// Closure-backed [`Supported`] function.
pub struct SupportedFn<F> {
    pub eval: F,
    pub support: (f64, f64),
    pub smoothness: Option<usize>,
}

impl<F> SupportedFn<F>
where
    F: Fn(f64, usize) -> Result<Jet, WeierstrassError> + Sync,
{
    pub fn new(eval: F, support: (f64, f64)) -> Self {
        assert!(support.0 < support.1, "support must be a nondegenerate interval");
        Self { eval, support, smoothness: None }
    }
}

impl<F> Supported for SupportedFn<F>
where
    F: Fn(f64, usize) -> Result<Jet, WeierstrassError> + Sync,
{
    fn support(&self) -> (f64, f64) {
        self.support
    }

    fn jet(&self, t: f64, k: usize) -> Result<Jet, WeierstrassError> {
        if t < self.support.0 || t > self.support.1 {
            return Ok(Jet::zero(t, k));
        }
        (self.eval)(t, k)
    }

    fn smoothness(&self) -> Option<usize> {
        self.smoothness
    }
}

/// `e · hump`, supported on the hump's outer window.
pub fn windowed(e: Expr, hump: Hump) -> SupportedFn<impl Fn(f64, usize) -> Result<Jet, WeierstrassError> + Sync> {
    SupportedFn::new(
        move |t, k| {
            let w = hump_jet(&hump, t, k);
            if w.is_zero() {
                return Ok(w);
            }
            Ok(&e.jet(t, k)? * &w)
        },
        hump.support(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    /// 64-node Gauss–Hermite in u = √λ (s − t).
    GaussHermiteSubstituted,
    /// Adaptive 20-node Gauss–Legendre panels in u over the support.
    AdaptivePanel,
    /// Σ_{j<J} f^{(2j)}(t) / (j! (4λ)^j) with a certified remainder.
    HeatSeries,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub kind: RuleKind,
    /// Node count per rule application, or series terms for `HeatSeries`.
    pub nodes: usize,
    pub lambda: f64,
}

/// Kernel mass beyond |u| = 9 is below 1e−35.
const WINDOW: f64 = 9.0;
/// Gauss–Hermite is used when the support covers |u| ≤ 6.
const HERMITE_REACH: f64 = 6.0;

/// λ(ε) = 8 (‖f‖_{m+1}/ε)² log⁺(2√2 ‖f‖_m/ε).
pub fn lambda_for_eps(norm_m: f64, norm_m1: f64, eps: f64) -> Result<f64, WeierstrassError> {
    if !(eps > 0.0) {
        return Err(WeierstrassError::Eps(eps));
    }
    let arg = 2.0 * SQRT_2 * norm_m / eps;
    let logp = if arg > 1.0 { arg.ln() } else { 0.0 };
    Ok(8.0 * (norm_m1 / eps).powi(2) * logp)
}

/// The cruder sufficient choice 16√2 (‖f‖_{m+1}/ε)³ + 1.
pub fn lambda_simple(norm_m1: f64, eps: f64) -> Result<f64, WeierstrassError> {
    if !(eps > 0.0) {
        return Err(WeierstrassError::Eps(eps));
    }
    Ok(16.0 * SQRT_2 * (norm_m1 / eps).powi(3) + 1.0)
}

/// The rule [`transform_jet`] applies at `t`.
pub fn rule_for(support: (f64, f64), lambda: f64, t: f64) -> QuadratureRule {
    let r = lambda.sqrt();
    let (ua, ub) = (r * (support.0 - t), r * (support.1 - t));
    if ua < -HERMITE_REACH && ub > HERMITE_REACH {
        QuadratureRule { kind: RuleKind::GaussHermiteSubstituted, nodes: quadrature::HERMITE_NODES, lambda }
    } else {
        QuadratureRule { kind: RuleKind::AdaptivePanel, nodes: quadrature::PANEL_NODES, lambda }
    }
}

/// Jet of W_λ f at `t`: entry n is W_λ(f^{(n)})(t).
pub fn transform_jet<S: Supported + ?Sized>(f: &S, lambda: f64, t: f64, k: usize) -> Result<Jet, WeierstrassError> {
    if !(lambda > 0.0) {
        return Err(WeierstrassError::Lambda(lambda));
    }
    let sigma = 1.0 / lambda.sqrt();
    let rule = rule_for(f.support(), lambda, t);
    let mut acc = vec![0.0; k + 1];
    match rule.kind {
        RuleKind::GaussHermiteSubstituted => {
            for &(u, w) in hermite64() {
                let j = f.jet(t + sigma * u, k)?;
                for (a, c) in acc.iter_mut().zip(j.coeffs()) {
                    *a += w * c;
                }
            }
        }
        _ => {
            let (a, b) = f.support();
            let r = lambda.sqrt();
            let lo = (r * (a - t)).max(-WINDOW);
            let hi = (r * (b - t)).min(WINDOW);
            let res = integrate_panels(
                |u| {
                    let g = (-u * u).exp();
                    Ok(f.jet(t + sigma * u, k)?.coeffs().iter().map(|c| c * g).collect())
                },
                lo,
                hi,
                k + 1,
                0.5,
            )?;
            acc = res.value;
        }
    }
    let norm = PI.sqrt().recip();
    Ok(Jet::from_coeffs(t, acc.into_iter().map(|a| a * norm).collect()))
}

/// Remainder bound ‖f^{(k+2J)}‖ / (J! (4λ)^J) of the J-term heat series, as a log.
pub fn heat_series_remainder_ln(norm_k2j: f64, lambda: f64, terms: usize) -> f64 {
    let jf = terms as f64;
    let ln_fact: f64 = (1..=terms).map(|i| (i as f64).ln()).sum();
    norm_k2j.ln() - ln_fact - jf * (4.0 * lambda).ln()
}

/// W_λ f jet from the truncated heat series Σ_{j<J} f^{(n+2j)}(t)/(j!(4λ)^j).
pub fn heat_series_jet<S: Supported + ?Sized>(f: &S, lambda: f64, t: f64, k: usize, terms: usize) -> Result<Jet, WeierstrassError> {
    if !(lambda > 0.0) {
        return Err(WeierstrassError::Lambda(lambda));
    }
    let need = k + 2 * (terms - 1);
    if let Some(have) = f.smoothness() {
        if have < need {
            return Err(WeierstrassError::Smoothness { have, need });
        }
    }
    let j = f.jet(t, need)?;
    let mut out = vec![0.0; k + 1];
    let mut w = 1.0;
    for jj in 0..terms {
        if jj > 0 {
            w /= jj as f64 * 4.0 * lambda;
        }
        for (n, o) in out.iter_mut().enumerate() {
            *o += w * j[n + 2 * jj];
        }
    }
    Ok(Jet::from_coeffs(t, out))
}

/// A complex value kept in log form.
///
/// With `phase_known` the `value` is present and `log_magnitude` is its log
/// modulus. Otherwise `log_magnitude` is only an upper bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogComplexValue {
    pub log_magnitude: f64,
    pub phase_known: bool,
    pub value: Option<Complex64>,
}

impl LogComplexValue {
    pub fn zero() -> Self {
        Self { log_magnitude: f64::NEG_INFINITY, phase_known: true, value: Some(Complex64::new(0.0, 0.0)) }
    }

    pub fn exact(v: Complex64) -> Self {
        Self { log_magnitude: v.norm().ln(), phase_known: true, value: Some(v) }
    }

    pub fn bound(log_magnitude: f64) -> Self {
        Self { log_magnitude, phase_known: false, value: None }
    }

    /// Sum in log form: exact when both phases are known and the sum is
    /// representable, otherwise the bound log(|a| + |b|).
    pub fn add(self, other: Self) -> Self {
        if let (Some(a), Some(b)) = (self.value, other.value) {
            return Self::exact(a + b);
        }
        Self::bound(log_add(self.log_magnitude, other.log_magnitude))
    }
}

/// log(e^a + e^b) without overflow.
pub fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Largest λ y² for which a direct complex value is computed.
pub const DIRECT_LIMIT: f64 = 700.0;

/// W_λ f(z) for complex z.
///
/// For λ (Im z)² ≤ 700 the value comes from panel quadrature of the
/// oscillatory integrand. When the quadrature cannot resolve it against its
/// own rounding floor, or beyond that limit, only a log bound is returned.
pub fn transform_complex<S: Supported + ?Sized>(f: &S, lambda: f64, z: Complex64, sup_f: Option<f64>) -> Result<LogComplexValue, WeierstrassError> {
    if !(lambda > 0.0) {
        return Err(WeierstrassError::Lambda(lambda));
    }
    let (a, b) = f.support();
    let norm = match sup_f {
        Some(n) => n,
        None => sup_norm_with(|t, k| f.jet(t, k), (a, b), 0, crate::taylor::DEFAULT_SAMPLES)?.inflated(),
    };
    if norm == 0.0 {
        return Ok(LogComplexValue::zero());
    }
    let kappa2 = lambda * z.im * z.im;
    let bound = norm.ln() + kappa2;
    if z.im == 0.0 {
        let j = transform_jet(f, lambda, z.re, 0)?;
        return Ok(LogComplexValue::exact(Complex64::new(j[0], 0.0)));
    }
    if kappa2 > DIRECT_LIMIT {
        return Ok(LogComplexValue::bound(bound));
    }
    let r = lambda.sqrt();
    let sigma = 1.0 / r;
    let kappa = r * z.im;
    let lo = (r * (a - z.re)).max(-WINDOW);
    let hi = (r * (b - z.re)).min(WINDOW);
    let width = (1.0 / (1.0 + kappa.abs())).min(0.5);
    let res = integrate_panels(
        |u| {
            let v = f.jet(z.re + sigma * u, 0)?[0] * (-u * u).exp();
            let ph = 2.0 * kappa * u;
            Ok(vec![v * ph.cos(), v * ph.sin()])
        },
        lo,
        hi,
        2,
        width,
    )?;
    let scale = (kappa2 - 0.5 * PI.ln()).exp();
    let i = Complex64::new(res.value[0], res.value[1]);
    let floor = res.error + 1e-15 * (res.abs[0] + res.abs[1]);
    if i.norm() > 100.0 * floor {
        Ok(LogComplexValue::exact(i * scale))
    } else {
        let ln = ((i.norm() + floor) * scale).ln().min(bound);
        Ok(LogComplexValue::bound(ln))
    }
}

/// Outcome of a sampled check of ‖W_λ f − f‖_m ≤ ε.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxReport {
    pub lambda: f64,
    pub threshold: f64,
    pub norm_m: f64,
    pub norm_m1: f64,
    pub max_deviation: f64,
    pub worst_point: f64,
    pub worst_order: usize,
    pub samples: usize,
    pub pass: bool,
}

/// Samples ‖W_λ f − f‖_m on 2001 points covering the support widened by 3.
/// Refuses when λ does not exceed λ(ε) computed from inflated norms.
pub fn certify_approx<S: Supported + ?Sized>(f: &S, m: usize, eps: f64, lambda: f64) -> Result<ApproxReport, WeierstrassError> {
    if !(lambda > 0.0) {
        return Err(WeierstrassError::Lambda(lambda));
    }
    let (a, b) = f.support();
    let norms = sup_norm_with(|t, k| f.jet(t, k), (a, b), m + 1, crate::taylor::DEFAULT_SAMPLES)?;
    let nm = sup_norm_with(|t, k| f.jet(t, k), (a, b), m, crate::taylor::DEFAULT_SAMPLES)?;
    let threshold = lambda_for_eps(nm.inflated(), norms.inflated(), eps)?;
    if lambda <= threshold {
        return Err(WeierstrassError::Precondition { lambda, threshold });
    }
    let samples = 2001;
    let (lo, hi) = (a - 3.0, b + 3.0);
    use rayon::prelude::*;
    let rows: Vec<(f64, usize, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            let w = transform_jet(f, lambda, t, m)?;
            let g = f.jet(t, m)?;
            let (n, d) = (0..=m)
                .map(|n| (n, (w[n] - g[n]).abs()))
                .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            Ok((t, n, d))
        })
        .collect::<Result<_, WeierstrassError>>()?;
    let worst = rows.iter().fold((lo, 0, 0.0), |acc, r| if r.2 > acc.2 { *r } else { acc });
    Ok(ApproxReport {
        lambda,
        threshold,
        norm_m: nm.inflated(),
        norm_m1: norms.inflated(),
        max_deviation: worst.2,
        worst_point: worst.0,
        worst_order: worst.1,
        samples,
        pass: worst.2 <= eps,
    })
}
