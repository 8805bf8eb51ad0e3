//! Reduction of an interval to the line: the affine normalization, the
//! rational maps Φ(z) = 2z/(1 − z²) and Ψ(z) = z − 1/z, the rescaled error
//! profiles, and approximants pulled back along these maps.

use std::f64::consts::E;

use num_complex::Complex64;

use crate::bump::{ramp_jet, Ramp};
use crate::combinatorics::{faa_di_bruno, CombinatoricsError};
use crate::taylor::{Expr, Func, Jet, TaylorError};
use crate::whitney::scheme::RingScheme;
use crate::whitney::{build_with_scheme, Approximant, Case, ComplexEval, Mode, VerifyReport, VerifyRow, WhitneyError};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TransformError {
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("z = {0} is a pole of the map")]
    Pole(Complex64),
    #[error("image {s} of t = {t} lies outside the protected region [{lo}, {hi}]")]
    Unprotected { t: f64, s: f64, lo: f64, hi: f64 },
    #[error(transparent)]
    Whitney(#[from] WhitneyError),
    #[error(transparent)]
    Taylor(#[from] TaylorError),
    #[error(transparent)]
    Combinatorics(#[from] CombinatoricsError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MapKind {
    /// z ↦ scale·z + shift with scale > 0.
    Affine { scale: f64, shift: f64 },
    /// Φ(z) = 2z/(1 − z²): (−1, 1) → ℝ.
    Mobius,
    /// Ψ(z) = z − 1/z: (0, ∞) → ℝ.
    HalfLine,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainMap {
    pub kind: MapKind,
}

/// The x ∈ (−1, 1) with 2x/(1 − x²) = s.
pub fn mobius_inverse(s: f64) -> f64 {
    if s.is_infinite() {
        return s.signum();
    }
    s / (1.0 + s.hypot(1.0))
}

/// The x > 0 with x − 1/x = s.
pub fn halfline_inverse(s: f64) -> f64 {
    if s >= 0.0 {
        (s + s.hypot(2.0)) / 2.0
    } else {
        // 2/(√(s²+4) − s) avoids cancellation for s → −∞.
        2.0 / (s.hypot(2.0) - s)
    }
}

impl DomainMap {
    /// φ(z) = αz + (a+b)/2 with α = (b−a)/2, taking (−1, 1) onto (a, b).
    pub fn affine(a: f64, b: f64) -> Result<Self, TransformError> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(TransformError::Domain(format!("affine map needs a finite interval a < b, got ({a}, {b})")));
        }
        Ok(Self { kind: MapKind::Affine { scale: (b - a) / 2.0, shift: (a + b) / 2.0 } })
    }

    pub fn mobius() -> Self {
        Self { kind: MapKind::Mobius }
    }

    pub fn half_line() -> Self {
        Self { kind: MapKind::HalfLine }
    }

    pub fn poles(&self) -> Vec<f64> {
        match self.kind {
            MapKind::Affine { .. } => vec![],
            MapKind::Mobius => vec![-1.0, 1.0],
            MapKind::HalfLine => vec![0.0],
        }
    }

    /// The real interval the map is a bijection from.
    pub fn source(&self) -> (f64, f64) {
        match self.kind {
            MapKind::Affine { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            MapKind::Mobius => (-1.0, 1.0),
            MapKind::HalfLine => (0.0, f64::INFINITY),
        }
    }

    fn check_source(&self, t: f64) -> Result<(), TransformError> {
        let (lo, hi) = self.source();
        let inside = match self.kind {
            MapKind::Affine { .. } => t.is_finite(),
            _ => t > lo && t < hi,
        };
        if inside {
            Ok(())
        } else {
            Err(TransformError::Domain(format!("t = {t} is outside ({lo}, {hi})")))
        }
    }

    pub fn forward(&self, t: f64) -> Result<f64, TransformError> {
        self.check_source(t)?;
        Ok(match self.kind {
            MapKind::Affine { scale, shift } => scale * t + shift,
            MapKind::Mobius => 2.0 * t / ((1.0 - t) * (1.0 + t)),
            MapKind::HalfLine => t - 1.0 / t,
        })
    }

    pub fn forward_complex(&self, z: Complex64) -> Result<Complex64, TransformError> {
        let one = Complex64::new(1.0, 0.0);
        match self.kind {
            MapKind::Affine { scale, shift } => Ok(z * scale + shift),
            MapKind::Mobius => {
                let d = (one - z) * (one + z);
                if d == Complex64::new(0.0, 0.0) {
                    return Err(TransformError::Pole(z));
                }
                Ok(z * 2.0 / d)
            }
            MapKind::HalfLine => {
                if z == Complex64::new(0.0, 0.0) {
                    return Err(TransformError::Pole(z));
                }
                Ok(z - one / z)
            }
        }
    }

    pub fn inverse(&self, s: f64) -> f64 {
        match self.kind {
            MapKind::Affine { scale, shift } => (s - shift) / scale,
            MapKind::Mobius => mobius_inverse(s),
            MapKind::HalfLine => halfline_inverse(s),
        }
    }

    /// The inverse as an expression in `t`, for substituting into f.
    pub fn inverse_expr(&self) -> Expr {
        let t = || Box::new(Expr::Var);
        let c = |x: f64| Box::new(Expr::Const(x));
        match self.kind {
            MapKind::Affine { scale, shift } => Expr::Div(Box::new(Expr::Sub(t(), c(shift))), c(scale)),
            MapKind::Mobius => {
                let root = Expr::Call(Func::Sqrt, Box::new(Expr::Add(c(1.0), Box::new(Expr::Pow(t(), 2)))));
                Expr::Div(t(), Box::new(Expr::Add(c(1.0), Box::new(root))))
            }
            MapKind::HalfLine => {
                let root = Expr::Call(Func::Sqrt, Box::new(Expr::Add(Box::new(Expr::Pow(t(), 2)), c(4.0))));
                Expr::Div(Box::new(Expr::Add(t(), Box::new(root))), c(2.0))
            }
        }
    }

    /// The forward map as an expression in `t`.
    pub fn forward_expr(&self) -> Expr {
        let t = || Box::new(Expr::Var);
        let c = |x: f64| Box::new(Expr::Const(x));
        match self.kind {
            MapKind::Affine { scale, shift } => Expr::Add(Box::new(Expr::Mul(c(scale), t())), c(shift)),
            MapKind::Mobius => Expr::Div(Box::new(Expr::Mul(c(2.0), t())), Box::new(Expr::Sub(c(1.0), Box::new(Expr::Pow(t(), 2))))),
            MapKind::HalfLine => Expr::Sub(t(), Box::new(Expr::Div(c(1.0), t()))),
        }
    }

    /// Derivatives 0..=k of the map at t from their closed forms.
    pub fn forward_jet(&self, t: f64, k: usize) -> Result<Jet, TransformError> {
        self.check_source(t)?;
        let mut c = Vec::with_capacity(k + 1);
        let mut fact = 1.0;
        for n in 0..=k {
            if n > 0 {
                fact *= n as f64;
            }
            let p = (n + 1) as i32;
            c.push(match self.kind {
                MapKind::Affine { scale, shift } => match n {
                    0 => scale * t + shift,
                    1 => scale,
                    _ => 0.0,
                },
                // 2t/(1−t²) = 1/(1−t) − 1/(1+t).
                MapKind::Mobius => fact * ((1.0 - t).powi(-p) - (-1f64).powi(n as i32) * (1.0 + t).powi(-p)),
                MapKind::HalfLine => match n {
                    0 => t - 1.0 / t,
                    1 => 1.0 + 1.0 / (t * t),
                    _ => fact / (-t).powi(p),
                },
            });
        }
        Ok(Jet::from_coeffs(t, c))
    }
}

/// n!·2^{n+1}/(1 − t²)^{n+1}, a bound on |Φ^{(n)}(t)| for |t| < 1.
pub fn phin_bound(n: usize, t: f64) -> Result<f64, TransformError> {
    if !(t.abs() < 1.0) {
        return Err(TransformError::Domain(format!("need |t| < 1, got {t}")));
    }
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    Ok(fact * 2f64.powi(n as i32 + 1) / (1.0 - t * t).powi(n as i32 + 1))
}

/// ε_* on (−1, 1) from the values ε(t), ρ(t).
pub fn eps_star_bounded_value(eps: f64, rho: f64, t: f64) -> Result<f64, TransformError> {
    if !(t.abs() < 1.0) {
        return Err(TransformError::Domain(format!("need |t| < 1, got {t}")));
    }
    if rho == 0.0 {
        return Ok(eps);
    }
    let q = rho + 1.0;
    let ln_base = (4.0 / (q * E * E)).ln() + q * (E * (1.0 - t * t) / (2.0 * q)).ln();
    Ok(eps * (rho * ln_base).exp())
}

pub fn eps_star_bounded(eps: &Expr, rho: &Expr, t: f64) -> Result<f64, TransformError> {
    if !(t.abs() < 1.0) {
        return Err(TransformError::Domain(format!("need |t| < 1, got {t}")));
    }
    eps_star_bounded_value(eps.eval(t)?, rho.eval(t)?, t)
}

/// ρ₊(t) = ρ(t) + e·t.
pub fn rho_plus(rho: f64, t: f64) -> f64 {
    rho + E * t
}

/// ln β(t), where β(t) = 1 + t^{−(ρ₊+1)} (e²/4) ((ρ₊+2)/e)^{ρ₊+2} bounds |ψ^{(n)}(t)|
/// for 1 ≤ n ≤ ρ₊(t).
pub fn ln_beta(rho: f64, t: f64) -> Result<f64, TransformError> {
    if !(t > 0.0) {
        return Err(TransformError::Domain(format!("need t > 0, got {t}")));
    }
    let p = rho_plus(rho, t);
    let ln_term = -(p + 1.0) * t.ln() + 2.0 - 4f64.ln() + (p + 2.0) * ((p + 2.0) / E).ln();
    Ok(crate::weierstrass::log_add(0.0, ln_term))
}

/// ε_* on (0, ∞) from the values ε(t), ρ(t), with 0⁰ = 1.
pub fn eps_star_halfline_value(eps: f64, rho: f64, t: f64) -> Result<f64, TransformError> {
    let lb = ln_beta(rho, t)?;
    if rho == 0.0 {
        return Ok(eps);
    }
    Ok(eps * (-rho * (rho.ln() + lb)).exp())
}

pub fn eps_star_halfline(eps: &Expr, rho: &Expr, t: f64) -> Result<f64, TransformError> {
    if !(t > 0.0) {
        return Err(TransformError::Domain(format!("need t > 0, got {t}")));
    }
    eps_star_halfline_value(eps.eval(t)?, rho.eval(t)?, t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileKind {
    Bounded,
    HalfLine,
}

/// ε with the rescaling that absorbs the derivatives of the map.
#[derive(Clone, Debug, PartialEq)]
pub struct RescaledProfile {
    pub eps: Expr,
    pub rho: Expr,
    pub kind: ProfileKind,
}

impl RescaledProfile {
    pub fn eval(&self, t: f64) -> Result<f64, TransformError> {
        match self.kind {
            ProfileKind::Bounded => eps_star_bounded(&self.eps, &self.rho, t),
            ProfileKind::HalfLine => eps_star_halfline(&self.eps, &self.rho, t),
        }
    }
}

/// Derivatives 0..=k of outer∘inner, with `outer` taken at inner's value.
pub fn compose_jets(outer: &Jet, inner: &Jet, k: usize) -> Result<Jet, TransformError> {
    let c = (0..=k).map(|n| faa_di_bruno(outer, inner, n)).collect::<Result<Vec<_>, _>>()?;
    Ok(Jet::from_coeffs(inner.point(), c))
}

/// The original problem an approximant is pulled back to.
#[derive(Clone, Debug, PartialEq)]
pub struct Target {
    pub f: Expr,
    pub eps: Expr,
    pub rho: Expr,
    pub interval: (f64, f64),
}

/// g = g_* ∘ m_last ∘ … ∘ m_first.
#[derive(Clone, Debug, PartialEq)]
pub struct ComposedApproximant {
    pub gstar: Approximant,
    /// Applied first to last.
    pub chain: Vec<DomainMap>,
    pub target: Option<Target>,
}

pub fn compose_approximant(gstar: Approximant, map: DomainMap) -> Result<ComposedApproximant, TransformError> {
    if gstar.scheme.case != Case::R {
        return Err(TransformError::Domain("pullback needs an approximant built on the line".into()));
    }
    Ok(ComposedApproximant { gstar, chain: vec![map], target: None })
}

impl ComposedApproximant {
    /// Apply `map` before the current chain.
    pub fn precompose(mut self, map: DomainMap) -> Self {
        self.chain.insert(0, map);
        self
    }

    pub fn forward(&self, t: f64) -> Result<f64, TransformError> {
        self.chain.iter().try_fold(t, |x, m| m.forward(x))
    }

    pub fn inverse(&self, s: f64) -> f64 {
        self.chain.iter().rev().fold(s, |x, m| m.inverse(x))
    }

    /// Jet of the whole chain at t.
    pub fn chain_jet(&self, t: f64, k: usize) -> Result<Jet, TransformError> {
        let mut cur = Jet::variable(t, t, k);
        for m in &self.chain {
            let outer = m.forward_jet(cur[0], k)?;
            cur = compose_jets(&outer, &cur, k)?;
        }
        Ok(cur)
    }

    /// The preimage of the protected region of g_*.
    pub fn protected_region(&self) -> Option<(f64, f64)> {
        let (lo, hi) = self.gstar.protected_region()?;
        // The maps are increasing; pull rounded endpoints inward until their
        // images land inside.
        let inside = |t: f64| self.forward(t).is_ok_and(|s| s >= lo && s <= hi);
        let (mut a, mut b) = (self.inverse(lo), self.inverse(hi));
        let mut step = f64::EPSILON * (b - a);
        for _ in 0..64 {
            if inside(a) && inside(b) {
                return Some((a, b));
            }
            if !inside(a) {
                a += step.max(f64::EPSILON * a.abs());
            }
            if !inside(b) {
                b -= step.max(f64::EPSILON * b.abs());
            }
            step *= 2.0;
        }
        None
    }

    fn image_in_protected(&self, t: f64, s: f64) -> Result<(), TransformError> {
        let (lo, hi) = self
            .gstar
            .protected_region()
            .ok_or_else(|| TransformError::Domain("a single stage has no protected region".into()))?;
        if s >= lo && s <= hi {
            Ok(())
        } else {
            Err(TransformError::Unprotected { t, s, lo, hi })
        }
    }

    pub fn eval_jet(&self, t: f64, k: usize) -> Result<Jet, TransformError> {
        let inner = self.chain_jet(t, k)?;
        self.image_in_protected(t, inner[0])?;
        let outer = self.gstar.eval_jet(inner[0], k)?;
        compose_jets(&outer, &inner, k)
    }

    /// Bound on the k-th derivative of the computed minus the exact pullback:
    /// the stage evaluation errors pushed through the chain with |map derivatives|.
    pub fn eval_error(&self, t: f64, k: usize) -> Result<f64, TransformError> {
        let inner = self.chain_jet(t, k)?.map(|_, c| c.abs());
        let errs = Jet::from_coeffs(inner[0], (0..=k).map(|j| self.gstar.eval_error(j)).collect());
        Ok(compose_jets(&errs, &inner, k)?[k])
    }

    pub fn eval_complex(&self, z: Complex64) -> Result<ComplexEval, TransformError> {
        let w = self.chain.iter().try_fold(z, |x, m| m.forward_complex(x))?;
        self.image_in_protected(z.re, w.re)?;
        Ok(self.gstar.eval_complex(w)?)
    }

    /// |(f − g)^{(k)}(t)| against ε(t) for k ≤ ⌊ρ(t)⌋, on the original interval.
    pub fn verify(&self, points: &[f64]) -> Result<VerifyReport, TransformError> {
        use rayon::prelude::*;
        let target = self.target.as_ref().ok_or_else(|| TransformError::Domain("verification needs the target problem".into()))?;
        let protected = self
            .protected_region()
            .ok_or_else(|| TransformError::Domain("a single stage has no protected region".into()))?;
        let per_point: Vec<Vec<VerifyRow>> = points
            .par_iter()
            .map(|&t| {
                let kmax = (target.rho.eval(t)?.floor().max(0.0) as usize).min(self.gstar.max_order);
                let g = self.eval_jet(t, kmax)?;
                let f = target.f.jet(t, kmax)?;
                let eps = target.eps.eval(t)?;
                (0..=kmax)
                    .map(|k| {
                        let deviation = (f[k] - g[k]).abs();
                        let eval_error = self.eval_error(t, k)?;
                        Ok(VerifyRow { t, k, deviation, eps, eval_error, pass: deviation + eval_error < eps })
                    })
                    .collect()
            })
            .collect::<Result<_, TransformError>>()?;
        let rows: Vec<VerifyRow> = per_point.into_iter().flatten().collect();
        let worst_margin = rows.iter().map(|r| r.eps - r.deviation - r.eval_error).fold(f64::INFINITY, f64::min);
        let pass = rows.iter().all(|r| r.pass);
        Ok(VerifyReport { rows, protected, worst_margin, pass })
    }
}

/// Options shared by the two pullback pipelines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineOptions {
    pub stages: usize,
    pub mode: Mode,
    /// Ring spacing on the line. The hump bound needs δ ≤ 3.
    pub delta: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { stages: 6, mode: Mode::Practical, delta: 3.0 }
    }
}

const RING_SAMPLES: usize = 257;
const RING_SAFETY: f64 = 0.99;

/// Budgets ε_n and orders r_n for the line from a profile known pointwise.
///
/// ε_n is the sampled minimum over L_n, damped linearly so that the sequence
/// strictly decreases, then replaced by its greatest convex minorant.
fn ring_sequences<F>(delta: f64, rings: usize, profile: F) -> Result<(Vec<f64>, Vec<u32>), TransformError>
where
    F: Fn(f64) -> Result<(f64, f64), TransformError>,
{
    let mut eps = Vec::with_capacity(rings);
    let mut r = Vec::with_capacity(rings);
    let mut r_run = 0u32;
    for n in 0..rings {
        let (lo, hi) = (delta * n as f64, delta * (n + 1) as f64);
        let mut m = f64::INFINITY;
        for i in 0..RING_SAMPLES {
            let s = lo + (hi - lo) * i as f64 / (RING_SAMPLES - 1) as f64;
            for s in [s, -s] {
                let (e, rho) = profile(s)?;
                m = m.min(e);
                r_run = r_run.max(rho.floor().max(0.0) as u32);
            }
        }
        if !(m > 0.0) {
            return Err(TransformError::Domain(format!("rescaled profile is not positive on ring {n}")));
        }
        let damp = 1.0 - n as f64 / (2 * rings) as f64;
        eps.push(RING_SAFETY * m * damp);
        r.push(r_run);
    }
    Ok((convex_minorant(&eps), r))
}

/// Greatest convex minorant of the points (n, y_n).
pub fn convex_minorant(y: &[f64]) -> Vec<f64> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..y.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop b when it lies on or above the chord from a to i.
            let lhs = (y[b] - y[a]) * (i - a) as f64;
            let rhs = (y[i] - y[a]) * (b - a) as f64;
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = vec![0.0; y.len()];
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (i, o) in out.iter_mut().enumerate().take(b + 1).skip(a) {
            let u = (i - a) as f64 / (b - a) as f64;
            *o = (y[a] * (1.0 - u) + y[b] * u).min(y[i]);
        }
    }
    if hull.len() == 1 {
        out[0] = y[0];
    }
    out
}

/// The bounded-interval pipeline: normalize (a, b) to (−1, 1), pull f back
/// to the line through Φ, build g_* there and return g = g_* ∘ Φ ∘ φ^{-1}.
pub fn bounded_pipeline(f: &Expr, eps: &Expr, rho: &Expr, interval: (f64, f64), opts: PipelineOptions) -> Result<ComposedApproximant, TransformError> {
    let affine = DomainMap::affine(interval.0, interval.1)?;
    let MapKind::Affine { scale, .. } = affine.kind else { unreachable!() };
    let beta = scale.min(1.0);
    let mobius = DomainMap::mobius();
    // f_* = f ∘ φ ∘ Φ^{-1}.
    let f_star = f.substitute(&affine.forward_expr()).substitute(&mobius.inverse_expr());
    let profile = |s: f64| -> Result<(f64, f64), TransformError> {
        let x = mobius_inverse(s);
        let t = affine.forward(x)?;
        let r = rho.eval(t)?;
        let e0 = beta.powf(r) * eps.eval(t)?;
        Ok((eps_star_bounded_value(e0, r, x)?, r))
    };
    let rings = opts.stages + 4;
    let (e, r) = ring_sequences(opts.delta, rings, profile)?;
    let scheme = RingScheme::from_sequences(Case::R, opts.delta, e, r, None)?;
    let gstar = build_with_scheme(f_star, scheme, opts.stages, opts.mode)?;
    let mut out = compose_approximant(gstar, mobius)?.precompose(DomainMap {
        kind: MapKind::Affine { scale: 1.0 / scale, shift: -(interval.0 + interval.1) / (2.0 * scale) },
    });
    out.target = Some(Target { f: f.clone(), eps: eps.clone(), rho: rho.clone(), interval });
    Ok(out)
}

/// The half-line pipeline on (0, ∞): pull f back through Ψ and return
/// g = g_* ∘ Ψ. An interval (a, ∞) must first be translated to a = 0.
pub fn halfline_pipeline(f: &Expr, eps: &Expr, rho: &Expr, opts: PipelineOptions) -> Result<ComposedApproximant, TransformError> {
    let psi = DomainMap::half_line();
    let f_star = f.substitute(&psi.inverse_expr());
    let profile = |s: f64| -> Result<(f64, f64), TransformError> {
        let x = halfline_inverse(s);
        let r = rho.eval(x)?;
        Ok((eps_star_halfline_value(eps.eval(x)?, r, x)?, r))
    };
    let rings = opts.stages + 4;
    let (e, r) = ring_sequences(opts.delta, rings, profile)?;
    let scheme = RingScheme::from_sequences(Case::R, opts.delta, e, r, None)?;
    let gstar = build_with_scheme(f_star, scheme, opts.stages, opts.mode)?;
    let mut out = compose_approximant(gstar, psi)?;
    out.target = Some(Target { f: f.clone(), eps: eps.clone(), rho: rho.clone(), interval: (0.0, f64::INFINITY) });
    Ok(out)
}

/// f on [α, β) extended by zero to (−∞, β): f₁ = f·α_{α−δ/2, α}.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfOpenExtension {
    pub f: Expr,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
}

pub fn extend_halfopen(f: Expr, alpha: f64, beta: f64, delta: f64) -> Result<HalfOpenExtension, TransformError> {
    if !(alpha < beta) || !(delta > 0.0) {
        return Err(TransformError::Domain(format!("need α < β and δ > 0, got α = {alpha}, β = {beta}, δ = {delta}")));
    }
    // f must have jets on the widened domain.
    for i in 0..=16 {
        let t = alpha - delta + (delta * i as f64 / 16.0);
        if t > alpha - delta {
            f.jet(t, 0)?;
        }
    }
    Ok(HalfOpenExtension { f, alpha, beta, delta })
}

impl HalfOpenExtension {
    pub fn jet(&self, t: f64, k: usize) -> Result<Jet, TransformError> {
        if !(t < self.beta) {
            return Err(TransformError::Domain(format!("t = {t} is not below β = {}", self.beta)));
        }
        let lo = self.alpha - self.delta / 2.0;
        if t <= lo {
            return Ok(Jet::zero(t, k));
        }
        let f = self.f.jet(t, k)?;
        if t >= self.alpha {
            return Ok(f);
        }
        Ok(&f * &ramp_jet(&Ramp { a: lo, b: self.alpha }, t, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taylor::parse;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn inverses_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mo, hl) = (DomainMap::mobius(), DomainMap::half_line());
        for _ in 0..100 {
            let s: f64 = rng.gen_range(-50.0..50.0);
            assert!((mo.forward(mobius_inverse(s)).unwrap() - s).abs() <= 1e-12 * s.abs().max(1.0));
            assert!((hl.forward(halfline_inverse(s)).unwrap() - s).abs() <= 1e-12 * s.abs().max(1.0));
        }
        assert_eq!(mobius_inverse(0.0), 0.0);
        assert_eq!(halfline_inverse(0.0), 1.0);
        assert_eq!(halfline_inverse(1.5), 2.0);
        // 1 − x ≈ 1/s for large s.
        assert!((1.0 - mobius_inverse(1e6) - 1e-6).abs() < 1e-11);
        assert!((1.0 + mobius_inverse(-1e6) - 1e-6).abs() < 1e-11);
    }

    #[test]
    fn closed_form_jets_match_expression_jets() {
        for m in [DomainMap::mobius(), DomainMap::half_line(), DomainMap::affine(-2.0, 5.0).unwrap()] {
            let e = m.forward_expr();
            let pts: &[f64] = if m.kind == MapKind::HalfLine { &[0.3, 1.0, 2.5] } else { &[-0.7, 0.0, 0.4] };
            for &t in pts {
                let a = m.forward_jet(t, 6).unwrap();
                let b = e.jet(t, 6).unwrap();
                for k in 0..=6 {
                    assert!((a[k] - b[k]).abs() <= 1e-10 * b[k].abs().max(1.0), "{m:?} t={t} k={k}: {} vs {}", a[k], b[k]);
                }
            }
        }
    }

    #[test]
    fn mobius_derivatives_are_dominated() {
        let m = DomainMap::mobius();
        for i in 0..=36 {
            let t = -0.9 + 1.8 * i as f64 / 36.0;
            let j = m.forward_jet(t, 6).unwrap();
            for n in 0..=6 {
                assert!(j[n].abs() <= phin_bound(n, t).unwrap());
            }
        }
        assert_eq!(phin_bound(0, 0.0).unwrap(), 2.0);
        assert_eq!(phin_bound(1, 0.0).unwrap(), 4.0);
        assert_eq!(m.forward_jet(0.0, 1).unwrap()[1], 2.0);
        assert!((phin_bound(3, 0.5).unwrap() - 96.0 / 0.75f64.powi(4)).abs() < 1e-9);
        assert!(phin_bound(0, 1.0).is_err());
    }

    #[test]
    fn psi_derivatives_below_beta() {
        let m = DomainMap::half_line();
        for &t in &[0.2, 0.5, 1.0, 2.0, 4.0] {
            let rho = 1.0;
            let top = rho_plus(rho, t).floor() as usize;
            let j = m.forward_jet(t, top.max(1)).unwrap();
            let lb = ln_beta(rho, t).unwrap();
            for n in 1..=top {
                assert!(j[n].abs().ln() <= lb, "t={t} n={n}");
            }
        }
    }

    #[test]
    fn rescaled_profiles() {
        let eps = p("0.1");
        assert_eq!(eps_star_bounded(&eps, &p("0"), 0.3).unwrap(), 0.1);
        let want = 0.1 * (4.0 / (2.0 * E * E)) * (E / 4.0).powi(2);
        assert!((eps_star_bounded(&eps, &p("1"), 0.0).unwrap() - want).abs() < 1e-15);
        for i in 0..=198 {
            let t = -0.99 + 0.01 * i as f64;
            assert!(eps_star_bounded(&eps, &p("2"), t).unwrap() <= 0.1);
        }
        assert_eq!(eps_star_halfline(&eps, &p("0"), 0.5).unwrap(), 0.1);
        let pp = 1.0 + E;
        let beta1 = 1.0 + E * E / 4.0 * ((pp + 2.0) / E).powf(pp + 2.0);
        assert!((ln_beta(1.0, 1.0).unwrap() - beta1.ln()).abs() < 1e-12);
        assert!((eps_star_halfline(&eps, &p("1"), 1.0).unwrap() - 0.1 / beta1).abs() < 1e-15);
        assert!(eps_star_halfline(&eps, &p("1"), 0.0).is_err());
    }

    #[test]
    fn convex_minorant_is_convex_and_below() {
        let y = [1.0, 0.2, 0.5, 0.1, 0.09, 0.05];
        let c = convex_minorant(&y);
        for i in 0..y.len() {
            assert!(c[i] <= y[i]);
        }
        for i in 0..y.len() - 2 {
            assert!(c[i] + c[i + 2] >= 2.0 * c[i + 1] - 1e-15);
        }
        assert_eq!(c[0], 1.0);
        assert_eq!(c[5], 0.05);
    }

    #[test]
    fn halfopen_extension() {
        let x = extend_halfopen(p("log(t)"), 1.0, 5.0, 0.5).unwrap();
        assert_eq!(x.jet(2.0, 2).unwrap(), p("log(t)").jet(2.0, 2).unwrap());
        assert!(x.jet(0.75, 2).unwrap().is_zero());
        assert!(x.jet(-3.0, 2).unwrap().is_zero());
        assert!(x.jet(5.0, 0).is_err());
        // Jets are continuous across both ends of the ramp.
        for edge in [0.75, 1.0] {
            let (l, r) = (x.jet(edge - 1e-7, 3).unwrap(), x.jet(edge + 1e-7, 3).unwrap());
            for k in 0..=2 {
                assert!((l[k] - r[k]).abs() < 1e-4, "edge {edge} k {k}");
            }
        }
        assert!(extend_halfopen(p("log(t)"), 0.5, 5.0, 1.0).is_err());
    }

    #[test]
    fn affine_identity_pullback_is_gstar() {
        use crate::whitney::{build_approximant, ProblemSpec};
        let spec = ProblemSpec::new(p("sin(t)"), p("1/(2*(1+t))"), p("1"), None, Case::R, std::f64::consts::SQRT_2);
        let g = build_approximant(&spec, 3, Mode::Practical).unwrap();
        let c = compose_approximant(g.clone(), DomainMap::affine(-1.0, 1.0).unwrap()).unwrap();
        for t in [-1.0, 0.2, 1.3] {
            assert_eq!(c.eval_jet(t, 1).unwrap(), g.eval_jet(t, 1).unwrap());
        }
        assert!(matches!(c.eval_jet(100.0, 0), Err(TransformError::Unprotected { .. })));
    }
}
