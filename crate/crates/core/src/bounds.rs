//! Growth envelopes for the staged approximant, the constants (C, D) that
//! witness them, and comparison against measured magnitudes.
//!
//! Log-bounds here are numbers like C s² (1 + λ(s)) where λ(s) itself has a
//! tower shape, so every envelope is carried as the logarithm of its
//! log-bound and compared in that domain.

use std::f64::consts::{E, SQRT_2};
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::bump::{BUMP_C, BUMP_D};
use crate::combinatorics::delta_difference;
use crate::taylor::{schwartz_seminorm, sup_norms_by_order, Expr, TaylorError, DEFAULT_SAMPLES};
use crate::weierstrass::log_add;
use crate::whitney::scheme::{locate_ring, ring_ends, RingScheme};
use crate::whitney::{Approximant, Case, Mode, ProblemSpec, WhitneyError};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum BoundsError {
    #[error("invalid input: {0}")]
    Domain(String),
    #[error("refused: {0}")]
    Refused(String),
    #[error(transparent)]
    Taylor(#[from] TaylorError),
    #[error(transparent)]
    Whitney(#[from] WhitneyError),
}

/// A real number kept as its sign and ln|x|, so that values far beyond f64
/// range still order and print.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExtReal {
    pub negative: bool,
    pub ln_abs: f64,
}

impl ExtReal {
    pub fn from_ln(ln_abs: f64) -> Self {
        Self { negative: false, ln_abs }
    }

    pub fn from_f64(x: f64) -> Self {
        Self { negative: x < 0.0, ln_abs: x.abs().ln() }
    }

    /// The value, infinite when out of range.
    pub fn to_f64(&self) -> f64 {
        let v = self.ln_abs.exp();
        if self.negative {
            -v
        } else {
            v
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.negative || self.ln_abs == f64::NEG_INFINITY
    }

    /// self − m for a nonnegative self.
    pub fn minus(&self, m: f64) -> Self {
        debug_assert!(!self.negative);
        if m <= 0.0 {
            return Self::from_ln(log_add(self.ln_abs, (-m).ln()));
        }
        let lm = m.ln();
        if lm < self.ln_abs {
            Self::from_ln(self.ln_abs + (-(lm - self.ln_abs).exp()).ln_1p())
        } else if lm == self.ln_abs {
            Self::from_ln(f64::NEG_INFINITY)
        } else {
            Self { negative: true, ln_abs: lm + (-(self.ln_abs - lm).exp()).ln_1p() }
        }
    }
}

impl fmt::Display for ExtReal {
    /// Plain scientific notation in f64 range, `exp(L)` or `-exp(L)` beyond.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ln_abs < 700.0 {
            write!(f, "{:e}", self.to_f64())
        } else {
            write!(f, "{}exp({})", if self.negative { "-" } else { "" }, self.ln_abs)
        }
    }
}

/// The sup-norm window of radius s: [−s, s] on the line, [0, s] on the half-line.
fn window(case: Case, s: f64) -> (f64, f64) {
    match case {
        Case::R => (-s, s),
        Case::Rpos => (0.0, s),
    }
}

/// Inflated ‖f‖_{s; m}, sampled on the same grid the stage ledger uses.
fn norm(f: &Expr, case: Case, s: f64, m: usize) -> Result<f64, BoundsError> {
    let per = sup_norms_by_order(|t, j| f.jet(t, j), window(case, s), m, DEFAULT_SAMPLES)?;
    Ok(per.iter().map(|e| e.inflated()).fold(0.0, f64::max))
}

/// ln(1 + log⁺ x).
fn ln_one_plus_logplus(x: f64) -> f64 {
    x.ln().max(0.0).ln_1p()
}

fn lambda_ln(s: f64, spec: &ProblemSpec, d: f64, power: i32) -> Result<f64, BoundsError> {
    if !(s > 0.0) || !(d >= 1.0) {
        return Err(BoundsError::Domain(format!("need s > 0 and D >= 1, got s = {s}, D = {d}")));
    }
    let mut rho = spec.rho.eval(s)?.max(0.0);
    if let Some(r) = spec.r {
        rho = rho.min(r as f64);
    }
    let order = rho.floor() as usize + 1;
    let de = delta_difference(|x| spec.eps.eval(x).unwrap_or(f64::NAN), s)
        .map_err(|e| BoundsError::Domain(e.to_string()))?;
    if !(de > 0.0) {
        return Err(BoundsError::Domain(format!("eps is not strictly decreasing at s = {s} (difference {de})")));
    }
    let q = d * (rho + 1.0);
    Ok(q * s.powi(power) * q.ln() + 3.0 * (norm(&spec.f, spec.case, s, order)?.ln() - de.ln()))
}

/// ln λ(s) with λ(s) = (D(ρ(s)+1))^{D(ρ(s)+1)s} (‖f‖_{s;ρ(s)+1} / Δε(s))³.
/// −∞ when f vanishes on the window.
pub fn thm2_lambda(s: f64, spec: &ProblemSpec, d: f64) -> Result<f64, BoundsError> {
    lambda_ln(s, spec, d, 1)
}

/// The half-line variant, with exponent D(ρ(s)+1)s².
pub fn thm3_lambda(s: f64, spec: &ProblemSpec, d: f64) -> Result<f64, BoundsError> {
    lambda_ln(s, spec, d, 2)
}

/// ln of the log-bound C s² (1 + log⁺‖f‖_{s+3√2} + λ(s+3√2)), s = √2 t + 1.
pub fn thm2_envelope(t: f64, spec: &ProblemSpec, c: f64, d: f64) -> Result<ExtReal, BoundsError> {
    if !(t >= 0.0) {
        return Err(BoundsError::Domain(format!("need t >= 0, got {t}")));
    }
    let s = SQRT_2 * t + 1.0;
    let w = s + 3.0 * SQRT_2;
    let inner = log_add(ln_one_plus_logplus(norm(&spec.f, spec.case, w, 0)?), thm2_lambda(w, spec, d)?);
    Ok(ExtReal::from_ln(c.ln() + 2.0 * s.ln() + inner))
}

/// V = {Re z > 0, (Im z)² ≤ (Re z)² − α}.
pub fn in_region_v(z: Complex64, alpha: f64) -> bool {
    z.re > 0.0 && z.im * z.im <= z.re * z.re - alpha
}

/// ln of the log-bound C s (1 + log⁺‖f‖_s + λ(s)) at s = D(|z|² + 1).
pub fn thm3_envelope(z: Complex64, alpha: f64, spec: &ProblemSpec, c: f64, d: f64) -> Result<ExtReal, BoundsError> {
    if !(alpha > 0.0) || !in_region_v(z, alpha) {
        return Err(BoundsError::Domain(format!("z = {z} is not in V for alpha = {alpha}")));
    }
    let t = z.norm();
    let s = d * (t * t + 1.0);
    let inner = log_add(ln_one_plus_logplus(norm(&spec.f, spec.case, s, 0)?), thm3_lambda(s, spec, d)?);
    Ok(ExtReal::from_ln(c.ln() + s.ln() + inner))
}

/// Rings over which the quadratic bound on k_n is taken in the half-line case.
pub const THM3_RING_RANGE: usize = 64;

/// Witnesses (C, D) for the envelopes of one approximant, with the chain of
/// assignments that produced them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub case: Case,
    pub c: f64,
    pub d: f64,
    pub c0: f64,
    pub d0: f64,
    pub c1: f64,
    pub d1: f64,
    /// D bounding every λ_n.
    pub big_d: f64,
    pub ln_m: f64,
    pub big_n: f64,
    pub big_c: f64,
    /// Half-line only: k_n + 2 ≤ k_c0 (t² + 1) for t ≥ δn/√2 and n ≤ [`THM3_RING_RANGE`].
    pub k_c0: Option<f64>,
    /// D to use in the half-line envelope: max(big_d, δ k_c0).
    pub envelope_d: f64,
    pub trace: Vec<String>,
}

pub fn derive_constants(ap: &Approximant) -> Result<DerivedConstants, BoundsError> {
    let s = &ap.scheme;
    let delta = s.delta;
    let (c, d) = (BUMP_C, BUMP_D);
    let mut trace = vec![format!("c = {c}, d = {d} (hump derivative bound)")];
    // ε_n − ε_{n+1} ≥ min(δ, 1) Δε(s) by convexity.
    let q = delta.min(1.0);
    let ln_m = ap.tail.ln_m;
    let big_n_base = log_add(0.0, ln_m);
    let (c0, d0, c1, d1, extra, big_n, big_c, k_c0);
    match s.case {
        Case::R => {
            if delta < 0.5 {
                return Err(BoundsError::Domain(format!("constants are derived for delta >= 1/2, got {delta}")));
            }
            c0 = (2.0 * c / q).powi(3);
            d0 = 3.0 * d;
            c1 = 2.0 * c;
            d1 = 3.0 * d / delta;
            extra = 0.0;
            trace.push(format!("c0 = (2c/min(delta,1))^3 = {c0:e}, d0 = 3d = {d0}"));
            trace.push(format!("c1 = 2c = {c1}, d1 = 3d/delta = {d1}"));
            big_n = big_n_base + 3.0;
            big_c = 2.0 * big_n;
            k_c0 = None;
            trace.push(format!("N = log(1+M) + 3 = {big_n}, C = 2N = {big_c}"));
        }
        Case::Rpos => {
            c0 = (c / q).powi(3);
            d0 = 3.0 * d;
            c1 = 2.0 * c;
            d1 = 3.0 * d / (delta * delta);
            extra = d0 / delta;
            trace.push(format!("c0 = (c/min(delta,1))^3 = {c0:e}, d0 = 3d = {d0}"));
            trace.push(format!("c1 = 2c = {c1}, d1 = 3d/delta^2 = {d1}"));
            let kc = (0..=THM3_RING_RANGE)
                .map(|n| {
                    let (a0, b0) = ring_ends(Case::Rpos, delta, n);
                    let (a1, b1) = ring_ends(Case::Rpos, delta, n + 1);
                    let rho = 0.5 * (a0 - a1).powi(2).min((b1 - b0).powi(2));
                    let k = ((1.0 / rho).ceil()).max(n as f64 + 2.0);
                    let t = delta * n as f64 / SQRT_2;
                    (k + 2.0) / (t * t + 1.0)
                })
                .fold(0.0, f64::max);
            k_c0 = Some(kc);
            big_n = kc * (1.0 + 2f64.ln()) + big_n_base;
            big_c = 2.0 * big_n / (delta * kc);
            trace.push(format!("k_n + 2 <= {kc:e} (t^2 + 1) on rings n <= {THM3_RING_RANGE}"));
            trace.push(format!("N = k_c0 (1 + log 2) + log(1+M) = {big_n}, C = 2N/(delta k_c0) = {big_c}"));
        }
    }
    let sum = (128.0 * SQRT_2 * c0).ln() + 3.0 * 2f64.ln() / delta + d0 + extra + d1;
    let big_d = c1.max(E).max(sum);
    trace.push(format!("D = max(c1, e, log(128 sqrt2 c0) + 3 log2/delta + d0{} + d1) = max({c1}, e, {sum}) = {big_d}", if extra > 0.0 { " + d0/delta" } else { "" }));
    let envelope_d = match k_c0 {
        Some(kc) => big_d.max(delta * kc),
        None => big_d,
    };
    Ok(DerivedConstants { case: s.case, c, d, c0, d0, c1, d1, big_d, ln_m, big_n, big_c, k_c0, envelope_d, trace })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaCheck {
    pub n: usize,
    pub s: f64,
    pub ln_lambda: f64,
    /// ln(λ(s) + 1).
    pub ln_bound: f64,
    pub pass: bool,
}

/// λ_n ≤ λ(s) + 1 for every built stage: s = b_{n+2} with exponent s on the
/// line, s² on the half-line (n ≥ 1).
pub fn lambda_bound_check(ap: &Approximant, consts: &DerivedConstants) -> Result<Vec<LambdaCheck>, BoundsError> {
    let spec = ap.spec.as_ref().ok_or_else(|| BoundsError::Refused("the approximant carries no problem profiles".into()))?;
    let mut out = Vec::new();
    for st in &ap.stages {
        let n = st.n;
        if spec.case == Case::Rpos && n == 0 {
            continue;
        }
        let s = ring_ends(spec.case, spec.delta, n + 2).1;
        let lam = match spec.case {
            Case::R => thm2_lambda(s, spec, consts.big_d)?,
            Case::Rpos => thm3_lambda(s, spec, consts.big_d)?,
        };
        let ln_bound = log_add(lam, 0.0);
        out.push(LambdaCheck { n, s, ln_lambda: st.ln_lambda, ln_bound, pass: st.ln_lambda <= ln_bound });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RingCertificate {
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// The first ring n with z ∈ U_n, and the bound on n in terms of |z|:
/// δn ≤ δ/√2 + √2|z| on the line; n ≤ (2/√α)|z| with α = 2δ² on the half-line.
pub fn ring_locator_check(z: Complex64, scheme: &RingScheme) -> Result<RingCertificate, BoundsError> {
    let delta = scheme.delta;
    match scheme.case {
        Case::R => {
            let n = locate_ring(Case::R, delta, z, 1 << 24).ok_or_else(|| BoundsError::Domain(format!("no ring found for z = {z}")))?;
            let lhs = delta * n as f64;
            let rhs = delta / SQRT_2 + SQRT_2 * z.norm();
            Ok(RingCertificate { n, lhs, rhs, holds: lhs <= rhs })
        }
        Case::Rpos => {
            let alpha = 2.0 * delta * delta;
            if !in_region_v(z, alpha) {
                return Err(BoundsError::Domain(format!("z = {z} is not in V for alpha = {alpha}")));
            }
            let n = locate_ring(Case::Rpos, delta, z, 1 << 24).ok_or_else(|| BoundsError::Domain(format!("no ring found for z = {z}")))?;
            let lhs = n as f64;
            let rhs = 2.0 / alpha.sqrt() * z.norm();
            Ok(RingCertificate { n, lhs, rhs, holds: lhs <= rhs })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Thm2,
    Thm3,
    Cor2,
    Cor3,
    Cor4,
}

/// Parameters of the corollary envelopes.
#[derive(Clone, Debug, PartialEq)]
pub enum CorollaryParams {
    /// Finite order r and a decreasing convex ε.
    Cor2 { f: Expr, eps: Expr, r: u32 },
    /// M ≥ max{1, ‖f‖, …, ‖f^{(r+1)}‖} and a constant ε.
    Cor3 { m: f64, eps: f64 },
    /// Schwartz f, tolerance ε, order N. `window` is the half-width over
    /// which ‖f‖_{0,k} is sampled.
    Cor4 { f: Expr, eps: f64, n: u32, window: f64 },
}

#[derive(Clone, Debug, PartialEq)]
enum Form {
    Thm2(ProblemSpec),
    Thm3 { spec: ProblemSpec, alpha: f64 },
    Cor(CorollaryParams),
}

/// A growth envelope t ↦ ln(log-bound on ‖ĝ‖_t).
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    pub provenance: Provenance,
    pub c: f64,
    pub d: f64,
    form: Form,
}

impl Envelope {
    pub fn thm2(spec: ProblemSpec, c: f64, d: f64) -> Self {
        Self { provenance: Provenance::Thm2, c, d, form: Form::Thm2(spec) }
    }

    pub fn thm3(spec: ProblemSpec, alpha: f64, c: f64, d: f64) -> Self {
        Self { provenance: Provenance::Thm3, c, d, form: Form::Thm3 { spec, alpha }, }
    }

    /// Envelope at radius t (for the half-line bound, at the real point z = t).
    pub fn eval(&self, t: f64) -> Result<ExtReal, BoundsError> {
        self.eval_at(Complex64::new(t, 0.0))
    }

    pub fn eval_at(&self, z: Complex64) -> Result<ExtReal, BoundsError> {
        let t = z.norm();
        let (c, d) = (self.c, self.d);
        match &self.form {
            Form::Thm2(spec) => thm2_envelope(t, spec, c, d),
            Form::Thm3 { spec, alpha } => thm3_envelope(z, *alpha, spec, c, d),
            Form::Cor(CorollaryParams::Cor2 { f, eps, r }) => {
                let s = SQRT_2 * (t + 4.0);
                let de = delta_difference(|x| eps.eval(x).unwrap_or(f64::NAN), s).map_err(|e| BoundsError::Domain(e.to_string()))?;
                if !(de > 0.0) {
                    return Err(BoundsError::Domain(format!("eps is not strictly decreasing at s = {s}")));
                }
                let tower = s * d.ln() + 3.0 * (norm(f, Case::R, s, *r as usize + 1)?.ln() - de.ln());
                let inner = log_add(ln_one_plus_logplus(norm(f, Case::R, s, 0)?), tower);
                Ok(ExtReal::from_ln(c.ln() + 2.0 * s.ln() + inner))
            }
            Form::Cor(CorollaryParams::Cor3 { m, eps }) => {
                let s = SQRT_2 * (t + 4.0);
                let tower = s * d.ln() + 3.0 * (m.ln() + ((s + 1.0) * (s + 2.0)).ln() - eps.ln());
                let inner = log_add(m.ln().ln_1p(), tower);
                Ok(ExtReal::from_ln(c.ln() + 2.0 * s.ln() + inner))
            }
            Form::Cor(CorollaryParams::Cor4 { f, eps, n, window: w }) => {
                let s = SQRT_2 * t + 1.0;
                let sw = s + 3.0 * SQRT_2;
                let r = *n as f64 + sw;
                let k = (r + 1.0).ceil() as usize;
                let fk = (0..=k).map(|j| schwartz_seminorm(f, 0, j, (*w, DEFAULT_SAMPLES)).map(|e| e.inflated())).collect::<Result<Vec<_>, _>>()?;
                let fk = fk.into_iter().fold(0.0, f64::max);
                let nf = *n as f64;
                let ln_ne = if *n == 0 { 0.0 } else { nf * (nf / E).ln() };
                let q = d * (r + 1.0);
                let lam = q * sw * q.ln() + 3.0 * (ln_ne + fk.ln() - eps.ln());
                let inner = log_add(ln_one_plus_logplus(norm(f, Case::R, sw, 0)?), lam);
                Ok(ExtReal::from_ln(c.ln() + 2.0 * s.ln() + inner))
            }
        }
    }

    /// Constant-tolerance envelope only: ln E with log-bound ≤ E^s for s = √2(t+4), t ≥ 0.
    pub fn cor3_ln_base(&self) -> Option<f64> {
        let Form::Cor(CorollaryParams::Cor3 { m, eps }) = &self.form else { return None };
        let s0 = 4.0 * SQRT_2;
        let ln_p = self.c.ln() + (2.0 + m.ln()).ln() + 3.0 * (m / eps).ln().max(0.0) + 6.0;
        Some(8.0 + self.d.ln() + ln_p.max(0.0) / s0)
    }
}

pub fn corollary_envelopes(params: CorollaryParams, c: f64, d: f64) -> Result<Envelope, BoundsError> {
    if !(c > 0.0) || !(d >= 1.0) {
        return Err(BoundsError::Domain(format!("need C > 0 and D >= 1, got C = {c}, D = {d}")));
    }
    let provenance = match &params {
        CorollaryParams::Cor2 { .. } => Provenance::Cor2,
        CorollaryParams::Cor3 { m, eps } => {
            if !(*m >= 1.0) || !(*eps > 0.0) {
                return Err(BoundsError::Domain(format!("need M >= 1 and eps > 0, got M = {m}, eps = {eps}")));
            }
            Provenance::Cor3
        }
        CorollaryParams::Cor4 { eps, window, .. } => {
            if !(*eps > 0.0) || !(*window > 0.0) {
                return Err(BoundsError::Domain(format!("need eps > 0 and a positive window, got eps = {eps}")));
            }
            Provenance::Cor4
        }
    };
    Ok(Envelope { provenance, c, d, form: Form::Cor(params) })
}

/// The profiles ε₀(t) = δ e^{−t}, ρ₀(t) = N + t with δ = ε/(N/e)^N.
pub fn cor4_profiles(eps: f64, n: u32) -> (Expr, Expr) {
    let nf = n as f64;
    let delta = if n == 0 { eps } else { eps / (nf / E).powf(nf) };
    let e0 = Expr::Mul(Box::new(Expr::Const(delta)), Box::new(Expr::Call(crate::taylor::Func::Exp, Box::new(Expr::Neg(Box::new(Expr::Var))))));
    let r0 = Expr::Add(Box::new(Expr::Const(nf)), Box::new(Expr::Var));
    (e0, r0)
}

/// max over samples of log_m ‖g‖_t / log t, from (t, log ‖g‖_t) pairs.
/// A finite-sample diagnostic: it does not compute the limsup.
pub fn index_diagnostic(samples: &[(f64, f64)], m: usize) -> Result<f64, BoundsError> {
    if samples.is_empty() || m == 0 {
        return Err(BoundsError::Domain("need samples and m >= 1".into()));
    }
    let mut best = f64::NEG_INFINITY;
    for &(t, lg) in samples {
        if !(t > 1.0) {
            return Err(BoundsError::Domain(format!("log t must be positive, got t = {t}")));
        }
        let mut v = lg;
        for _ in 1..m {
            if !(v > 0.0) {
                return Err(BoundsError::Domain(format!("iterated log undefined at t = {t}")));
            }
            v = v.ln();
        }
        best = best.max(v / t.ln());
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub point: String,
    /// ln of the measured bound on |ĝ|.
    pub measured_log: f64,
    /// The envelope's log-bound.
    pub bound_log: ExtReal,
    pub margin: ExtReal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub provenance: Provenance,
    pub rows: Vec<ComparisonRow>,
    pub pass: bool,
}

impl ComparisonReport {
    fn from_rows(provenance: Provenance, rows: Vec<ComparisonRow>) -> Self {
        let pass = rows.iter().all(|r| r.margin.is_nonnegative());
        Self { provenance, rows, pass }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("point,measured_log,bound_log,margin\n");
        for r in &self.rows {
            s.push_str(&format!("{},{:e},{},{}\n", r.point, r.measured_log, r.bound_log, r.margin));
        }
        s
    }
}

fn row(point: String, measured_log: f64, bound_log: ExtReal) -> ComparisonRow {
    // The log-bound is ln L; compare L with the measured log directly.
    let margin = if bound_log.ln_abs < 700.0 {
        ExtReal::from_f64(bound_log.to_f64() - measured_log)
    } else {
        bound_log.minus(measured_log)
    };
    ComparisonRow { point, measured_log, bound_log, margin }
}

fn certified(ap: &Approximant) -> Result<&ProblemSpec, BoundsError> {
    if ap.mode != Mode::Certified {
        return Err(BoundsError::Refused("growth envelopes hold for certified-mode approximants (lambda_n = mu_n); this one is practical".into()));
    }
    ap.spec.as_ref().ok_or_else(|| BoundsError::Refused("the approximant carries no problem profiles".into()))
}

fn max_total_ln(ap: &Approximant, zs: &[Complex64]) -> Result<f64, BoundsError> {
    let evals = zs.par_iter().map(|&z| ap.eval_complex(z)).collect::<Result<Vec<_>, _>>()?;
    let mut best = f64::NEG_INFINITY;
    for e in evals {
        if !e.covered {
            return Err(BoundsError::Refused(format!("the tail at z = {} is not covered by the built stages", e.z)));
        }
        best = best.max(e.total_ln);
    }
    Ok(best)
}

/// max over `angles` points on |z| = t of ln|ĝ(z)| against the line envelope.
pub fn compare_thm2(ap: &Approximant, consts: &DerivedConstants, radii: &[f64], angles: usize) -> Result<ComparisonReport, BoundsError> {
    let spec = certified(ap)?;
    if spec.case != Case::R {
        return Err(BoundsError::Refused("the line envelope needs a case R approximant".into()));
    }
    let mut rows = Vec::new();
    for &t in radii {
        let zs: Vec<Complex64> = (0..angles).map(|j| Complex64::from_polar(t, 2.0 * std::f64::consts::PI * j as f64 / angles as f64)).collect();
        let measured = max_total_ln(ap, &zs)?;
        rows.push(row(format!("t={t}"), measured, thm2_envelope(t, spec, consts.big_c, consts.big_d)?));
    }
    Ok(ComparisonReport::from_rows(Provenance::Thm2, rows))
}

/// `angles` points of V on |z| = t, for each radius with t² ≥ α.
pub fn v_samples(t: f64, alpha: f64, angles: usize) -> Vec<Complex64> {
    if t * t < alpha || angles == 0 {
        return vec![];
    }
    let th = 0.5 * (alpha / (t * t)).acos();
    (0..angles)
        .map(|j| {
            let u = if angles == 1 { 0.0 } else { -th + 2.0 * th * j as f64 / (angles - 1) as f64 };
            Complex64::from_polar(t, u)
        })
        .filter(|&z| in_region_v(z, alpha))
        .collect()
}

/// ln|ĝ(z)| on V against the half-line envelope with α = 2δ².
pub fn compare_thm3(ap: &Approximant, consts: &DerivedConstants, radii: &[f64], angles: usize) -> Result<ComparisonReport, BoundsError> {
    let spec = certified(ap)?;
    if spec.case != Case::Rpos {
        return Err(BoundsError::Refused("the half-line envelope needs a case Rpos approximant".into()));
    }
    let alpha = 2.0 * spec.delta * spec.delta;
    let mut rows = Vec::new();
    for &t in radii {
        for z in v_samples(t, alpha, angles) {
            let measured = max_total_ln(ap, &[z])?;
            rows.push(row(format!("z={}{:+}i", z.re, z.im), measured, thm3_envelope(z, alpha, spec, consts.big_c, consts.envelope_d)?));
        }
    }
    Ok(ComparisonReport::from_rows(Provenance::Thm3, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taylor::parse;
    use crate::whitney::build_approximant;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn spec(f: &str, eps: &str, rho: &str, case: Case) -> ProblemSpec {
        ProblemSpec::new(p(f), p(eps), p(rho), None, case, ProblemSpec::default_delta(case))
    }

    #[test]
    fn lambda_examples() {
        let z = spec("0", "1/(1+t)", "0", Case::R);
        assert_eq!(thm2_lambda(1.0, &z, 2.0).unwrap(), f64::NEG_INFINITY);
        // ‖f‖ = 1, Δε(1) = 1/2 − 1/3 = 1/6: ln(2^2 · 6^3).
        let one = spec("1", "1/(1+t)", "0", Case::R);
        let want = (4.0f64 * 216.0).ln();
        let got = thm2_lambda(1.0, &one, 2.0).unwrap();
        assert!((got - 3.0 * DEFAULT_INFLATION_LN - want).abs() < 1e-9, "{got} vs {want}");
        let two = spec("2", "1/(1+t)", "0", Case::R);
        assert!((thm2_lambda(1.0, &two, 2.0).unwrap() - got - 3.0 * 2f64.ln()).abs() < 1e-9);
        assert!(thm2_lambda(1.0, &spec("1", "1", "0", Case::R), 2.0).is_err());
    }

    const DEFAULT_INFLATION_LN: f64 = 0.04879016416943205; // ln 1.05

    #[test]
    fn derived_constants_case_r() {
        let ap = build_approximant(&spec("sin(t)", "1/(2*(1+t))", "0", Case::R), 3, Mode::Certified).unwrap();
        let k = derive_constants(&ap).unwrap();
        assert_eq!(k.c1, 4096.0);
        assert!((k.d1 - 48.0 / SQRT_2).abs() < 1e-12);
        assert_eq!(k.big_d, 4096.0);
        assert!(k.trace.len() >= 4);
        for row in lambda_bound_check(&ap, &k).unwrap() {
            assert!(row.pass, "{row:?}");
        }
        let mut bigger = ap.clone();
        bigger.tail.ln_m += 1.0;
        assert!(derive_constants(&bigger).unwrap().big_c > k.big_c);
    }

    #[test]
    fn envelope_grows_with_t() {
        let sp = spec("sin(t)", "1/(2*(1+t))", "1", Case::R);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..8 {
            let v = thm2_envelope(0.5 * i as f64, &sp, 8.0, 4096.0).unwrap().ln_abs;
            assert!(v >= prev);
            prev = v;
        }
        assert!(thm2_envelope(-1.0, &sp, 8.0, 4096.0).is_err());
    }

    #[test]
    fn region_v() {
        let sp = spec("1/(1+t)", "1/(2*(1+t))", "0", Case::Rpos);
        assert!(thm3_envelope(Complex64::new(1.0, 0.0), 1.0, &sp, 1.0, 10.0).unwrap().ln_abs.is_finite());
        assert!(thm3_envelope(Complex64::new(1.0, 1.0), 1.0, &sp, 1.0, 10.0).is_err());
    }

    #[test]
    fn ring_locator_bounds() {
        let sp = spec("sin(t)", "1/(1+t)", "0", Case::R);
        let s = crate::whitney::build_scheme(&sp, 3).unwrap();
        assert_eq!(ring_locator_check(Complex64::new(0.0, 0.0), &s).unwrap().n, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let z = Complex64::from_polar(rng.gen_range(0.0..10.0), rng.gen_range(0.0..std::f64::consts::TAU));
            assert!(ring_locator_check(z, &s).unwrap().holds);
        }
        let sp = spec("1/(1+t)", "1/(2*(1+t))", "0", Case::Rpos);
        let s = crate::whitney::build_scheme(&sp, 3).unwrap();
        let mut hits = 0;
        while hits < 200 {
            let z = Complex64::new(rng.gen_range(0.0..5.0), rng.gen_range(-5.0..5.0));
            if in_region_v(z, 1.0) && z.norm() <= 5.0 {
                assert!(ring_locator_check(z, &s).unwrap().holds);
                hits += 1;
            }
        }
    }

    #[test]
    fn corollary_envelopes_examples() {
        let e = corollary_envelopes(CorollaryParams::Cor3 { m: 1.0, eps: 1.0 }, 8.0, 4096.0).unwrap();
        let ln_e = e.cor3_ln_base().unwrap();
        for i in 0..20 {
            let t = 0.5 * i as f64;
            let s = SQRT_2 * (t + 4.0);
            assert!(e.eval(t).unwrap().ln_abs <= s * ln_e);
        }
        // Δε₀(t) = δ e^{−t}(1 − e^{−1}) ≥ ε₀(t)/2.
        let (e0, _) = cor4_profiles(0.1, 3);
        for i in 0..10 {
            let t = i as f64;
            let de = delta_difference(|x| e0.eval(x).unwrap(), t).unwrap();
            let want = e0.eval(t).unwrap() * (1.0 - (-1.0f64).exp());
            assert!((de - want).abs() <= 1e-12 * want);
            assert!(de >= e0.eval(t).unwrap() / 2.0);
        }
        let c2 = corollary_envelopes(CorollaryParams::Cor2 { f: p("0"), eps: p("1/(1+t)"), r: 0 }, 3.0, 2.0).unwrap();
        let s = SQRT_2 * 5.0;
        assert!((c2.eval(1.0).unwrap().ln_abs - (3.0f64.ln() + 2.0 * s.ln())).abs() < 1e-12);
        let c4 = corollary_envelopes(CorollaryParams::Cor4 { f: p("exp(-t^2)"), eps: 0.1, n: 2, window: 8.0 }, 3.0, 2.0).unwrap();
        assert!(c4.eval(0.5).unwrap().ln_abs.is_finite());
        assert!(corollary_envelopes(CorollaryParams::Cor3 { m: 1.0, eps: 0.0 }, 1.0, 1.0).is_err());
    }

    #[test]
    fn index_diagnostic_examples() {
        let poly: Vec<(f64, f64)> = [10.0, 100.0, 1000.0].iter().map(|&t: &f64| (t, 3.0 * t.ln())).collect();
        assert!((index_diagnostic(&poly, 1).unwrap() - 3.0).abs() < 1e-12);
        let expo: Vec<(f64, f64)> = [10.0, 1e3, 1e6].iter().map(|&t| (t, t)).collect();
        assert!((index_diagnostic(&expo, 2).unwrap() - 1.0).abs() < 1e-12);
        assert!(index_diagnostic(&[], 1).is_err());
    }

    #[test]
    fn ext_real_margins() {
        let b = ExtReal::from_ln(1000.0);
        assert!(b.minus(5.0).is_nonnegative());
        assert_eq!(format!("{}", ExtReal::from_f64(2.0)), "2e0");
        assert!(format!("{b}").starts_with("exp("));
        assert!(!ExtReal::from_ln(1.0).minus(10.0).is_nonnegative());
    }
}
