//! Stage construction and evaluation of the approximant.
//!
//! Stage n transforms ĥ_n = φ_n (f − Σ_{m<n} ĝ_m), where ĝ_m is the computed
//! value of stage m. The approximant is g = Σ W_{λ_n} ĥ_n; evaluating a
//! stage by its truncated heat series differs from W_{λ_n} ĥ_n by at most the
//! certified remainder, which [`Approximant::eval_error`] reports.

use std::f64::consts::{PI, SQRT_2};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::scheme::{big_n_exact, biguint_ln, build_scheme_rings, in_domain, ln_d_mn, locate_ring, ring_ends, RingScheme};
use super::{Case, Mode, ProblemSpec, WhitneyError};
use crate::bump::{hump_jet, Hump};
use crate::taylor::{sup_norm_with, sup_norms_by_order, Expr, Jet, DEFAULT_SAMPLES};
use crate::weierstrass::{lambda_for_eps, log_add, transform_complex, transform_jet, LogComplexValue, Supported, WeierstrassError, DIRECT_LIMIT};

/// Most heat-series terms tried before falling back to direct quadrature.
pub const J_MAX: usize = 3;
/// Stage evaluation tolerance as a fraction of δ_n.
pub const TOL_FACTOR: f64 = 1e-3;
/// Unbuilt stages below k_n that are bounded one by one; beyond this they
/// are bounded together by the deepest one.
pub const VIRTUAL_LIMIT: usize = 64;
/// Deepest k_n for which unbuilt stages are bounded at all.
pub const RING_LIMIT: usize = 1 << 17;
const SAMPLES: usize = DEFAULT_SAMPLES;
/// Relative accuracy credited to direct quadrature.
const QUADRATURE_REL: f64 = 1e-12;

/// The window φ_n: one hump for n = 0, two for n ≥ 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StageWindow {
    Center { hump: Hump },
    Pair { left: Hump, right: Hump },
}

fn hump_at(h: &Hump, t: f64, k: usize) -> Option<Jet> {
    (t > h.a && t < h.b_star).then(|| hump_jet(h, t, k))
}

impl StageWindow {
    pub fn for_stage(s: &RingScheme, n: usize) -> Result<Self, WhitneyError> {
        let bad = |e: crate::bump::BumpError| WhitneyError::Stage { n, message: e.to_string() };
        if n == 0 {
            return Ok(Self::Center { hump: Hump::new(s.a[2], s.a[1], s.b[1], s.b[2]).map_err(bad)? });
        }
        Ok(Self::Pair {
            left: Hump::new(s.a[n + 2], s.a[n + 1], s.a[n], s.a[n - 1]).map_err(bad)?,
            right: Hump::new(s.b[n - 1], s.b[n], s.b[n + 1], s.b[n + 2]).map_err(bad)?,
        })
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Center { hump } => hump.support(),
            Self::Pair { left, right } => (left.a, right.b_star),
        }
    }

    pub fn jet(&self, t: f64, k: usize) -> Jet {
        let j = match self {
            Self::Center { hump } => hump_at(hump, t, k),
            Self::Pair { left, right } => hump_at(left, t, k).or_else(|| hump_at(right, t, k)),
        };
        j.unwrap_or_else(|| Jet::zero(t, k))
    }
}

/// How a stage value is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StageRule {
    HeatSeries { terms: usize },
    Transform,
}

/// Ledger constants of one stage. Large quantities are natural logs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub n: usize,
    pub r_n: u32,
    #[serde(with = "super::serial::ext_f64")]
    pub eps_n: f64,
    /// M_n = 1 + 2^{r_n} ‖φ_n‖_{r_n}.
    #[serde(with = "super::serial::ext_f64")]
    pub m_n: f64,
    /// ln D_{r_n n}.
    #[serde(with = "super::serial::ext_f64")]
    pub ln_d: f64,
    /// ln N_{n+1}.
    #[serde(with = "super::serial::ext_f64")]
    pub ln_big_n_next: f64,
    #[serde(with = "super::serial::ext_f64")]
    pub delta: f64,
    /// ‖f‖_{K_{n+2}; 0} and ‖f‖_{K_{n+2}; r_n+1}, inflated samples.
    #[serde(with = "super::serial::ext_f64")]
    pub f_norm0: f64,
    #[serde(with = "super::serial::ext_f64")]
    pub f_norm_r1: f64,
    #[serde(with = "super::serial::ext_f64")]
    pub ln_g0: f64,
    #[serde(with = "super::serial::ext_f64")]
    pub ln_g_r1: f64,
    #[serde(with = "super::serial::ext_f64")]
    pub ln_mu: f64,
    #[serde(with = "super::serial::ext_f64")]
    pub ln_lambda: f64,
    /// ln H_n, H_n = 2 (λ_n/π)^{1/2} ‖h_n‖ (b_{n+2} − a_{n+2}).
    #[serde(with = "super::serial::ext_f64")]
    pub ln_big_h: f64,
    /// Whether λ_n was raised so that H_n e^{−λ_n/n} ≤ c_*/n².
    pub raised: bool,
    #[serde(with = "super::serial::ext_f64")]
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stage {
    pub n: usize,
    pub window: StageWindow,
    pub support: (f64, f64),
    pub ln_lambda: f64,
    /// e^{ln λ}, infinite when it overflows.
    pub lambda: f64,
    pub rule: StageRule,
    /// Inflated sampled sup |ĥ_n^{(j)}| on K_{n+2}, j = 0, 1, ….
    pub h_norms: Vec<f64>,
    pub ledger: LedgerRow,
}

impl Stage {
    /// Bound on |ĝ_n^{(k)} − (W_λ ĥ_n)^{(k)}| everywhere.
    pub fn eval_error(&self, k: usize) -> f64 {
        match self.rule {
            StageRule::HeatSeries { terms } => heat_remainder_ln(self.h_norms[k + 2 * terms], self.ln_lambda, terms).exp(),
            StageRule::Transform => QUADRATURE_REL * self.h_norms[..=k].iter().cloned().fold(0.0, f64::max),
        }
    }
}

/// Tail constants: c_n = c_*/n² and M = Σ c_n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailConstants {
    /// ln c with c = ε_0³ / G_{0 n₀}².
    #[serde(with = "super::serial::ext_f64")]
    pub ln_c: f64,
    pub n0: Option<usize>,
    #[serde(with = "super::serial::ext_f64")]
    pub ln_c_star: f64,
    #[serde(with = "super::serial::ext_f64")]
    pub ln_m: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Approximant {
    pub f: Expr,
    pub spec: Option<ProblemSpec>,
    pub mode: Mode,
    pub scheme: RingScheme,
    pub stages: Vec<Stage>,
    pub tail: TailConstants,
    /// Highest derivative order served.
    pub max_order: usize,
}

fn heat_remainder_ln(norm: f64, ln_lambda: f64, terms: usize) -> f64 {
    let ln_fact: f64 = (1..=terms).map(|i| (i as f64).ln()).sum();
    norm.ln() - ln_fact - terms as f64 * (4f64.ln() + ln_lambda)
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

fn next_down(x: f64) -> f64 {
    f64::from_bits(x.to_bits() - 1)
}

/// Stage constants that depend only on f and the scheme.
#[derive(Clone, Debug)]
pub(crate) struct StageConstants {
    pub delta: f64,
    pub ln_d: f64,
    pub ln_big_n_next: f64,
    pub f_norm0: f64,
    pub f_norm_r1: f64,
    pub ln_g0: f64,
    pub ln_g_r1: f64,
    pub ln_mu: f64,
}

/// δ_n = (ε_n − ε_{n+1}) / (4 N_{n+1}), rounded down until 4 δ_n N_{n+1} ≤ ε_n − ε_{n+1} holds exactly.
pub(crate) fn stage_delta(s: &RingScheme, n: usize) -> Result<f64, WhitneyError> {
    let big = big_n_exact(s, n + 1);
    let diff = s.eps[n] - s.eps[n + 1];
    let mut d = (diff.ln() - 4f64.ln() - biguint_ln(&big)).exp();
    if !(d > 1e-300) {
        return Err(WhitneyError::Stage { n, message: format!("budget delta_n underflows (ln = {})", d.ln()) });
    }
    let rhs = rat(s.eps[n]) - rat(s.eps[n + 1]);
    let nq = BigRational::from_integer(BigInt::from(big) * 4);
    while rat(d) * &nq > rhs {
        d = next_down(d);
    }
    Ok(d)
}

/// ‖f‖_{K_{n+2}} and ‖f‖_{K_{n+2}; r_n+1}, inflated.
fn f_norms(f: &Expr, s: &RingScheme, n: usize) -> Result<(f64, f64), WhitneyError> {
    let k = (s.a[n + 2], s.b[n + 2]);
    let per = sup_norms_by_order(|t, j| f.jet(t, j), k, s.r[n] as usize + 1, SAMPLES)?;
    Ok((per[0].inflated(), per.iter().map(|e| e.inflated()).fold(0.0, f64::max)))
}

/// ln G_{0n}, ln G_{r_n+1,n} and ln μ_n given ln δ_n.
fn ln_g_mu(s: &RingScheme, n: usize, norms: (f64, f64), ln_delta: f64) -> (f64, f64, f64) {
    let ln2 = 2f64.ln();
    let ln_g0 = n as f64 * ln2 + norms.0.ln();
    let ln_g_r1 = n as f64 * ln2 + (n as f64 + 1.0) * ln_d_mn(s.case, s.r[n] + 1, n) + norms.1.ln();
    let ln_mu = log_add((128.0 * SQRT_2).ln() + 3.0 * (ln_g_r1 - ln_delta), 0.0);
    (ln_g0, ln_g_r1, ln_mu)
}

pub(crate) fn stage_constants(f: &Expr, s: &RingScheme, n: usize) -> Result<StageConstants, WhitneyError> {
    let delta = stage_delta(s, n)?;
    let norms = f_norms(f, s, n)?;
    let (ln_g0, ln_g_r1, ln_mu) = ln_g_mu(s, n, norms, delta.ln());
    Ok(StageConstants {
        delta,
        ln_d: ln_d_mn(s.case, s.r[n], n),
        ln_big_n_next: biguint_ln(&big_n_exact(s, n + 1)),
        f_norm0: norms.0,
        f_norm_r1: norms.1,
        ln_g0,
        ln_g_r1,
        ln_mu,
    })
}

/// ln G_{0n} and ln μ_n with δ_n kept in the log domain, for stages whose
/// budget underflows f64.
pub(crate) fn ln_stage_bounds(f: &Expr, s: &RingScheme, n: usize) -> Result<(f64, f64), WhitneyError> {
    let diff = s.eps[n] - s.eps[n + 1];
    if !(diff > 0.0) {
        return Err(WhitneyError::Stage { n, message: format!("eps_n - eps_(n+1) = {diff} is not positive") });
    }
    let ln_delta = diff.ln() - 4f64.ln() - biguint_ln(&big_n_exact(s, n + 1));
    let (ln_g0, _, ln_mu) = ln_g_mu(s, n, f_norms(f, s, n)?, ln_delta);
    Ok((ln_g0, ln_mu))
}

/// sup_{n ≥ 1} (b_{n+2} − a_{n+2}) / n for the closed-form rings.
fn width_sup(case: Case, delta: f64) -> f64 {
    (1..=64)
        .map(|n| {
            let (a, b) = ring_ends(case, delta, n + 2);
            (b - a) / n as f64
        })
        .fold(0.0, f64::max)
}

fn tail_constants(s: &RingScheme, consts: &[StageConstants]) -> TailConstants {
    let n0 = consts.iter().position(|c| c.f_norm0 > 0.0);
    let Some(n0) = n0 else {
        return TailConstants { ln_c: f64::NEG_INFINITY, n0: None, ln_c_star: f64::NEG_INFINITY, ln_m: f64::NEG_INFINITY };
    };
    let ln_c = 3.0 * s.eps[0].ln() - 2.0 * consts[n0].ln_g0;
    let ln_c_star = 2f64.ln() - 0.5 * PI.ln() + ln_c + width_sup(s.case, s.delta).ln();
    TailConstants { ln_c, n0: Some(n0), ln_c_star, ln_m: ln_c_star + (PI * PI / 6.0).ln() }
}

/// ĥ_n as a [`Supported`] function.
pub struct StageResidual<'a> {
    pub approx: &'a Approximant,
    pub n: usize,
}

impl Supported for StageResidual<'_> {
    fn support(&self) -> (f64, f64) {
        self.approx.stages[self.n].support
    }

    fn jet(&self, t: f64, k: usize) -> Result<Jet, WeierstrassError> {
        let mut memo = vec![None; self.n];
        self.approx
            .residual_jet(&self.approx.stages[self.n].window, self.n, t, k, &mut memo)
            .map_err(|e| WeierstrassError::Eval(e.to_string()))
    }
}

/// Value of W_λ ĝ at a complex point, with the bookkeeping of which stages
/// are covered by what.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexEval {
    pub z: Complex64,
    /// First n with z ∈ U_n.
    pub ring: Option<usize>,
    pub k_n: Option<u64>,
    /// Sum over built stages.
    pub built: LogComplexValue,
    /// ln of the bound on unbuilt stages m < k_n.
    pub unbuilt_ln: f64,
    /// ln M, covering stages m ≥ max(k_n, built).
    pub tail_ln: f64,
    /// Every term is accounted for by a guarantee of the construction.
    pub covered: bool,
    /// ln(|built| + unbuilt + tail).
    pub total_ln: f64,
}

pub fn build_approximant(spec: &ProblemSpec, stages: usize, mode: Mode) -> Result<Approximant, WhitneyError> {
    if stages == 0 {
        return Err(WhitneyError::Spec("need at least one stage".into()));
    }
    let scheme = build_scheme_rings(spec, stages.max(2) + 4)?;
    let mut ap = build_with_scheme(spec.f.clone(), scheme, stages, mode)?;
    ap.spec = Some(spec.clone());
    Ok(ap)
}

/// Build `stages` stages of the approximant of `f` on a prepared scheme.
pub fn build_with_scheme(f: Expr, scheme: RingScheme, stages: usize, mode: Mode) -> Result<Approximant, WhitneyError> {
    if stages == 0 {
        return Err(WhitneyError::Spec("need at least one stage".into()));
    }
    if scheme.rings() < stages + 3 {
        return Err(WhitneyError::Spec(format!("{stages} stages need {} rings, scheme has {}", stages + 3, scheme.rings())));
    }
    let consts: Vec<StageConstants> = (0..stages).map(|n| stage_constants(&f, &scheme, n)).collect::<Result<_, _>>()?;
    let tail = tail_constants(&scheme, &consts);
    let max_order = scheme.r[stages - 1] as usize + 1;
    let mut ap = Approximant { f, spec: None, mode, scheme, stages: Vec::with_capacity(stages), tail, max_order };
    for (n, c) in consts.iter().enumerate() {
        let st = ap.build_stage(n, c)?;
        ap.stages.push(st);
    }
    Ok(ap)
}

impl Approximant {
    fn build_stage(&self, n: usize, c: &StageConstants) -> Result<Stage, WhitneyError> {
        let s = &self.scheme;
        let window = StageWindow::for_stage(s, n)?;
        let support = window.support();
        let r_n = s.r[n];
        let phi_norm = sup_norm_with(|t, k| Ok::<_, WhitneyError>(window.jet(t, k)), support, r_n as usize, SAMPLES)?.inflated();
        let m_n = 1.0 + 2f64.powi(r_n as i32) * phi_norm;

        let q = self.max_order + 2 * J_MAX;
        let per = sup_norms_by_order(
            |t, k| {
                let mut memo = vec![None; n];
                self.residual_jet(&window, n, t, k, &mut memo)
            },
            support,
            q,
            SAMPLES,
        )?;
        let h_norms: Vec<f64> = per.iter().map(|e| e.inflated()).collect();
        let cum = |j: usize| h_norms[..=j].iter().cloned().fold(0.0, f64::max);

        let mut ln_lambda = match self.mode {
            Mode::Certified => c.ln_mu,
            Mode::Practical => {
                let lam = 1.01 * lambda_for_eps(cum(r_n as usize), cum(r_n as usize + 1), c.delta)?;
                let floor = match n {
                    0 => 0.0,
                    _ => log_add(self.stages[n - 1].ln_lambda, 0.0),
                };
                lam.ln().max(floor)
            }
        };

        let width = (support.1 - support.0).ln();
        let base_h = 2f64.ln() - 0.5 * PI.ln() + h_norms[0].ln() + width;
        let mut raised = false;
        if n >= 1 && h_norms[0] > 0.0 {
            let target = self.tail.ln_c_star - 2.0 * (n as f64).ln();
            let excess = |ln_lam: f64| base_h + 0.5 * ln_lam - ln_lam.exp() / n as f64 - target;
            if excess(ln_lambda) > 0.0 {
                if !target.is_finite() {
                    return Err(WhitneyError::Stage { n, message: "tail constant c_* vanishes but the residual does not".into() });
                }
                // λ = n (R + ½ ln λ) has the required λ as its fixed point.
                let big_r = base_h - target;
                let mut lam = (n as f64 * big_r).max(ln_lambda.exp()).max(1.0);
                for _ in 0..100 {
                    lam = n as f64 * (big_r + 0.5 * lam.ln());
                }
                let mut ln_new = lam.ln() + 1e-12;
                while excess(ln_new) > 0.0 {
                    ln_new += 1e-9;
                }
                ln_lambda = ln_lambda.max(ln_new);
                raised = true;
            }
        }
        let lambda = ln_lambda.exp();
        let ln_big_h = base_h + 0.5 * ln_lambda;

        let tol = c.delta * TOL_FACTOR;
        let rule = (1..=J_MAX)
            .find(|&terms| (0..=self.max_order).all(|k| heat_remainder_ln(h_norms[k + 2 * terms], ln_lambda, terms).exp() <= tol))
            .map(|terms| StageRule::HeatSeries { terms })
            .unwrap_or(StageRule::Transform);
        if rule == StageRule::Transform && !lambda.is_finite() {
            return Err(WhitneyError::Stage { n, message: "lambda overflows and the heat series does not reach tolerance".into() });
        }

        let ledger = LedgerRow {
            n,
            r_n,
            eps_n: s.eps[n],
            m_n,
            ln_d: c.ln_d,
            ln_big_n_next: c.ln_big_n_next,
            delta: c.delta,
            f_norm0: c.f_norm0,
            f_norm_r1: c.f_norm_r1,
            ln_g0: c.ln_g0,
            ln_g_r1: c.ln_g_r1,
            ln_mu: c.ln_mu,
            ln_lambda,
            ln_big_h,
            raised,
            tol,
        };
        Ok(Stage { n, window, support, ln_lambda, lambda, rule, h_norms, ledger })
    }

    /// ĥ_n jet, with the lower stages at the same point memoized in `memo`.
    pub(crate) fn residual_jet(&self, window: &StageWindow, n: usize, t: f64, k: usize, memo: &mut [Option<Jet>]) -> Result<Jet, WhitneyError> {
        let w = window.jet(t, k);
        if w.is_zero() {
            return Ok(w);
        }
        let mut s = self.f.jet(t, k)?;
        for m in 0..n {
            let g = self.stage_jet_memo(m, t, k, memo)?;
            s = &s - &g;
        }
        Ok(&s * &w)
    }

    fn stage_jet_memo(&self, m: usize, t: f64, k: usize, memo: &mut [Option<Jet>]) -> Result<Jet, WhitneyError> {
        if let Some(j) = &memo[m] {
            if j.order() >= k {
                return Ok(j.truncate(k));
            }
        }
        let st = &self.stages[m];
        let j = match st.rule {
            StageRule::HeatSeries { terms } => {
                let need = k + 2 * (terms - 1);
                let h = self.residual_jet(&st.window, m, t, need, &mut memo[..m])?;
                if h.is_zero() {
                    Jet::zero(t, k)
                } else {
                    let ln4l = 4f64.ln() + st.ln_lambda;
                    let mut out = vec![0.0; k + 1];
                    let mut ln_w = 0.0;
                    for jj in 0..terms {
                        if jj > 0 {
                            ln_w -= (jj as f64).ln() + ln4l;
                        }
                        let w = ln_w.exp();
                        for (i, o) in out.iter_mut().enumerate() {
                            *o += w * h[i + 2 * jj];
                        }
                    }
                    Jet::from_coeffs(t, out)
                }
            }
            StageRule::Transform => transform_jet(&StageResidual { approx: self, n: m }, st.lambda, t, k)?,
        };
        memo[m] = Some(j.clone());
        Ok(j)
    }

    fn check_order(&self, k: usize) -> Result<(), WhitneyError> {
        if k > self.max_order {
            return Err(WhitneyError::Smoothness { k, max: self.max_order });
        }
        Ok(())
    }

    /// Jet of the computed stage n at t.
    pub fn stage_jet(&self, n: usize, t: f64, k: usize) -> Result<Jet, WhitneyError> {
        self.check_order(k)?;
        let mut memo = vec![None; self.stages.len()];
        self.stage_jet_memo(n, t, k, &mut memo)
    }

    /// Jet of ĥ_n at t.
    pub fn residual_at(&self, n: usize, t: f64, k: usize) -> Result<Jet, WhitneyError> {
        let mut memo = vec![None; n];
        self.residual_jet(&self.stages[n].window, n, t, k, &mut memo)
    }

    /// Jet of the computed Σ ĝ_n at t.
    pub fn eval_jet(&self, t: f64, k: usize) -> Result<Jet, WhitneyError> {
        self.check_order(k)?;
        let mut memo = vec![None; self.stages.len()];
        let mut acc = Jet::zero(t, k);
        for m in 0..self.stages.len() {
            acc = &acc + &self.stage_jet_memo(m, t, k, &mut memo)?;
        }
        Ok(acc)
    }

    /// Bound on |(Σ ĝ_n − g)^{(k)}| over the line.
    pub fn eval_error(&self, k: usize) -> f64 {
        self.stages.iter().map(|s| s.eval_error(k)).sum()
    }

    /// K_{N−2}, where every hump that can touch a point is built.
    pub fn protected_region(&self) -> Option<(f64, f64)> {
        let n = self.stages.len();
        (n >= 2).then(|| self.scheme.k_interval(n - 2))
    }

    fn stage_complex(&self, st: &Stage, z: Complex64) -> Result<LogComplexValue, WhitneyError> {
        if st.h_norms[0] == 0.0 {
            return Ok(LogComplexValue::zero());
        }
        if z.im == 0.0 {
            let v = self.stage_jet(st.n, z.re, 0)?[0];
            return Ok(LogComplexValue::exact(Complex64::new(v, 0.0)));
        }
        let ln_k2 = st.ln_lambda + 2.0 * z.im.abs().ln();
        if ln_k2 > DIRECT_LIMIT.ln() {
            return Ok(LogComplexValue::bound(st.h_norms[0].ln() + ln_k2.exp()));
        }
        let res = StageResidual { approx: self, n: st.n };
        Ok(transform_complex(&res, st.lambda, z, Some(st.h_norms[0]))?)
    }

    /// g(z) for complex z together with the tail accounting.
    ///
    /// Unbuilt stages m < k_n are bounded by G_{0m} e^{μ_m y²}, which needs
    /// the problem profiles and certified mode; otherwise they are reported
    /// as uncovered.
    pub fn eval_complex(&self, z: Complex64) -> Result<ComplexEval, WhitneyError> {
        if !in_domain(self.scheme.case, z) {
            return Err(WhitneyError::Spec(format!("z = {z} lies outside the sector |Im z| < Re z")));
        }
        let mut built = LogComplexValue::zero();
        for st in &self.stages {
            built = built.add(self.stage_complex(st, z)?);
        }
        let s = &self.scheme;
        let ring = locate_ring(s.case, s.delta, z, 1 << 20);
        let k_n = ring.map(|n| {
            let (a0, b0) = ring_ends(s.case, s.delta, n);
            let (a1, b1) = ring_ends(s.case, s.delta, n + 1);
            let rho = 0.5 * (a0 - a1).powi(2).min((b1 - b0).powi(2));
            ((1.0 / rho).ceil() as u64).max(n as u64 + 2)
        });
        let built_n = self.stages.len();
        let mut covered = ring.is_some() && self.mode == Mode::Certified;
        let mut unbuilt_ln = f64::NEG_INFINITY;
        if let Some(k) = k_n {
            let k = k as usize;
            let missing = k.saturating_sub(built_n);
            if missing > 0 {
                match (&self.spec, self.mode) {
                    (Some(spec), Mode::Certified) if k <= RING_LIMIT => {
                        let ext = build_scheme_rings(spec, k + 3)?;
                        let y2 = z.im * z.im;
                        let term = |m: usize| -> Result<f64, WhitneyError> {
                            let (ln_g0, ln_mu) = ln_stage_bounds(&self.f, &ext, m)?;
                            Ok(ln_g0 + if y2 == 0.0 { 0.0 } else { (ln_mu + y2.ln()).exp() })
                        };
                        if missing <= VIRTUAL_LIMIT {
                            for m in built_n..k {
                                unbuilt_ln = log_add(unbuilt_ln, term(m)?);
                            }
                        } else {
                            // G_{0m} and μ_m increase with m.
                            unbuilt_ln = (missing as f64).ln() + term(k - 1)?;
                        }
                    }
                    _ => covered = false,
                }
            }
        }
        let tail_ln = self.tail.ln_m;
        let total_ln = log_add(log_add(built.log_magnitude, unbuilt_ln), tail_ln);
        Ok(ComplexEval { z, ring, k_n, built, unbuilt_ln, tail_ln, covered, total_ln })
    }
}
