//! Exhaustions K_n = [a_n, b_n] of the domain with per-ring error budgets.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::{Case, ProblemSpec, WhitneyError};
use crate::bump::{BUMP_C, BUMP_D};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RingScheme {
    pub case: Case,
    pub delta: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub eps: Vec<f64>,
    pub r: Vec<u32>,
    /// ρ_n = ½ min{(a_n − a_{n+1})², (b_{n+1} − b_n)²}.
    pub rho: Vec<f64>,
    /// k_n = max{⌈1/ρ_n⌉, n + 2}.
    pub k: Vec<u64>,
    /// Measured max over n ≥ 1 of (b_n − a_n)/n.
    pub width_constant: f64,
}

/// Closed-form ring ends (a_n, b_n).
pub fn ring_ends(case: Case, delta: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    match case {
        Case::R => (-delta * nf, delta * nf),
        Case::Rpos => (delta / (nf + 1.0), delta * (nf + 1.0)),
    }
}

impl RingScheme {
    /// Assemble a scheme for `case` from the budgets ε_n and orders r_n;
    /// checks conditions (i)–(iv).
    pub fn from_sequences(case: Case, delta: f64, eps: Vec<f64>, r: Vec<u32>, r_cap: Option<u32>) -> Result<Self, WhitneyError> {
        if !(delta > 0.0) {
            return Err(WhitneyError::Spec(format!("delta must be positive, got {delta}")));
        }
        let len = eps.len();
        if len < 3 || r.len() != len {
            return Err(WhitneyError::Spec("need at least three rings with matching eps and r".into()));
        }
        let (a, b): (Vec<f64>, Vec<f64>) = (0..len).map(|n| ring_ends(case, delta, n)).unzip();
        for n in 0..len - 1 {
            if !(a[n + 1] < a[n] && b[n + 1] > b[n]) {
                return Err(WhitneyError::Condition(format!("(i) fails at n = {n}")));
            }
            if !(eps[n] > eps[n + 1] && eps[n + 1] > 0.0) {
                return Err(WhitneyError::Condition(format!(
                    "(ii) eps_n must be positive and strictly decreasing; eps_{n} = {}, eps_{} = {}",
                    eps[n],
                    n + 1,
                    eps[n + 1]
                )));
            }
            if r[n] > r[n + 1] {
                return Err(WhitneyError::Condition(format!("(iii) r_n must be increasing at n = {n}")));
            }
        }
        if let Some(cap) = r_cap {
            if r[len - 1] > cap {
                return Err(WhitneyError::Condition(format!("(iii) r_n exceeds r = {cap}")));
            }
        }
        for n in 0..len - 2 {
            let lhs = eps[n] + eps[n + 2];
            let rhs = 2.0 * eps[n + 1];
            if lhs < rhs * (1.0 - 4.0 * f64::EPSILON) {
                return Err(WhitneyError::Condition(format!("(iv) convexity of eps_n fails at n = {n}")));
            }
        }
        let rho: Vec<f64> = (0..len - 1)
            .map(|n| 0.5 * (a[n] - a[n + 1]).powi(2).min((b[n + 1] - b[n]).powi(2)))
            .collect();
        let k = rho
            .iter()
            .enumerate()
            .map(|(n, p)| ((1.0 / p).ceil() as u64).max(n as u64 + 2))
            .collect();
        let width_constant = (1..len).map(|n| (b[n] - a[n]) / n as f64).fold(0.0, f64::max);
        Ok(Self { case, delta, a, b, eps, r, rho, k, width_constant })
    }

    pub fn rings(&self) -> usize {
        self.a.len()
    }

    pub fn k_interval(&self, n: usize) -> (f64, f64) {
        (self.a[n], self.b[n])
    }

    /// Whether `z` lies in U_n.
    pub fn in_u(&self, n: usize, z: Complex64) -> bool {
        let (a1, b1) = (self.a[n + 1], self.b[n + 1]);
        let re_a = (z - a1).powi(2).re;
        let re_b = (z - b1).powi(2).re;
        a1 < z.re && z.re < b1 && re_a > self.rho[n] && re_b > self.rho[n]
    }

    /// The first n with z ∈ U_n among the rings this scheme holds.
    pub fn first_ring(&self, z: Complex64) -> Option<usize> {
        (0..self.rho.len().saturating_sub(1)).find(|&n| self.in_u(n, z))
    }
}

/// Whether z lies in U (case R: everywhere; case Rpos: |Im z| < Re z).
pub fn in_domain(case: Case, z: Complex64) -> bool {
    match case {
        Case::R => true,
        Case::Rpos => z.im.abs() < z.re,
    }
}

/// First n with z ∈ U_n for the closed-form rings of `case`, scanning up to `limit`.
pub fn locate_ring(case: Case, delta: f64, z: Complex64, limit: usize) -> Option<usize> {
    (0..limit).find(|&n| {
        let (a0, b0) = ring_ends(case, delta, n);
        let (a1, b1) = ring_ends(case, delta, n + 1);
        let rho = 0.5 * (a0 - a1).powi(2).min((b1 - b0).powi(2));
        a1 < z.re && z.re < b1 && (z - a1).powi(2).re > rho && (z - b1).powi(2).re > rho
    })
}

const SAMPLES: usize = 257;

/// Sampled checks that ε is positive, strictly decreasing and convex and
/// that ρ is increasing with 0 ≤ ρ ≤ r on [lo, hi].
pub fn check_profiles(spec: &ProblemSpec, lo: f64, hi: f64) -> Result<(), WhitneyError> {
    let ts: Vec<f64> = (0..SAMPLES).map(|i| lo + (hi - lo) * i as f64 / (SAMPLES - 1) as f64).collect();
    let e: Vec<f64> = ts.iter().map(|&t| spec.eps.eval(t)).collect::<Result<_, _>>()?;
    let p: Vec<f64> = ts.iter().map(|&t| spec.rho.eval(t)).collect::<Result<_, _>>()?;
    for i in 0..SAMPLES {
        if !(e[i] > 0.0) {
            return Err(WhitneyError::Spec(format!("eps must be positive; eps({}) = {}", ts[i], e[i])));
        }
        if p[i] < 0.0 {
            return Err(WhitneyError::Spec(format!("rho must be nonnegative; rho({}) = {}", ts[i], p[i])));
        }
        if let Some(r) = spec.r {
            if p[i] > r as f64 {
                return Err(WhitneyError::Spec(format!("rho({}) = {} exceeds r = {r}", ts[i], p[i])));
            }
        }
    }
    for i in 0..SAMPLES - 1 {
        if !(e[i + 1] < e[i]) {
            return Err(WhitneyError::Spec(format!("eps is not strictly decreasing near t = {}", ts[i])));
        }
        if p[i + 1] < p[i] - 1e-12 * p[i].abs() {
            return Err(WhitneyError::Spec(format!("rho is not increasing near t = {}", ts[i])));
        }
    }
    for i in 1..SAMPLES - 1 {
        let second = e[i - 1] + e[i + 1] - 2.0 * e[i];
        if second < -1e-12 * e[i] {
            return Err(WhitneyError::Spec(format!("eps is not convex near t = {}", ts[i])));
        }
    }
    Ok(())
}

/// Rings 0..=stages+3 for the problem's case: ε_n = ε(b_{n+1}), r_n = ⌊ρ(b_{n+1})⌋.
pub fn build_scheme(spec: &ProblemSpec, stages: usize) -> Result<RingScheme, WhitneyError> {
    if stages < 2 {
        return Err(WhitneyError::Spec(format!("need at least 2 stages, got {stages}")));
    }
    build_scheme_rings(spec, stages + 4)
}

pub(crate) fn build_scheme_rings(spec: &ProblemSpec, rings: usize) -> Result<RingScheme, WhitneyError> {
    if !(spec.delta > 0.0) {
        return Err(WhitneyError::Spec(format!("delta must be positive, got {}", spec.delta)));
    }
    let last = ring_ends(spec.case, spec.delta, rings);
    let lo = match spec.case {
        Case::R => 0.0,
        Case::Rpos => last.0,
    };
    check_profiles(spec, lo, last.1)?;
    let mut eps = Vec::with_capacity(rings);
    let mut r = Vec::with_capacity(rings);
    for n in 0..rings {
        let (_, b1) = ring_ends(spec.case, spec.delta, n + 1);
        eps.push(spec.eps.eval(b1)?);
        r.push(spec.rho.eval(b1)?.floor() as u32);
    }
    RingScheme::from_sequences(spec.case, spec.delta, eps, r, spec.r)
}

/// D_{mn}: 1 for m = 0; c m^{dm} (case R, or n = 0); c (mn)^{dm} (case Rpos, n ≥ 1).
pub fn d_mn_exact(case: Case, m: u32, n: usize) -> BigUint {
    if m == 0 {
        return BigUint::one();
    }
    let base = match case {
        Case::Rpos if n >= 1 => m as u64 * n as u64,
        _ => m as u64,
    };
    BigUint::from(BUMP_C as u64) * BigUint::from(base).pow(BUMP_D as u32 * m)
}

pub fn ln_d_mn(case: Case, m: u32, n: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let base = match case {
        Case::Rpos if n >= 1 => m as f64 * n as f64,
        _ => m as f64,
    };
    BUMP_C.ln() + BUMP_D * m as f64 * base.ln()
}

/// N_n = 2^{n+1} D_{r_n n}.
pub fn big_n_exact(scheme: &RingScheme, n: usize) -> BigUint {
    d_mn_exact(scheme.case, scheme.r[n], n) << (n + 1)
}

pub fn ln_big_n(scheme: &RingScheme, n: usize) -> f64 {
    (n as f64 + 1.0) * 2f64.ln() + ln_d_mn(scheme.case, scheme.r[n], n)
}

pub fn biguint_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().expect("fits").ln();
    }
    let shift = bits - 60;
    (x >> shift).to_f64().expect("fits").ln() + shift as f64 * 2f64.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taylor::parse;
    use std::f64::consts::SQRT_2;

    fn spec(case: Case, delta: f64, eps: &str, rho: &str) -> ProblemSpec {
        ProblemSpec::new(parse("sin(t)").unwrap(), parse(eps).unwrap(), parse(rho).unwrap(), None, case, delta)
    }

    #[test]
    fn case_r_rings() {
        let s = build_scheme(&spec(Case::R, SQRT_2, "1/(1+t)", "0"), 2).unwrap();
        for n in 0..s.rings() {
            assert!((s.b[n] - SQRT_2 * n as f64).abs() < 1e-15);
            assert_eq!(s.a[n], -s.b[n]);
            assert_eq!(s.eps[n], 1.0 / (1.0 + SQRT_2 * (n as f64 + 1.0)));
        }
        assert!(s.rho.iter().all(|&p| (p - 1.0).abs() < 1e-15));
        assert_eq!(s.k[0], 2);
        assert_eq!(s.k[3], 5);
        assert!((s.width_constant - 2.0 * SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn case_rpos_rings() {
        let s = build_scheme(&spec(Case::Rpos, 1.0, "1/(1+t)", "0"), 2).unwrap();
        assert!((s.a[2] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.b[2], 3.0);
        assert!((s.rho[1] - 0.5 / 36.0).abs() < 1e-15);
        assert_eq!(s.a[0], s.b[0]);
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(build_scheme(&spec(Case::R, 1.0, "0.1", "0"), 2).is_err());
        assert!(build_scheme(&spec(Case::R, 1.0, "1/(1+t)", "2-t"), 2).is_err());
        assert!(build_scheme(&spec(Case::R, 1.0, "2-t/100", "0"), 2).is_ok());
        assert!(build_scheme(&spec(Case::R, 1.0, "1 - t^2/1000", "0"), 2).is_err());
        let mut capped = spec(Case::R, 1.0, "1/(1+t)", "t");
        capped.r = Some(2);
        assert!(build_scheme(&capped, 2).is_err());
        assert!(build_scheme(&spec(Case::R, 1.0, "1/(1+t)", "0"), 1).is_err());
    }

    #[test]
    fn from_sequences_conditions() {
        let ok = RingScheme::from_sequences(Case::R, 1.0, vec![1.0, 0.5, 0.3, 0.2], vec![0, 0, 1, 1], None);
        assert!(ok.is_ok());
        let not_convex = RingScheme::from_sequences(Case::R, 1.0, vec![1.0, 0.9, 0.5, 0.1], vec![0; 4], None);
        assert!(matches!(not_convex, Err(WhitneyError::Condition(_))));
        let bad_r = RingScheme::from_sequences(Case::R, 1.0, vec![1.0, 0.5, 0.3, 0.2], vec![1, 0, 1, 1], None);
        assert!(bad_r.is_err());
    }

    #[test]
    fn d_mn_values() {
        assert_eq!(d_mn_exact(Case::R, 0, 5), BigUint::one());
        assert_eq!(d_mn_exact(Case::R, 1, 5), BigUint::from(2048u32));
        assert_eq!(d_mn_exact(Case::Rpos, 1, 0), BigUint::from(2048u32));
        assert_eq!(d_mn_exact(Case::Rpos, 1, 2), BigUint::from(2048u64 << 16));
        for (m, n) in [(1, 1), (2, 3), (3, 0), (4, 7)] {
            for case in [Case::R, Case::Rpos] {
                let exact = biguint_ln(&d_mn_exact(case, m, n));
                assert!((exact - ln_d_mn(case, m, n)).abs() < 1e-9 * exact);
            }
        }
    }

    #[test]
    fn ring_membership() {
        let s = build_scheme(&spec(Case::R, SQRT_2, "1/(1+t)", "0"), 4).unwrap();
        assert_eq!(s.first_ring(Complex64::new(0.0, 0.0)), Some(0));
        assert_eq!(locate_ring(Case::R, SQRT_2, Complex64::new(0.0, 0.0), 10), Some(0));
        let z = Complex64::new(2.0, 1.0);
        assert_eq!(s.first_ring(z), locate_ring(Case::R, SQRT_2, z, 100));
        assert!(in_domain(Case::Rpos, Complex64::new(2.0, 1.0)));
        assert!(!in_domain(Case::Rpos, Complex64::new(1.0, 2.0)));
    }
}
