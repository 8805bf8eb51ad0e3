//! Exact counting functions and the elementary inequalities used by the
//! composition and bump estimates.
//!
//! Stirling numbers, Bell numbers and partial Bell polynomials are kept as
//! big integers. Evaluation against jets happens in `f64` only at the end.

use std::collections::BTreeMap;
use std::f64::consts::E;
use std::sync::{Arc, RwLock};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::taylor::Jet;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CombinatoricsError {
    #[error("index out of range: m = {m} exceeds n = {n}")]
    IndexOrder { m: usize, n: usize },
    #[error("jet order {have} is below the requested derivative order {need}")]
    JetOrder { have: usize, need: usize },
    #[error("{0}")]
    Domain(String),
}

/// Binomial coefficient C(n, k), zero when k > n.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Binomial coefficient as `f64`; exact up to 2^53.
pub fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Stirling number of the second kind S(n, m).
pub fn stirling2(n: usize, m: usize) -> Result<BigUint, CombinatoricsError> {
    if m > n {
        return Err(CombinatoricsError::IndexOrder { m, n });
    }
    // Row recurrence S(i+1, j) = j S(i, j) + S(i, j-1).
    let mut row = vec![BigUint::zero(); m + 1];
    row[0] = BigUint::one();
    for _ in 0..n {
        for j in (1..=m).rev() {
            let carry = row[j - 1].clone();
            row[j] = &row[j] * j + carry;
        }
        row[0] = BigUint::zero();
    }
    Ok(row[m].clone())
}

pub fn bell_number(n: usize) -> BigUint {
    (0..=n)
        .map(|m| stirling2(n, m).expect("m <= n"))
        .fold(BigUint::zero(), |acc, s| acc + s)
}

/// Partial exponential Bell polynomial B_{mn}(y_1, ..., y_{n-m+1}).
///
/// Monomials are keyed by exponent vectors of length `n - m + 1`
/// (or 0 for the degenerate cases).
#[derive(Clone, Debug, PartialEq)]
pub struct BellPolynomial {
    pub m: usize,
    pub n: usize,
    pub terms: BTreeMap<Vec<u32>, BigUint>,
}

impl BellPolynomial {
    fn width(m: usize, n: usize) -> usize {
        if m == 0 || m > n {
            0
        } else {
            n - m + 1
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluate at y_i = `ys[i - 1]`. Missing trailing variables are an error.
    pub fn eval(&self, ys: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(exps, c)| {
                let coeff = c.to_f64().unwrap_or(f64::INFINITY);
                exps.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .fold(coeff, |acc, (i, &e)| acc * ys[i].powi(e as i32))
            })
            .sum()
    }

    /// Exact value at (1, ..., 1).
    pub fn eval_ones(&self) -> BigUint {
        self.terms.values().fold(BigUint::zero(), |acc, c| acc + c)
    }

    pub fn degree_set(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.keys().map(|e| e.iter().sum()).collect();
        d.sort_unstable();
        d.dedup();
        d
    }
}

type BellCache = RwLock<BTreeMap<(usize, usize), Arc<BellPolynomial>>>;

fn bell_cache() -> &'static BellCache {
    static CACHE: std::sync::OnceLock<BellCache> = std::sync::OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(BTreeMap::new()))
}

/// Partial Bell polynomial built from
/// B_{n,k} = sum_{i=1}^{n-k+1} C(n-1, i-1) y_i B_{n-i,k-1}.
pub fn bell_polynomial(m: usize, n: usize) -> Result<Arc<BellPolynomial>, CombinatoricsError> {
    if m > n {
        return Err(CombinatoricsError::IndexOrder { m, n });
    }
    if let Some(p) = bell_cache().read().expect("bell cache").get(&(m, n)) {
        return Ok(p.clone());
    }
    let poly = Arc::new(build_bell(m, n)?);
    bell_cache()
        .write()
        .expect("bell cache")
        .entry((m, n))
        .or_insert_with(|| poly.clone());
    Ok(poly)
}

fn build_bell(m: usize, n: usize) -> Result<BellPolynomial, CombinatoricsError> {
    let width = BellPolynomial::width(m, n);
    let mut terms = BTreeMap::new();
    if m == 0 {
        if n == 0 {
            terms.insert(Vec::new(), BigUint::one());
        }
        return Ok(BellPolynomial { m, n, terms });
    }
    for i in 1..=(n - m + 1) {
        let sub = bell_polynomial(m - 1, n - i)?;
        if sub.is_zero() {
            continue;
        }
        let c = binomial((n - 1) as u64, (i - 1) as u64);
        for (exps, coeff) in sub.terms.iter() {
            let mut e = vec![0u32; width];
            for (j, &x) in exps.iter().enumerate() {
                e[j] += x;
            }
            e[i - 1] += 1;
            *terms.entry(e).or_insert_with(BigUint::zero) += &c * coeff;
        }
    }
    Ok(BellPolynomial { m, n, terms })
}

/// n-th derivative of g∘f from the jets of g at f(t) and of f at t.
pub fn faa_di_bruno(g_jet: &Jet, f_jet: &Jet, n: usize) -> Result<f64, CombinatoricsError> {
    if g_jet.order() < n {
        return Err(CombinatoricsError::JetOrder { have: g_jet.order(), need: n });
    }
    if f_jet.order() < n {
        return Err(CombinatoricsError::JetOrder { have: f_jet.order(), need: n });
    }
    if n == 0 {
        return Ok(g_jet[0]);
    }
    let ys: Vec<f64> = (1..=n).map(|i| f_jet[i]).collect();
    let mut acc = 0.0;
    for m in 1..=n {
        let b = bell_polynomial(m, n)?;
        acc += g_jet[m] * b.eval(&ys);
    }
    Ok(acc)
}

/// G (nF)^n, the bound on |(g∘f)^{(n)}| when every |f^{(k)}| ≤ F and |g^{(m)}| ≤ G.
pub fn composition_bound(big_f: f64, big_g: f64, n: usize) -> Result<f64, CombinatoricsError> {
    if big_f < 1.0 {
        return Err(CombinatoricsError::Domain(format!(
            "composition bound needs F >= 1, got {big_f}"
        )));
    }
    if n == 0 {
        return Err(CombinatoricsError::Domain("composition bound needs n >= 1".into()));
    }
    Ok(big_g * (n as f64 * big_f).powi(n as i32))
}

/// (e (n/e)^n, (e^2/4)((n+1)/e)^{n+1}), a bracket around n!.
pub fn factorial_sandwich(n: usize) -> (f64, f64) {
    let nf = n as f64;
    // Rearranged so that both sides are exactly 1 at n = 1.
    let lower = nf * (nf / E).powf(nf - 1.0);
    let upper = ((nf + 1.0) / 2.0).powi(2) * ((nf + 1.0) / E).powf(nf - 1.0);
    (lower, upper)
}

/// t^ρ (4/e²) (e/(ρ+2))^{ρ+2}, a lower bound for t^n/n! over integers n ≤ ρ.
pub fn cor14_lower(t: f64, rho: f64) -> Result<f64, CombinatoricsError> {
    if !(t > 0.0) || rho < E * t {
        return Err(CombinatoricsError::Domain(format!(
            "need rho >= e*t > 0, got t = {t}, rho = {rho}"
        )));
    }
    Ok(t.powf(rho) * 4.0 / (E * E) * (E / (rho + 2.0)).powf(rho + 2.0))
}

/// φ(t) − φ(t+1).
pub fn delta_difference<F: Fn(f64) -> f64>(phi: F, t: f64) -> Result<f64, CombinatoricsError> {
    let a = phi(t);
    let b = phi(t + 1.0);
    if !a.is_finite() || !b.is_finite() {
        return Err(CombinatoricsError::Domain(format!(
            "difference undefined at t = {t}"
        )));
    }
    Ok(a - b)
}

/// Divided difference Δ(s, t) = (φ(s) − φ(t)) / (s − t) of a scalar function
/// on an interval.
pub struct DifferenceProbe<F> {
    pub phi: F,
    pub interval: (f64, f64),
}

impl<F: Fn(f64) -> f64> DifferenceProbe<F> {
    pub fn new(phi: F, interval: (f64, f64)) -> Self {
        Self { phi, interval }
    }

    pub fn delta(&self, s: f64, t: f64) -> Result<f64, CombinatoricsError> {
        let (lo, hi) = self.interval;
        if s == t || s < lo || s > hi || t < lo || t > hi {
            return Err(CombinatoricsError::Domain(format!(
                "difference quotient undefined at ({s}, {t})"
            )));
        }
        Ok(((self.phi)(s) - (self.phi)(t)) / (s - t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn stirling_small_values() {
        assert_eq!(stirling2(0, 0).unwrap(), big(1));
        assert_eq!(stirling2(3, 2).unwrap(), big(3));
        assert_eq!(stirling2(4, 2).unwrap(), big(7));
        assert_eq!(stirling2(5, 0).unwrap(), big(0));
        assert!(stirling2(2, 3).is_err());
    }

    /// Count set partitions of {0..n} into exactly m blocks by restricted growth strings.
    fn brute_partitions(n: usize, m: usize) -> u64 {
        fn rec(i: usize, n: usize, max: usize, m: usize) -> u64 {
            if i == n {
                return (max == m) as u64;
            }
            (0..=max.min(m - 1))
                .map(|b| rec(i + 1, n, max.max(b + 1), m))
                .sum()
        }
        if n == 0 {
            return (m == 0) as u64;
        }
        if m == 0 {
            return 0;
        }
        rec(0, n, 0, m)
    }

    #[test]
    fn stirling_matches_enumeration() {
        for n in 0..9 {
            for m in 0..=n {
                assert_eq!(stirling2(n, m).unwrap(), big(brute_partitions(n, m)), "S({n},{m})");
            }
        }
    }

    #[test]
    fn bell_numbers() {
        assert_eq!(bell_number(0), big(1));
        assert_eq!(bell_number(3), big(5));
        assert_eq!(bell_number(4), big(15));
    }

    #[test]
    fn bell_polynomial_examples() {
        assert!(bell_polynomial(0, 2).unwrap().is_zero());
        let b13 = bell_polynomial(1, 3).unwrap();
        assert_eq!(b13.terms.len(), 1);
        assert_eq!(b13.terms.get(&vec![0, 0, 1]), Some(&big(1)));
        let b33 = bell_polynomial(3, 3).unwrap();
        assert_eq!(b33.terms.len(), 1);
        assert_eq!(b33.terms.get(&vec![3]), Some(&big(1)));
        assert_eq!(bell_polynomial(0, 0).unwrap().eval_ones(), big(1));
        assert!(bell_polynomial(4, 3).is_err());
    }

    #[test]
    fn bell_polynomial_ones_and_homogeneity() {
        for n in 1..=10 {
            for m in 1..=n {
                let b = bell_polynomial(m, n).unwrap();
                assert_eq!(b.eval_ones(), stirling2(n, m).unwrap());
                assert_eq!(b.degree_set(), vec![m as u32]);
            }
        }
    }

    #[test]
    fn faa_di_bruno_examples() {
        // f = id: the composition is g itself.
        let g = Jet::from_coeffs(0.3, vec![0.5, -1.25, 3.0]);
        let f = Jet::from_coeffs(0.3, vec![0.3, 1.0, 0.0]);
        assert_eq!(faa_di_bruno(&g, &f, 1).unwrap(), -1.25);

        // (t^2)^3 = t^6 at 1: sixth-power third derivative is 120.
        let f = Jet::from_coeffs(1.0, vec![1.0, 2.0, 2.0, 0.0]);
        let g = Jet::from_coeffs(1.0, vec![1.0, 3.0, 6.0, 6.0]);
        assert!((faa_di_bruno(&g, &f, 3).unwrap() - 120.0).abs() < 1e-12);

        // exp(exp t) at 0: second derivative 2e.
        let f = Jet::from_coeffs(0.0, vec![1.0; 3]);
        let g = Jet::from_coeffs(1.0, vec![E; 3]);
        assert!((faa_di_bruno(&g, &f, 2).unwrap() - 2.0 * E).abs() < 1e-12);

        let short = Jet::from_coeffs(0.0, vec![1.0]);
        assert!(faa_di_bruno(&short, &f, 2).is_err());
    }

    #[test]
    fn composition_bound_examples() {
        assert_eq!(composition_bound(1.0, 1.0, 1).unwrap(), 1.0);
        assert_eq!(composition_bound(1.0, 1.0, 3).unwrap(), 27.0);
        assert!(composition_bound(0.5, 1.0, 3).is_err());
    }

    #[test]
    fn factorial_sandwich_examples() {
        let (lo, hi) = factorial_sandwich(1);
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        let (lo, hi) = factorial_sandwich(2);
        assert!((lo - 1.4715).abs() < 1e-4, "{lo}");
        assert!((hi - 2.4831).abs() < 1e-4, "{hi}");
        let (lo, hi) = factorial_sandwich(10);
        assert!(lo <= 3628800.0 && 3628800.0 <= hi);
    }

    #[test]
    fn cor14_examples() {
        let v = cor14_lower(0.1, 1.0).unwrap();
        assert!(v <= 0.1);
        let v = cor14_lower(1.0, 3.0).unwrap();
        assert!(v <= 1.0 / 6.0);
        let v = cor14_lower(0.5, 2.0).unwrap();
        assert!(v <= 1.0);
        assert!(cor14_lower(1.0, 2.0).is_err());
    }

    #[test]
    fn delta_difference_examples() {
        assert_eq!(delta_difference(|_| 4.0, 2.0).unwrap(), 0.0);
        let eps = 0.3;
        let t = 2.5;
        let d = delta_difference(|s| eps / (s + 1.0), t).unwrap();
        assert!((d - eps / ((t + 1.0) * (t + 2.0))).abs() < 1e-15);
        let dl = 0.7;
        let d = delta_difference(|s| dl * (-s).exp(), t).unwrap();
        assert!((d - dl * (-t).exp() * (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn difference_probe_symmetric() {
        let p = DifferenceProbe::new(|x: f64| x * x * x, (-2.0, 2.0));
        assert_eq!(p.delta(0.5, 1.5).unwrap(), p.delta(1.5, 0.5).unwrap());
        assert!(p.delta(1.0, 1.0).is_err());
        assert!(p.delta(1.0, 3.0).is_err());
    }

    #[test]
    fn binomial_agrees_between_representations() {
        for n in 0..40usize {
            for k in 0..=n {
                assert_eq!(
                    binomial(n as u64, k as u64).to_f64().unwrap(),
                    binomial_f64(n, k)
                );
            }
        }
    }
}
