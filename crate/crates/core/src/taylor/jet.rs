use std::fmt::Debug;
use std::ops::{Add, Index, Mul, Neg, Sub};

use num_traits::{FromPrimitive, Num};

/// Coefficient types a jet can carry. `f64` in production; exact rationals
/// in tests of the Leibniz and division rules.
pub trait Scalar: Clone + Num + FromPrimitive + Debug {}
impl<T: Clone + Num + FromPrimitive + Debug> Scalar for T {}

/// Derivatives (f(t), f'(t), ..., f^{(k)}(t)) at a point, in natural units.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<T = f64> {
    point: f64,
    coeffs: Vec<T>,
}

fn binom<T: Scalar>(n: usize, k: usize) -> T {
    T::from_f64(crate::combinatorics::binomial_f64(n, k)).expect("binomial fits")
}

impl<T: Scalar> Jet<T> {
    pub fn from_coeffs(point: f64, coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a jet has at least one entry");
        Self { point, coeffs }
    }

    pub fn constant(point: f64, value: T, order: usize) -> Self {
        let mut coeffs = vec![T::zero(); order + 1];
        coeffs[0] = value;
        Self { point, coeffs }
    }

    pub fn zero(point: f64, order: usize) -> Self {
        Self::constant(point, T::zero(), order)
    }

    /// The jet of s ↦ s at `point`, with `value` the point in `T`.
    pub fn variable(point: f64, value: T, order: usize) -> Self {
        let mut j = Self::constant(point, value, order);
        if order >= 1 {
            j.coeffs[1] = T::one();
        }
        j
    }

    pub fn point(&self) -> f64 {
        self.point
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn value(&self) -> &T {
        &self.coeffs[0]
    }

    pub fn truncate(&self, order: usize) -> Self {
        let k = order.min(self.order());
        Self { point: self.point, coeffs: self.coeffs[..=k].to_vec() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn map(&self, f: impl Fn(usize, &T) -> T) -> Self {
        Self {
            point: self.point,
            coeffs: self.coeffs.iter().enumerate().map(|(i, c)| f(i, c)).collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|_, c| c.clone() * s.clone())
    }

    fn zip(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        let k = self.order().min(other.order());
        Self {
            point: self.point,
            coeffs: (0..=k).map(|i| f(&self.coeffs[i], &other.coeffs[i])).collect(),
        }
    }

    /// Leibniz rule: (fg)^{(n)} = Σ C(n,k) f^{(k)} g^{(n-k)}.
    pub fn mul_jet(&self, other: &Self) -> Self {
        let k = self.order().min(other.order());
        let coeffs = (0..=k)
            .map(|n| {
                (0..=n).fold(T::zero(), |acc, j| {
                    acc + binom::<T>(n, j) * self.coeffs[j].clone() * other.coeffs[n - j].clone()
                })
            })
            .collect();
        Self { point: self.point, coeffs }
    }

    /// Quotient by the recurrence h^{(n)} = (f^{(n)} − Σ_{k<n} C(n,k) h^{(k)} g^{(n−k)}) / g.
    /// Returns `None` when the denominator value is zero.
    pub fn div_jet(&self, other: &Self) -> Option<Self> {
        let g0 = other.coeffs[0].clone();
        if g0.is_zero() {
            return None;
        }
        let k = self.order().min(other.order());
        let mut h: Vec<T> = Vec::with_capacity(k + 1);
        for n in 0..=k {
            let mut acc = self.coeffs[n].clone();
            for (j, hj) in h.iter().enumerate() {
                acc = acc - binom::<T>(n, j) * hj.clone() * other.coeffs[n - j].clone();
            }
            h.push(acc / g0.clone());
        }
        Some(Self { point: self.point, coeffs: h })
    }
}

impl<T: Scalar> Index<usize> for Jet<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.coeffs[i]
    }
}

impl<T: Scalar> Add for &Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: Self) -> Jet<T> {
        self.zip(rhs, |a, b| a.clone() + b.clone())
    }
}

impl<T: Scalar> Sub for &Jet<T> {
    type Output = Jet<T>;
    fn sub(self, rhs: Self) -> Jet<T> {
        self.zip(rhs, |a, b| a.clone() - b.clone())
    }
}

impl<T: Scalar> Mul for &Jet<T> {
    type Output = Jet<T>;
    fn mul(self, rhs: Self) -> Jet<T> {
        self.mul_jet(rhs)
    }
}

impl<T: Scalar> Neg for &Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        self.map(|_, c| T::zero() - c.clone())
    }
}

fn factorials(k: usize) -> Vec<f64> {
    let mut f = vec![1.0; k + 1];
    for i in 1..=k {
        f[i] = f[i - 1] * i as f64;
    }
    f
}

/// Elementary functions through Taylor-coefficient recurrences.
impl Jet<f64> {
    /// Normalized coefficients f^{(n)}/n!.
    pub fn to_taylor(&self) -> Vec<f64> {
        let f = factorials(self.order());
        self.coeffs.iter().zip(&f).map(|(c, fi)| c / fi).collect()
    }

    pub fn from_taylor(point: f64, taylor: Vec<f64>) -> Self {
        let f = factorials(taylor.len() - 1);
        Self { point, coeffs: taylor.iter().zip(&f).map(|(c, fi)| c * fi).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn taylor_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
        let k = a.len().min(b.len());
        (0..k).map(|n| (0..=n).map(|j| a[j] * b[n - j]).sum()).collect()
    }

    pub fn exp(&self) -> Self {
        let a = self.to_taylor();
        let mut b = vec![0.0; a.len()];
        b[0] = a[0].exp();
        for n in 1..a.len() {
            let s: f64 = (1..=n).map(|k| k as f64 * a[k] * b[n - k]).sum();
            b[n] = s / n as f64;
        }
        Self::from_taylor(self.point, b)
    }

    /// Natural logarithm; `None` unless the value is positive.
    pub fn ln(&self) -> Option<Self> {
        let a = self.to_taylor();
        if !(a[0] > 0.0) {
            return None;
        }
        let mut b = vec![0.0; a.len()];
        b[0] = a[0].ln();
        for n in 1..a.len() {
            let s: f64 = (1..n).map(|k| k as f64 * b[k] * a[n - k]).sum();
            b[n] = (a[n] - s / n as f64) / a[0];
        }
        Some(Self::from_taylor(self.point, b))
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let a = self.to_taylor();
        let mut s = vec![0.0; a.len()];
        let mut c = vec![0.0; a.len()];
        s[0] = a[0].sin();
        c[0] = a[0].cos();
        for n in 1..a.len() {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for k in 1..=n {
                ss += k as f64 * a[k] * c[n - k];
                cc += k as f64 * a[k] * s[n - k];
            }
            s[n] = ss / n as f64;
            c[n] = -cc / n as f64;
        }
        (Self::from_taylor(self.point, s), Self::from_taylor(self.point, c))
    }

    /// Square root; `None` unless the value is positive.
    pub fn sqrt(&self) -> Option<Self> {
        let a = self.to_taylor();
        if !(a[0] > 0.0) {
            return None;
        }
        let mut b = vec![0.0; a.len()];
        b[0] = a[0].sqrt();
        for n in 1..a.len() {
            let s: f64 = (1..n).map(|k| b[k] * b[n - k]).sum();
            b[n] = (a[n] - s) / (2.0 * b[0]);
        }
        Some(Self::from_taylor(self.point, b))
    }

    pub fn recip(&self) -> Option<Self> {
        let a = self.to_taylor();
        if a[0] == 0.0 {
            return None;
        }
        let mut q = vec![0.0; a.len()];
        q[0] = 1.0 / a[0];
        for n in 1..a.len() {
            let s: f64 = (1..=n).map(|k| a[k] * q[n - k]).sum();
            q[n] = -s / a[0];
        }
        Some(Self::from_taylor(self.point, q))
    }

    /// Integer power; `None` for a negative exponent at a zero value.
    pub fn powi(&self, e: i32) -> Option<Self> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut n = e.unsigned_abs();
        let mut acc = Jet::constant(self.point, 1.0, self.order()).to_taylor();
        let mut sq = base.to_taylor();
        while n > 0 {
            if n & 1 == 1 {
                acc = Self::taylor_mul(&acc, &sq);
            }
            n >>= 1;
            if n > 0 {
                sq = Self::taylor_mul(&sq, &sq);
            }
        }
        Some(Self::from_taylor(self.point, acc))
    }

    /// Composition: `outer` is the jet of g at `inner`'s value; returns the
    /// jet of g∘inner by substituting the shifted inner series into g's.
    pub fn compose(outer: &Self, inner: &Self) -> Self {
        let k = outer.order().min(inner.order());
        let g = outer.to_taylor();
        let mut u = inner.truncate(k).to_taylor();
        u[0] = 0.0;
        let mut out = vec![0.0; k + 1];
        let mut pow = vec![0.0; k + 1];
        pow[0] = 1.0;
        for gm in g.iter().take(k + 1) {
            for (o, p) in out.iter_mut().zip(&pow) {
                *o += gm * p;
            }
            pow = Self::taylor_mul(&pow, &u);
        }
        Self::from_taylor(inner.point, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn leibniz_exact_in_rationals() {
        let f = Jet::from_coeffs(0.0, vec![q(1, 2), q(-3, 7), q(5, 3), q(2, 1), q(-1, 9)]);
        let g = Jet::from_coeffs(0.0, vec![q(2, 1), q(1, 5), q(-4, 3), q(7, 2), q(3, 11)]);
        let h = &f * &g;
        for n in 0..=4 {
            let mut expect = q(0, 1);
            for k in 0..=n {
                let c = BigRational::from_integer(BigInt::from(
                    crate::combinatorics::binomial_f64(n, k) as i64,
                ));
                expect += c * f[k].clone() * g[n - k].clone();
            }
            assert_eq!(h[n], expect);
        }
        let back = h.div_jet(&g).unwrap();
        assert_eq!(back, f);
        let lin = &(&f + &g) - &g;
        assert_eq!(lin, f);
    }

    #[test]
    fn elementary_functions_at_zero() {
        let t = Jet::variable(0.0, 0.0, 3);
        assert_eq!(t.exp().coeffs(), &[1.0, 1.0, 1.0, 1.0]);
        let (s, c) = t.sin_cos();
        assert_eq!(s.coeffs(), &[0.0, 1.0, 0.0, -1.0]);
        assert_eq!(c.coeffs(), &[1.0, 0.0, -1.0, 0.0]);
    }

    #[test]
    fn log_and_sqrt_inverses() {
        let t = Jet::variable(1.7, 1.7, 6);
        let back = t.exp().ln().unwrap();
        for (a, b) in back.coeffs().iter().zip(t.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
        let s = t.sqrt().unwrap();
        let sq = &s * &s;
        for (a, b) in sq.coeffs().iter().zip(t.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(Jet::variable(0.0, 0.0, 2).ln().is_none());
        assert!(Jet::variable(0.0, 0.0, 2).recip().is_none());
    }

    #[test]
    fn powi_and_recip() {
        let t = Jet::variable(2.0, 2.0, 4);
        let p = t.powi(3).unwrap();
        assert_eq!(p.coeffs(), &[8.0, 12.0, 12.0, 6.0, 0.0]);
        let r = t.powi(-1).unwrap();
        let d = Jet::constant(2.0, 1.0, 4).div_jet(&t).unwrap();
        for (a, b) in r.coeffs().iter().zip(d.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn composition_of_exp_with_square() {
        // exp(t^2) at t = 0.5.
        let t = Jet::variable(0.5, 0.5, 4);
        let inner = &t * &t;
        let outer = Jet::variable(0.25, 0.25, 4).exp();
        let c = Jet::compose(&outer, &inner);
        let direct = inner.exp();
        for (a, b) in c.coeffs().iter().zip(direct.coeffs()) {
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }
}
