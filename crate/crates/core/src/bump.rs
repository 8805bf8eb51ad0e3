//! The smooth step θ(t) = e^{−1/t}, the bump α = θ/(θ + θ(1−·)), rescaled
//! ramps and plateau-shaped humps, with their derivative bounds.

use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::combinatorics::binomial_f64;
use crate::taylor::Jet;

/// Below this argument the jet of θ is returned as exact zero.
///
/// At t = 1e−3 every |θ^{(n)}(t)| with n ≤ 30 is below 1e−250, so the
/// flush is invisible next to any other magnitude in a computation.
pub const THETA_FLUSH: f64 = 1e-3;

/// Headline constants of the derivative bound ‖α‖_n ≤ c n^{dn}.
pub const BUMP_C: f64 = 2048.0;
pub const BUMP_D: f64 = 16.0;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum BumpError {
    #[error("invalid window: {0}")]
    Window(String),
    #[error("reciprocal of a jet with zero value")]
    ZeroValue,
    #[error("jet order {have} is below {need}")]
    JetOrder { have: usize, need: usize },
}

/// p_n with θ^{(n)}(t) = p_n(t) t^{−2n} θ(t); coefficients low to high.
#[derive(Clone, Debug, PartialEq)]
pub struct PnPoly {
    pub n: usize,
    pub coeffs: Vec<BigInt>,
}

impl PnPoly {
    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_default()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    fn next(&self) -> PnPoly {
        // p_{n+1} = T^2 p_n' − (2nT − 1) p_n.
        let n = self.n as i64;
        let mut out = vec![BigInt::zero(); self.coeffs.len() + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i + 1] += c * (i as i64 - 2 * n);
            out[i] += c;
        }
        while out.len() > 1 && out.last().is_some_and(|c| c.is_zero()) {
            out.pop();
        }
        PnPoly { n: self.n + 1, coeffs: out }
    }
}

struct PnTable {
    exact: Vec<Arc<PnPoly>>,
    float: Vec<Arc<Vec<f64>>>,
}

fn pn_table() -> &'static RwLock<PnTable> {
    static T: OnceLock<RwLock<PnTable>> = OnceLock::new();
    T.get_or_init(|| {
        let p0 = PnPoly { n: 0, coeffs: vec![BigInt::from(1)] };
        RwLock::new(PnTable { exact: vec![Arc::new(p0)], float: vec![Arc::new(vec![1.0])] })
    })
}

fn ensure_pn(n: usize) {
    if pn_table().read().expect("pn table").exact.len() > n {
        return;
    }
    let mut t = pn_table().write().expect("pn table");
    while t.exact.len() <= n {
        let next = t.exact.last().expect("p_0 present").next();
        let fl = next.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::INFINITY)).collect();
        t.exact.push(Arc::new(next));
        t.float.push(Arc::new(fl));
    }
}

pub fn pn_poly(n: usize) -> Arc<PnPoly> {
    ensure_pn(n);
    pn_table().read().expect("pn table").exact[n].clone()
}

fn pn_float(k: usize) -> Vec<Arc<Vec<f64>>> {
    ensure_pn(k);
    pn_table().read().expect("pn table").float[..=k].to_vec()
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &x| acc * t + x)
}

/// Jet of θ(t) = e^{−1/t} (t > 0), 0 (t ≤ 0).
pub fn theta_jet(t: f64, k: usize) -> Jet {
    if t <= THETA_FLUSH {
        return Jet::zero(t, k);
    }
    let polys = pn_float(k);
    let lt = t.ln();
    let coeffs = polys
        .iter()
        .enumerate()
        .map(|(n, p)| {
            let v = horner(p, t);
            if v == 0.0 {
                0.0
            } else {
                v.signum() * (v.abs().ln() - 2.0 * n as f64 * lt - 1.0 / t).exp()
            }
        })
        .collect();
    Jet::from_coeffs(t, coeffs)
}

/// Jet of t ↦ θ(1 − t).
fn theta_star_jet(t: f64, k: usize) -> Jet {
    let j = theta_jet(1.0 - t, k);
    Jet::from_coeffs(t, j.coeffs().iter().enumerate().map(|(n, c)| if n % 2 == 1 { -c } else { *c }).collect())
}

/// φ = θ + θ(1 − ·), the denominator of α; bounded below by e^{−2} on [0, 1].
pub fn phi_jet(t: f64, k: usize) -> Jet {
    &theta_jet(t, k) + &theta_star_jet(t, k)
}

/// Jet of α = θ/(θ + θ(1 − ·)): 0 on (−∞, 0], 1 on [1, ∞).
pub fn alpha_jet(t: f64, k: usize) -> Jet {
    if t <= 0.0 {
        return Jet::zero(t, k);
    }
    if t >= 1.0 {
        return Jet::constant(t, 1.0, k);
    }
    theta_jet(t, k).div_jet(&phi_jet(t, k)).expect("phi >= e^-2 on [0,1]")
}

/// (1/φ)^{(n)} through Σ_{k=1}^n (−1)^k C(n+1,k+1) φ^{−(k+1)} (φ^k)^{(n)}.
pub fn recip_derivs(phi: &Jet, n: usize) -> Result<f64, BumpError> {
    if phi.order() < n {
        return Err(BumpError::JetOrder { have: phi.order(), need: n });
    }
    let p0 = phi[0];
    if p0 == 0.0 {
        return Err(BumpError::ZeroValue);
    }
    if n == 0 {
        return Ok(1.0 / p0);
    }
    let phi = phi.truncate(n);
    let mut power = phi.clone();
    let mut acc = 0.0;
    for k in 1..=n {
        if k > 1 {
            power = &power * &phi;
        }
        let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
        acc += sign * binomial_f64(n + 1, k + 1) * p0.powi(-(k as i32 + 1)) * power[n];
    }
    Ok(acc)
}

/// α jet built from θ and the reciprocal identity instead of jet division.
pub fn alpha_jet_via_recip(t: f64, k: usize) -> Jet {
    if t <= 0.0 {
        return Jet::zero(t, k);
    }
    if t >= 1.0 {
        return Jet::constant(t, 1.0, k);
    }
    let phi = phi_jet(t, k);
    let r: Vec<f64> = (0..=k).map(|n| recip_derivs(&phi, n).expect("phi > 0")).collect();
    &theta_jet(t, k) * &Jet::from_coeffs(t, r)
}

/// α_{a,b}(t) = α((t − a)/(b − a)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ramp {
    pub a: f64,
    pub b: f64,
}

impl Ramp {
    pub fn new(a: f64, b: f64) -> Result<Self, BumpError> {
        if !(a < b) {
            return Err(BumpError::Window(format!("ramp needs a < b, got ({a}, {b})")));
        }
        Ok(Self { a, b })
    }
}

pub fn ramp_jet(r: &Ramp, t: f64, k: usize) -> Jet {
    let w = r.b - r.a;
    let j = alpha_jet((t - r.a) / w, k);
    let mut scale = 1.0;
    let coeffs = j
        .coeffs()
        .iter()
        .map(|c| {
            let v = c * scale;
            scale /= w;
            v
        })
        .collect();
    Jet::from_coeffs(t, coeffs)
}

/// Plateau function: rises on [a, b], equals 1 on [b, a*], falls on [a*, b*].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Hump {
    pub a: f64,
    pub b: f64,
    pub a_star: f64,
    pub b_star: f64,
}

impl Hump {
    pub fn new(a: f64, b: f64, a_star: f64, b_star: f64) -> Result<Self, BumpError> {
        if !(a < b && b < a_star && a_star < b_star) {
            return Err(BumpError::Window(format!(
                "hump needs a < b < a* < b*, got ({a}, {b}, {a_star}, {b_star})"
            )));
        }
        Ok(Self { a, b, a_star, b_star })
    }

    pub fn eps(&self) -> f64 {
        (self.b - self.a) / 3.0
    }

    pub fn eps_star(&self) -> f64 {
        (self.b_star - self.a_star) / 3.0
    }

    /// Whether the derivative bound of [`Hump::derivative_bound_ln`] is proven.
    pub fn bound_applies(&self) -> bool {
        self.eps() <= 1.0 && self.eps_star() <= 1.0
    }

    /// ln(3^k C_k max{(b−a)^{−k}, (b*−a*)^{−k}}).
    pub fn derivative_bound_ln(&self, k: usize) -> f64 {
        let w = (self.b - self.a).min(self.b_star - self.a_star);
        k as f64 * 3f64.ln() + derivative_bound(k).ln_headline - k as f64 * w.ln()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b_star)
    }
}

pub fn hump_jet(h: &Hump, t: f64, k: usize) -> Jet {
    if t <= h.b {
        let e = h.eps();
        ramp_jet(&Ramp { a: h.a + e, b: h.b - e }, t, k)
    } else {
        let e = h.eps_star();
        let r = ramp_jet(&Ramp { a: h.a_star + e, b: h.b_star - e }, t, k);
        &Jet::constant(t, 1.0, k) - &r
    }
}

/// C_n = c n^{dn} together with the sharper 2^{7n+4} n^{9n}, both as logs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivBoundCert {
    pub n: usize,
    pub ln_headline: f64,
    pub ln_sharp: f64,
    pub flush_threshold: f64,
}

impl DerivBoundCert {
    pub fn headline(&self) -> f64 {
        self.ln_headline.exp()
    }

    pub fn sharp(&self) -> f64 {
        self.ln_sharp.exp()
    }
}

pub fn derivative_bound(n: usize) -> DerivBoundCert {
    let (h, s) = if n == 0 {
        (0.0, 0.0)
    } else {
        let nf = n as f64;
        let ln2 = 2f64.ln();
        (
            BUMP_C.ln() + BUMP_D * nf * nf.ln(),
            (7.0 * nf + 4.0) * ln2 + 9.0 * nf * nf.ln(),
        )
    };
    DerivBoundCert { n, ln_headline: h, ln_sharp: s, flush_threshold: THETA_FLUSH }
}
