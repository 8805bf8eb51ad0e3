//! Gauss–Hermite and Gauss–Legendre node tables and an adaptive panel
//! integrator for vector-valued integrands.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::WeierstrassError;

/// Nodes and weights of the n-point rule for ∫ e^{−x²} f(x) dx.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let pim4 = PI.powf(-0.25);
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    let mut out: Vec<(f64, f64)> = x.into_iter().zip(w).collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Nodes and weights of the n-point rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        out[i] = (-z, w);
        out[n - 1 - i] = (z, w);
    }
    out
}

pub const HERMITE_NODES: usize = 64;
pub const PANEL_NODES: usize = 20;

pub fn hermite64() -> &'static [(f64, f64)] {
    static T: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    T.get_or_init(|| gauss_hermite(HERMITE_NODES))
}

fn legendre20() -> &'static [(f64, f64)] {
    static T: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    T.get_or_init(|| gauss_legendre(PANEL_NODES))
}

const MAX_DEPTH: usize = 48;
const REL_TOL: f64 = 1e-13;

/// Result of a panel integration: componentwise integral, integral of the
/// componentwise absolute value, and an absolute error estimate.
pub struct PanelResult {
    pub value: Vec<f64>,
    pub abs: Vec<f64>,
    pub error: f64,
}

fn panel<F>(f: &F, a: f64, b: f64, dim: usize) -> Result<(Vec<f64>, Vec<f64>), WeierstrassError>
where
    F: Fn(f64) -> Result<Vec<f64>, WeierstrassError>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut v = vec![0.0; dim];
    let mut s = vec![0.0; dim];
    for &(x, w) in legendre20() {
        let y = f(c + h * x)?;
        for i in 0..dim {
            v[i] += w * h * y[i];
            s[i] += w * h * y[i].abs();
        }
    }
    Ok((v, s))
}

struct Budget {
    floor: Vec<f64>,
    panels: usize,
}

const MAX_PANELS: usize = 1 << 16;

fn adapt<F>(
    f: &F,
    a: f64,
    b: f64,
    whole: (Vec<f64>, Vec<f64>),
    depth: usize,
    budget: &mut Budget,
    out: &mut PanelResult,
) -> Result<(), WeierstrassError>
where
    F: Fn(f64) -> Result<Vec<f64>, WeierstrassError>,
{
    let dim = whole.0.len();
    let m = 0.5 * (a + b);
    let left = panel(f, a, m, dim)?;
    let right = panel(f, m, b, dim)?;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for i in 0..dim {
        let two = left.0[i] + right.0[i];
        let diff = (two - whole.0[i]).abs();
        let scale = left.1[i] + right.1[i];
        worst = worst.max(diff);
        if diff > REL_TOL * scale && diff > budget.floor[i] {
            ok = false;
        }
    }
    budget.panels += 2;
    if ok || m <= a || m >= b {
        for i in 0..dim {
            out.value[i] += left.0[i] + right.0[i];
            out.abs[i] += left.1[i] + right.1[i];
        }
        out.error += worst;
        return Ok(());
    }
    if depth >= MAX_DEPTH || budget.panels >= MAX_PANELS {
        return Err(WeierstrassError::Quadrature { lo: a, hi: b, depth });
    }
    adapt(f, a, m, left, depth + 1, budget, out)?;
    adapt(f, m, b, right, depth + 1, budget, out)
}

/// Adaptive Gauss–Legendre integration of a `dim`-vector integrand over
/// [lo, hi], pre-split into panels no wider than `max_width`.
///
/// A panel is accepted when each component's two-level difference is below
/// 1e−13 of the local absolute integral, or below 1e−16 of the component's
/// absolute integral over the whole range (the rounding floor).
pub fn integrate_panels<F>(f: F, lo: f64, hi: f64, dim: usize, max_width: f64) -> Result<PanelResult, WeierstrassError>
where
    F: Fn(f64) -> Result<Vec<f64>, WeierstrassError>,
{
    let mut out = PanelResult { value: vec![0.0; dim], abs: vec![0.0; dim], error: 0.0 };
    if !(hi > lo) {
        return Ok(out);
    }
    let pieces = ((hi - lo) / max_width).ceil().max(1.0) as usize;
    let mut first = Vec::with_capacity(pieces);
    let mut total = vec![0.0; dim];
    for p in 0..pieces {
        let a = lo + (hi - lo) * p as f64 / pieces as f64;
        let b = if p + 1 == pieces { hi } else { lo + (hi - lo) * (p + 1) as f64 / pieces as f64 };
        let whole = panel(&f, a, b, dim)?;
        for i in 0..dim {
            total[i] += whole.1[i];
        }
        first.push((a, b, whole));
    }
    let mut budget = Budget { floor: total.iter().map(|t| 1e-16 * t).collect(), panels: pieces };
    for (a, b, whole) in first {
        adapt(&f, a, b, whole, 0, &mut budget, &mut out)?;
    }
    Ok(out)
}
