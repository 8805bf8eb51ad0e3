//! Pointwise verification of |(f − g)^{(k)}(t)| < ε(t) and audits of the
//! stage ledger.

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use super::engine::{Approximant, StageResidual};
use super::scheme::big_n_exact;
use super::WhitneyError;
use crate::taylor::DEFAULT_INFLATION;
use crate::weierstrass::{rule_for, transform_jet, RuleKind};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyRow {
    pub t: f64,
    pub k: usize,
    pub deviation: f64,
    pub eps: f64,
    /// Certified bound on the gap between the computed and the true g.
    pub eval_error: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub protected: (f64, f64),
    /// min over rows of ε − deviation − eval_error.
    pub worst_margin: f64,
    pub pass: bool,
}

impl VerifyReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,k,deviation,eps,pass\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{:e},{:e},{}\n", r.t, r.k, r.deviation, r.eps, r.pass));
        }
        s
    }
}

/// `n` equispaced points on [lo, hi].
pub fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

/// Checks every order k ≤ ⌊ρ⌋ at every point. A row passes when the
/// deviation plus the evaluation error stays strictly below ε. Points
/// outside the protected region K_{N−2} are refused.
pub fn verify(ap: &Approximant, points: &[f64]) -> Result<VerifyReport, WhitneyError> {
    let spec = ap.spec.as_ref().ok_or_else(|| WhitneyError::Spec("verification needs the problem profiles".into()))?;
    let protected = ap
        .protected_region()
        .ok_or_else(|| WhitneyError::Spec("a single stage has no protected region".into()))?;
    if let Some(&t) = points.iter().find(|&&t| !(t >= protected.0 && t <= protected.1)) {
        return Err(WhitneyError::Unprotected { t, lo: protected.0, hi: protected.1 });
    }
    let per_point: Vec<Vec<VerifyRow>> = points
        .par_iter()
        .map(|&t| {
            let kmax = spec.order_at(t)?.min(ap.max_order);
            let g = ap.eval_jet(t, kmax)?;
            let f = ap.f.jet(t, kmax)?;
            let eps = spec.eps_at(t)?;
            Ok((0..=kmax)
                .map(|k| {
                    let deviation = (f[k] - g[k]).abs();
                    let eval_error = ap.eval_error(k);
                    VerifyRow { t, k, deviation, eps, eval_error, pass: deviation + eval_error < eps }
                })
                .collect())
        })
        .collect::<Result<_, WhitneyError>>()?;
    let rows: Vec<VerifyRow> = per_point.into_iter().flatten().collect();
    let worst_margin = rows.iter().map(|r| r.eps - r.deviation - r.eval_error).fold(f64::INFINITY, f64::min);
    let pass = rows.iter().all(|r| r.pass);
    Ok(VerifyReport { rows, protected, worst_margin, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckItem {
    pub name: &'static str,
    pub n: usize,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerCheck {
    pub items: Vec<CheckItem>,
    pub pass: bool,
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Audits the built stages against the invariants of the construction.
///
/// The δ relations are checked exactly on the stored floats. Norm-based
/// items use the inflated samples.
pub fn ledger_check(ap: &Approximant) -> Result<LedgerCheck, WhitneyError> {
    let s = &ap.scheme;
    let st = &ap.stages;
    let nst = st.len();
    let mut items = Vec::new();
    let mut push = |name, n, pass, detail: String| items.push(CheckItem { name, n, pass, detail });

    for w in st.windows(2) {
        let (a, b) = (&w[0].ledger, &w[1].ledger);
        push("delta-halving", a.n, rat(2.0 * b.delta) <= rat(a.delta), format!("2*delta_{} = {:e}, delta_{} = {:e}", b.n, 2.0 * b.delta, a.n, a.delta));
    }
    for n in 0..nst {
        let mut sum = BigRational::from_integer(BigInt::from(0));
        for m in n..nst {
            sum += rat(st[m].ledger.delta) * BigRational::from_integer(BigInt::from(big_n_exact(s, m + 1)));
        }
        let cap = (rat(s.eps[n]) - rat(s.eps[nst])) / BigRational::from_integer(BigInt::from(4));
        push("telescoping", n, sum <= cap, format!("sum delta_m N_(m+1) over m >= {n} vs (eps_{n} - eps_{nst})/4"));
    }
    for stage in st {
        let n = stage.n;
        let l = &stage.ledger;
        let (lo, hi) = s.k_interval(n + 2);
        push("support", n, stage.support == (lo, hi), format!("supp phi_{n} = [{}, {}], K_{} = [{lo}, {hi}]", stage.support.0, stage.support.1, n + 2));

        let phi_scaled = (l.m_n - 1.0) / DEFAULT_INFLATION;
        push("hump-norm", n, phi_scaled.ln() <= l.ln_d, format!("2^r ||phi||_r (sampled) = {phi_scaled:e}, D = e^{:.4}", l.ln_d));

        // |W h − h|^{(k)} ≤ ‖h^{(k+2)}‖ / (4λ).
        let r = l.r_n as usize;
        let bound = (0..=r).map(|k| stage.h_norms[k + 2]).fold(0.0, f64::max).ln() - (4f64.ln() + stage.ln_lambda);
        let mut detail = format!("||W h - h||_r <= {:e} vs delta = {:e}", bound.exp(), l.delta);
        let mut measured: f64 = 0.0;
        if stage.lambda.is_finite() && stage.h_norms[0] > 0.0 {
            let res = StageResidual { approx: ap, n };
            for t in grid(lo, hi, 51) {
                if rule_for(stage.support, stage.lambda, t).kind != RuleKind::GaussHermiteSubstituted {
                    continue;
                }
                let w = transform_jet(&res, stage.lambda, t, r)?;
                let h = ap.residual_at(n, t, r)?;
                for k in 0..=r {
                    measured = measured.max((w[k] - h[k]).abs());
                }
            }
            detail.push_str(&format!(", sampled direct {measured:e}"));
        }
        push("residual", n, bound.exp() < l.delta && measured <= l.delta, detail);

        if n >= 1 && stage.h_norms[0] > 0.0 {
            let lhs = l.ln_big_h - stage.lambda / n as f64;
            let rhs = ap.tail.ln_c_star - 2.0 * (n as f64).ln();
            push("tail-term", n, lhs <= rhs, format!("ln(H_n e^(-lambda_n/n)) = {lhs:e}, ln c_n = {rhs:.4}"));
        }
    }
    for w in st.windows(2) {
        let n = w[0].n;
        push("mu-monotone", n, w[1].ledger.ln_mu >= w[0].ledger.ln_mu, format!("ln mu: {:.6} -> {:.6}", w[0].ledger.ln_mu, w[1].ledger.ln_mu));
        push("lambda-increasing", n, w[1].ln_lambda > w[0].ln_lambda, format!("ln lambda: {:.6} -> {:.6}", w[0].ln_lambda, w[1].ln_lambda));
    }
    let pass = items.iter().all(|i| i.pass);
    Ok(LedgerCheck { items, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taylor::parse;
    use crate::whitney::{build_approximant, Case, Mode, ProblemSpec};

    fn desk(mode: Mode, rho: &str, stages: usize) -> Approximant {
        let p = |s: &str| parse(s).unwrap();
        let spec = ProblemSpec::new(p("sin(t)"), p("1/(2*(1+t))"), p(rho), None, Case::R, std::f64::consts::SQRT_2);
        build_approximant(&spec, stages, mode).unwrap()
    }

    #[test]
    fn verify_refuses_outside_protected_region() {
        let ap = desk(Mode::Practical, "1", 3);
        let (_, hi) = ap.protected_region().unwrap();
        assert!(matches!(verify(&ap, &[hi + 0.1]), Err(WhitneyError::Unprotected { .. })));
        let r = verify(&ap, &grid(-hi, hi, 21)).unwrap();
        assert!(r.pass, "worst margin {}", r.worst_margin);
        assert_eq!(r.rows.len(), 42);
        assert!(r.to_csv().starts_with("t,k,deviation,eps,pass\n"));
    }

    #[test]
    fn ledger_passes_for_desk_runs() {
        for (mode, rho) in [(Mode::Practical, "1"), (Mode::Certified, "0")] {
            let ap = desk(mode, rho, 3);
            let c = ledger_check(&ap).unwrap();
            for i in &c.items {
                assert!(i.pass, "{mode:?}: {} at {}: {}", i.name, i.n, i.detail);
            }
        }
    }
}
