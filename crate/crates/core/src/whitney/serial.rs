//! JSON form of an approximant. Loading rebuilds the same evaluator without
//! recomputing any stage.

use serde::{Deserialize, Serialize};

use super::engine::{Approximant, LedgerRow, Stage, StageRule, StageWindow, TailConstants};
use super::scheme::RingScheme;
use super::{Case, Mode, ProblemSpec, WhitneyError};
use crate::taylor::parse;
use crate::weierstrass::quadrature::{HERMITE_NODES, PANEL_NODES};

pub const FORMAT: &str = "whitney-approximant/1";

/// f64 fields that may be infinite are written as strings.
pub(crate) mod ext_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&x.to_string())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ProblemDoc {
    f: String,
    eps: String,
    rho: String,
    r: Option<u32>,
    case: Case,
    delta: f64,
}

#[derive(Serialize, Deserialize)]
struct RuleDoc {
    #[serde(flatten)]
    rule: StageRule,
    /// Nodes per rule application, or series terms.
    nodes: usize,
    /// ln of the heat-series weights 1/(j! (4λ)^j).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    ln_weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct StageDoc {
    n: usize,
    window: StageWindow,
    support: (f64, f64),
    ln_lambda: f64,
    /// λ itself when representable.
    lambda: Option<f64>,
    rule: RuleDoc,
    h_norms: Vec<f64>,
    ledger: LedgerRow,
}

#[derive(Serialize, Deserialize)]
struct Doc {
    format: String,
    mode: Mode,
    f: String,
    problem: Option<ProblemDoc>,
    scheme: RingScheme,
    max_order: usize,
    protected: Option<(f64, f64)>,
    tail: TailConstants,
    stages: Vec<StageDoc>,
}

fn rule_doc(st: &Stage) -> RuleDoc {
    match st.rule {
        StageRule::HeatSeries { terms } => {
            let mut w = Vec::with_capacity(terms);
            let mut ln = 0.0;
            for j in 0..terms {
                if j > 0 {
                    ln -= (j as f64).ln() + 4f64.ln() + st.ln_lambda;
                }
                w.push(ln);
            }
            RuleDoc { rule: st.rule, nodes: terms, ln_weights: w }
        }
        StageRule::Transform => {
            let nodes = if st.lambda.sqrt() * (st.support.1 - st.support.0) > 12.0 { HERMITE_NODES } else { PANEL_NODES };
            RuleDoc { rule: st.rule, nodes, ln_weights: Vec::new() }
        }
    }
}

pub fn to_json(ap: &Approximant) -> Result<String, WhitneyError> {
    let doc = Doc {
        format: FORMAT.into(),
        mode: ap.mode,
        f: ap.f.to_string(),
        problem: ap.spec.as_ref().map(|s| ProblemDoc {
            f: s.f.to_string(),
            eps: s.eps.to_string(),
            rho: s.rho.to_string(),
            r: s.r,
            case: s.case,
            delta: s.delta,
        }),
        scheme: ap.scheme.clone(),
        max_order: ap.max_order,
        protected: ap.protected_region(),
        tail: ap.tail.clone(),
        stages: ap
            .stages
            .iter()
            .map(|st| StageDoc {
                n: st.n,
                window: st.window.clone(),
                support: st.support,
                ln_lambda: st.ln_lambda,
                lambda: st.lambda.is_finite().then_some(st.lambda),
                rule: rule_doc(st),
                h_norms: st.h_norms.clone(),
                ledger: st.ledger.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).map_err(|e| WhitneyError::Serial(e.to_string()))
}

pub fn from_json(text: &str) -> Result<Approximant, WhitneyError> {
    let doc: Doc = serde_json::from_str(text).map_err(|e| WhitneyError::Serial(e.to_string()))?;
    if doc.format != FORMAT {
        return Err(WhitneyError::Serial(format!("unsupported format '{}', expected '{FORMAT}'", doc.format)));
    }
    let spec = match doc.problem {
        Some(p) => Some(ProblemSpec::new(parse(&p.f)?, parse(&p.eps)?, parse(&p.rho)?, p.r, p.case, p.delta)),
        None => None,
    };
    let stages = doc
        .stages
        .into_iter()
        .map(|s| Stage {
            n: s.n,
            window: s.window,
            support: s.support,
            ln_lambda: s.ln_lambda,
            lambda: s.ln_lambda.exp(),
            rule: s.rule.rule,
            h_norms: s.h_norms,
            ledger: s.ledger,
        })
        .collect();
    Ok(Approximant { f: parse(&doc.f)?, spec, mode: doc.mode, scheme: doc.scheme, stages, tail: doc.tail, max_order: doc.max_order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::whitney::build_approximant;

    #[test]
    fn round_trip_preserves_evaluation() {
        let p = |s: &str| parse(s).unwrap();
        let spec = ProblemSpec::new(p("sin(t)"), p("1/(2*(1+t))"), p("0"), None, Case::R, std::f64::consts::SQRT_2);
        let ap = build_approximant(&spec, 3, Mode::Certified).unwrap();
        let text = to_json(&ap).unwrap();
        assert!(text.contains(FORMAT));
        let back = from_json(&text).unwrap();
        assert_eq!(back, ap);
        for t in [-1.3, 0.0, 0.77] {
            assert_eq!(back.eval_jet(t, 1).unwrap(), ap.eval_jet(t, 1).unwrap());
        }
        assert!(from_json(&text.replace(FORMAT, "whitney-approximant/9")).is_err());
    }
}
