//! The staged construction: rings K_n with budgets ε_n and orders r_n, hump
//! windows φ_n, and g = Σ W_{λ_n} h_n with h_n = φ_n (f − Σ_{m<n} g_m).

pub mod engine;
pub mod scheme;
pub mod serial;
pub mod verify;

use serde::{Deserialize, Serialize};

use crate::taylor::{Expr, TaylorError};
use crate::weierstrass::WeierstrassError;

pub use engine::{build_approximant, build_with_scheme, Approximant, ComplexEval, LedgerRow, Stage, StageRule, StageWindow, TailConstants};
pub use scheme::{build_scheme, RingScheme};
pub use serial::{from_json, to_json, FORMAT};
pub use verify::{ledger_check, verify, LedgerCheck, VerifyReport, VerifyRow};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum WhitneyError {
    #[error("invalid problem: {0}")]
    Spec(String),
    #[error("ring scheme condition violated: {0}")]
    Condition(String),
    #[error("order {k} exceeds the available smoothness {max}")]
    Smoothness { k: usize, max: usize },
    #[error("t = {t} lies outside the protected region [{lo}, {hi}]")]
    Unprotected { t: f64, lo: f64, hi: f64 },
    #[error("stage {n}: {message}")]
    Stage { n: usize, message: String },
    #[error("serialization: {0}")]
    Serial(String),
    #[error(transparent)]
    Taylor(#[from] TaylorError),
    #[error(transparent)]
    Weierstrass(#[from] WeierstrassError),
}

/// The real line, or the half-line (0, ∞) with the sector |Im z| < Re z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    R,
    Rpos,
}

impl std::str::FromStr for Case {
    type Err = WhitneyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "R" | "r" => Ok(Case::R),
            "Rpos" | "rpos" | "R+" => Ok(Case::Rpos),
            _ => Err(WhitneyError::Spec(format!("unknown case '{s}', expected R or Rpos"))),
        }
    }
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Case::R => "R",
            Case::Rpos => "Rpos",
        })
    }
}

/// How stage parameters are chosen.
///
/// `Certified` uses the closed-form λ_n = μ_n; `Practical` uses the smallest
/// λ that the sampled residual norms allow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Certified,
    Practical,
}

impl std::str::FromStr for Mode {
    type Err = WhitneyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "certified" => Ok(Mode::Certified),
            "practical" => Ok(Mode::Practical),
            _ => Err(WhitneyError::Spec(format!("unknown mode '{s}', expected certified or practical"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Certified => "certified",
            Mode::Practical => "practical",
        })
    }
}

/// The approximation problem: f, the error profile ε, the order profile ρ
/// (with optional cap r), and the ring spacing δ.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub f: Expr,
    pub eps: Expr,
    pub rho: Expr,
    pub r: Option<u32>,
    pub case: Case,
    pub delta: f64,
}

impl ProblemSpec {
    pub fn new(f: Expr, eps: Expr, rho: Expr, r: Option<u32>, case: Case, delta: f64) -> Self {
        Self { f, eps, rho, r, case, delta }
    }

    /// δ = √2 for the line and √(1/2) for the half-line.
    pub fn default_delta(case: Case) -> f64 {
        match case {
            Case::R => std::f64::consts::SQRT_2,
            Case::Rpos => std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    /// The variable at which the profiles are read: |t| on the line, t on the half-line.
    pub fn profile_arg(&self, t: f64) -> f64 {
        match self.case {
            Case::R => t.abs(),
            Case::Rpos => t,
        }
    }

    pub fn eps_at(&self, t: f64) -> Result<f64, WhitneyError> {
        Ok(self.eps.eval(self.profile_arg(t))?)
    }

    /// ⌊ρ⌋ at t, capped by r.
    pub fn order_at(&self, t: f64) -> Result<usize, WhitneyError> {
        let p = self.rho.eval(self.profile_arg(t))?.floor().max(0.0) as usize;
        Ok(match self.r {
            Some(r) => p.min(r as usize),
            None => p,
        })
    }
}
