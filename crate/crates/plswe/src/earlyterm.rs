//! Early-termination drivers: start from a minimal evaluation count and
//! increment until the key-equation solution space turns nontrivial, so the
//! cost tracks the actual solution degrees and the actual number of errors
//! instead of their a-priori bounds.
//!
//! Four modes share one control loop:
//!
//! * `Alg1` - fixed error bound `tau`, worst-case counting (`L = L(nu,theta) + tau`),
//! * `Alg2` - fixed `tau`, random-error counting (`+ ceil(tau/n)`),
//! * `Alg3` - linear error bound `rho`, worst-case counting
//!   (`L = floor(L_num / (1 - rho))`),
//! * `Alg4` - linear bound, random-error counting (`1 - rho/n` denominator).

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    self, ceil_div, DegreeContext, ErrorBudget, Rational,
};
use crate::errors::{EvaluationStream, StreamError};
use crate::instance::poly_to_coeffs;
use crate::keyeq::{find_solution_in, solve_key_equations, KeyEqParams, RationalSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Alg1,
    Alg2,
    Alg3,
    Alg4,
}

impl Mode {
    pub fn uses_fixed_budget(self) -> bool {
        matches!(self, Mode::Alg1 | Mode::Alg2)
    }

    /// Radius divisor of the counting: 1 for the worst-case modes, `n` for
    /// the random-error modes.
    pub fn radius_divisor(self, n: usize) -> usize {
        match self {
            Mode::Alg1 | Mode::Alg3 => 1,
            Mode::Alg2 | Mode::Alg4 => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CandidateStrategy {
    /// All `(nu, theta)` whose base count matches the current round.
    Exhaustive,
    /// The two dominating parameter pairs; every feasible pair is
    /// coordinate-wise below one of them, and the space dimension is
    /// monotone in the parameters, so nothing is lost.
    TwoCandidates,
}

/// Configuration of one early-termination run.
#[derive(Debug, Clone)]
pub struct TerminationConfig {
    pub mode: Mode,
    pub ctx: DegreeContext,
    pub budget: ErrorBudget,
    pub strategy: CandidateStrategy,
    /// Hard cap on evaluations consumed.
    pub max_l: usize,
    /// Exact solution degrees `(deg v, deg d)` when the caller knows them;
    /// enables the stopping-point prediction in the report.
    pub truth_degrees: Option<(i64, i64)>,
}

impl TerminationConfig {
    fn validate(&self) -> Result<(), EarlyTermError> {
        match (self.mode, &self.budget) {
            (Mode::Alg1 | Mode::Alg2, ErrorBudget::Fixed(_)) => Ok(()),
            (Mode::Alg3 | Mode::Alg4, ErrorBudget::LinearRate(_)) => Ok(()),
            _ => Err(EarlyTermError::ConfigMismatch),
        }
    }
}

/// One `(L, nu, theta)` probe and its check result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub l: usize,
    pub nu: usize,
    pub theta: usize,
    pub check: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Solved(RationalSolution),
    Failure(String),
}

#[derive(Debug, Clone)]
pub struct TerminationReport {
    pub outcome: Outcome,
    /// Evaluations consumed when the driver returned.
    pub l_stop: usize,
    pub attempts: Vec<Attempt>,
    /// Stopping-point prediction: the exact fixed point for the fixed-budget
    /// modes, the closed-form ceiling for the linear-bound modes. `None`
    /// when the truth degrees were not supplied.
    pub predicted_l_stop: Option<i64>,
}

impl TerminationReport {
    pub fn solution(&self) -> Option<&RationalSolution> {
        match &self.outcome {
            Outcome::Solved(s) => Some(s),
            Outcome::Failure(_) => None,
        }
    }

    pub fn to_record(&self) -> ReportRecord {
        let (outcome, v, d) = match &self.outcome {
            Outcome::Solved(s) => (
                "solved".to_string(),
                Some(s.v().entries().iter().map(poly_to_coeffs).collect()),
                Some(poly_to_coeffs(s.d())),
            ),
            Outcome::Failure(msg) => (format!("failure: {msg}"), None, None),
        };
        ReportRecord {
            outcome,
            v,
            d,
            l_stop: self.l_stop,
            predicted_l_stop: self.predicted_l_stop,
            attempts: self.attempts.clone(),
        }
    }
}

/// Serialized form of a termination report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRecord {
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<Vec<u64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<u64>>,
    pub l_stop: usize,
    pub predicted_l_stop: Option<i64>,
    pub attempts: Vec<Attempt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EarlyTermError {
    /// Fixed-budget modes need a fixed budget, linear modes a rate.
    ConfigMismatch,
    /// The stream produced more errors than its declared bound; the
    /// simulation itself is inconsistent.
    BudgetViolated {
        l: usize,
        count: usize,
        bound: usize,
    },
    MaxLExceeded {
        max_l: usize,
    },
    Stream(StreamError),
}

impl fmt::Display for EarlyTermError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EarlyTermError::ConfigMismatch => {
                write!(f, "mode and error budget kind do not match")
            }
            EarlyTermError::BudgetViolated { l, count, bound } => {
                write!(f, "stream produced {count} errors at L={l}, bound {bound}")
            }
            EarlyTermError::MaxLExceeded { max_l } => {
                write!(f, "no solution within the evaluation cap {max_l}")
            }
            EarlyTermError::Stream(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for EarlyTermError {}

impl From<StreamError> for EarlyTermError {
    fn from(e: StreamError) -> EarlyTermError {
        EarlyTermError::Stream(e)
    }
}

/// Parameter pairs to probe for one effective base count.
///
/// Exhaustive mode returns every `(nu, theta) >= (1, 1)` with
/// `L(nu, theta) == l_effective`, in ascending lexicographic order. The
/// two-candidate mode returns `(l - (D-1), l - (N-1))` and
/// `(l - deg A, l - deg b)` filtered by the dominance rules: when one
/// candidate dominates the other coordinate-wise only it is kept, and a
/// candidate with a coordinate below 1 is dropped.
pub fn enumerate_candidates(
    ctx: &DegreeContext,
    l_effective: i64,
    strategy: CandidateStrategy,
) -> Vec<KeyEqParams> {
    match strategy {
        CandidateStrategy::Exhaustive => {
            let nu_max = l_effective - (ctx.den_bound as i64 - 1).min(ctx.deg_a as i64);
            let theta_max = l_effective - (ctx.num_bound as i64 - 1).min(ctx.deg_b as i64);
            let mut out = Vec::new();
            for nu in 1..=nu_max.max(0) {
                for theta in 1..=theta_max.max(0) {
                    if bounds::eval_count(ctx, nu, theta) == l_effective {
                        out.push(KeyEqParams::new(nu as usize, theta as usize).unwrap());
                    }
                }
            }
            out
        }
        CandidateStrategy::TwoCandidates => {
            let l = l_effective;
            let c1 = (l - (ctx.den_bound as i64 - 1), l - (ctx.num_bound as i64 - 1));
            let c2 = (l - ctx.deg_a as i64, l - ctx.deg_b as i64);
            let d_small = ctx.den_bound - 1 <= ctx.deg_a;
            let n_small = ctx.num_bound - 1 <= ctx.deg_b;
            let picks: &[(i64, i64)] = match (d_small, n_small) {
                (true, true) => &[c1],
                (false, false) => &[c2],
                _ => &[c1, c2],
            };
            let mut out: Vec<KeyEqParams> = Vec::new();
            for &(nu, theta) in picks {
                if nu < 1 || theta < 1 {
                    continue;
                }
                let params = KeyEqParams::new(nu as usize, theta as usize).unwrap();
                if !out.contains(&params) {
                    out.push(params);
                }
            }
            out
        }
    }
}

/// Runs one early-termination decode over a prefix-consistent stream,
/// replicating the published control flow: probe every candidate parameter
/// pair for the current evaluation count, return the extracted solution as
/// soon as a check passes, otherwise request one more evaluation.
///
/// Extraction failures halt the driver with a `Failure` outcome rather than
/// continuing to larger counts.
pub fn run_early_termination<S: EvaluationStream>(
    cfg: &TerminationConfig,
    mut stream: S,
) -> Result<TerminationReport, EarlyTermError> {
    cfg.validate()?;
    let pristine = stream.clone();
    let ctx = &cfg.ctx;
    let base11 = bounds::eval_count(ctx, 1, 1);
    let mut attempts: Vec<Attempt> = Vec::new();
    let mut seen: HashSet<(usize, KeyEqParams)> = HashSet::new();

    let finish = |outcome: Outcome, l_stop: usize, attempts: Vec<Attempt>| {
        let predicted = predict(cfg, &pristine);
        Ok(TerminationReport {
            outcome,
            l_stop,
            attempts,
            predicted_l_stop: predicted,
        })
    };

    match (cfg.mode, &cfg.budget) {
        (Mode::Alg1 | Mode::Alg2, &ErrorBudget::Fixed(tau)) => {
            let term = if cfg.mode == Mode::Alg1 {
                tau
            } else {
                ceil_div(tau, ctx.n)
            };
            let mut l = (base11 + term as i64).max(1) as usize;
            loop {
                if l > cfg.max_l {
                    return Err(EarlyTermError::MaxLExceeded { max_l: cfg.max_l });
                }
                let table = stream.prefix(l)?;
                let count = stream.error_count(l)?;
                if count > tau {
                    return Err(EarlyTermError::BudgetViolated {
                        l,
                        count,
                        bound: tau,
                    });
                }
                let l_eff = l as i64 - term as i64;
                for params in enumerate_candidates(ctx, l_eff, cfg.strategy) {
                    let space = solve_key_equations(&table, params);
                    let ok = !space.is_trivial();
                    attempts.push(Attempt {
                        l,
                        nu: params.nu,
                        theta: params.theta,
                        check: ok,
                    });
                    if ok {
                        let outcome = match find_solution_in(&space, None) {
                            Ok(sol) => Outcome::Solved(sol),
                            Err(e) => Outcome::Failure(e.to_string()),
                        };
                        return finish(outcome, l, attempts);
                    }
                }
                l += 1;
            }
        }
        (Mode::Alg3 | Mode::Alg4, &ErrorBudget::LinearRate(rate)) => {
            let divisor = cfg.mode.radius_divisor(ctx.n);
            let mut l_num = base11 + 1;
            loop {
                let l = floor_scaled(l_num, rate, divisor);
                let tau_round = (rate * Rational::from_integer(l)).floor().to_integer();
                let l = l.max(1) as usize;
                if l > cfg.max_l {
                    return Err(EarlyTermError::MaxLExceeded { max_l: cfg.max_l });
                }
                let table = stream.prefix(l)?;
                let count = stream.error_count(l)?;
                if count as i64 > tau_round {
                    return Err(EarlyTermError::BudgetViolated {
                        l,
                        count,
                        bound: tau_round.max(0) as usize,
                    });
                }
                for params in enumerate_candidates(ctx, l_num - 1, cfg.strategy) {
                    // floor collisions could replay a probe; skip duplicates
                    if !seen.insert((l, params)) {
                        continue;
                    }
                    let space = solve_key_equations(&table, params);
                    let ok = !space.is_trivial();
                    attempts.push(Attempt {
                        l,
                        nu: params.nu,
                        theta: params.theta,
                        check: ok,
                    });
                    if ok {
                        let outcome = match find_solution_in(&space, None) {
                            Ok(sol) => Outcome::Solved(sol),
                            Err(e) => Outcome::Failure(e.to_string()),
                        };
                        return finish(outcome, l, attempts);
                    }
                }
                l_num += 1;
            }
        }
        _ => Err(EarlyTermError::ConfigMismatch),
    }
}

fn floor_scaled(value: i64, rate: Rational, divisor: usize) -> i64 {
    let denom = Rational::from_integer(1) - rate / Rational::from_integer(divisor as i64);
    (Rational::from_integer(value) / denom).floor().to_integer()
}

/// Stopping-point prediction for the report, when the truth degrees are
/// known: the exact fixed point for fixed budgets, the closed-form ceiling
/// for linear budgets.
fn predict<S: EvaluationStream>(cfg: &TerminationConfig, pristine: &S) -> Option<i64> {
    let (deg_v, deg_d) = cfg.truth_degrees?;
    match (cfg.mode, &cfg.budget) {
        (Mode::Alg1 | Mode::Alg2, &ErrorBudget::Fixed(tau)) => {
            let term = if cfg.mode == Mode::Alg1 {
                tau as i64
            } else {
                ceil_div(tau, cfg.ctx.n) as i64
            };
            let base = bounds::eval_count(&cfg.ctx, deg_v, deg_d);
            let cap = 4 * (base + tau as i64 + 2);
            let mut oracle = pristine.clone();
            bounds::predict_stop_fixed(
                &cfg.ctx,
                term,
                deg_v,
                deg_d,
                // a stream that cannot extend far enough makes the fixed
                // point unreachable, which surfaces as NoFixedPoint
                |l| match oracle.error_count(l.max(0) as usize) {
                    Ok(count) => count as i64,
                    Err(_) => i64::MAX / 4,
                },
                Some(cap),
            )
            .ok()
        }
        (Mode::Alg3 | Mode::Alg4, &ErrorBudget::LinearRate(rate)) => {
            let divisor = cfg.mode.radius_divisor(cfg.ctx.n);
            bounds::stop_upper_bound_linear(&cfg.ctx, rate, deg_v, deg_d, divisor).ok()
        }
        _ => None,
    }
}

/// True when the consumed evaluation count satisfies the applicable
/// stopping claim: exact equality with the fixed point for the fixed-budget
/// modes, at most the closed-form ceiling for the linear-bound modes.
pub fn compare_against_bound(report: &TerminationReport, cfg: &TerminationConfig) -> bool {
    let Some(predicted) = report.predicted_l_stop else {
        return false;
    };
    match cfg.mode {
        Mode::Alg1 | Mode::Alg2 => report.l_stop as i64 == predicted,
        Mode::Alg3 | Mode::Alg4 => report.l_stop as i64 <= predicted,
    }
}
