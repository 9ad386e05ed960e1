//! Evaluation-count and dimension formulas: the base count `L(nu, theta)`,
//! the worst-case and random-error decoding counts `L_KPSW` and `L_GLZ`, the
//! solution-space dimension `delta`, the linear-error-bound counts and the
//! early-termination stopping-point predictions.

use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

/// Exact rational, used for error rates so floor computations are bit-exact.
pub type Rational = Ratio<i64>;

/// Degree data of a decoding problem: system dimension `n`, strict degree
/// bounds `num_bound > deg(v)` and `den_bound > deg(d)` on the solution, and
/// the exact input degrees `deg(A)`, `deg(b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeContext {
    pub n: usize,
    pub num_bound: usize,
    pub den_bound: usize,
    pub deg_a: usize,
    pub deg_b: usize,
}

impl DegreeContext {
    pub fn new(
        n: usize,
        num_bound: usize,
        den_bound: usize,
        deg_a: usize,
        deg_b: usize,
    ) -> Result<DegreeContext, BoundsError> {
        if n < 1 || num_bound < 1 || den_bound < 1 {
            return Err(BoundsError::InvalidContext);
        }
        Ok(DegreeContext {
            n,
            num_bound,
            den_bound,
            deg_a,
            deg_b,
        })
    }
}

/// Error budget: either a fixed count `tau >= |E|`, or a rate `rho < 1/2`
/// bounding `|E(L)| <= rho * L` for every prefix length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorBudget {
    Fixed(usize),
    LinearRate(Rational),
}

impl ErrorBudget {
    pub fn linear_rate(rho: Rational) -> Result<ErrorBudget, BoundsError> {
        check_rate(rho)?;
        Ok(ErrorBudget::LinearRate(rho))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundsError {
    InvalidContext,
    RateOutOfRange(Rational),
    NoFixedPoint { cap: i64 },
    BadRational(String),
}

impl fmt::Display for BoundsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundsError::InvalidContext => {
                write!(f, "degree context needs n, num_bound, den_bound >= 1")
            }
            BoundsError::RateOutOfRange(r) => write!(f, "error rate {r} outside [0, 1/2)"),
            BoundsError::NoFixedPoint { cap } => {
                write!(f, "no stopping fixed point found below cap {cap}")
            }
            BoundsError::BadRational(s) => write!(f, "cannot parse \"{s}\" as an exact fraction"),
        }
    }
}

impl std::error::Error for BoundsError {}

/// Parses an exact fraction of the form `p/q` or a bare integer. Decimal
/// notation is rejected so floor arithmetic stays exact.
pub fn parse_rational(s: &str) -> Result<Rational, BoundsError> {
    let bad = || BoundsError::BadRational(s.to_string());
    let s = s.trim();
    match s.split_once('/') {
        None => {
            let n: i64 = s.parse().map_err(|_| bad())?;
            Ok(Rational::from_integer(n))
        }
        Some((num, den)) => {
            let n: i64 = num.trim().parse().map_err(|_| bad())?;
            let d: i64 = den.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
    }
}

fn check_rate(rho: Rational) -> Result<(), BoundsError> {
    if rho.is_negative() || rho >= Rational::new(1, 2) {
        Err(BoundsError::RateOutOfRange(rho))
    } else {
        Ok(())
    }
}

/// Ceiling of `a / b` on nonnegative integers.
pub fn ceil_div(a: usize, b: usize) -> usize {
    assert!(b > 0);
    a.div_ceil(b)
}

/// The base evaluation count
/// `L(nu, theta) = min{ max{N-1+theta, D-1+nu}, max{deg(A)+nu, deg(b)+theta} }`:
/// the smaller of the rational-reconstruction count and the linear-algebra
/// count for candidate degree parameters `(nu, theta)`.
///
/// The formula is evaluated as written for any integer arguments; derived
/// quantities such as the stopping-point base `L(deg v, deg d)` legitimately
/// pass values below 1.
pub fn eval_count(ctx: &DegreeContext, nu: i64, theta: i64) -> i64 {
    let n = ctx.num_bound as i64;
    let d = ctx.den_bound as i64;
    let rfr = (n - 1 + theta).max(d - 1 + nu);
    let pls = (ctx.deg_a as i64 + nu).max(ctx.deg_b as i64 + theta);
    rfr.min(pls)
}

/// Evaluation count guaranteeing unique decoding for any error pattern of
/// weight at most `tau`: `L(N+tau, D+tau) + tau`.
pub fn l_kpsw(ctx: &DegreeContext, tau: usize) -> i64 {
    let t = tau as i64;
    eval_count(ctx, ctx.num_bound as i64 + t, ctx.den_bound as i64 + t) + t
}

/// Reduced count valid for all but a `<= (D+tau)/q` fraction of uniform
/// random errors: `L(N+tau, D+tau) + ceil(tau/n)`. Coincides with `l_kpsw`
/// exactly when `n = 1` or `tau <= 1`.
pub fn l_glz(ctx: &DegreeContext, tau: usize) -> i64 {
    let t = tau as i64;
    eval_count(ctx, ctx.num_bound as i64 + t, ctx.den_bound as i64 + t)
        + ceil_div(tau, ctx.n) as i64
}

/// Dimension of the structured solution space:
/// `delta = min{nu - (deg v + |E|), theta - (deg d + |E|)}`.
/// Nonpositive values mean the span is trivial.
pub fn delta(nu: i64, theta: i64, deg_v: i64, deg_d: i64, errors: i64) -> i64 {
    (nu - (deg_v + errors)).min(theta - (deg_d + errors))
}

/// Evaluation count and error bound for the linear error model:
/// `L = floor((L(nu,theta)+1) / (1 - rho/m))` and `tau = floor(rho * L)`,
/// where the radius divisor `m` is 1 for the worst-case counting and `n`
/// for the random-error counting.
pub fn linear_counts(
    ctx: &DegreeContext,
    rho: Rational,
    nu: i64,
    theta: i64,
    radius_divisor: usize,
) -> Result<(i64, i64), BoundsError> {
    check_rate(rho)?;
    assert!(radius_divisor >= 1);
    let base = eval_count(ctx, nu, theta);
    let l = floor_scaled(base + 1, rho, radius_divisor);
    let tau = (rho * Rational::from_integer(l)).floor().to_integer();
    Ok((l, tau))
}

/// `floor(value / (1 - rho/m))`, exact.
fn floor_scaled(value: i64, rho: Rational, m: usize) -> i64 {
    let denom = Rational::one() - rho / Rational::from_integer(m as i64);
    assert!(denom > Rational::zero());
    (Rational::from_integer(value) / denom).floor().to_integer()
}

/// Number of evaluations a fixed-budget early-termination run consumes: the
/// least `L` reachable by unit increments from `L(1,1) + tau_term` with
/// `L = L(deg v, deg d) + |E(L)| + 1 + tau_term`.
///
/// `tau_term` is the additive term of the driver being predicted (`tau` for
/// the worst-case driver, `ceil(tau/n)` for the random-error one) and
/// `error_count` reports the stream's actual error count for each prefix
/// length. Iteration gives up at `cap`, which defaults to
/// `4 * (L(deg v, deg d) + tau_term + 2)`.
pub fn predict_stop_fixed(
    ctx: &DegreeContext,
    tau_term: i64,
    deg_v: i64,
    deg_d: i64,
    mut error_count: impl FnMut(i64) -> i64,
    cap: Option<i64>,
) -> Result<i64, BoundsError> {
    let base = eval_count(ctx, deg_v, deg_d);
    let cap = cap.unwrap_or(4 * (base + tau_term + 2));
    let mut l = eval_count(ctx, 1, 1) + tau_term;
    while l <= cap {
        let target = base + error_count(l) + 1 + tau_term;
        // The error count is nondecreasing in L, so the first L at or above
        // its target is an exact fixed point.
        if l >= target {
            return Ok(l);
        }
        l += 1;
    }
    Err(BoundsError::NoFixedPoint { cap })
}

/// Closed-form ceiling on the stopping point of the linear-bound drivers:
/// `floor((L(deg v, deg d) + 2) / (1 - rho - rho/m))` with `m = 1` for the
/// worst-case driver and `m = n` for the random-error one.
pub fn stop_upper_bound_linear(
    ctx: &DegreeContext,
    rho: Rational,
    deg_v: i64,
    deg_d: i64,
    radius_divisor: usize,
) -> Result<i64, BoundsError> {
    stop_upper_bound_linear_actual(ctx, rho, rho, deg_v, deg_d, radius_divisor)
}

/// Sensitivity variant of [`stop_upper_bound_linear`]: when the stream's
/// actual rate `rho_actual` is below the declared `rho`, the stop obeys
/// `floor((L(deg v, deg d) + 2) / (1 - rho_actual - rho/m))`.
pub fn stop_upper_bound_linear_actual(
    ctx: &DegreeContext,
    rho: Rational,
    rho_actual: Rational,
    deg_v: i64,
    deg_d: i64,
    radius_divisor: usize,
) -> Result<i64, BoundsError> {
    check_rate(rho)?;
    check_rate(rho_actual)?;
    assert!(radius_divisor >= 1);
    let base = eval_count(ctx, deg_v, deg_d);
    let denom =
        Rational::one() - rho_actual - rho / Rational::from_integer(radius_divisor as i64);
    assert!(denom > Rational::zero());
    Ok((Rational::from_integer(base + 2) / denom)
        .floor()
        .to_integer())
}
