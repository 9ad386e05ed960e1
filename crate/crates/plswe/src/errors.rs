//! Error injection: uniform corruption on a chosen support, the two
//! adversarial structured constructions, and rate-bounded error processes
//! feeding prefix-consistent evaluation streams.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::algebra::{Fe, Field};
use crate::bounds::Rational;
use crate::instance::{GroundTruth, InstanceError, PLSInstance};
use crate::keyeq::EvaluationTable;

/// Splitmix64 step, used to derive independent per-position and per-trial
/// seeds from a master seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InjectError {
    /// A support index is at or past the table length.
    SupportOutOfRange { index: usize, len: usize },
    /// The solution denominator vanishes at a required point.
    DenominatorVanishes(u64),
    /// The system matrix is singular at a required point.
    SingularEvaluation(u64),
}

impl fmt::Display for InjectError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InjectError::SupportOutOfRange { index, len } => {
                write!(f, "support index {index} out of range for length {len}")
            }
            InjectError::DenominatorVanishes(a) => write!(f, "denominator vanishes at {a}"),
            InjectError::SingularEvaluation(a) => write!(f, "singular evaluation at {a}"),
        }
    }
}

impl std::error::Error for InjectError {}

/// A concrete corruption: which column indices are touched and what replaces
/// them. Indices are zero-based positions into the evaluation table.
///
/// In the uniform model a replacement may coincide with the honest value;
/// the support size, not the number of actual discrepancies, is what the
/// error-count budget tracks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorPattern {
    pub support: BTreeSet<usize>,
    pub columns: BTreeMap<usize, Vec<Fe>>,
}

impl ErrorPattern {
    pub fn apply(&self, table: &EvaluationTable) -> Result<EvaluationTable, InjectError> {
        let mut out = table.clone();
        for (&j, col) in &self.columns {
            if j >= table.len() {
                return Err(InjectError::SupportOutOfRange {
                    index: j,
                    len: table.len(),
                });
            }
            out = out.with_column(j, col.clone());
        }
        Ok(out)
    }
}

/// Replaces the supported columns by i.i.d. uniform columns, deterministic
/// per seed. An empty support returns the table unchanged.
pub fn inject_uniform(
    table: &EvaluationTable,
    support: &BTreeSet<usize>,
    seed: u64,
) -> Result<EvaluationTable, InjectError> {
    let field = table.field();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut columns = BTreeMap::new();
    for &j in support {
        if j >= table.len() {
            return Err(InjectError::SupportOutOfRange {
                index: j,
                len: table.len(),
            });
        }
        columns.insert(j, uniform_column(field, table.n(), &mut rng));
    }
    ErrorPattern {
        support: support.clone(),
        columns,
    }
    .apply(table)
}

fn uniform_column(field: Field, n: usize, rng: &mut ChaCha12Rng) -> Vec<Fe> {
    (0..n)
        .map(|_| field.elem(rng.random_range(0..field.modulus())))
        .collect()
}

/// A partition of the error support into `n` cells of size at most
/// `ceil(|E|/n)`, fixed by round-robin assignment of the sorted indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    cells: Vec<Vec<usize>>,
}

impl Partition {
    pub fn round_robin(support: &BTreeSet<usize>, n: usize) -> Partition {
        assert!(n >= 1);
        let mut cells = vec![Vec::new(); n];
        for (k, &j) in support.iter().enumerate() {
            cells[k % n].push(j);
        }
        Partition { cells }
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    /// Cell index of a support position, if present.
    pub fn cell_of(&self, j: usize) -> Option<usize> {
        self.cells.iter().position(|cell| cell.contains(&j))
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.cells.iter().flatten().copied().collect()
    }
}

/// Adversarial table from the rational-reconstruction branch: honest columns
/// off the support, and on the support the draw solving
/// `v(alpha_j) - d(alpha_j) V_j = e_{cell(j)}` with `e_i` a canonical basis
/// vector.
pub fn inject_structured_case1(
    field: Field,
    truth: &GroundTruth,
    points: &[Fe],
    partition: &Partition,
) -> Result<EvaluationTable, InjectError> {
    let n = truth.solution.v().len();
    let support = partition.support();
    check_support(&support, points.len())?;
    let mut columns = Vec::with_capacity(points.len());
    for (j, &alpha) in points.iter().enumerate() {
        let d_at = truth.solution.d().eval(field, alpha);
        if d_at.is_zero() {
            return Err(InjectError::DenominatorVanishes(alpha.value()));
        }
        let d_inv = field.inv(d_at).expect("nonzero");
        let v_at = truth.solution.v().eval(field, alpha);
        let col = match partition.cell_of(j) {
            None => v_at.iter().map(|&v| field.mul(v, d_inv)).collect(),
            Some(cell) => (0..n)
                .map(|i| {
                    let e = if i == cell { field.one() } else { field.zero() };
                    field.mul(field.sub(v_at[i], e), d_inv)
                })
                .collect(),
        };
        columns.push(col);
    }
    EvaluationTable::new(field, n, points.to_vec(), columns)
        .map_err(|_| InjectError::SupportOutOfRange {
            index: 0,
            len: points.len(),
        })
}

/// Adversarial table from the linear-algebra branch: on the support the draw
/// solves `v(alpha_j) - d(alpha_j) V_j = -A(alpha_j)^{-1} d(alpha_j)
/// e_{cell(j)}`.
pub fn inject_structured_case2(
    inst: &PLSInstance,
    truth: &GroundTruth,
    points: &[Fe],
    partition: &Partition,
) -> Result<EvaluationTable, InjectError> {
    let field = inst.field();
    let n = inst.n();
    let support = partition.support();
    check_support(&support, points.len())?;
    let mut columns = Vec::with_capacity(points.len());
    for (j, &alpha) in points.iter().enumerate() {
        let d_at = truth.solution.d().eval(field, alpha);
        if d_at.is_zero() {
            return Err(InjectError::DenominatorVanishes(alpha.value()));
        }
        let d_inv = field.inv(d_at).expect("nonzero");
        let v_at = truth.solution.v().eval(field, alpha);
        let col = match partition.cell_of(j) {
            None => v_at.iter().map(|&v| field.mul(v, d_inv)).collect(),
            Some(cell) => {
                let a_at = inst.a().eval(field, alpha);
                let mut e = vec![field.zero(); n];
                e[cell] = field.one();
                let a_inv_e = a_at
                    .solve(field, &e)
                    .ok_or(InjectError::SingularEvaluation(alpha.value()))?;
                (0..n)
                    .map(|i| {
                        let corr = field.mul(d_at, a_inv_e[i]);
                        field.mul(field.add(v_at[i], corr), d_inv)
                    })
                    .collect()
            }
        };
        columns.push(col);
    }
    EvaluationTable::new(field, n, points.to_vec(), columns)
        .map_err(|_| InjectError::SupportOutOfRange {
            index: 0,
            len: points.len(),
        })
}

fn check_support(support: &BTreeSet<usize>, len: usize) -> Result<(), InjectError> {
    match support.iter().next_back() {
        Some(&max) if max >= len => Err(InjectError::SupportOutOfRange { index: max, len }),
        _ => Ok(()),
    }
}

/// How a simulated stream corrupts the honest evaluations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErrorProcess {
    Honest,
    /// Uniform replacement on a fixed support.
    UniformOnSupport { support: BTreeSet<usize>, seed: u64 },
    /// The rational-reconstruction adversarial draw on a fixed support.
    StructuredCase1 { support: BTreeSet<usize> },
    /// The linear-algebra adversarial draw on a fixed support.
    StructuredCase2 { support: BTreeSet<usize> },
    /// Bernoulli corruption at the true rate, suppressed whenever it would
    /// break `|E(L)| <= floor(rate * L)` for the current prefix.
    RateBounded { rate: Rational, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StreamError {
    Instance(InstanceError),
    Inject(InjectError),
}

impl fmt::Display for StreamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StreamError::Instance(e) => write!(f, "{e}"),
            StreamError::Inject(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for StreamError {}

impl From<InstanceError> for StreamError {
    fn from(e: InstanceError) -> StreamError {
        StreamError::Instance(e)
    }
}

impl From<InjectError> for StreamError {
    fn from(e: InjectError) -> StreamError {
        StreamError::Inject(e)
    }
}

/// An extensible, prefix-consistent source of evaluation columns: the
/// length-`L` table is always a prefix of the length-`L+1` table. Clones
/// replay identically.
pub trait EvaluationStream: Clone {
    fn field(&self) -> Field;
    fn n(&self) -> usize;
    /// The table over the first `len` points, extending on demand.
    fn prefix(&mut self, len: usize) -> Result<EvaluationTable, StreamError>;
    /// Actual error count `|E(len)|`: the number of materialized columns
    /// among the first `len` that differ from the honest evaluation.
    fn error_count(&mut self, len: usize) -> Result<usize, StreamError>;
}

/// Simulated node stream over a generated instance: sequential evaluation
/// points (rank-drop points skipped), honest worker columns, and a
/// corruption process applied position by position. Per-position seeds keep
/// the stream prefix-consistent.
#[derive(Debug, Clone)]
pub struct SimStream {
    inst: PLSInstance,
    truth: GroundTruth,
    process: ErrorProcess,
    points: Vec<Fe>,
    honest: Vec<Vec<Fe>>,
    columns: Vec<Vec<Fe>>,
    differs: Vec<bool>,
    replaced: BTreeSet<usize>,
    next_alpha: u64,
}

impl SimStream {
    pub fn new(inst: PLSInstance, truth: GroundTruth, process: ErrorProcess) -> SimStream {
        SimStream {
            inst,
            truth,
            process,
            points: Vec::new(),
            honest: Vec::new(),
            columns: Vec::new(),
            differs: Vec::new(),
            replaced: BTreeSet::new(),
            next_alpha: 1,
        }
    }

    pub fn instance(&self) -> &PLSInstance {
        &self.inst
    }

    pub fn truth(&self) -> &GroundTruth {
        &self.truth
    }

    /// Positions whose columns were replaced by the process (the declared
    /// support), regardless of whether the replacement happens to equal the
    /// honest value.
    pub fn replaced_positions(&self) -> &BTreeSet<usize> {
        &self.replaced
    }

    fn ensure(&mut self, len: usize) -> Result<(), StreamError> {
        let field = self.inst.field();
        while self.columns.len() < len {
            let j = self.columns.len();
            let alpha = self.next_point()?;
            let honest = self.inst.eval_solution(alpha)?;
            let column = self.corrupt(j, alpha, &honest)?;
            self.differs.push(column != honest);
            self.points.push(alpha);
            self.honest.push(honest);
            self.columns.push(column);
            debug_assert!(self.points.iter().all(|p| p.value() < field.modulus()));
        }
        Ok(())
    }

    fn next_point(&mut self) -> Result<Fe, StreamError> {
        let field = self.inst.field();
        loop {
            if self.next_alpha >= field.modulus() {
                return Err(InstanceError::PointsExhausted.into());
            }
            let alpha = field.elem(self.next_alpha);
            self.next_alpha += 1;
            if !self.inst.a().eval(field, alpha).det(field).is_zero() {
                return Ok(alpha);
            }
        }
    }

    fn corrupt(&mut self, j: usize, alpha: Fe, honest: &[Fe]) -> Result<Vec<Fe>, StreamError> {
        let field = self.inst.field();
        let n = self.inst.n();
        match &self.process {
            ErrorProcess::Honest => Ok(honest.to_vec()),
            ErrorProcess::UniformOnSupport { support, seed } => {
                if support.contains(&j) {
                    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(*seed, j as u64));
                    self.replaced.insert(j);
                    Ok(uniform_column(field, n, &mut rng))
                } else {
                    Ok(honest.to_vec())
                }
            }
            ErrorProcess::StructuredCase1 { support } => {
                if support.contains(&j) {
                    let partition = Partition::round_robin(support, n);
                    let cell = partition.cell_of(j).expect("j is in the support");
                    self.replaced.insert(j);
                    Ok(case1_column(field, &self.truth, alpha, cell)?)
                } else {
                    Ok(honest.to_vec())
                }
            }
            ErrorProcess::StructuredCase2 { support } => {
                if support.contains(&j) {
                    let partition = Partition::round_robin(support, n);
                    let cell = partition.cell_of(j).expect("j is in the support");
                    self.replaced.insert(j);
                    Ok(case2_column(&self.inst, &self.truth, alpha, cell)?)
                } else {
                    Ok(honest.to_vec())
                }
            }
            ErrorProcess::RateBounded { rate, seed } => {
                if rate.is_zero() {
                    return Ok(honest.to_vec());
                }
                let numer = *rate.numer() as u64;
                let denom = *rate.denom() as u64;
                let mut decide = ChaCha12Rng::seed_from_u64(derive_seed(*seed, 2 * j as u64));
                let wants_error = decide.random_range(0..denom) < numer;
                let budget = (*rate * Rational::from_integer((j + 1) as i64))
                    .floor()
                    .to_integer() as usize;
                if wants_error && self.replaced.len() < budget {
                    let mut rng =
                        ChaCha12Rng::seed_from_u64(derive_seed(*seed, 2 * j as u64 + 1));
                    self.replaced.insert(j);
                    Ok(uniform_column(field, n, &mut rng))
                } else {
                    Ok(honest.to_vec())
                }
            }
        }
    }
}

fn case1_column(
    field: Field,
    truth: &GroundTruth,
    alpha: Fe,
    cell: usize,
) -> Result<Vec<Fe>, InjectError> {
    let d_at = truth.solution.d().eval(field, alpha);
    if d_at.is_zero() {
        return Err(InjectError::DenominatorVanishes(alpha.value()));
    }
    let d_inv = field.inv(d_at).expect("nonzero");
    let v_at = truth.solution.v().eval(field, alpha);
    Ok((0..v_at.len())
        .map(|i| {
            let e = if i == cell { field.one() } else { field.zero() };
            field.mul(field.sub(v_at[i], e), d_inv)
        })
        .collect())
}

fn case2_column(
    inst: &PLSInstance,
    truth: &GroundTruth,
    alpha: Fe,
    cell: usize,
) -> Result<Vec<Fe>, InjectError> {
    let field = inst.field();
    let d_at = truth.solution.d().eval(field, alpha);
    if d_at.is_zero() {
        return Err(InjectError::DenominatorVanishes(alpha.value()));
    }
    let d_inv = field.inv(d_at).expect("nonzero");
    let v_at = truth.solution.v().eval(field, alpha);
    let mut e = vec![field.zero(); inst.n()];
    e[cell] = field.one();
    let a_inv_e = inst
        .a()
        .eval(field, alpha)
        .solve(field, &e)
        .ok_or(InjectError::SingularEvaluation(alpha.value()))?;
    Ok((0..inst.n())
        .map(|i| {
            let corr = field.mul(d_at, a_inv_e[i]);
            field.mul(field.add(v_at[i], corr), d_inv)
        })
        .collect())
}

impl EvaluationStream for SimStream {
    fn field(&self) -> Field {
        self.inst.field()
    }

    fn n(&self) -> usize {
        self.inst.n()
    }

    fn prefix(&mut self, len: usize) -> Result<EvaluationTable, StreamError> {
        self.ensure(len)?;
        Ok(EvaluationTable::new(
            self.inst.field(),
            self.inst.n(),
            self.points[..len].to_vec(),
            self.columns[..len].to_vec(),
        )
        .expect("stream points are distinct"))
    }

    fn error_count(&mut self, len: usize) -> Result<usize, StreamError> {
        self.ensure(len)?;
        Ok(self.differs[..len].iter().filter(|&&d| d).count())
    }
}
