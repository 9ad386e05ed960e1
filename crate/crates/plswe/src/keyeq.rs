//! Key-equation solving: assemble the coefficient matrix of the equations
//! `phi_i(alpha_j) = y_{i,j} * psi(alpha_j)` under the degree truncations
//! `deg(phi_i) < nu`, `deg(psi) < theta`, compute its kernel as a solution
//! space, and extract the normalized rational solution from it.

use std::fmt;

use crate::algebra::{content_gcd, Fe, Field, PolyVector, Polynomial, ScalarMatrix};
use crate::instance::PLSInstance;

/// The matrix of received evaluations: `L` pairwise distinct points and one
/// column of `n` field elements per point, some of which may be corrupted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationTable {
    field: Field,
    n: usize,
    points: Vec<Fe>,
    columns: Vec<Vec<Fe>>,
}

impl EvaluationTable {
    pub fn new(
        field: Field,
        n: usize,
        points: Vec<Fe>,
        columns: Vec<Vec<Fe>>,
    ) -> Result<EvaluationTable, KeyEqError> {
        if points.len() != columns.len() {
            return Err(KeyEqError::ShapeMismatch);
        }
        if points.len() as u64 > field.modulus() {
            return Err(KeyEqError::TooManyPoints);
        }
        if columns.iter().any(|c| c.len() != n) {
            return Err(KeyEqError::ShapeMismatch);
        }
        for (i, a) in points.iter().enumerate() {
            if points[..i].contains(a) {
                return Err(KeyEqError::DuplicatePoint(a.value()));
            }
        }
        Ok(EvaluationTable {
            field,
            n,
            points,
            columns,
        })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Fe] {
        &self.points
    }

    pub fn columns(&self) -> &[Vec<Fe>] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[Fe] {
        &self.columns[j]
    }

    /// Copy of the table with column `j` replaced.
    pub fn with_column(&self, j: usize, column: Vec<Fe>) -> EvaluationTable {
        assert_eq!(column.len(), self.n);
        let mut t = self.clone();
        t.columns[j] = column;
        t
    }

    /// Prefix of the first `len` points.
    pub fn prefix(&self, len: usize) -> EvaluationTable {
        assert!(len <= self.len());
        EvaluationTable {
            field: self.field,
            n: self.n,
            points: self.points[..len].to_vec(),
            columns: self.columns[..len].to_vec(),
        }
    }
}

/// Degree truncation parameters of the key equations; both strict bounds are
/// at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeyEqParams {
    pub nu: usize,
    pub theta: usize,
}

impl KeyEqParams {
    pub fn new(nu: usize, theta: usize) -> Result<KeyEqParams, KeyEqError> {
        if nu < 1 || theta < 1 {
            return Err(KeyEqError::InvalidParams { nu, theta });
        }
        Ok(KeyEqParams { nu, theta })
    }
}

/// Basis of the space of key-equation solutions `(phi, psi)` for one set of
/// parameters. Elements are linearly independent and each satisfies
/// `phi_i(alpha_j) = y_{i,j} psi(alpha_j)` for all `i, j`.
#[derive(Debug, Clone)]
pub struct SolutionSpace {
    pub field: Field,
    pub n: usize,
    pub params: KeyEqParams,
    pub basis: Vec<(PolyVector, Polynomial)>,
}

impl SolutionSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty()
    }
}

/// A normalized rational solution: `d` monic and nonzero, and the content
/// gcd of `(v, d)` equal to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalSolution {
    v: PolyVector,
    d: Polynomial,
}

impl RationalSolution {
    /// Normalizes an arbitrary pair by dividing out the content gcd and
    /// scaling the denominator monic.
    pub fn normalize(
        field: Field,
        v: PolyVector,
        d: Polynomial,
    ) -> Result<RationalSolution, KeyEqError> {
        if d.is_zero() {
            return Err(KeyEqError::ZeroDenominator);
        }
        let g = content_gcd(field, &v, &d).expect("d is nonzero");
        let v = v.div_exact_poly(field, &g).expect("gcd divides exactly");
        let d = d.div_exact(field, &g).expect("gcd divides exactly");
        let lc = d.leading_coeff().expect("d is nonzero");
        let inv = field.inv(lc).expect("leading coefficient is nonzero");
        Ok(RationalSolution {
            v: v.scale(field, inv),
            d: d.scale(field, inv),
        })
    }

    pub fn v(&self) -> &PolyVector {
        &self.v
    }

    pub fn d(&self) -> &Polynomial {
        &self.d
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyEqError {
    ShapeMismatch,
    TooManyPoints,
    DuplicatePoint(u64),
    InvalidParams { nu: usize, theta: usize },
    /// The solution space is trivial; no candidate to extract.
    EmptySolutionSpace,
    /// Basis elements are not all polynomial multiples of the reduced
    /// candidate: the module of solutions has rank above one.
    RankAboveOne,
    /// The candidate does not satisfy `A v = d b` against the certifying
    /// instance.
    CertificationFailed,
    /// The extracted denominator is identically zero.
    ZeroDenominator,
}

impl fmt::Display for KeyEqError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeyEqError::ShapeMismatch => write!(f, "points/columns shape mismatch"),
            KeyEqError::TooManyPoints => write!(f, "more evaluation points than field elements"),
            KeyEqError::DuplicatePoint(a) => write!(f, "duplicate evaluation point {a}"),
            KeyEqError::InvalidParams { nu, theta } => {
                write!(f, "key equation parameters ({nu}, {theta}) must be >= 1")
            }
            KeyEqError::EmptySolutionSpace => write!(f, "solution space is trivial"),
            KeyEqError::RankAboveOne => write!(f, "solution module has rank above one"),
            KeyEqError::CertificationFailed => write!(f, "candidate fails the A*v = d*b check"),
            KeyEqError::ZeroDenominator => write!(f, "candidate denominator is zero"),
        }
    }
}

impl std::error::Error for KeyEqError {}

/// Builds the `(n*L) x (n*nu + theta)` coefficient matrix whose right kernel
/// is the key-equation solution space.
///
/// Row `(i, j)` (numbered `i*L + j`) encodes
/// `phi_i(alpha_j) - y_{i,j} psi(alpha_j) = 0`. Columns hold the
/// coefficients of `phi_1, ..., phi_n` and then `psi`, each block lowest
/// degree first, so the matrix consists of `n` diagonal Vandermonde blocks
/// and a final block of negated, `y`-scaled Vandermonde columns.
pub fn build_key_matrix(table: &EvaluationTable, params: KeyEqParams) -> ScalarMatrix {
    let field = table.field();
    let n = table.n();
    let l = table.len();
    let (nu, theta) = (params.nu, params.theta);
    let mut m = ScalarMatrix::zeros(n * l, n * nu + theta);
    for (j, &alpha) in table.points().iter().enumerate() {
        // powers 1, alpha, ..., alpha^(max(nu,theta)-1)
        let mut pow = field.one();
        let mut powers = Vec::with_capacity(nu.max(theta));
        for _ in 0..nu.max(theta) {
            powers.push(pow);
            pow = field.mul(pow, alpha);
        }
        for i in 0..n {
            let row = i * l + j;
            for (k, &p) in powers.iter().take(nu).enumerate() {
                m.set(row, i * nu + k, p);
            }
            let y = table.column(j)[i];
            for (k, &p) in powers.iter().take(theta).enumerate() {
                m.set(row, n * nu + k, field.neg(field.mul(y, p)));
            }
        }
    }
    m
}

/// Decodes a kernel vector into `(phi, psi)` following the column layout of
/// [`build_key_matrix`].
pub fn decode_kernel_vector(
    n: usize,
    params: KeyEqParams,
    k: &[Fe],
) -> (PolyVector, Polynomial) {
    let (nu, theta) = (params.nu, params.theta);
    debug_assert_eq!(k.len(), n * nu + theta);
    let phis = (0..n)
        .map(|i| Polynomial::from_elems(k[i * nu..(i + 1) * nu].to_vec()))
        .collect();
    let psi = Polynomial::from_elems(k[n * nu..].to_vec());
    (PolyVector::new(phis), psi)
}

/// Coefficient vector of `(phi, psi)` in the key-matrix column layout, or
/// `None` if the degrees exceed the truncations.
pub fn encode_pair(
    n: usize,
    params: KeyEqParams,
    phi: &PolyVector,
    psi: &Polynomial,
) -> Option<Vec<Fe>> {
    if phi.len() != n {
        return None;
    }
    let (nu, theta) = (params.nu, params.theta);
    if phi.entries().iter().any(|p| p.coeffs().len() > nu) || psi.coeffs().len() > theta {
        return None;
    }
    let mut out = Vec::with_capacity(n * nu + theta);
    for p in phi.entries() {
        for k in 0..nu {
            out.push(p.coeff(k));
        }
    }
    for k in 0..theta {
        out.push(psi.coeff(k));
    }
    Some(out)
}

/// Solves the key equations for the given parameters; the basis may be empty.
pub fn solve_key_equations(table: &EvaluationTable, params: KeyEqParams) -> SolutionSpace {
    let field = table.field();
    let matrix = build_key_matrix(table, params);
    let basis = matrix
        .right_kernel(field)
        .iter()
        .map(|k| decode_kernel_vector(table.n(), params, k))
        .collect();
    SolutionSpace {
        field,
        n: table.n(),
        params,
        basis,
    }
}

/// The early-termination predicate: true when the solution space is
/// nontrivial. Under the deterministic decoding hypotheses this equals
/// `delta > 0`.
pub fn check(table: &EvaluationTable, params: KeyEqParams) -> bool {
    !solve_key_equations(table, params).is_trivial()
}

/// Extracts the rational solution from the solution space: takes the first
/// basis element, divides out its content gcd and normalizes the denominator
/// monic. Every further basis element must be a polynomial multiple of the
/// candidate, otherwise the module has rank above one. With a certifying
/// instance the polynomial identity `A v = d b` is also required.
pub fn find_solution(
    table: &EvaluationTable,
    params: KeyEqParams,
    certifier: Option<&PLSInstance>,
) -> Result<RationalSolution, KeyEqError> {
    let space = solve_key_equations(table, params);
    find_solution_in(&space, certifier)
}

/// [`find_solution`] on an already computed solution space.
pub fn find_solution_in(
    space: &SolutionSpace,
    certifier: Option<&PLSInstance>,
) -> Result<RationalSolution, KeyEqError> {
    let field = space.field;
    let Some((phi, psi)) = space.basis.first() else {
        return Err(KeyEqError::EmptySolutionSpace);
    };
    if psi.is_zero() {
        return Err(KeyEqError::ZeroDenominator);
    }
    let candidate = RationalSolution::normalize(field, phi.clone(), psi.clone())?;
    for (other_phi, other_psi) in space.basis.iter().skip(1) {
        if !is_poly_multiple(field, other_phi, other_psi, &candidate) {
            return Err(KeyEqError::RankAboveOne);
        }
    }
    if let Some(inst) = certifier {
        let lhs = inst.a().mul_vector(field, candidate.v());
        let rhs = inst.b().scale_poly(field, candidate.d());
        if lhs != rhs {
            return Err(KeyEqError::CertificationFailed);
        }
    }
    Ok(candidate)
}

/// True when `(phi, psi) = (P * v, P * d)` for some polynomial `P`.
fn is_poly_multiple(
    field: Field,
    phi: &PolyVector,
    psi: &Polynomial,
    candidate: &RationalSolution,
) -> bool {
    let Ok(p) = psi.div_exact(field, candidate.d()) else {
        return false;
    };
    *phi == candidate.v().scale_poly(field, &p)
}

/// Verifies the structural characterization of a solution space against the
/// ground truth: the dimension equals `max(delta, 0)`, every basis element
/// is `P * (Lambda v, Lambda d)` with `deg P < delta`, and conversely every
/// shifted pair `(x^i Lambda v, x^i Lambda d)` for `0 <= i < delta` lies in
/// the span of the basis.
pub fn verify_space_structure(
    space: &SolutionSpace,
    truth: &RationalSolution,
    lambda: &Polynomial,
    delta: i64,
) -> bool {
    let field = space.field;
    let expect_dim = delta.max(0) as usize;
    if space.dimension() != expect_dim {
        return false;
    }
    if expect_dim == 0 {
        return true;
    }
    let lambda_v = truth.v().scale_poly(field, lambda);
    let lambda_d = truth.d().mul(field, lambda);
    for (phi, psi) in &space.basis {
        let Ok(p) = psi.div_exact(field, &lambda_d) else {
            return false;
        };
        if p.degree() >= crate::algebra::Degree::Of(expect_dim) {
            return false;
        }
        if *phi != lambda_v.scale_poly(field, &p) {
            return false;
        }
    }
    // Converse containment: each shifted pair lies in the basis span.
    let cols: Vec<Vec<Fe>> = space
        .basis
        .iter()
        .map(|(phi, psi)| {
            encode_pair(space.n, space.params, phi, psi).expect("basis respects truncations")
        })
        .collect();
    let dim = space.n * space.params.nu + space.params.theta;
    let basis_matrix = ScalarMatrix::from_columns(dim, &cols);
    let base_rank = basis_matrix.rank(field);
    for i in 0..expect_dim {
        let xi = Polynomial::one(field).shift_up(i);
        let shifted_v = lambda_v.scale_poly(field, &xi);
        let shifted_d = lambda_d.shift_up(i);
        let Some(target) = encode_pair(space.n, space.params, &shifted_v, &shifted_d) else {
            return false;
        };
        let augmented = basis_matrix.hstack(&ScalarMatrix::from_columns(dim, &[target]));
        if augmented.rank(field) != base_rank {
            return false;
        }
    }
    true
}
