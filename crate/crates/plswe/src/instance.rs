//! Polynomial linear system instances with known ground truth and the honest
//! worker-node evaluation oracle `y_j = A(alpha_j)^{-1} b(alpha_j)`.

use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{content_gcd, Degree, Fe, Field, PolyMatrix, PolyVector, Polynomial};
use crate::bounds::{self, DegreeContext};
use crate::keyeq::{find_solution, EvaluationTable, KeyEqError, KeyEqParams, RationalSolution};

/// A nonsingular polynomial linear system `A(x) y(x) = b(x)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLSInstance {
    field: Field,
    n: usize,
    a: PolyMatrix,
    b: PolyVector,
}

/// The certified solution of an instance together with its exact degrees,
/// as opposed to the a-priori bounds `N`, `D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub solution: RationalSolution,
    pub deg_v: Degree,
    pub deg_d: Degree,
}

impl GroundTruth {
    /// Tightest admissible numerator bound `N > deg(v)` (at least 1).
    pub fn num_bound(&self) -> usize {
        self.deg_v.finite().map_or(1, |d| d + 1)
    }

    /// Tightest admissible denominator bound `D > deg(d)`.
    pub fn den_bound(&self) -> usize {
        self.deg_d.finite().map_or(1, |d| d + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceError {
    /// The modulus leaves too little room for evaluation points.
    FieldTooSmall { q: u64, required: u64 },
    /// `det A` vanishes identically.
    SingularSystem,
    /// `det A(alpha)` vanishes; the caller must pick another point.
    RankDropPoint(u64),
    /// Ran out of field elements while searching for usable points.
    PointsExhausted,
    /// Reference solving failed to certify a solution.
    DegenerateSystem(String),
    ShapeMismatch,
}

impl fmt::Display for InstanceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceError::FieldTooSmall { q, required } => {
                write!(f, "field of size {q} too small, need at least {required}")
            }
            InstanceError::SingularSystem => write!(f, "matrix determinant is identically zero"),
            InstanceError::RankDropPoint(a) => write!(f, "rank drop at evaluation point {a}"),
            InstanceError::PointsExhausted => write!(f, "no usable evaluation points left"),
            InstanceError::DegenerateSystem(msg) => write!(f, "reference solve failed: {msg}"),
            InstanceError::ShapeMismatch => write!(f, "instance shape mismatch"),
        }
    }
}

impl std::error::Error for InstanceError {}

impl PLSInstance {
    /// Wraps an explicit system, checking squareness and nonsingularity.
    ///
    /// `det A` has degree at most `n * deg(A)`, so evaluating at that many
    /// plus one distinct points decides nonsingularity outright.
    pub fn new(field: Field, a: PolyMatrix, b: PolyVector) -> Result<PLSInstance, InstanceError> {
        let n = a.rows();
        if a.cols() != n || b.len() != n || n == 0 {
            return Err(InstanceError::ShapeMismatch);
        }
        let deg_a = a.degree().finite().unwrap_or(0);
        let needed = (n * deg_a + 1) as u64;
        if needed > field.modulus() {
            return Err(InstanceError::FieldTooSmall {
                q: field.modulus(),
                required: needed,
            });
        }
        let nonsingular = (0..needed).any(|alpha| !a.eval(field, field.elem(alpha)).det(field).is_zero());
        if !nonsingular {
            return Err(InstanceError::SingularSystem);
        }
        Ok(PLSInstance { field, n, a, b })
    }

    /// Draws a random instance: entries of `A` uniform of degree at most
    /// `deg_a` (resampled until nonsingular), `b` uniform of degree at most
    /// `deg_b` and nonzero. Deterministic per seed.
    pub fn generate(
        field: Field,
        n: usize,
        deg_a: usize,
        deg_b: usize,
        seed: u64,
    ) -> Result<PLSInstance, InstanceError> {
        // Room for 4x the error-free reference decoding count, so decoding
        // experiments can always draw distinct points.
        let num_bound = (n - 1) * deg_a + deg_b + 1;
        let den_bound = n * deg_a + 1;
        let ctx = DegreeContext::new(n, num_bound, den_bound, deg_a, deg_b)
            .expect("bounds are positive");
        let required = 4 * bounds::eval_count(&ctx, num_bound as i64, den_bound as i64) as u64;
        if field.modulus() < required {
            return Err(InstanceError::FieldTooSmall {
                q: field.modulus(),
                required,
            });
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let random_poly = |deg: usize, rng: &mut ChaCha12Rng| {
            let coeffs: Vec<Fe> = (0..=deg)
                .map(|_| field.elem(rng.random_range(0..field.modulus())))
                .collect();
            Polynomial::from_elems(coeffs)
        };
        loop {
            let entries: Vec<Polynomial> =
                (0..n * n).map(|_| random_poly(deg_a, &mut rng)).collect();
            let a = PolyMatrix::new(n, n, entries);
            let b = loop {
                let entries: Vec<Polynomial> =
                    (0..n).map(|_| random_poly(deg_b, &mut rng)).collect();
                let b = PolyVector::new(entries);
                if !b.is_zero() {
                    break b;
                }
            };
            match PLSInstance::new(field, a, b) {
                Ok(inst) => return Ok(inst),
                Err(InstanceError::SingularSystem) => continue,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &PolyMatrix {
        &self.a
    }

    pub fn b(&self) -> &PolyVector {
        &self.b
    }

    pub fn deg_a(&self) -> usize {
        self.a.degree().finite().unwrap_or(0)
    }

    pub fn deg_b(&self) -> usize {
        self.b.degree().finite().unwrap_or(0)
    }

    /// Worker-node computation at one point: solve `A(alpha) y = b(alpha)`.
    pub fn eval_solution(&self, alpha: Fe) -> Result<Vec<Fe>, InstanceError> {
        let a = self.a.eval(self.field, alpha);
        let b = self.b.eval(self.field, alpha);
        a.solve(self.field, &b)
            .ok_or(InstanceError::RankDropPoint(alpha.value()))
    }

    /// Sequential evaluation points `1, 2, ...`, skipping rank-drop points.
    pub fn sequential_points(&self, count: usize) -> Result<Vec<Fe>, InstanceError> {
        let mut points = Vec::with_capacity(count);
        let mut alpha = 1u64;
        while points.len() < count {
            if alpha >= self.field.modulus() {
                return Err(InstanceError::PointsExhausted);
            }
            let p = self.field.elem(alpha);
            if !self.a.eval(self.field, p).det(self.field).is_zero() {
                points.push(p);
            }
            alpha += 1;
        }
        Ok(points)
    }

    /// Seeded distinct random points avoiding rank drops, for statistically
    /// independent trials.
    pub fn random_points(&self, count: usize, seed: u64) -> Result<Vec<Fe>, InstanceError> {
        let q = self.field.modulus();
        if count as u64 > q {
            return Err(InstanceError::PointsExhausted);
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut points: Vec<Fe> = Vec::with_capacity(count);
        let mut misses = 0u64;
        while points.len() < count {
            if misses > 64 * q {
                return Err(InstanceError::PointsExhausted);
            }
            let p = self.field.elem(rng.random_range(0..q));
            if points.contains(&p) || self.a.eval(self.field, p).det(self.field).is_zero() {
                misses += 1;
                continue;
            }
            points.push(p);
        }
        Ok(points)
    }

    /// Reference solution by error-free self-decoding: evaluate honestly at
    /// the Cramer-rule count and decode with the key-equation machinery,
    /// certifying `A v = d b` before returning.
    pub fn reference_solve(&self) -> Result<GroundTruth, InstanceError> {
        let num_bound = (self.n - 1) * self.deg_a() + self.deg_b() + 1;
        let den_bound = self.n * self.deg_a() + 1;
        let ctx = DegreeContext::new(self.n, num_bound, den_bound, self.deg_a(), self.deg_b())
            .expect("bounds are positive");
        let l = bounds::eval_count(&ctx, num_bound as i64, den_bound as i64) as usize;
        let params = KeyEqParams::new(num_bound, den_bound).expect("bounds are positive");
        let mut skip = 0;
        loop {
            let points = self.window_points(l, skip)?;
            let columns = points
                .iter()
                .map(|&p| self.eval_solution(p))
                .collect::<Result<Vec<_>, _>>()?;
            let table = EvaluationTable::new(self.field, self.n, points, columns)
                .expect("points are distinct");
            match find_solution(&table, params, Some(self)) {
                Ok(solution) => {
                    return Ok(GroundTruth {
                        deg_v: solution.v().degree(),
                        deg_d: solution.d().degree(),
                        solution,
                    });
                }
                Err(e) if skip == 0 => {
                    // retry once on a fresh point window before giving up
                    let _ = e;
                    skip = l;
                }
                Err(e) => return Err(InstanceError::DegenerateSystem(e.to_string())),
            }
        }
    }

    fn window_points(&self, count: usize, skip: usize) -> Result<Vec<Fe>, InstanceError> {
        let all = self.sequential_points(count + skip)?;
        Ok(all[skip..].to_vec())
    }

    /// Honest evaluation table at the given distinct points. Each accepted
    /// point has `det A(alpha) != 0`, which forces `d(alpha) != 0` since `d`
    /// divides `det A`; both are asserted along with the cross-check
    /// `d(alpha) y = v(alpha)` against the certified truth.
    pub fn honest_evaluate(
        &self,
        truth: &GroundTruth,
        points: &[Fe],
    ) -> Result<EvaluationTable, InstanceError> {
        let field = self.field;
        let mut columns = Vec::with_capacity(points.len());
        for &alpha in points {
            let y = self.eval_solution(alpha)?;
            let d_at = truth.solution.d().eval(field, alpha);
            assert!(!d_at.is_zero(), "denominator vanishes at accepted point");
            let v_at = truth.solution.v().eval(field, alpha);
            for (yi, vi) in y.iter().zip(&v_at) {
                assert_eq!(field.mul(d_at, *yi), *vi, "evaluation disagrees with truth");
            }
            columns.push(y);
        }
        EvaluationTable::new(field, self.n, points.to_vec(), columns)
            .map_err(|_| InstanceError::ShapeMismatch)
    }
}

/// Serialized instance document: modulus, dimensions, coefficient arrays
/// lowest degree first, and an optional certified ground-truth block.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct InstanceFile {
    pub q: u64,
    pub n: usize,
    pub deg_a: usize,
    pub deg_b: usize,
    pub a: Vec<Vec<Vec<u64>>>,
    pub b: Vec<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruthFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GroundTruthFile {
    pub v: Vec<Vec<u64>>,
    pub d: Vec<u64>,
}

pub fn poly_to_coeffs(p: &Polynomial) -> Vec<u64> {
    p.coeffs().iter().map(|c| c.value()).collect()
}

pub fn poly_from_coeffs(field: Field, coeffs: &[u64]) -> Polynomial {
    Polynomial::from_coeffs(field, coeffs)
}

impl InstanceFile {
    pub fn from_instance(inst: &PLSInstance, truth: Option<&GroundTruth>) -> InstanceFile {
        let n = inst.n();
        let a = (0..n)
            .map(|i| (0..n).map(|j| poly_to_coeffs(inst.a().get(i, j))).collect())
            .collect();
        let b = inst.b().entries().iter().map(poly_to_coeffs).collect();
        InstanceFile {
            q: inst.field().modulus(),
            n,
            deg_a: inst.deg_a(),
            deg_b: inst.deg_b(),
            a,
            b,
            ground_truth: truth.map(|t| GroundTruthFile {
                v: t.solution.v().entries().iter().map(poly_to_coeffs).collect(),
                d: poly_to_coeffs(t.solution.d()),
            }),
        }
    }

    pub fn to_instance(&self) -> Result<(PLSInstance, Option<GroundTruth>), String> {
        let field = Field::new(self.q).map_err(|e| e.to_string())?;
        if self.a.len() != self.n || self.b.len() != self.n {
            return Err("instance shape mismatch".into());
        }
        let mut entries = Vec::with_capacity(self.n * self.n);
        for row in &self.a {
            if row.len() != self.n {
                return Err("instance shape mismatch".into());
            }
            for coeffs in row {
                entries.push(poly_from_coeffs(field, coeffs));
            }
        }
        let a = PolyMatrix::new(self.n, self.n, entries);
        let b = PolyVector::new(self.b.iter().map(|c| poly_from_coeffs(field, c)).collect());
        let inst = PLSInstance::new(field, a, b).map_err(|e| e.to_string())?;
        let truth = match &self.ground_truth {
            None => None,
            Some(gt) => {
                let v = PolyVector::new(gt.v.iter().map(|c| poly_from_coeffs(field, c)).collect());
                let d = poly_from_coeffs(field, &gt.d);
                if d.is_zero() || !d.is_monic() {
                    return Err("ground truth denominator must be monic".into());
                }
                if content_gcd(field, &v, &d).map_err(|e| e.to_string())? != Polynomial::one(field)
                {
                    return Err("ground truth is not normalized".into());
                }
                if inst.a().mul_vector(field, &v) != inst.b().scale_poly(field, &d) {
                    return Err("ground truth does not solve the system".into());
                }
                let solution = RationalSolution::normalize(field, v, d)
                    .map_err(|e: KeyEqError| e.to_string())?;
                Some(GroundTruth {
                    deg_v: solution.v().degree(),
                    deg_d: solution.d().degree(),
                    solution,
                })
            }
        };
        Ok((inst, truth))
    }
}

/// The running tiny example: `A = [x]`, `b = [1]` over `F_7`, solution
/// `y = 1/x`.
#[cfg(test)]
pub fn tiny_instance() -> PLSInstance {
    let field = Field::new(7).unwrap();
    let a = PolyMatrix::new(1, 1, vec![Polynomial::x(field)]);
    let b = PolyVector::new(vec![Polynomial::one(field)]);
    PLSInstance::new(field, a, b).unwrap()
}
