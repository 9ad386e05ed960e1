//! Dense scalar matrices over a prime field with exact rank and kernel
//! computation by Gaussian elimination.

use super::field::{Fe, Field};

/// A dense matrix with entries in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalarMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

impl ScalarMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Fe>) -> ScalarMatrix {
        assert_eq!(data.len(), rows * cols, "entry count must match shape");
        ScalarMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> ScalarMatrix {
        ScalarMatrix {
            rows,
            cols,
            data: vec![Fe::ZERO; rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> ScalarMatrix {
        let mut m = ScalarMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Fe {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Fe) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, field: Field, v: &[Fe]) -> Vec<Fe> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = field.zero();
                for (j, &vj) in v.iter().enumerate() {
                    acc = field.add(acc, field.mul(self.get(i, j), vj));
                }
                acc
            })
            .collect()
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &ScalarMatrix) -> ScalarMatrix {
        assert_eq!(self.rows, other.rows, "row counts must match");
        let mut m = ScalarMatrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j));
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.get(i, j));
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<Fe>]) -> ScalarMatrix {
        let mut m = ScalarMatrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length must match row count");
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    /// In-place reduction to reduced row echelon form. Pivots are chosen by
    /// position: for each column, the first row with a nonzero entry. Returns
    /// the pivot column indices.
    pub fn rref(&mut self, field: Field) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut pivot_row = 0;
        for col in 0..self.cols {
            if pivot_row == self.rows {
                break;
            }
            let Some(src) = (pivot_row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            if src != pivot_row {
                for j in 0..self.cols {
                    let (a, b) = (self.get(pivot_row, j), self.get(src, j));
                    self.set(pivot_row, j, b);
                    self.set(src, j, a);
                }
            }
            let inv = field
                .inv(self.get(pivot_row, col))
                .expect("pivot is nonzero");
            for j in col..self.cols {
                self.set(pivot_row, j, field.mul(self.get(pivot_row, j), inv));
            }
            for r in 0..self.rows {
                if r == pivot_row {
                    continue;
                }
                let factor = self.get(r, col);
                if factor.is_zero() {
                    continue;
                }
                for j in col..self.cols {
                    let v = field.sub(self.get(r, j), field.mul(factor, self.get(pivot_row, j)));
                    self.set(r, j, v);
                }
            }
            pivots.push(col);
            pivot_row += 1;
        }
        pivots
    }

    pub fn rank(&self, field: Field) -> usize {
        let mut m = self.clone();
        m.rref(field).len()
    }

    /// Basis of the right kernel `{k : M k = 0}`, with the basis itself in
    /// reduced column echelon form so the output is deterministic. Returns
    /// `cols - rank` vectors; the empty matrix (zero rows) has full kernel.
    pub fn right_kernel(&self, field: Field) -> Vec<Vec<Fe>> {
        let mut m = self.clone();
        let pivots = m.rref(field);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis: Vec<Vec<Fe>> = Vec::with_capacity(free.len());
        for &fcol in &free {
            let mut v = vec![field.zero(); self.cols];
            v[fcol] = field.one();
            for (r, &pcol) in pivots.iter().enumerate() {
                v[pcol] = field.neg(m.get(r, fcol));
            }
            basis.push(v);
        }
        if basis.is_empty() {
            return basis;
        }
        // Column echelon pass over the basis for a canonical representative
        // of the kernel.
        let mut bt = ScalarMatrix::zeros(basis.len(), self.cols);
        for (i, v) in basis.iter().enumerate() {
            for (j, &x) in v.iter().enumerate() {
                bt.set(i, j, x);
            }
        }
        bt.rref(field);
        (0..basis.len())
            .map(|i| (0..self.cols).map(|j| bt.get(i, j)).collect())
            .collect()
    }

    /// Determinant of a square matrix by elimination.
    pub fn det(&self, field: Field) -> Fe {
        assert_eq!(self.rows, self.cols, "determinant needs a square matrix");
        let mut m = self.clone();
        let n = self.rows;
        let mut det = field.one();
        for col in 0..n {
            let Some(src) = (col..n).find(|&r| !m.get(r, col).is_zero()) else {
                return field.zero();
            };
            if src != col {
                det = field.neg(det);
                for j in 0..n {
                    let (a, b) = (m.get(col, j), m.get(src, j));
                    m.set(col, j, b);
                    m.set(src, j, a);
                }
            }
            let pivot = m.get(col, col);
            det = field.mul(det, pivot);
            let inv = field.inv(pivot).expect("pivot is nonzero");
            for r in col + 1..n {
                let factor = field.mul(m.get(r, col), inv);
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = field.sub(m.get(r, j), field.mul(factor, m.get(col, j)));
                    m.set(r, j, v);
                }
            }
        }
        det
    }

    /// Solves `M x = rhs` for square `M`; `None` when `M` is singular.
    pub fn solve(&self, field: Field, rhs: &[Fe]) -> Option<Vec<Fe>> {
        assert_eq!(self.rows, self.cols, "solve needs a square matrix");
        assert_eq!(rhs.len(), self.rows, "dimension mismatch");
        let mut aug = ScalarMatrix::zeros(self.rows, self.cols + 1);
        for (i, &r) in rhs.iter().enumerate() {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, r);
        }
        let pivots = aug.rref(field);
        // a pivot in the last column means the system is inconsistent; fewer
        // pivots than unknowns means the matrix part is rank deficient
        if pivots.len() != self.cols || pivots.iter().any(|&p| p >= self.cols) {
            return None;
        }
        Some((0..self.rows).map(|i| aug.get(i, self.cols)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f7() -> Field {
        Field::new(7).unwrap()
    }

    fn mat(field: Field, rows: usize, cols: usize, vals: &[u64]) -> ScalarMatrix {
        ScalarMatrix::new(rows, cols, vals.iter().map(|&v| field.elem(v)).collect())
    }

    #[test]
    fn kernel_examples() {
        let f = f7();
        let m = mat(f, 2, 2, &[1, 1, 2, 2]);
        let basis = m.right_kernel(f);
        assert_eq!(basis, vec![vec![f.elem(1), f.elem(6)]]);

        assert!(ScalarMatrix::identity(f, 2).right_kernel(f).is_empty());

        let z = ScalarMatrix::zeros(2, 2);
        assert_eq!(z.right_kernel(f).len(), 2);
    }

    #[test]
    fn kernel_of_empty_matrix_is_everything() {
        let f = f7();
        let m = ScalarMatrix::zeros(0, 3);
        assert_eq!(m.right_kernel(f).len(), 3);
    }

    #[test]
    fn det_and_solve() {
        let f = f7();
        let m = mat(f, 2, 2, &[1, 2, 3, 4]);
        // det = 4 - 6 = -2 = 5 mod 7
        assert_eq!(m.det(f), f.elem(5));
        let x = m.solve(f, &[f.elem(1), f.elem(0)]).unwrap();
        assert_eq!(m.mul_vec(f, &x), vec![f.elem(1), f.elem(0)]);

        let s = mat(f, 2, 2, &[1, 1, 2, 2]);
        assert_eq!(s.det(f), f.zero());
        assert!(s.solve(f, &[f.elem(1), f.elem(0)]).is_none());
    }

    /// Every kernel vector by exhaustive enumeration; complete for tiny
    /// fields and shapes.
    fn brute_force_kernel(field: Field, m: &ScalarMatrix) -> Vec<Vec<Fe>> {
        let q = field.modulus();
        let cols = m.cols();
        let mut out = Vec::new();
        let total = q.pow(cols as u32);
        for code in 0..total {
            let mut rest = code;
            let v: Vec<Fe> = (0..cols)
                .map(|_| {
                    let digit = rest % q;
                    rest /= q;
                    field.elem(digit)
                })
                .collect();
            if m.mul_vec(field, &v).iter().all(|x| x.is_zero()) {
                out.push(v);
            }
        }
        out
    }

    /// Rank by plain forward elimination, independent of the rref path.
    fn naive_rank(field: Field, rows: &mut [Vec<Fe>]) -> usize {
        let cols = rows.first().map_or(0, Vec::len);
        let mut rank = 0;
        for col in 0..cols {
            let Some(src) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
                continue;
            };
            rows.swap(rank, src);
            let inv = field.inv(rows[rank][col]).unwrap();
            for x in rows[rank].iter_mut() {
                *x = field.mul(*x, inv);
            }
            let pivot_row = rows[rank].clone();
            for row in rows.iter_mut().skip(rank + 1) {
                let factor = row[col];
                for (x, &p) in row.iter_mut().zip(&pivot_row) {
                    *x = field.sub(*x, field.mul(factor, p));
                }
            }
            rank += 1;
        }
        rank
    }

    fn as_rows(m: &ScalarMatrix) -> Vec<Vec<Fe>> {
        (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect())
            .collect()
    }

    #[test]
    fn kernel_matches_brute_force_over_f3_exhaustively() {
        let f = Field::new(3).unwrap();
        for rows in 1..=3usize {
            for cols in 1..=3usize {
                let cells = rows * cols;
                for code in 0..3u64.pow(cells as u32) {
                    let mut rest = code;
                    let data: Vec<Fe> = (0..cells)
                        .map(|_| {
                            let d = rest % 3;
                            rest /= 3;
                            f.elem(d)
                        })
                        .collect();
                    let m = ScalarMatrix::new(rows, cols, data);
                    let basis = m.right_kernel(f);
                    let all = brute_force_kernel(f, &m);
                    assert_eq!(all.len() as u64, 3u64.pow(basis.len() as u32));
                    for k in &basis {
                        assert!(all.contains(k));
                    }
                }
            }
        }
    }

    #[test]
    fn kernel_agrees_with_naive_elimination_on_random_f7_matrices() {
        use rand::{Rng, SeedableRng};
        let f = f7();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let rows = rng.random_range(1..=6);
            let cols = rng.random_range(1..=6);
            let data: Vec<Fe> = (0..rows * cols).map(|_| f.elem(rng.random_range(0..7))).collect();
            let m = ScalarMatrix::new(rows, cols, data);
            let basis = m.right_kernel(f);
            // rank-nullity against the independent elimination
            let naive = naive_rank(f, &mut as_rows(&m));
            assert_eq!(basis.len() + naive, cols);
            // every basis vector annihilates M and the basis is independent
            // by the naive rank of its transpose
            for k in &basis {
                assert!(m.mul_vec(f, k).iter().all(|x| x.is_zero()));
            }
            if !basis.is_empty() {
                let mut rows: Vec<Vec<Fe>> = basis.clone();
                assert_eq!(naive_rank(f, &mut rows), basis.len());
            }
        }
    }

    proptest! {
        #[test]
        fn rank_nullity_and_kernel_membership(
            rows in 0usize..6, cols in 1usize..6,
            seed in prop::collection::vec(0u64..7, 36)
        ) {
            let f = f7();
            let data: Vec<Fe> = seed.iter().take(rows * cols).map(|&v| f.elem(v)).collect();
            let m = ScalarMatrix::new(rows, cols, data);
            let basis = m.right_kernel(f);
            prop_assert_eq!(basis.len() + m.rank(f), cols);
            for k in &basis {
                prop_assert!(m.mul_vec(f, k).iter().all(|v| v.is_zero()));
            }
            // linear independence: the basis matrix has full column rank
            if !basis.is_empty() {
                let bm = ScalarMatrix::from_columns(cols, &basis);
                prop_assert_eq!(bm.rank(f), basis.len());
            }
        }
    }
}
