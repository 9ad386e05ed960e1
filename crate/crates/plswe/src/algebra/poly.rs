//! Dense univariate polynomials, polynomial vectors and polynomial matrices
//! over a prime field.

use std::fmt;

use super::field::{Fe, Field};
use super::matrix::ScalarMatrix;
use super::AlgebraError;

/// Degree of a polynomial, with the zero polynomial strictly below every
/// finite degree. The derived ordering puts `NegInf` first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Degree {
    NegInf,
    Of(usize),
}

impl Degree {
    pub fn finite(self) -> Option<usize> {
        match self {
            Degree::NegInf => None,
            Degree::Of(d) => Some(d),
        }
    }

    /// Finite degree as a signed integer; `None` for the zero polynomial.
    pub fn as_i64(self) -> Option<i64> {
        self.finite().map(|d| d as i64)
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInf => write!(f, "-inf"),
            Degree::Of(d) => write!(f, "{d}"),
        }
    }
}

/// A polynomial in canonical form: coefficients lowest degree first, no
/// trailing zeros, the zero polynomial has an empty coefficient list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<Fe>,
}

impl Polynomial {
    pub fn zero() -> Polynomial {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one(field: Field) -> Polynomial {
        Polynomial::from_elems(vec![field.one()])
    }

    /// The monomial `x`.
    pub fn x(field: Field) -> Polynomial {
        Polynomial::from_elems(vec![field.zero(), field.one()])
    }

    pub fn constant(c: Fe) -> Polynomial {
        Polynomial::from_elems(vec![c])
    }

    /// Builds from raw integer coefficients, lowest degree first.
    pub fn from_coeffs(field: Field, coeffs: &[u64]) -> Polynomial {
        Polynomial::from_elems(coeffs.iter().map(|&c| field.elem(c)).collect())
    }

    pub fn from_elems(mut coeffs: Vec<Fe>) -> Polynomial {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    /// Coefficient of `x^i`, zero past the end.
    pub fn coeff(&self, i: usize) -> Fe {
        self.coeffs.get(i).copied().unwrap_or(Fe::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Degree {
        match self.coeffs.len() {
            0 => Degree::NegInf,
            n => Degree::Of(n - 1),
        }
    }

    pub fn leading_coeff(&self) -> Option<Fe> {
        self.coeffs.last().copied()
    }

    pub fn is_monic(&self) -> bool {
        self.leading_coeff() == Some(Fe::ONE)
    }

    /// Horner evaluation.
    pub fn eval(&self, field: Field, alpha: Fe) -> Fe {
        let mut acc = field.zero();
        for &c in self.coeffs.iter().rev() {
            acc = field.add(field.mul(acc, alpha), c);
        }
        acc
    }

    pub fn add(&self, field: Field, other: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| field.add(self.coeff(i), other.coeff(i)))
            .collect();
        Polynomial::from_elems(coeffs)
    }

    pub fn sub(&self, field: Field, other: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| field.sub(self.coeff(i), other.coeff(i)))
            .collect();
        Polynomial::from_elems(coeffs)
    }

    pub fn mul(&self, field: Field, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = field.add(coeffs[i + j], field.mul(a, b));
            }
        }
        Polynomial::from_elems(coeffs)
    }

    pub fn scale(&self, field: Field, c: Fe) -> Polynomial {
        Polynomial::from_elems(self.coeffs.iter().map(|&a| field.mul(a, c)).collect())
    }

    /// Multiplication by `x^k`.
    pub fn shift_up(&self, k: usize) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![Fe::ZERO; k];
        coeffs.extend_from_slice(&self.coeffs);
        Polynomial { coeffs }
    }

    /// Scales so the leading coefficient is one. The zero polynomial is
    /// returned unchanged.
    pub fn monic(&self, field: Field) -> Polynomial {
        match self.leading_coeff() {
            None => Polynomial::zero(),
            Some(lc) if lc == field.one() => self.clone(),
            Some(lc) => {
                let inv = field.inv(lc).expect("leading coefficient is nonzero");
                self.scale(field, inv)
            }
        }
    }

    /// Euclidean division, `self = q * den + r` with `deg r < deg den`.
    pub fn div_rem(
        &self,
        field: Field,
        den: &Polynomial,
    ) -> Result<(Polynomial, Polynomial), AlgebraError> {
        let den_lead = den.leading_coeff().ok_or(AlgebraError::DivisionByZero)?;
        let den_deg = den.coeffs.len() - 1;
        let lead_inv = field.inv(den_lead).expect("nonzero leading coefficient");
        let mut rem = self.coeffs.clone();
        let mut quot = vec![field.zero(); self.coeffs.len().saturating_sub(den_deg)];
        while rem.len() > den_deg && !rem.is_empty() {
            let k = rem.len() - 1 - den_deg;
            let factor = field.mul(*rem.last().unwrap(), lead_inv);
            if !factor.is_zero() {
                quot[k] = factor;
                for (i, &dc) in den.coeffs.iter().enumerate() {
                    rem[k + i] = field.sub(rem[k + i], field.mul(factor, dc));
                }
            }
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        Ok((Polynomial::from_elems(quot), Polynomial::from_elems(rem)))
    }

    /// Exact division; the remainder must vanish.
    pub fn div_exact(&self, field: Field, den: &Polynomial) -> Result<Polynomial, AlgebraError> {
        let (q, r) = self.div_rem(field, den)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(AlgebraError::InexactDivision)
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(field: Field, a: &Polynomial, b: &Polynomial) -> Result<Polynomial, AlgebraError> {
        if a.is_zero() && b.is_zero() {
            return Err(AlgebraError::BothZero);
        }
        let (mut r0, mut r1) = (a.clone(), b.clone());
        while !r1.is_zero() {
            let (_, r) = r0.div_rem(field, &r1)?;
            r0 = r1;
            r1 = r;
        }
        Ok(r0.monic(field))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 if c == Fe::ONE => write!(f, "x")?,
                1 => write!(f, "{c}*x")?,
                _ if c == Fe::ONE => write!(f, "x^{i}")?,
                _ => write!(f, "{c}*x^{i}")?,
            }
        }
        Ok(())
    }
}

/// A vector of polynomials; its degree is the maximum entry degree.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PolyVector {
    entries: Vec<Polynomial>,
}

impl PolyVector {
    pub fn new(entries: Vec<Polynomial>) -> PolyVector {
        PolyVector { entries }
    }

    pub fn zero(n: usize) -> PolyVector {
        PolyVector {
            entries: vec![Polynomial::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Polynomial] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &Polynomial {
        &self.entries[i]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Polynomial::is_zero)
    }

    pub fn degree(&self) -> Degree {
        self.entries
            .iter()
            .map(Polynomial::degree)
            .max()
            .unwrap_or(Degree::NegInf)
    }

    pub fn eval(&self, field: Field, alpha: Fe) -> Vec<Fe> {
        self.entries.iter().map(|p| p.eval(field, alpha)).collect()
    }

    pub fn scale_poly(&self, field: Field, p: &Polynomial) -> PolyVector {
        PolyVector {
            entries: self.entries.iter().map(|e| e.mul(field, p)).collect(),
        }
    }

    pub fn scale(&self, field: Field, c: Fe) -> PolyVector {
        PolyVector {
            entries: self.entries.iter().map(|e| e.scale(field, c)).collect(),
        }
    }

    pub fn div_exact_poly(
        &self,
        field: Field,
        den: &Polynomial,
    ) -> Result<PolyVector, AlgebraError> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.div_exact(field, den))
            .collect::<Result<_, _>>()?;
        Ok(PolyVector { entries })
    }
}

/// Monic gcd of all entries of `v` together with `d`; the normalization gcd
/// of a rational solution candidate.
pub fn content_gcd(
    field: Field,
    v: &PolyVector,
    d: &Polynomial,
) -> Result<Polynomial, AlgebraError> {
    let mut acc = d.clone();
    for entry in v.entries() {
        if entry.is_zero() {
            continue;
        }
        acc = if acc.is_zero() {
            entry.monic(field)
        } else {
            Polynomial::gcd(field, &acc, entry)?
        };
    }
    if acc.is_zero() {
        Err(AlgebraError::AllZero)
    } else {
        Ok(acc.monic(field))
    }
}

/// A dense matrix of polynomials in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Polynomial>) -> PolyMatrix {
        assert_eq!(entries.len(), rows * cols, "entry count must match shape");
        PolyMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        assert!(i < self.rows && j < self.cols);
        &self.entries[i * self.cols + j]
    }

    pub fn degree(&self) -> Degree {
        self.entries
            .iter()
            .map(Polynomial::degree)
            .max()
            .unwrap_or(Degree::NegInf)
    }

    pub fn eval(&self, field: Field, alpha: Fe) -> ScalarMatrix {
        let data = self.entries.iter().map(|p| p.eval(field, alpha)).collect();
        ScalarMatrix::new(self.rows, self.cols, data)
    }

    pub fn mul_vector(&self, field: Field, v: &PolyVector) -> PolyVector {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        let entries = (0..self.rows)
            .map(|i| {
                let mut acc = Polynomial::zero();
                for j in 0..self.cols {
                    acc = acc.add(field, &self.get(i, j).mul(field, v.entry(j)));
                }
                acc
            })
            .collect();
        PolyVector::new(entries)
    }
}
