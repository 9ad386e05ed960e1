//! Prime field arithmetic on canonical residues.

use std::fmt;

use super::AlgebraError;

/// The prime field `F_q` for a machine-width prime modulus `q >= 3`.
///
/// The field is a lightweight context value: elements do not carry the
/// modulus, so all arithmetic goes through `Field` methods. Elements are
/// kept in canonical form `[0, q)` at all times, which makes equality
/// structural.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Field {
    q: u64,
}

/// An element of a prime field, stored as its canonical residue.
///
/// Only `Field` constructs these, so the `value < q` invariant holds by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fe(u64);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Field {
    /// Builds the field, rejecting composite moduli and `q < 3`.
    pub fn new(q: u64) -> Result<Field, AlgebraError> {
        if q < 3 {
            return Err(AlgebraError::ModulusTooSmall(q));
        }
        if !is_prime_u64(q) {
            return Err(AlgebraError::NotPrime(q));
        }
        Ok(Field { q })
    }

    #[inline]
    pub fn modulus(self) -> u64 {
        self.q
    }

    /// Canonical residue of an arbitrary integer.
    #[inline]
    pub fn elem(self, value: u64) -> Fe {
        Fe(value % self.q)
    }

    #[inline]
    pub fn elem_i64(self, value: i64) -> Fe {
        let q = self.q as i64;
        Fe(value.rem_euclid(q) as u64)
    }

    #[inline]
    pub fn zero(self) -> Fe {
        Fe(0)
    }

    #[inline]
    pub fn one(self) -> Fe {
        Fe(1 % self.q)
    }

    #[inline]
    pub fn add(self, a: Fe, b: Fe) -> Fe {
        let s = a.0 + b.0;
        Fe(if s >= self.q { s - self.q } else { s })
    }

    #[inline]
    pub fn sub(self, a: Fe, b: Fe) -> Fe {
        Fe(if a.0 >= b.0 { a.0 - b.0 } else { a.0 + self.q - b.0 })
    }

    #[inline]
    pub fn neg(self, a: Fe) -> Fe {
        Fe(if a.0 == 0 { 0 } else { self.q - a.0 })
    }

    #[inline]
    pub fn mul(self, a: Fe, b: Fe) -> Fe {
        Fe((u128::from(a.0) * u128::from(b.0) % u128::from(self.q)) as u64)
    }

    pub fn pow(self, base: Fe, mut exp: u64) -> Fe {
        let mut acc = self.one();
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(self, a: Fe) -> Result<Fe, AlgebraError> {
        if a.0 == 0 {
            return Err(AlgebraError::ZeroInverse);
        }
        let (mut r0, mut r1) = (self.q as i128, a.0 as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1, "modulus is prime, nonzero elements are units");
        Ok(self.elem_i64(t0 as i64))
    }

    /// `a / b`, failing on zero divisor.
    pub fn div(self, a: Fe, b: Fe) -> Result<Fe, AlgebraError> {
        Ok(self.mul(a, self.inv(b)?))
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (u128::from(a) * u128::from(b) % u128::from(m)) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the witness set below decides primality for
/// every 64-bit integer.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
