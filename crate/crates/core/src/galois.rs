//! Arithmetic in prime fields GF(p).
//!
//! Every scheme and bound in this crate depends only on the characteristic of
//! the field, so prime fields are the only fields provided. Residues are kept
//! canonical in `[0, p)` and multiplied through `u64`, which is why the
//! modulus is capped at [`MAX_MODULUS`].

use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Largest accepted modulus (exclusive of non-primes, so effectively 2^31 - 1).
pub const MAX_MODULUS: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} exceeds the supported ceiling 2^31")]
    ModulusTooLarge(u64),
    #[error("operands belong to different fields GF({left}) and GF({right})")]
    FieldMismatch { left: u32, right: u32 },
    #[error("division by zero in GF({0})")]
    DivisionByZero(u32),
    #[error("{value} is not a canonical residue modulo {p}")]
    NonCanonical { value: u64, p: u32 },
}

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// The prime field GF(p).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p > MAX_MODULUS {
            return Err(FieldError::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        Ok(Self { p: p as u32 })
    }

    #[inline]
    pub const fn modulus(self) -> u32 {
        self.p
    }

    /// Same as [`modulus`](Self::modulus); named for readability at call sites
    /// that reason about the characteristic.
    #[inline]
    pub const fn characteristic(self) -> u32 {
        self.p
    }

    #[inline]
    pub fn zero(self) -> Felt {
        Felt { value: 0, field: self }
    }

    #[inline]
    pub fn one(self) -> Felt {
        Felt { value: 1 % self.p, field: self }
    }

    /// Element from a nonnegative integer, reduced mod p.
    #[inline]
    pub fn elem(self, v: u64) -> Felt {
        Felt { value: (v % self.p as u64) as u32, field: self }
    }

    /// Maps an arbitrary integer constant (such as `q`, `q+1`, `-1`) into the field.
    pub fn reduce(self, n: i64) -> Felt {
        let v = n.rem_euclid(self.p as i64);
        Felt { value: v as u32, field: self }
    }

    /// Wraps a residue that must already be canonical.
    pub fn from_canonical(self, v: u64) -> Result<Felt, FieldError> {
        if v >= self.p as u64 {
            return Err(FieldError::NonCanonical { value: v, p: self.p });
        }
        Ok(Felt { value: v as u32, field: self })
    }

    /// True when the characteristic divides `n` (equivalently `reduce(n) == 0`).
    #[inline]
    pub fn divides(self, n: u64) -> bool {
        n.is_multiple_of(self.p as u64)
    }

    // Raw residue arithmetic. Inputs must be canonical.

    #[inline]
    pub fn add_raw(self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        let p = self.p as u64;
        (if s >= p { s - p } else { s }) as u32
    }

    #[inline]
    pub fn sub_raw(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            (a as u64 + self.p as u64 - b as u64) as u32
        }
    }

    #[inline]
    pub fn neg_raw(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul_raw(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow_raw(self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1 % self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_raw(acc, base);
            }
            base = self.mul_raw(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse via Fermat's little theorem; `None` for zero.
    pub fn inv_raw(self, a: u32) -> Option<u32> {
        if a == 0 {
            None
        } else {
            Some(self.pow_raw(a, self.p as u64 - 2))
        }
    }

    /// All elements in ascending residue order.
    pub fn elements(self) -> impl Iterator<Item = Felt> {
        (0..self.p).map(move |value| Felt { value, field: self })
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.p)
    }
}

/// An element of a [`PrimeField`].
///
/// The operator impls panic when the operands come from different fields; use
/// the `try_*` methods where mixing is possible.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Felt {
    value: u32,
    field: PrimeField,
}

impl Felt {
    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn field(self) -> PrimeField {
        self.field
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, rhs: Felt) -> Result<PrimeField, FieldError> {
        if self.field != rhs.field {
            return Err(FieldError::FieldMismatch { left: self.field.p, right: rhs.field.p });
        }
        Ok(self.field)
    }

    pub fn try_add(self, rhs: Felt) -> Result<Felt, FieldError> {
        let f = self.same_field(rhs)?;
        Ok(Felt { value: f.add_raw(self.value, rhs.value), field: f })
    }

    pub fn try_sub(self, rhs: Felt) -> Result<Felt, FieldError> {
        let f = self.same_field(rhs)?;
        Ok(Felt { value: f.sub_raw(self.value, rhs.value), field: f })
    }

    pub fn try_mul(self, rhs: Felt) -> Result<Felt, FieldError> {
        let f = self.same_field(rhs)?;
        Ok(Felt { value: f.mul_raw(self.value, rhs.value), field: f })
    }

    pub fn inv(self) -> Result<Felt, FieldError> {
        self.field
            .inv_raw(self.value)
            .map(|value| Felt { value, field: self.field })
            .ok_or(FieldError::DivisionByZero(self.field.p))
    }

    pub fn pow(self, exp: u64) -> Felt {
        Felt { value: self.field.pow_raw(self.value, exp), field: self.field }
    }
}

impl fmt::Display for Felt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

macro_rules! felt_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait for Felt {
            type Output = Felt;

            fn $method(self, rhs: Felt) -> Felt {
                match self.$checked(rhs) {
                    Ok(v) => v,
                    Err(e) => panic!("{}", e),
                }
            }
        }
    };
}

felt_binop!(Add, add, try_add);
felt_binop!(Sub, sub, try_sub);
felt_binop!(Mul, mul, try_mul);

impl Neg for Felt {
    type Output = Felt;

    fn neg(self) -> Felt {
        Felt { value: self.field.neg_raw(self.value), field: self.field }
    }
}
