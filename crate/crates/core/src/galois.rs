//! Arithmetic in GF(2^e).
//!
//! An element is stored as the integer whose bit `j` is the coefficient of
//! `alpha^j` in its polynomial-basis expansion, i.e. the integer *is* the
//! vector `v(gamma)`. The dual vector `w(gamma)` (first row of the companion
//! matrix) and companion matrices `A(gamma)` are derived from the same tables.

use std::fmt;

use thiserror::Error;

/// A field element, `0 <= value < q`.
pub type Gf = u16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("extension degree {0} outside 2..=16")]
    UnsupportedDegree(u32),
    #[error("no default primitive polynomial for degree {0}; pass one explicitly")]
    NoDefaultPolynomial(u32),
    #[error("polynomial {poly:#x} does not have degree {e} with constant term 1")]
    MalformedPolynomial { poly: u32, e: u32 },
    #[error("polynomial {poly:#x} is not primitive (order of x is {order})")]
    NonPrimitivePolynomial { poly: u32, order: u32 },
    #[error("division by zero")]
    DivisionByZero,
}

/// `x^8 + x^4 + x^3 + x^2 + 1`.
pub const POLY_E8: u32 = 0x11d;
/// `1 + x + x^3`.
pub const POLY_E3: u32 = 0b1011;

pub fn default_primitive_poly(e: u32) -> Option<u32> {
    match e {
        3 => Some(POLY_E3),
        8 => Some(POLY_E8),
        _ => None,
    }
}

/// Tables for GF(2^e) under a fixed primitive polynomial.
#[derive(Clone)]
pub struct Field {
    e: u32,
    q: usize,
    poly: u32,
    // exp[i] = alpha^i for i in 0..2(q-1), doubled so products skip a modulo.
    exp: Vec<Gf>,
    log: Vec<u32>,
    w: Vec<u32>,
    w_inv: Vec<Gf>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("e", &self.e)
            .field("poly", &format_args!("{:#x}", self.poly))
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.e == other.e && self.poly == other.poly
    }
}
impl Eq for Field {}

/// Builds the field for degree `e` and primitive polynomial `prim_poly`
/// (bit `i` = coefficient of `x^i`, bit `e` must be set).
pub fn make_field(e: u32, prim_poly: u32) -> Result<Field, FieldError> {
    Field::new(e, prim_poly)
}

impl Field {
    pub fn new(e: u32, poly: u32) -> Result<Self, FieldError> {
        if !(2..=16).contains(&e) {
            return Err(FieldError::UnsupportedDegree(e));
        }
        if poly >> e != 1 || poly & 1 == 0 {
            return Err(FieldError::MalformedPolynomial { poly, e });
        }
        let q = 1usize << e;
        let n = (q - 1) as u32;
        let mut exp = vec![0 as Gf; 2 * (q - 1)];
        let mut log = vec![u32::MAX; q];
        let mut x: u32 = 1;
        for i in 0..n {
            if i > 0 && x == 1 {
                return Err(FieldError::NonPrimitivePolynomial { poly, order: i });
            }
            exp[i as usize] = x as Gf;
            log[x as usize] = i;
            x <<= 1;
            if x >> e & 1 == 1 {
                x ^= poly;
            }
        }
        debug_assert_eq!(x, 1);
        for i in 0..(q - 1) {
            exp[i + q - 1] = exp[i];
        }
        let mut field = Field {
            e,
            q,
            poly,
            exp,
            log,
            w: vec![0; q],
            w_inv: vec![0; q],
        };
        for g in 0..q {
            let mut bits = 0u32;
            if g != 0 {
                for k in 0..e {
                    let prod = field.mul(g as Gf, field.alpha_pow(k));
                    bits |= (prod as u32 & 1) << k;
                }
            }
            field.w[g] = bits;
            field.w_inv[bits as usize] = g as Gf;
        }
        Ok(field)
    }

    /// Field with the built-in polynomial for `e` (3 or 8).
    pub fn with_default_poly(e: u32) -> Result<Self, FieldError> {
        let poly = default_primitive_poly(e).ok_or(FieldError::NoDefaultPolynomial(e))?;
        Self::new(e, poly)
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// Order of the multiplicative group, `q - 1`.
    pub fn order(&self) -> u32 {
        (self.q - 1) as u32
    }

    #[inline]
    pub fn add(&self, a: Gf, b: Gf) -> Gf {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Gf, b: Gf) -> Gf {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: Gf) -> Result<Gf, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        Ok(self.recip(a))
    }

    /// Inverse of a nonzero element; callers guarantee `a != 0`.
    #[inline]
    pub(crate) fn recip(&self, a: Gf) -> Gf {
        debug_assert!(a != 0);
        let l = self.log[a as usize];
        self.exp[((self.q as u32 - 1 - l) % (self.q as u32 - 1)) as usize]
    }

    pub fn div(&self, a: Gf, b: Gf) -> Result<Gf, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `alpha^i` for any `i` (reduced mod `q - 1`).
    #[inline]
    pub fn alpha_pow(&self, i: u32) -> Gf {
        self.exp[(i % self.order()) as usize]
    }

    /// Discrete log base alpha; `None` for zero.
    #[inline]
    pub fn log(&self, a: Gf) -> Option<u32> {
        match self.log[a as usize] {
            u32::MAX => None,
            l => Some(l),
        }
    }

    /// `v(a)`: bit `j` is the coefficient of `alpha^j`.
    #[inline]
    pub fn v(&self, a: Gf) -> u32 {
        a as u32
    }

    #[inline]
    pub fn from_v(&self, bits: u32) -> Gf {
        debug_assert!((bits as usize) < self.q);
        bits as Gf
    }

    /// `w(a)`: bit `k` is entry `(0, k)` of `A(a)`.
    #[inline]
    pub fn w(&self, a: Gf) -> u32 {
        self.w[a as usize]
    }

    #[inline]
    pub fn from_w(&self, bits: u32) -> Gf {
        self.w_inv[bits as usize]
    }

    /// `A(a)`, the matrix of multiplication by `a` on `v`-coordinates.
    pub fn companion(&self, a: Gf) -> Companion {
        let e = self.e as usize;
        let mut rows = vec![0u32; e];
        for k in 0..e {
            let col = self.mul(a, self.alpha_pow(k as u32)) as u32;
            for (i, row) in rows.iter_mut().enumerate() {
                *row |= (col >> i & 1) << k;
            }
        }
        Companion { e: self.e, rows }
    }

    /// `A(a)^T`, the matrix of multiplication by `a` on `w`-coordinates.
    pub fn companion_transpose(&self, a: Gf) -> Companion {
        self.companion(a).transpose()
    }
}

/// An `e x e` binary matrix; bit `k` of `rows[i]` is entry `(i, k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Companion {
    e: u32,
    rows: Vec<u32>,
}

impl Companion {
    pub fn identity(e: u32) -> Self {
        Companion {
            e,
            rows: (0..e).map(|i| 1 << i).collect(),
        }
    }

    pub fn zero(e: u32) -> Self {
        Companion {
            e,
            rows: vec![0; e as usize],
        }
    }

    /// Parses rows written as `'0'/'1'` strings, leftmost character = column 0.
    pub fn from_row_strings(rows: &[&str]) -> Self {
        let e = rows.len() as u32;
        let rows = rows
            .iter()
            .map(|s| {
                s.bytes()
                    .enumerate()
                    .fold(0u32, |acc, (k, b)| acc | (((b == b'1') as u32) << k))
            })
            .collect();
        Companion { e, rows }
    }

    pub fn dim(&self) -> u32 {
        self.e
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn get(&self, i: usize, k: usize) -> bool {
        self.rows[i] >> k & 1 == 1
    }

    pub fn row_string(&self, i: usize) -> String {
        (0..self.e as usize)
            .map(|k| if self.get(i, k) { '1' } else { '0' })
            .collect()
    }

    /// Matrix-vector product over GF(2); `x` and the result are bit-packed.
    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        self.rows
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, r)| acc | (((r & x).count_ones() & 1) << i))
    }

    pub fn transpose(&self) -> Self {
        let e = self.e as usize;
        let mut rows = vec![0u32; e];
        for (i, r) in self.rows.iter().enumerate() {
            for (k, row) in rows.iter_mut().enumerate() {
                *row |= (r >> k & 1) << i;
            }
        }
        Companion { e: self.e, rows }
    }

    pub fn mul(&self, other: &Companion) -> Companion {
        // Row i of the product is the XOR of rows of `other` selected by row i of self.
        let rows = self
            .rows
            .iter()
            .map(|r| {
                (0..self.e as usize)
                    .filter(|k| r >> k & 1 == 1)
                    .fold(0, |acc, k| acc ^ other.rows[k])
            })
            .collect();
        Companion { e: self.e, rows }
    }

    pub fn add(&self, other: &Companion) -> Companion {
        Companion {
            e: self.e,
            rows: self.rows.iter().zip(&other.rows).map(|(a, b)| a ^ b).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }
}

/// Parses a bit string written least-significant coefficient first ("1101" = 1 + x + x^3).
pub fn poly_from_lsb_string(s: &str) -> Option<u32> {
    if s.is_empty() || s.len() > 32 {
        return None;
    }
    s.bytes().enumerate().try_fold(0u32, |acc, (i, b)| match b {
        b'0' => Some(acc),
        b'1' => Some(acc | 1 << i),
        _ => None,
    })
}

pub fn poly_to_lsb_string(poly: u32) -> String {
    let deg = 31 - poly.leading_zeros();
    (0..=deg).map(|i| if poly >> i & 1 == 1 { '1' } else { '0' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(x: u32, e: u32) -> String {
        (0..e).map(|i| if x >> i & 1 == 1 { '1' } else { '0' }).collect()
    }

    #[test]
    fn gf8_basic_identities() {
        let f = Field::with_default_poly(3).unwrap();
        assert_eq!(f.mul(f.alpha_pow(3), f.alpha_pow(4)), 1);
        assert_eq!(f.add(f.alpha_pow(3), f.alpha_pow(1)), 1);
        assert_eq!(f.alpha_pow(7), 1);
        assert_eq!(bits(f.v(f.alpha_pow(3)), 3), "110");
        assert_eq!(bits(f.w(f.alpha_pow(3)), 3), "101");
        assert_eq!(f.v(0), 0);
        assert_eq!(f.w(0), 0);
    }

    #[test]
    fn rejects_bad_polynomials() {
        assert!(matches!(
            Field::new(3, 0b1001),
            Err(FieldError::NonPrimitivePolynomial { .. })
        ));
        assert!(matches!(
            Field::new(3, 0b0110),
            Err(FieldError::MalformedPolynomial { .. })
        ));
        assert!(matches!(Field::new(17, 0), Err(FieldError::UnsupportedDegree(17))));
        // x^4 + x^3 + x^2 + x + 1 is irreducible but has order 5.
        assert!(matches!(
            Field::new(4, 0b11111),
            Err(FieldError::NonPrimitivePolynomial { order: 5, .. })
        ));
        assert_eq!(
            Field::with_default_poly(3).unwrap().inv(0),
            Err(FieldError::DivisionByZero)
        );
    }

    #[test]
    fn companion_times_v_is_v_of_product() {
        let f = Field::with_default_poly(3).unwrap();
        let a3 = f.companion(f.alpha_pow(3));
        assert_eq!(bits(a3.apply(f.v(f.alpha_pow(2))), 3), "111");
        assert_eq!(f.companion(1), Companion::identity(3));
        assert_eq!(f.companion(0), Companion::zero(3));
    }

    #[test]
    fn lsb_poly_strings_round_trip() {
        assert_eq!(poly_to_lsb_string(POLY_E8), "101110001");
        assert_eq!(poly_from_lsb_string("101110001"), Some(POLY_E8));
        assert_eq!(poly_from_lsb_string("1101"), Some(POLY_E3));
        assert_eq!(poly_from_lsb_string("12"), None);
    }
}
