use std::fmt;

use rug::float::Round;
use rug::{Assign, Float};

use super::{Modulus, Scalar};

/// Complex number as a pair of MPFR floats sharing one precision.
///
/// Each real component of a sum, product or quotient is rounded once
/// (fused `ac - bd` / `ad + bc`), so a single operation has relative error at
/// most `2^(1-prec)` per component.
#[derive(Clone, PartialEq)]
pub struct BigComplex {
    pub re: Float,
    pub im: Float,
}

impl BigComplex {
    pub fn new(re: Float, im: Float) -> Self {
        BigComplex { re, im }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }
}

impl fmt::Debug for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6e} + {:.6e}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl Scalar for BigComplex {
    /// Precision in bits.
    type Ctx = u32;
    const EXACT: bool = false;

    fn zero(p: &u32) -> Self {
        BigComplex::new(Float::new(*p), Float::new(*p))
    }
    fn one(p: &u32) -> Self {
        BigComplex::new(Float::with_val(*p, 1), Float::new(*p))
    }
    fn from_i64(p: &u32, v: i64) -> Self {
        BigComplex::new(Float::with_val(*p, v), Float::new(*p))
    }
    fn from_ratio(p: &u32, re: (i64, i64), im: (i64, i64)) -> Self {
        let r = Float::with_val(*p, rug::Rational::from(re));
        let i = Float::with_val(*p, rug::Rational::from(im));
        BigComplex::new(r, i)
    }
    fn from_floats(p: &u32, re: &Float, im: &Float) -> Option<Self> {
        if !re.is_finite() || !im.is_finite() {
            return None;
        }
        Some(BigComplex::new(Float::with_val(*p, re), Float::with_val(*p, im)))
    }

    fn add(&self, o: &Self) -> Self {
        let p = self.prec();
        BigComplex::new(Float::with_val(p, &self.re + &o.re), Float::with_val(p, &self.im + &o.im))
    }
    fn sub(&self, o: &Self) -> Self {
        let p = self.prec();
        BigComplex::new(Float::with_val(p, &self.re - &o.re), Float::with_val(p, &self.im - &o.im))
    }
    fn mul(&self, o: &Self) -> Self {
        let p = self.prec();
        let re = Float::with_val(p, &self.re * &o.re - &self.im * &o.im);
        let im = Float::with_val(p, &self.re * &o.im + &self.im * &o.re);
        BigComplex::new(re, im)
    }
    fn neg(&self) -> Self {
        BigComplex::new(Float::with_val(self.prec(), -&self.re), Float::with_val(self.prec(), -&self.im))
    }
    fn inv_unchecked(&self) -> Self {
        let p = self.prec();
        let d = Float::with_val(p + 16, &self.re * &self.re + &self.im * &self.im);
        let re = Float::with_val(p, &self.re / &d);
        let im = Float::with_val(p, -Float::with_val(p + 16, &self.im / &d));
        BigComplex::new(re, im)
    }
    fn conj(&self) -> Self {
        BigComplex::new(self.re.clone(), Float::with_val(self.prec(), -&self.im))
    }
    fn scale(&self, num: i64, den: i64) -> Self {
        let p = self.prec();
        let r = Float::with_val(p + 16, rug::Rational::from((num, den)));
        BigComplex::new(Float::with_val(p, &self.re * &r), Float::with_val(p, &self.im * &r))
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        let p = self.prec();
        let mut t = Float::new(p);
        t.assign(&a.re * &b.re - &a.im * &b.im);
        self.re += &t;
        t.assign(&a.re * &b.im + &a.im * &b.re);
        self.im += &t;
    }
    fn add_assign(&mut self, o: &Self) {
        self.re += &o.re;
        self.im += &o.im;
    }

    fn is_structural_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn modulus(&self, prec: u32) -> Modulus {
        let value = Float::with_val(prec, self.re.hypot_ref(&self.im));
        // hypot is correctly rounded: half an ulp.
        let error = Float::with_val(prec, &value * Float::with_val(prec, Float::i_exp(1, -(prec as i32))));
        Modulus { value, error }
    }

    fn to_floats(&self, prec: u32) -> (Float, Float) {
        (Float::with_val(prec, &self.re), Float::with_val(prec, &self.im))
    }

    fn to_literal(&self) -> (String, String) {
        (float_literal(&self.re), float_literal(&self.im))
    }

    fn parse_literal(p: &u32, s: &str) -> Result<Self, String> {
        let t = s.trim();
        let ok = !t.is_empty()
            && t.bytes().all(|b| b.is_ascii_digit() || matches!(b, b'.' | b'-' | b'+' | b'e' | b'E' | b'/'));
        if !ok {
            return Err(format!("expected a decimal literal, got {s:?}"));
        }
        if t.contains('/') {
            // Integer fractions are accepted as a convenience.
            let r = super::GaussRational::parse_literal(&(), t)?;
            return Ok(BigComplex::new(Float::with_val(*p, &r.re), Float::new(*p)));
        }
        let parsed = Float::parse(t).map_err(|e| format!("malformed decimal {s:?}: {e}"))?;
        let v = Float::with_val_round(*p, parsed, Round::Nearest).0;
        if !v.is_finite() {
            return Err(format!("decimal literal out of range: {s:?}"));
        }
        Ok(BigComplex::new(v, Float::new(*p)))
    }

    fn modulus_at_most_one(&self) -> bool {
        let p = self.prec();
        let m = Float::with_val(p, self.re.hypot_ref(&self.im));
        let slack = Float::with_val(p, 1) + Float::with_val(p, Float::i_exp(1, 4 - p as i32));
        m <= slack
    }

    fn one_like(&self) -> Self {
        Self::one(&self.prec())
    }

    fn widen(p: &u32, factor: u32) -> u32 {
        (p * factor).min(super::MAX_PRECISION)
    }

    fn in_ctx(&self, p: &u32) -> Self {
        BigComplex::new(Float::with_val(*p, &self.re), Float::with_val(*p, &self.im))
    }
}

/// Decimal literal with enough digits to read back to the same float.
pub(crate) fn float_literal(x: &Float) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, None)
}
