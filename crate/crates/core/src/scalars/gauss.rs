use std::fmt;

use rug::{Float, Integer, Rational};

use super::{Modulus, Scalar};

/// Denominator bound when recovering a rational from a float.
const MAX_RECOVERED_DENOMINATOR: u64 = 1_000_000_000;

/// Exact element of `Q(i)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussRational { re, im }
    }

    fn norm_sq(&self) -> Rational {
        Rational::from(&self.re * &self.re) + Rational::from(&self.im * &self.im)
    }

    /// Best rational approximation with bounded denominator, accepted only if
    /// it matches `x` to within a few ulps.
    fn recover(x: &Float) -> Option<Rational> {
        if !x.is_finite() {
            return None;
        }
        let prec = x.prec();
        let slack = Float::with_val(prec, Float::i_exp(1, 8 - prec as i32));
        let scale = {
            let a = Float::with_val(prec, x.abs_ref());
            if a < 1 {
                Float::with_val(prec, 1)
            } else {
                a
            }
        };
        let tol = Float::with_val(prec, &slack * &scale);
        if Float::with_val(prec, x.abs_ref()) <= tol {
            return Some(Rational::new());
        }
        // Continued fraction of x.
        let mut rem = x.clone();
        let (mut p0, mut q0) = (Integer::from(1), Integer::from(0));
        let (mut p1, mut q1) = (Integer::from(0), Integer::from(1));
        for _ in 0..96 {
            let a = rem.clone().floor();
            let ai = a.to_integer()?;
            let p2 = Integer::from(&ai * &p0) + &p1;
            let q2 = Integer::from(&ai * &q0) + &q1;
            if q2 > MAX_RECOVERED_DENOMINATOR {
                break;
            }
            p1 = std::mem::replace(&mut p0, p2);
            q1 = std::mem::replace(&mut q0, q2);
            let cand = Rational::from((p0.clone(), q0.clone()));
            let err = Float::with_val(prec, x - &cand).abs();
            if err <= tol {
                return Some(cand);
            }
            let frac = Float::with_val(prec, &rem - &a);
            if frac.is_zero() {
                break;
            }
            rem = Float::with_val(prec, frac.recip_ref());
        }
        None
    }
}

impl fmt::Debug for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re, self.im)
    }
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    let t = s.trim();
    let valid = !t.is_empty()
        && t.chars().all(|c| c.is_ascii_digit() || c == '/' || c == '-' || c == '+')
        && t.matches('/').count() <= 1;
    if !valid {
        return Err(format!("expected a rational literal \"p\" or \"p/q\", got {s:?}"));
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n, d),
        None => (t, "1"),
    };
    let parse_int = |x: &str, signed: bool| -> Result<Integer, String> {
        let body = x.strip_prefix(['-', '+']).unwrap_or(x);
        if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) || (!signed && body.len() != x.len()) {
            return Err(format!("malformed integer {x:?} in {s:?}"));
        }
        Integer::from_str_radix(x.strip_prefix('+').unwrap_or(x), 10).map_err(|e| e.to_string())
    };
    let n = parse_int(num, true)?;
    let d = parse_int(den, false)?;
    if d == 0 {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rational::from((n, d)))
}

impl Scalar for GaussRational {
    type Ctx = ();
    const EXACT: bool = true;

    fn zero(_: &()) -> Self {
        GaussRational::new(Rational::new(), Rational::new())
    }
    fn one(_: &()) -> Self {
        GaussRational::new(Rational::from(1), Rational::new())
    }
    fn from_i64(_: &(), v: i64) -> Self {
        GaussRational::new(Rational::from(v), Rational::new())
    }
    fn from_ratio(_: &(), re: (i64, i64), im: (i64, i64)) -> Self {
        GaussRational::new(Rational::from(re), Rational::from(im))
    }
    fn from_floats(_: &(), re: &Float, im: &Float) -> Option<Self> {
        Some(GaussRational::new(Self::recover(re)?, Self::recover(im)?))
    }

    fn add(&self, o: &Self) -> Self {
        GaussRational::new(Rational::from(&self.re + &o.re), Rational::from(&self.im + &o.im))
    }
    fn sub(&self, o: &Self) -> Self {
        GaussRational::new(Rational::from(&self.re - &o.re), Rational::from(&self.im - &o.im))
    }
    fn mul(&self, o: &Self) -> Self {
        let re = Rational::from(&self.re * &o.re) - Rational::from(&self.im * &o.im);
        let im = Rational::from(&self.re * &o.im) + Rational::from(&self.im * &o.re);
        GaussRational::new(re, im)
    }
    fn neg(&self) -> Self {
        GaussRational::new(Rational::from(-&self.re), Rational::from(-&self.im))
    }
    fn inv_unchecked(&self) -> Self {
        let d = self.norm_sq();
        GaussRational::new(Rational::from(&self.re / &d), Rational::from(-&self.im) / &d)
    }
    fn conj(&self) -> Self {
        GaussRational::new(self.re.clone(), Rational::from(-&self.im))
    }
    fn scale(&self, num: i64, den: i64) -> Self {
        let r = Rational::from((num, den));
        GaussRational::new(Rational::from(&self.re * &r), Rational::from(&self.im * &r))
    }
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        self.re += Rational::from(&a.re * &b.re);
        self.re -= Rational::from(&a.im * &b.im);
        self.im += Rational::from(&a.re * &b.im);
        self.im += Rational::from(&a.im * &b.re);
    }
    fn add_assign(&mut self, o: &Self) {
        self.re += &o.re;
        self.im += &o.im;
    }

    fn is_structural_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }

    fn modulus(&self, prec: u32) -> Modulus {
        let n = self.norm_sq();
        let value = Float::with_val(prec, &n).sqrt();
        // One rounding in the conversion, one in the square root: relative
        // error below 2^(1-prec).
        let error = Float::with_val(prec, &value * Float::with_val(prec, Float::i_exp(1, 1 - prec as i32)));
        Modulus { value, error }
    }

    fn to_floats(&self, prec: u32) -> (Float, Float) {
        (Float::with_val(prec, &self.re), Float::with_val(prec, &self.im))
    }

    fn to_literal(&self) -> (String, String) {
        (self.re.to_string(), self.im.to_string())
    }

    fn parse_literal(_: &(), s: &str) -> Result<Self, String> {
        Ok(GaussRational::new(parse_rational(s)?, Rational::new()))
    }

    fn modulus_at_most_one(&self) -> bool {
        self.norm_sq() <= 1
    }

    fn one_like(&self) -> Self {
        Self::one(&())
    }

    fn widen(_: &(), _: u32) {}

    fn in_ctx(&self, _: &()) -> Self {
        self.clone()
    }
}
