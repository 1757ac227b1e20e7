//! Complex scalars with two interchangeable backends.
//!
//! [`GaussRational`] is exact: real and imaginary parts are arbitrary
//! rationals, so every identity that holds over `Q(i)` holds bit for bit.
//! [`BigComplex`] carries a pair of MPFR floats at a configurable precision.
//! Algorithms elsewhere in the crate are generic over [`Scalar`] and take an
//! [`Arith`] handle bundling the backend context with the [`ZeroPolicy`] that
//! decides when a value counts as zero.

mod bigfloat;
mod gauss;

pub use bigfloat::BigComplex;
pub use gauss::GaussRational;

use std::fmt;

use rug::Float;

use crate::error::{Error, Result};

/// Default working precision of the floating backend, in bits.
pub const DEFAULT_PRECISION: u32 = 256;
/// Smallest precision accepted by the floating backend.
pub const MIN_PRECISION: u32 = 64;
/// Largest precision accepted anywhere (keeps untrusted input bounded).
pub const MAX_PRECISION: u32 = 1 << 16;

/// How `is_zero` is decided.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZeroPolicy {
    /// Structural zero. Only meaningful for the exact backend.
    Exact,
    /// `|a| <= tol`, with `tol > 0`.
    Tolerance(f64),
}

impl ZeroPolicy {
    pub fn tolerance(tol: f64) -> Result<Self> {
        if tol > 0.0 && tol.is_finite() {
            Ok(ZeroPolicy::Tolerance(tol))
        } else {
            Err(Error::InvalidInput(format!(
                "zero tolerance must be positive and finite, got {tol}"
            )))
        }
    }

    /// Default tolerance for a floating precision: `2^(-prec/2)`.
    pub fn default_for_precision(prec: u32) -> Self {
        ZeroPolicy::Tolerance(2f64.powi(-((prec / 2).min(1000) as i32)))
    }

    pub fn tol(&self) -> Option<f64> {
        match self {
            ZeroPolicy::Exact => None,
            ZeroPolicy::Tolerance(t) => Some(*t),
        }
    }
}

/// A certified modulus: `|a|` lies in `[value - error, value + error]`.
#[derive(Clone, Debug)]
pub struct Modulus {
    pub value: Float,
    pub error: Float,
}

/// Complex field element. All operations are pure.
pub trait Scalar: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    /// Backend context (e.g. precision). Values created from the same context
    /// are mutually compatible.
    type Ctx: Clone + fmt::Debug + PartialEq + Send + Sync;

    /// True for backends where structural equality is mathematical equality.
    const EXACT: bool;

    fn zero(ctx: &Self::Ctx) -> Self;
    fn one(ctx: &Self::Ctx) -> Self;
    fn from_i64(ctx: &Self::Ctx, v: i64) -> Self;
    /// `re + i*im` from integer ratios.
    fn from_ratio(ctx: &Self::Ctx, re: (i64, i64), im: (i64, i64)) -> Self;
    /// Nearest representable value. The exact backend accepts only values it
    /// can recover exactly from a short continued fraction; see
    /// [`GaussRational::from_floats`].
    fn from_floats(ctx: &Self::Ctx, re: &Float, im: &Float) -> Option<Self>;

    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Inverse of a structurally nonzero value. Callers apply the zero policy
    /// first; see [`Arith::inv`].
    fn inv_unchecked(&self) -> Self;
    fn conj(&self) -> Self;
    /// Multiply by a real rational `num/den`.
    fn scale(&self, num: i64, den: i64) -> Self;

    /// `self += a * b`.
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self = self.add(&a.mul(b));
    }
    fn add_assign(&mut self, other: &Self) {
        *self = self.add(other);
    }

    fn is_structural_zero(&self) -> bool;

    /// Modulus with an error bound, at `prec` bits.
    fn modulus(&self, prec: u32) -> Modulus;

    /// Real and imaginary parts as floats at `prec` bits.
    fn to_floats(&self, prec: u32) -> (Float, Float);

    /// `(re, im)` as literal strings that [`Scalar::parse_literal`] reads back
    /// to the same value.
    fn to_literal(&self) -> (String, String);

    /// Parse a real literal in the backend's file format.
    fn parse_literal(ctx: &Self::Ctx, s: &str) -> std::result::Result<Self, String>;

    /// `|self| <= 1`, decided exactly for the exact backend and with a
    /// few-ulp slack for the floating backend.
    fn modulus_at_most_one(&self) -> bool;

    /// `a^q` by repeated squaring; `0^0 = 1`.
    fn pow(&self, q: u32) -> Self {
        let mut base = self.clone();
        let mut acc: Option<Self> = None;
        let mut e = q;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base),
                });
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        match acc {
            Some(a) => a,
            None => self.one_like(),
        }
    }

    /// The multiplicative identity with the same context as `self`.
    fn one_like(&self) -> Self;

    /// Context carrying `factor` times the working precision; the identity
    /// for exact backends.
    fn widen(ctx: &Self::Ctx, factor: u32) -> Self::Ctx;

    /// The same value in another context (rounded when the target is
    /// narrower).
    fn in_ctx(&self, ctx: &Self::Ctx) -> Self;

    /// Approximate value as `(re, im)` doubles, for diagnostics only.
    fn to_f64_pair(&self) -> (f64, f64) {
        let (re, im) = self.to_floats(64);
        (re.to_f64(), im.to_f64())
    }
}

/// Backend context plus zero policy. Every algorithm in the crate takes one.
#[derive(Clone, Debug)]
pub struct Arith<S: Scalar> {
    ctx: S::Ctx,
    policy: ZeroPolicy,
    real_prec: u32,
}

impl<S: Scalar> Arith<S> {
    /// Fails with [`Error::PolicyMismatch`] when an exact policy is paired with
    /// an inexact backend.
    pub fn new(ctx: S::Ctx, policy: ZeroPolicy, real_prec: u32) -> Result<Self> {
        if policy == ZeroPolicy::Exact && !S::EXACT {
            return Err(Error::PolicyMismatch);
        }
        if let ZeroPolicy::Tolerance(t) = policy {
            ZeroPolicy::tolerance(t)?;
        }
        if !(MIN_PRECISION..=MAX_PRECISION).contains(&real_prec) {
            return Err(Error::InvalidInput(format!(
                "precision must lie in [{MIN_PRECISION}, {MAX_PRECISION}], got {real_prec}"
            )));
        }
        Ok(Arith { ctx, policy, real_prec })
    }

    pub fn ctx(&self) -> &S::Ctx {
        &self.ctx
    }
    pub fn policy(&self) -> ZeroPolicy {
        self.policy
    }
    /// Precision used for real-valued outputs (moduli, logs).
    pub fn real_prec(&self) -> u32 {
        self.real_prec
    }

    /// Same policy with the working precision multiplied by `factor`.
    pub fn widened(&self, factor: u32) -> Self {
        Arith {
            ctx: S::widen(&self.ctx, factor),
            policy: self.policy,
            real_prec: (self.real_prec * factor).min(MAX_PRECISION),
        }
    }

    pub fn zero(&self) -> S {
        S::zero(&self.ctx)
    }
    pub fn one(&self) -> S {
        S::one(&self.ctx)
    }
    pub fn int(&self, v: i64) -> S {
        S::from_i64(&self.ctx, v)
    }
    pub fn ratio(&self, re: (i64, i64), im: (i64, i64)) -> S {
        S::from_ratio(&self.ctx, re, im)
    }

    pub fn is_zero(&self, a: &S) -> bool {
        match self.policy {
            ZeroPolicy::Exact => a.is_structural_zero(),
            ZeroPolicy::Tolerance(tol) => {
                if a.is_structural_zero() {
                    return true;
                }
                let m = a.modulus(self.real_prec.max(64));
                m.value <= tol
            }
        }
    }

    /// Classification relative to the policy, used to flag values whose
    /// zero/nonzero verdict would flip under a 10x change of tolerance.
    pub fn is_near_threshold(&self, a: &S) -> bool {
        match self.policy {
            ZeroPolicy::Exact => false,
            ZeroPolicy::Tolerance(tol) => {
                if a.is_structural_zero() {
                    return false;
                }
                let m = a.modulus(64).value.to_f64();
                m > tol / 10.0 && m <= tol * 10.0
            }
        }
    }

    pub fn inv(&self, a: &S) -> Result<S> {
        if self.is_zero(a) {
            Err(Error::DivisionByZero)
        } else {
            Ok(a.inv_unchecked())
        }
    }

    pub fn div(&self, a: &S, b: &S) -> Result<S> {
        Ok(a.mul(&self.inv(b)?))
    }

    pub fn abs(&self, a: &S) -> Float {
        a.modulus(self.real_prec).value
    }

    pub fn abs_f64(&self, a: &S) -> f64 {
        a.modulus(64).value.to_f64()
    }

    pub fn parse(&self, s: &str) -> std::result::Result<S, String> {
        S::parse_literal(&self.ctx, s)
    }

    pub fn parse_complex(&self, re: &str, im: &str) -> std::result::Result<S, String> {
        let r = S::parse_literal(&self.ctx, re)?;
        let i = S::parse_literal(&self.ctx, im)?;
        let unit = S::from_ratio(&self.ctx, (0, 1), (1, 1));
        Ok(r.add(&i.mul(&unit)))
    }

    pub fn from_floats(&self, re: &Float, im: &Float) -> Option<S> {
        S::from_floats(&self.ctx, re, im)
    }

    /// `e^{2 pi i t}` for a real `t` given as a float. Exact backends accept it
    /// only when the result is a Gaussian rational.
    pub fn unit_root(&self, t: &Float) -> Option<S> {
        let prec = self.real_prec + 32;
        let mut angle = Float::with_val(prec, rug::float::Constant::Pi) * 2u32;
        angle *= t;
        let (s, c) = angle.sin_cos(Float::new(prec));
        S::from_floats(&self.ctx, &c, &s)
    }
}

impl Arith<GaussRational> {
    pub fn exact() -> Self {
        Arith { ctx: (), policy: ZeroPolicy::Exact, real_prec: DEFAULT_PRECISION }
    }
}

impl Arith<BigComplex> {
    /// Floating backend at `prec` bits with the default tolerance for that
    /// precision.
    pub fn float(prec: u32) -> Result<Self> {
        Arith::new(prec, ZeroPolicy::default_for_precision(prec), prec)
    }
}

/// Backend selector used by configuration and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Exact,
    BigFloat,
}
