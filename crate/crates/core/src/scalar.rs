//! The two scalar kinds: exact Gaussian rationals and `Complex64`.
//!
//! Mode algebras, Gram matrices and everything that has to be decided exactly
//! live over [`Qc`]. Smearing, `U(γ)` and correlators use floats. Promotion only
//! goes one way, through [`Scalar::to_c64`].

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.parse::<BigInt>().ok()?, BigInt::one()),
    };
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Exact conversion of a finite double; every finite `f64` is a dyadic rational.
pub fn rational_from_f64(x: f64) -> Rational {
    BigRational::from_float(x).expect("finite float")
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Huge numerator/denominator: fall back to a scaled division.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Exact complex rational `re + i·im`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Qc {
    pub re: Rational,
    pub im: Rational,
}

impl Qc {
    pub fn new(re: Rational, im: Rational) -> Self {
        Qc { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Qc { re, im: Rational::zero() }
    }

    pub fn int(n: i64) -> Self {
        Qc::real(Rational::from_integer(BigInt::from(n)))
    }

    pub fn i() -> Self {
        Qc { re: Rational::zero(), im: Rational::one() }
    }

    pub fn from_c64(z: Complex64) -> Self {
        Qc { re: rational_from_f64(z.re), im: rational_from_f64(z.im) }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn norm_sqr(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }
}

impl fmt::Debug for Qc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Qc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", format_rational(&self.re))
        } else if self.re.is_zero() {
            write!(f, "{}i", format_rational(&self.im))
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", format_rational(&self.re), format_rational(&-&self.im))
        } else {
            write!(f, "{}+{}i", format_rational(&self.re), format_rational(&self.im))
        }
    }
}

impl<'a> Add<&'a Qc> for &'a Qc {
    type Output = Qc;
    fn add(self, o: &Qc) -> Qc {
        Qc { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'a> Sub<&'a Qc> for &'a Qc {
    type Output = Qc;
    fn sub(self, o: &Qc) -> Qc {
        Qc { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a> Mul<&'a Qc> for &'a Qc {
    type Output = Qc;
    fn mul(self, o: &Qc) -> Qc {
        // Almost everything in the mode algebra is real; skip the cross terms then.
        if self.im.is_zero() && o.im.is_zero() {
            return Qc::real(&self.re * &o.re);
        }
        if self.im.is_zero() {
            return Qc { re: &self.re * &o.re, im: &self.re * &o.im };
        }
        if o.im.is_zero() {
            return Qc { re: &self.re * &o.re, im: &self.im * &o.re };
        }
        Qc {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl<'a> Div<&'a Qc> for &'a Qc {
    type Output = Qc;
    fn div(self, o: &Qc) -> Qc {
        assert!(!Scalar::is_zero(o), "division by exact zero");
        if o.im.is_zero() {
            return Qc { re: &self.re / &o.re, im: &self.im / &o.re };
        }
        let n = o.norm_sqr();
        let conj = Qc { re: o.re.clone(), im: -&o.im };
        let p = self * &conj;
        Qc { re: p.re / &n, im: p.im / &n }
    }
}

macro_rules! by_value {
    ($tr:ident, $m:ident) => {
        impl $tr for Qc {
            type Output = Qc;
            fn $m(self, o: Qc) -> Qc {
                (&self).$m(&o)
            }
        }
    };
}
by_value!(Add, add);
by_value!(Sub, sub);
by_value!(Mul, mul);
by_value!(Div, div);

impl Neg for Qc {
    type Output = Qc;
    fn neg(self) -> Qc {
        Qc { re: -self.re, im: -self.im }
    }
}

impl Neg for &Qc {
    type Output = Qc;
    fn neg(self) -> Qc {
        Qc { re: -&self.re, im: -&self.im }
    }
}

/// Field operations shared by the exact and float paths.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const EXACT: bool;
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn from_qc(q: &Qc) -> Self;
    fn conj(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn modulus(&self) -> f64;
    fn to_c64(&self) -> Complex64;

    /// Exact zero test on the exact path, `|x| ≤ tol` on the float path.
    fn negligible(&self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.modulus() <= tol
        }
    }

    fn mul_ref(&self, o: &Self) -> Self {
        self.clone() * o.clone()
    }

    fn add_ref(&self, o: &Self) -> Self {
        self.clone() + o.clone()
    }
}

impl Scalar for Qc {
    const EXACT: bool = true;
    fn zero() -> Self {
        Qc { re: Rational::zero(), im: Rational::zero() }
    }
    fn one() -> Self {
        Qc::int(1)
    }
    fn from_i64(n: i64) -> Self {
        Qc::int(n)
    }
    fn from_rational(r: &Rational) -> Self {
        Qc::real(r.clone())
    }
    fn from_qc(q: &Qc) -> Self {
        q.clone()
    }
    fn conj(&self) -> Self {
        Qc { re: self.re.clone(), im: -&self.im }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn modulus(&self) -> f64 {
        self.to_c64().norm()
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn add_ref(&self, o: &Self) -> Self {
        self + o
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn from_rational(r: &Rational) -> Self {
        Complex64::new(rational_to_f64(r), 0.0)
    }
    fn from_qc(q: &Qc) -> Self {
        q.to_c64()
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
}

/// Generalised binomial coefficient C(m, j) for any integer m and j ≥ 0.
pub fn binomial(m: i64, j: u32) -> Rational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..j as i64 {
        num *= BigInt::from(m - i);
        den *= BigInt::from(i + 1);
    }
    BigRational::new(num, den)
}

/// Falling factorial m(m−1)…(m−p+1).
pub fn falling(m: i64, p: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..p as i64 {
        acc *= BigInt::from(m - i);
    }
    acc
}

pub fn sign(k: i64) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_division_inverts_multiplication() {
        let a = Qc::new(rat(3, 4), rat(-1, 2));
        let b = Qc::new(rat(2, 5), rat(7, 3));
        assert_eq!(&(&a * &b) / &b, a);
    }

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["-22/5", "1/2", "7", "0"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }

    #[test]
    fn binomials_with_negative_top() {
        assert_eq!(binomial(-2, 3), rat(-4, 1));
        assert_eq!(binomial(5, 2), rat(10, 1));
        assert_eq!(binomial(2, 3), rat(0, 1));
    }

    #[test]
    fn floats_convert_exactly() {
        let q = Qc::from_c64(Complex64::new(0.3, -1.25));
        assert_eq!(q.to_c64(), Complex64::new(0.3, -1.25));
        assert_eq!(q.im, rat(-5, 4));
    }
}
