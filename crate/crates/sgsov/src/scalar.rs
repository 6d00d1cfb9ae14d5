use nalgebra::{ComplexField, DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FloatConst, FromPrimitive};
use std::fmt::Debug;

/// Real scalar the whole crate is generic over.
pub trait Real: RealField + FromPrimitive + FloatConst + Copy + Debug + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("representable literal")
    }
    fn to_f64(self) -> f64;
    /// Machine epsilon of the type, as f64.
    fn eps() -> f64;
}

impl Real for f64 {
    fn to_f64(self) -> f64 {
        self
    }
    fn eps() -> f64 {
        f64::EPSILON
    }
}

impl Real for f32 {
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn eps() -> f64 {
        f32::EPSILON as f64
    }
}

pub type Cx<R> = Complex<R>;
pub type Mat<R> = DMatrix<Complex<R>>;
pub type Vect<R> = DVector<Complex<R>>;

/// `tol` raised to 1e3 machine epsilons of R; f64 thresholds are left unchanged.
pub fn floor_tol<R: Real>(tol: f64) -> f64 {
    tol.max(1e3 * R::eps())
}

pub fn c<R: Real>(re: f64, im: f64) -> Cx<R> {
    Complex::new(R::lit(re), R::lit(im))
}

pub fn cr<R: Real>(x: R) -> Cx<R> {
    Complex::new(x, R::zero())
}

pub fn one<R: Real>() -> Cx<R> {
    Complex::new(R::one(), R::zero())
}

pub fn zero<R: Real>() -> Cx<R> {
    Complex::new(R::zero(), R::zero())
}

pub fn imag_unit<R: Real>() -> Cx<R> {
    Complex::new(R::zero(), R::one())
}

/// Modulus as f64, the unit in which all tolerances are expressed.
pub fn abs<R: Real>(z: Cx<R>) -> f64 {
    ComplexField::modulus(z).to_f64()
}

pub fn cexp<R: Real>(z: Cx<R>) -> Cx<R> {
    ComplexField::exp(z)
}

pub fn csqrt<R: Real>(z: Cx<R>) -> Cx<R> {
    ComplexField::sqrt(z)
}

pub fn arg<R: Real>(z: Cx<R>) -> R {
    ComplexField::argument(z)
}

/// Integer power, negative exponents allowed.
pub fn pow<R: Real>(z: Cx<R>, n: i64) -> Cx<R> {
    let mut base = if n < 0 { one::<R>() / z } else { z };
    let mut e = n.unsigned_abs();
    let mut acc = one::<R>();
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}

/// exp(i pi x) for rational phases, evaluated directly to avoid drift.
pub fn phase<R: Real>(x: f64) -> Cx<R> {
    let t = R::lit(x) * R::PI();
    Complex::new(t.cos(), t.sin())
}

/// Principal p-th root.
pub fn principal_root<R: Real>(z: Cx<R>, p: usize) -> Cx<R> {
    if abs(z) == 0.0 {
        return zero();
    }
    let r = ComplexField::modulus(z);
    let th = arg(z) / R::lit(p as f64);
    let m = r.powf(R::one() / R::lit(p as f64));
    Complex::new(m * th.cos(), m * th.sin())
}

/// Real p-th root of a real number, keeping the sign (p odd).
pub fn real_odd_root<R: Real>(x: R, p: usize) -> R {
    let a = x.abs().powf(R::one() / R::lit(p as f64));
    if x < R::zero() {
        -a
    } else {
        a
    }
}

/// x / y - y / x, the ubiquitous antisymmetric factor.
pub fn dd<R: Real>(x: Cx<R>, y: Cx<R>) -> Cx<R> {
    x / y - y / x
}

pub fn to_c64<R: Real>(z: Cx<R>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

pub fn from_c64<R: Real>(z: Complex<f64>) -> Cx<R> {
    c(z.re, z.im)
}
