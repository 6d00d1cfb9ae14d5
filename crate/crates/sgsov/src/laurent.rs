//! Laurent polynomials of fixed parity in the spectral parameter.
//!
//! Only the degrees of one parity are stored: `coeffs[i]` multiplies
//! `lambda^(min_deg + 2 i)`.

use crate::scalar::{pow, zero, Cx, Mat, Real};
use nalgebra::DMatrix;

#[derive(Clone, Debug)]
pub struct OperatorLaurent<R: Real> {
    pub min_deg: i64,
    pub coeffs: Vec<Mat<R>>,
}

impl<R: Real> OperatorLaurent<R> {
    pub fn constant(m: Mat<R>) -> Self {
        Self { min_deg: 0, coeffs: vec![m] }
    }

    pub fn zero(dim: usize) -> Self {
        Self::constant(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn max_deg(&self) -> i64 {
        self.min_deg + 2 * (self.coeffs.len() as i64 - 1)
    }

    /// 0 for even, 1 for odd.
    pub fn parity(&self) -> i64 {
        self.min_deg.rem_euclid(2)
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.coeffs.len()).map(move |i| self.min_deg + 2 * i as i64)
    }

    pub fn coeff(&self, deg: i64) -> Option<&Mat<R>> {
        let off = deg - self.min_deg;
        if off < 0 || off % 2 != 0 {
            return None;
        }
        self.coeffs.get((off / 2) as usize)
    }

    pub fn eval(&self, lambda: Cx<R>) -> Mat<R> {
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for (c, d) in self.coeffs.iter().zip(self.degrees()) {
            out += c * pow(lambda, d);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let dim = self.dim();
        let mut coeffs = vec![DMatrix::zeros(dim, dim); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self { min_deg: self.min_deg + other.min_deg, coeffs }
    }

    /// Sum of two polynomials of the same parity.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.parity(), other.parity(), "parity mismatch in Laurent sum");
        let lo = self.min_deg.min(other.min_deg);
        let hi = self.max_deg().max(other.max_deg());
        let dim = self.dim();
        let n = ((hi - lo) / 2 + 1) as usize;
        let mut coeffs = vec![DMatrix::zeros(dim, dim); n];
        for src in [self, other] {
            for (c, d) in src.coeffs.iter().zip(src.degrees()) {
                coeffs[((d - lo) / 2) as usize] += c;
            }
        }
        Self { min_deg: lo, coeffs }
    }
}

/// Scalar Laurent polynomial with the same storage convention.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPoly<R: Real> {
    pub min_deg: i64,
    pub coeffs: Vec<Cx<R>>,
}

impl<R: Real> LaurentPoly<R> {
    pub fn constant(c: Cx<R>) -> Self {
        Self { min_deg: 0, coeffs: vec![c] }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut coeffs = vec![zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += *a * *b;
            }
        }
        Self { min_deg: self.min_deg + other.min_deg, coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.min_deg.rem_euclid(2), other.min_deg.rem_euclid(2), "parity mismatch in Laurent sum");
        let lo = self.min_deg.min(other.min_deg);
        let hi = self.max_deg().max(other.max_deg());
        let mut coeffs = vec![zero(); ((hi - lo) / 2 + 1) as usize];
        for src in [self, other] {
            for (i, c) in src.coeffs.iter().enumerate() {
                coeffs[((src.min_deg + 2 * i as i64 - lo) / 2) as usize] += *c;
            }
        }
        Self { min_deg: lo, coeffs }
    }

    pub fn eval(&self, lambda: Cx<R>) -> Cx<R> {
        self.coeffs.iter().enumerate().fold(zero(), |acc, (i, c)| acc + *c * pow(lambda, self.min_deg + 2 * i as i64))
    }

    pub fn max_deg(&self) -> i64 {
        self.min_deg + 2 * (self.coeffs.len() as i64 - 1)
    }

    pub fn coeff(&self, deg: i64) -> Cx<R> {
        let off = deg - self.min_deg;
        if off < 0 || off % 2 != 0 {
            return zero();
        }
        self.coeffs.get((off / 2) as usize).cloned().unwrap_or_else(zero)
    }

    /// Adds a constant; the polynomial must be even.
    pub fn plus_constant(&self, c: Cx<R>) -> Self {
        assert_eq!(self.min_deg.rem_euclid(2), 0, "constant shift of an odd polynomial");
        let mut out = self.clone();
        while out.min_deg > 0 {
            out.min_deg -= 2;
            out.coeffs.insert(0, zero());
        }
        while out.max_deg() < 0 {
            out.coeffs.push(zero());
        }
        let idx = (-out.min_deg / 2) as usize;
        out.coeffs[idx] += c;
        out
    }
}
