//! Periodic trigonometric polynomials on the box `[0, L)`.
//!
//! A [`Field`] stores Fourier coefficients `c_k` for `k ∈ [-K, K]` and
//! represents `f(x) = Σ_k c_k exp(i·2πk·x/L)`. Bilinears of truncated mode
//! expansions are again trigonometric polynomials (of twice the degree), so
//! derivatives and spatial integrals of densities and currents are exact in
//! this representation and never pick up grid aliasing.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    box_length: f64,
    max_index: usize,
    coeffs: Vec<Complex64>,
}

impl Field {
    pub fn zeros(box_length: f64, max_index: usize) -> Self {
        Self {
            box_length,
            max_index,
            coeffs: vec![ZERO; 2 * max_index + 1],
        }
    }

    pub fn constant(box_length: f64, max_index: usize, value: Complex64) -> Self {
        let mut f = Self::zeros(box_length, max_index);
        f.coeffs[max_index] = value;
        f
    }

    /// Coefficients ordered from `k = -K` to `k = K`.
    pub fn from_coeffs(box_length: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::Config(format!(
                "field needs an odd number of coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self {
            box_length,
            max_index: coeffs.len() / 2,
            coeffs,
        })
    }

    /// Trigonometric interpolant of samples taken at `x_j = jL/n` (`n` odd).
    pub fn from_samples(box_length: f64, samples: &[Complex64]) -> Result<Self> {
        let n = samples.len();
        if n.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "trigonometric interpolation needs an odd sample count, got {n}"
            )));
        }
        let coeffs = dft_coefficients(samples);
        Self::from_coeffs(box_length, coeffs)
    }

    pub fn from_real_samples(box_length: f64, samples: &[f64]) -> Result<Self> {
        let c: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::from_samples(box_length, &c)
    }

    /// Projects `f` onto degree `max_index` by sampling it on `2K+1` points.
    /// Exact when `f` is itself a trigonometric polynomial of degree ≤ K.
    pub fn from_fn(box_length: f64, max_index: usize, f: impl Fn(f64) -> Complex64) -> Self {
        let n = 2 * max_index + 1;
        let samples: Vec<Complex64> = (0..n)
            .map(|j| f(j as f64 * box_length / n as f64))
            .collect();
        Self {
            box_length,
            max_index,
            coeffs: dft_coefficients(&samples),
        }
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of `exp(i·2πk·x/L)`; zero outside the stored range.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let kk = self.max_index as i64;
        if k.abs() > kk {
            ZERO
        } else {
            self.coeffs[(k + kk) as usize]
        }
    }

    pub fn add_to_coeff(&mut self, k: i64, value: Complex64) {
        let kk = self.max_index as i64;
        assert!(k.abs() <= kk, "frequency {k} outside field range {kk}");
        self.coeffs[(k + kk) as usize] += value;
    }

    fn wavenumber(&self, k: i64) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / self.box_length
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let kk = self.max_index as i64;
        let base = Complex64::from_polar(1.0, self.wavenumber(1) * x);
        // start from exp(-iKθ) and walk upward
        let mut phase = Complex64::from_polar(1.0, -self.wavenumber(kk) * x);
        let mut acc = ZERO;
        for c in &self.coeffs {
            acc += c * phase;
            phase *= base;
        }
        acc
    }

    /// Samples at `x_j = jL/n`.
    pub fn sample(&self, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| self.eval(j as f64 * self.box_length / n as f64))
            .collect()
    }

    pub fn sample_real(&self, n: usize) -> Vec<f64> {
        self.sample(n).into_iter().map(|c| c.re).collect()
    }

    pub fn derivative(&self) -> Field {
        let kk = self.max_index as i64;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * Complex64::new(0.0, self.wavenumber(i as i64 - kk)))
            .collect();
        Field {
            box_length: self.box_length,
            max_index: self.max_index,
            coeffs,
        }
    }

    /// `∫_0^L f(x) dx`.
    pub fn integral(&self) -> Complex64 {
        self.coeffs[self.max_index] * self.box_length
    }

    /// `∫_0^L f(x) g(x) dx`, exact.
    pub fn integral_product(&self, other: &Field) -> Complex64 {
        let kk = self.max_index.min(other.max_index) as i64;
        let s: Complex64 = (-kk..=kk).map(|k| self.coeff(k) * other.coeff(-k)).sum();
        s * self.box_length
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> Field {
        let coeffs = self.coeffs.iter().rev().map(|c| c.conj()).collect();
        Field {
            box_length: self.box_length,
            max_index: self.max_index,
            coeffs,
        }
    }

    /// Pointwise real part.
    pub fn real_part(&self) -> Field {
        (self + &self.conj()) * 0.5
    }

    /// Upper bound on `max_x |Im f(x)|`.
    pub fn imag_bound(&self) -> f64 {
        let kk = self.max_index as i64;
        (-kk..=kk)
            .map(|k| (self.coeff(k) - self.coeff(-k).conj()).norm() * 0.5)
            .sum()
    }

    /// `Σ_k |c_k|`, an upper bound on `max_x |f(x)|`.
    pub fn abs_bound(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// `∫ |f|² dx` via Parseval.
    pub fn norm_sqr_integral(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.box_length
    }

    pub fn max_abs_on_grid(&self, n: usize) -> f64 {
        self.sample(n).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Same function with degree `max_index` (zero-padded or truncated).
    pub fn with_max_index(&self, max_index: usize) -> Field {
        let kk = max_index as i64;
        let coeffs = (-kk..=kk).map(|k| self.coeff(k)).collect();
        Field {
            box_length: self.box_length,
            max_index,
            coeffs,
        }
    }

    /// `∫ K(x - y) g(y) dy` where `self` is the translation kernel `K(s)`.
    pub fn convolve(&self, g: &Field) -> Field {
        let kk = self.max_index as i64;
        let coeffs = (-kk..=kk)
            .map(|k| self.coeff(k) * g.coeff(k) * self.box_length)
            .collect();
        Field {
            box_length: self.box_length,
            max_index: self.max_index,
            coeffs,
        }
    }

    pub fn scale(&self, s: Complex64) -> Field {
        Field {
            box_length: self.box_length,
            max_index: self.max_index,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    fn zip_with(&self, other: &Field, op: impl Fn(Complex64, Complex64) -> Complex64) -> Field {
        let max_index = self.max_index.max(other.max_index);
        let kk = max_index as i64;
        let coeffs = (-kk..=kk)
            .map(|k| op(self.coeff(k), other.coeff(k)))
            .collect();
        Field {
            box_length: self.box_length,
            max_index,
            coeffs,
        }
    }
}

impl Add<&Field> for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub<&Field> for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul<f64> for Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

/// Fourier coefficients `c_k = (1/n) Σ_j f_j exp(-2πi jk/n)` for odd `n`,
/// ordered `k = -(n-1)/2 ..= (n-1)/2`.
pub fn dft_coefficients(samples: &[Complex64]) -> Vec<Complex64> {
    let n = samples.len();
    debug_assert!(n % 2 == 1);
    let mut buf = samples.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let kk = (n / 2) as i64;
    let inv = 1.0 / n as f64;
    (-kk..=kk)
        .map(|k| buf[k.rem_euclid(n as i64) as usize] * inv)
        .collect()
}

/// Inverse of [`dft_coefficients`].
pub fn dft_samples(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len();
    debug_assert!(n % 2 == 1);
    let kk = (n / 2) as i64;
    let mut buf = vec![ZERO; n];
    for (i, c) in coeffs.iter().enumerate() {
        let k = i as i64 - kk;
        buf[k.rem_euclid(n as i64) as usize] = *c;
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn interpolation_reproduces_trig_polynomial() {
        let l = 3.0;
        let f = |x: f64| c((2.0 * PI * x / l).cos() + 0.5 * (4.0 * PI * x / l).sin());
        let samples: Vec<Complex64> = (0..7).map(|j| f(j as f64 * l / 7.0)).collect();
        let field = Field::from_samples(l, &samples).unwrap();
        for x in [0.1, 0.77, 2.9] {
            assert!((field.eval(x) - f(x)).norm() < 1e-13);
        }
        assert!((field.coeff(1) - c(0.5)).norm() < 1e-14);
        assert!((field.coeff(2) - Complex64::new(0.0, -0.25)).norm() < 1e-14);
    }

    #[test]
    fn derivative_and_integrals() {
        let l = 2.0 * PI;
        let f = Field::from_fn(l, 3, |x| c(x.sin()));
        let d = f.derivative();
        assert!((d.eval(0.3) - c(0.3f64.cos())).norm() < 1e-13);
        let g = Field::from_fn(l, 3, |x| c(x.sin()));
        // ∫ sin² = π
        assert!((f.integral_product(&g) - c(PI)).norm() < 1e-13);
        assert!(f.integral().norm() < 1e-14);
        assert!((f.norm_sqr_integral() - PI).abs() < 1e-13);
    }

    #[test]
    fn round_trip_and_odd_size_guard() {
        let coeffs: Vec<Complex64> = (0..9).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let back = dft_coefficients(&dft_samples(&coeffs));
        for (a, b) in coeffs.iter().zip(&back) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(Field::from_samples(1.0, &[c(1.0), c(2.0)]).is_err());
    }

    #[test]
    fn convolution_matches_quadrature() {
        let l = 2.0 * PI;
        let kernel = Field::from_fn(l, 2, |s| c(s.cos() + 0.3 * (2.0 * s).sin()));
        let g = Field::from_fn(l, 2, |y| c(1.0 + y.sin()));
        let conv = kernel.convolve(&g);
        let x = 0.8;
        let n = 64;
        let quad: Complex64 = (0..n)
            .map(|j| {
                let y = j as f64 * l / n as f64;
                kernel.eval(x - y) * g.eval(y) * (l / n as f64)
            })
            .sum();
        assert!((conv.eval(x) - quad).norm() < 1e-12);
    }
}
