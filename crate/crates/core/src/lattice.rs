//! Periodic 1+1-D spectral lattice and the free Dirac plane-wave basis.
//!
//! The single-particle Hamiltonian is `h₀ = p·α + m·β` with `α = σ_x` and
//! `β = σ_z`. Momenta live on `p_k = 2πk/L` for `k ∈ [-(N-1)/2, (N-1)/2]`,
//! so the truncation keeps exactly `2N` modes `φ_n(x) = u_n e^{i p_n x}/√L`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-component spinor.
pub type Spinor = [Complex64; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeConfig {
    #[serde(rename = "L")]
    pub box_length: f64,
    #[serde(rename = "N")]
    pub site_count: usize,
    #[serde(rename = "m")]
    pub mass: f64,
    #[serde(rename = "q")]
    pub charge: f64,
}

impl LatticeConfig {
    pub fn new(box_length: f64, site_count: usize, mass: f64, charge: f64) -> Result<Self> {
        let cfg = Self {
            box_length,
            site_count,
            mass,
            charge,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.box_length > 0.0 && self.box_length.is_finite()) {
            return Err(Error::Config(format!(
                "box length L must be positive, got {}",
                self.box_length
            )));
        }
        if self.site_count.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "site count N must be odd, got {}",
                self.site_count
            )));
        }
        if !(self.mass >= 0.0 && self.mass.is_finite()) {
            return Err(Error::Config(format!(
                "mass m must be non-negative, got {}",
                self.mass
            )));
        }
        if !self.charge.is_finite() {
            return Err(Error::Config("charge q must be finite".into()));
        }
        Ok(())
    }

    /// Grid spacing `a = L/N`.
    pub fn spacing(&self) -> f64 {
        self.box_length / self.site_count as f64
    }

    /// Largest momentum index `(N-1)/2`.
    pub fn max_index(&self) -> usize {
        self.site_count / 2
    }

    pub fn momentum(&self, k: i64) -> f64 {
        2.0 * PI * k as f64 / self.box_length
    }

    pub fn grid_point(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.site_count).map(|j| self.grid_point(j)).collect()
    }

    /// Energy of the highest kept momentum.
    pub fn e_max(&self) -> f64 {
        mode_energy(self.momentum(self.max_index() as i64), self.mass)
    }

    pub fn mode_count(&self) -> usize {
        2 * self.site_count
    }
}

/// `E = +√(p² + m²)`.
pub fn mode_energy(p: f64, m: f64) -> f64 {
    p.hypot(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EnergySign {
    Positive,
    Negative,
}

impl EnergySign {
    pub fn lambda(self) -> f64 {
        match self {
            EnergySign::Positive => 1.0,
            EnergySign::Negative => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            EnergySign::Positive => EnergySign::Negative,
            EnergySign::Negative => EnergySign::Positive,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mode {
    pub momentum_index: i64,
    pub momentum: f64,
    pub sign: EnergySign,
    pub energy: f64,
    pub spinor: Spinor,
}

impl Mode {
    pub fn lambda(&self) -> f64 {
        self.sign.lambda()
    }

    /// Single-particle eigenvalue `λE`.
    pub fn signed_energy(&self) -> f64 {
        self.lambda() * self.energy
    }
}

/// Unit eigenvector of `p·σ_x + m·σ_z` with eigenvalue `λE`, first nonzero
/// component real and positive.
pub fn free_spinor(p: f64, m: f64, sign: EnergySign) -> Spinor {
    let e = mode_energy(p, m);
    if e == 0.0 {
        return match sign {
            EnergySign::Positive => [ONE, ZERO],
            EnergySign::Negative => [ZERO, ONE],
        };
    }
    let (mut a, mut b) = match sign {
        EnergySign::Positive => (e + m, p),
        EnergySign::Negative => (-p, e + m),
    };
    if a < 0.0 || (a == 0.0 && b < 0.0) {
        a = -a;
        b = -b;
    }
    let norm = a.hypot(b);
    [Complex64::new(a / norm, 0.0), Complex64::new(b / norm, 0.0)]
}

/// `u†v`.
pub fn spinor_dot(u: &Spinor, v: &Spinor) -> Complex64 {
    u[0].conj() * v[0] + u[1].conj() * v[1]
}

/// `u†αv` with `α = σ_x`.
pub fn spinor_alpha(u: &Spinor, v: &Spinor) -> Complex64 {
    u[0].conj() * v[1] + u[1].conj() * v[0]
}

/// The complete plane-wave basis of the truncated single-particle space.
#[derive(Clone, Debug)]
pub struct ModeBasis {
    config: LatticeConfig,
    modes: Vec<Mode>,
    /// `φ_n(x_j)` with row `2j + s` (site-major, spinor-minor), column `n`.
    wavefunctions: DMatrix<Complex64>,
    overlaps: DMatrix<Complex64>,
    alpha_overlaps: DMatrix<Complex64>,
}

impl ModeBasis {
    pub fn build(config: LatticeConfig) -> Result<Self> {
        config.validate()?;
        let kk = config.max_index() as i64;
        let mut modes = Vec::with_capacity(config.mode_count());
        for sign in [EnergySign::Positive, EnergySign::Negative] {
            let mut ks: Vec<i64> = (-kk..=kk).collect();
            ks.sort_by_key(|&k| (k.abs(), k.signum()));
            for k in ks {
                let p = config.momentum(k);
                modes.push(Mode {
                    momentum_index: k,
                    momentum: p,
                    sign,
                    energy: mode_energy(p, config.mass),
                    spinor: free_spinor(p, config.mass, sign),
                });
            }
        }

        let n_sites = config.site_count;
        let dim = modes.len();
        let norm = 1.0 / config.box_length.sqrt();
        let wavefunctions = DMatrix::from_fn(2 * n_sites, dim, |row, col| {
            let mode = &modes[col];
            let x = config.grid_point(row / 2);
            mode.spinor[row % 2] * Complex64::from_polar(norm, mode.momentum * x)
        });
        let overlaps = DMatrix::from_fn(dim, dim, |n, m| spinor_dot(&modes[n].spinor, &modes[m].spinor));
        let alpha_overlaps =
            DMatrix::from_fn(dim, dim, |n, m| spinor_alpha(&modes[n].spinor, &modes[m].spinor));

        Ok(Self {
            config,
            modes,
            wavefunctions,
            overlaps,
            alpha_overlaps,
        })
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn mode(&self, n: usize) -> &Mode {
        &self.modes[n]
    }

    /// Number of modes, `2N`.
    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn wavefunctions(&self) -> &DMatrix<Complex64> {
        &self.wavefunctions
    }

    /// `u_n†u_m`.
    pub fn overlaps(&self) -> &DMatrix<Complex64> {
        &self.overlaps
    }

    /// `u_n†αu_m`.
    pub fn alpha_overlaps(&self) -> &DMatrix<Complex64> {
        &self.alpha_overlaps
    }

    /// Frequency index `k_m - k_n` carried by the bilinear `φ_n†(x)φ_m(x)`.
    pub fn pair_frequency(&self, n: usize, m: usize) -> i64 {
        self.modes[m].momentum_index - self.modes[n].momentum_index
    }

    pub fn signed_energies(&self) -> Vec<f64> {
        self.modes.iter().map(Mode::signed_energy).collect()
    }

    pub fn index_of(&self, momentum_index: i64, sign: EnergySign) -> Option<usize> {
        self.modes
            .iter()
            .position(|m| m.momentum_index == momentum_index && m.sign == sign)
    }

    /// `φ_n(x)` at an arbitrary position.
    pub fn value_at(&self, n: usize, x: f64) -> Spinor {
        let mode = &self.modes[n];
        let phase = Complex64::from_polar(1.0 / self.config.box_length.sqrt(), mode.momentum * x);
        [mode.spinor[0] * phase, mode.spinor[1] * phase]
    }

    /// `max |a·Σ_j φ_n†(x_j)φ_m(x_j) - δ_nm|`.
    pub fn orthonormality_error(&self) -> f64 {
        let a = self.config.spacing();
        let gram = self.wavefunctions.adjoint() * &self.wavefunctions * Complex64::new(a, 0.0);
        max_identity_deviation(&gram)
    }

    /// `max |a·Σ_n φ_n(x_j)_s φ_n(x_k)_t* - δ_st δ_jk|`.
    pub fn completeness_error(&self) -> f64 {
        let a = self.config.spacing();
        let proj = &self.wavefunctions * self.wavefunctions.adjoint() * Complex64::new(a, 0.0);
        max_identity_deviation(&proj)
    }

    fn check_grid_len(&self, len: usize) -> Result<()> {
        let expected = 2 * self.config.site_count;
        if len != expected {
            return Err(Error::Dimension {
                expected,
                actual: len,
            });
        }
        Ok(())
    }

    /// Mode coefficients `c_n = a Σ_j φ_n†(x_j) ψ(x_j)` of a grid spinor field.
    pub fn to_mode_coefficients(&self, psi: &[Complex64]) -> Result<DVector<Complex64>> {
        self.check_grid_len(psi.len())?;
        let v = DVector::from_column_slice(psi);
        Ok(self.wavefunctions.adjoint() * v * Complex64::new(self.config.spacing(), 0.0))
    }

    pub fn from_mode_coefficients(&self, coeffs: &DVector<Complex64>) -> Result<Vec<Complex64>> {
        if coeffs.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                actual: coeffs.len(),
            });
        }
        Ok((&self.wavefunctions * coeffs).iter().copied().collect())
    }

    /// Applies `h₀ = -iα∂_x + mβ`: the derivative as a Fourier multiplier,
    /// the mass term pointwise.
    pub fn apply_free_hamiltonian(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_grid_len(psi.len())?;
        let n = self.config.site_count;
        let m = self.config.mass;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);

        // component Fourier transforms
        let mut upper: Vec<Complex64> = (0..n).map(|j| psi[2 * j]).collect();
        let mut lower: Vec<Complex64> = (0..n).map(|j| psi[2 * j + 1]).collect();
        fwd.process(&mut upper);
        fwd.process(&mut lower);

        let mut out_upper = vec![ZERO; n];
        let mut out_lower = vec![ZERO; n];
        for idx in 0..n {
            let k = if idx <= n / 2 { idx as i64 } else { idx as i64 - n as i64 };
            let p = self.config.momentum(k);
            // p·σ_x swaps the components
            out_upper[idx] = lower[idx] * p;
            out_lower[idx] = upper[idx] * p;
        }
        inv.process(&mut out_upper);
        inv.process(&mut out_lower);

        let scale = 1.0 / n as f64;
        let mut out = vec![ZERO; 2 * n];
        for j in 0..n {
            out[2 * j] = out_upper[j] * scale + psi[2 * j] * m;
            out[2 * j + 1] = out_lower[j] * scale - psi[2 * j + 1] * m;
        }
        Ok(out)
    }

    /// Grid inner product `a Σ_j ψ†(x_j)χ(x_j)`.
    pub fn grid_inner(&self, psi: &[Complex64], chi: &[Complex64]) -> Complex64 {
        let s: Complex64 = psi.iter().zip(chi).map(|(a, b)| a.conj() * b).sum();
        s * self.config.spacing()
    }
}

fn max_identity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, m: f64) -> LatticeConfig {
        LatticeConfig::new(2.0 * PI, n, m, 1.0).unwrap()
    }

    #[test]
    fn rest_frame_spinors() {
        let basis = ModeBasis::build(cfg(3, 1.0)).unwrap();
        let pos = basis.index_of(0, EnergySign::Positive).unwrap();
        let neg = basis.index_of(0, EnergySign::Negative).unwrap();
        assert_eq!(basis.mode(pos).spinor, [ONE, ZERO]);
        assert_eq!(basis.mode(neg).spinor, [ZERO, ONE]);
    }

    #[test]
    fn massless_energies() {
        let basis = ModeBasis::build(cfg(3, 0.0)).unwrap();
        let mut pos: Vec<f64> = basis
            .modes()
            .iter()
            .filter(|m| m.sign == EnergySign::Positive)
            .map(|m| m.energy)
            .collect();
        pos.sort_by(f64::total_cmp);
        assert_eq!(pos, vec![0.0, 1.0, 1.0]);
        // degenerate convention
        let zero_neg = basis.index_of(0, EnergySign::Negative).unwrap();
        assert_eq!(basis.mode(zero_neg).spinor, [ZERO, ONE]);
    }

    #[test]
    fn energy_arithmetic() {
        assert_eq!(mode_energy(0.0, 1.0), 1.0);
        assert_eq!(mode_energy(3.0, 4.0), 5.0);
        assert_eq!(mode_energy(-2.5, 0.0), 2.5);
    }

    #[test]
    fn ordering_is_sign_then_abs_then_signum() {
        let basis = ModeBasis::build(cfg(5, 1.0)).unwrap();
        let ks: Vec<(i64, EnergySign)> = basis
            .modes()
            .iter()
            .map(|m| (m.momentum_index, m.sign))
            .collect();
        use EnergySign::*;
        assert_eq!(
            ks,
            vec![
                (0, Positive),
                (-1, Positive),
                (1, Positive),
                (-2, Positive),
                (2, Positive),
                (0, Negative),
                (-1, Negative),
                (1, Negative),
                (-2, Negative),
                (2, Negative)
            ]
        );
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(LatticeConfig::new(2.0, 4, 1.0, 1.0).is_err());
        assert!(LatticeConfig::new(0.0, 5, 1.0, 1.0).is_err());
        assert!(LatticeConfig::new(-1.0, 5, 1.0, 1.0).is_err());
        let bad = LatticeConfig {
            box_length: 1.0,
            site_count: 6,
            mass: 1.0,
            charge: 1.0,
        };
        assert!(ModeBasis::build(bad).is_err());
    }

    #[test]
    fn orthonormal_and_complete() {
        for n in [1, 3, 7, 11] {
            for m in [0.0, 1.0, 5.0] {
                let basis = ModeBasis::build(cfg(n, m)).unwrap();
                assert!(basis.orthonormality_error() < 1e-12);
                assert!(basis.completeness_error() < 1e-12);
            }
        }
    }

    #[test]
    fn eigenrelation_on_every_mode() {
        let basis = ModeBasis::build(LatticeConfig::new(3.7, 9, 0.8, 1.0).unwrap()).unwrap();
        for n in 0..basis.dim() {
            let phi: Vec<Complex64> = basis.wavefunctions().column(n).iter().copied().collect();
            let h_phi = basis.apply_free_hamiltonian(&phi).unwrap();
            let e = basis.mode(n).signed_energy();
            for (a, b) in h_phi.iter().zip(&phi) {
                assert!((a - b * e).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_rest_spinor_is_scaled_by_mass() {
        let basis = ModeBasis::build(cfg(5, 1.0)).unwrap();
        let psi: Vec<Complex64> = (0..10).map(|i| if i % 2 == 0 { ONE } else { ZERO }).collect();
        let out = basis.apply_free_hamiltonian(&psi).unwrap();
        for (a, b) in out.iter().zip(&psi) {
            assert!((a - b).norm() < 1e-13);
        }
        assert!(basis.apply_free_hamiltonian(&psi[..4]).is_err());
    }

    #[test]
    fn mode_coefficient_round_trip() {
        let basis = ModeBasis::build(cfg(7, 0.5)).unwrap();
        let c = DVector::from_fn(basis.dim(), |i, _| Complex64::new(i as f64, 1.0 - i as f64));
        let psi = basis.from_mode_coefficients(&c).unwrap();
        let back = basis.to_mode_coefficients(&psi).unwrap();
        assert!((back - c).norm() < 1e-11);
    }
}
