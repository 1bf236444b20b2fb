//! One-body kernels of the charge density, current density and free
//! Hamiltonian, together with their vacuum subtraction constants.
//!
//! A fermion bilinear `Σ_nm K_nm a_n† a_m - c` is stored as the mode-basis
//! matrix `K` plus the scalar `c`. Its expectation in a determinant with
//! one-body density matrix `Γ_mn = ⟨a_n† a_m⟩` is `Tr(KΓ) - c`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::field::Field;
use crate::lattice::{spinor_alpha, spinor_dot, ModeBasis};
use crate::vacua::OccupationSet;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelLabel {
    Charge { x: f64 },
    Current { x: f64 },
    FreeEnergy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OneBodyKernel {
    pub label: KernelLabel,
    pub coeffs: DMatrix<Complex64>,
    pub subtraction: Complex64,
}

impl OneBodyKernel {
    pub fn with_subtraction(mut self, c: f64) -> Self {
        self.subtraction = Complex64::new(c, 0.0);
        self
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.coeffs - self.coeffs.adjoint()).camax()
    }

    /// `Tr(KΓ) - c` for a determinant with density matrix `gamma`.
    pub fn expectation(&self, gamma: &DMatrix<Complex64>) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 0..self.coeffs.nrows() {
            for m in 0..self.coeffs.ncols() {
                acc += self.coeffs[(n, m)] * gamma[(m, n)];
            }
        }
        acc - self.subtraction
    }
}

/// `K_nm = q φ_n†(x)φ_m(x)` at an arbitrary position.
pub fn charge_kernel_at(basis: &ModeBasis, x: f64) -> OneBodyKernel {
    let q = basis.config().charge;
    let values: Vec<_> = (0..basis.dim()).map(|n| basis.value_at(n, x)).collect();
    let coeffs = DMatrix::from_fn(basis.dim(), basis.dim(), |n, m| {
        spinor_dot(&values[n], &values[m]) * q
    });
    OneBodyKernel {
        label: KernelLabel::Charge { x },
        coeffs,
        subtraction: Complex64::new(0.0, 0.0),
    }
}

pub fn charge_kernel(basis: &ModeBasis, site: usize) -> OneBodyKernel {
    charge_kernel_at(basis, basis.config().grid_point(site))
}

/// `K_nm = q φ_n†(x)αφ_m(x)`.
pub fn current_kernel_at(basis: &ModeBasis, x: f64) -> OneBodyKernel {
    let q = basis.config().charge;
    let values: Vec<_> = (0..basis.dim()).map(|n| basis.value_at(n, x)).collect();
    let coeffs = DMatrix::from_fn(basis.dim(), basis.dim(), |n, m| {
        spinor_alpha(&values[n], &values[m]) * q
    });
    OneBodyKernel {
        label: KernelLabel::Current { x },
        coeffs,
        subtraction: Complex64::new(0.0, 0.0),
    }
}

pub fn current_kernel(basis: &ModeBasis, site: usize) -> OneBodyKernel {
    current_kernel_at(basis, basis.config().grid_point(site))
}

/// `∂_x` of the current kernel, taken per mode pair: the product
/// `φ_n†αφ_m` carries the single frequency `p_m - p_n`.
pub fn current_divergence_kernel_at(basis: &ModeBasis, x: f64) -> DMatrix<Complex64> {
    let j = current_kernel_at(basis, x);
    DMatrix::from_fn(basis.dim(), basis.dim(), |n, m| {
        let dp = basis.mode(m).momentum - basis.mode(n).momentum;
        j.coeffs[(n, m)] * Complex64::new(0.0, dp)
    })
}

/// Largest violation of `∂_x(φ_n†αφ_m) = -i(λ_nE_n - λ_mE_m) φ_n†φ_m` over
/// all mode pairs at position `x`.
pub fn continuity_identity_residual(basis: &ModeBasis, x: f64) -> f64 {
    let div = current_divergence_kernel_at(basis, x);
    let rho = charge_kernel_at(basis, x);
    let eps = basis.signed_energies();
    let mut worst: f64 = 0.0;
    for n in 0..basis.dim() {
        for m in 0..basis.dim() {
            let rhs = rho.coeffs[(n, m)] * Complex64::new(0.0, -(eps[n] - eps[m]));
            worst = worst.max((div[(n, m)] - rhs).norm());
        }
    }
    worst
}

/// `K = diag(λ_n E_n)`; subtract `ξ_R` with [`OneBodyKernel::with_subtraction`].
pub fn free_hamiltonian_kernel(basis: &ModeBasis) -> OneBodyKernel {
    let eps = basis.signed_energies();
    let coeffs = DMatrix::from_fn(basis.dim(), basis.dim(), |n, m| {
        if n == m {
            Complex64::new(eps[n], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    OneBodyKernel {
        label: KernelLabel::FreeEnergy,
        coeffs,
        subtraction: Complex64::new(0.0, 0.0),
    }
}

/// Vacuum subtraction constants for one occupation set.
#[derive(Clone, Debug, PartialEq)]
pub struct RenormalizationConstants {
    /// `q Σ_occ |φ_n(x_j)|²` per site.
    pub rho_r: Vec<f64>,
    /// `q Σ_occ φ_n†(x_j)αφ_n(x_j)` per site.
    pub j_r: Vec<f64>,
    /// `Σ_occ λ_n E_n`.
    pub xi_r: f64,
}

impl RenormalizationConstants {
    /// Largest site-to-site variation of `rho_r` and `j_r`.
    pub fn site_variation(&self) -> f64 {
        let spread = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if v.is_empty() {
                0.0
            } else {
                hi - lo
            }
        };
        spread(&self.rho_r).max(spread(&self.j_r))
    }
}

pub fn renorm_constants(basis: &ModeBasis, occ: &OccupationSet) -> RenormalizationConstants {
    let cfg = basis.config();
    let q = cfg.charge;
    let mut rho_r = vec![0.0; cfg.site_count];
    let mut j_r = vec![0.0; cfg.site_count];
    for (j, (rho, cur)) in rho_r.iter_mut().zip(j_r.iter_mut()).enumerate() {
        let x = cfg.grid_point(j);
        for &n in occ.occupied() {
            let v = basis.value_at(n, x);
            *rho += q * spinor_dot(&v, &v).re;
            *cur += q * spinor_alpha(&v, &v).re;
        }
    }
    let xi_r = occ
        .occupied()
        .iter()
        .map(|&n| basis.mode(n).signed_energy())
        .sum();
    RenormalizationConstants { rho_r, j_r, xi_r }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bilinear {
    Charge,
    Current,
}

/// `q Σ_nm Γ_mn φ_n†(x) S φ_m(x)` as an exact trigonometric polynomial of
/// degree `N - 1`, with `S = 1` (charge) or `S = α` (current).
pub fn bilinear_field(basis: &ModeBasis, gamma: &DMatrix<Complex64>, kind: Bilinear) -> Field {
    let cfg = basis.config();
    let table = match kind {
        Bilinear::Charge => basis.overlaps(),
        Bilinear::Current => basis.alpha_overlaps(),
    };
    let mut field = Field::zeros(cfg.box_length, cfg.site_count - 1);
    let scale = cfg.charge / cfg.box_length;
    for n in 0..basis.dim() {
        for m in 0..basis.dim() {
            let g = gamma[(m, n)];
            if g == Complex64::new(0.0, 0.0) {
                continue;
            }
            field.add_to_coeff(basis.pair_frequency(n, m), table[(n, m)] * g * scale);
        }
    }
    field
}
