//! Vacuum expectation of the equal-time commutator `[ρ̂(y), Ĵ(x)]`.
//!
//! For a determinant vacuum with occupied set `occ` the commutator reduces to
//!
//! ```text
//! I(x, y) = q² Σ_{m∈occ, n∉occ} (φ_m†(y)φ_n(y)) (φ_n†(x)αφ_m(x)) - c.c.
//! ```
//!
//! For the filled sea the sums run over `m` negative and `n` positive. For the
//! band vacuum `n` runs over positive and below-band modes; the in-band pairs
//! cancel against their own conjugates and never enter. Plane waves make every
//! summand a single harmonic `e^{i(p_m - p_n)(x - y)}`, so a kernel is stored
//! as the trigonometric polynomial `S(s) = I(x, x - s)` of degree `N - 1`.
//! Sampling it on the `N`-point grid aliases it onto the grid delta, where it
//! vanishes; the divergence and weak pairings therefore act on the full
//! polynomial.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::lattice::{spinor_alpha, spinor_dot, LatticeConfig, ModeBasis};
use crate::vacua::{occupation_set, OccupationSet, VacuumSpec};

#[derive(Clone, Debug)]
pub struct SchwingerKernel {
    config: LatticeConfig,
    vacuum: VacuumSpec,
    spectrum: Field,
    values: DMatrix<Complex64>,
}

impl SchwingerKernel {
    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    pub fn vacuum(&self) -> &VacuumSpec {
        &self.vacuum
    }

    /// `S(s)` with `I(x, y) = S(x - y)`.
    pub fn spectrum(&self) -> &Field {
        &self.spectrum
    }

    /// `I(x_j, y_k)` on grid pairs, row `j`, column `k`.
    pub fn values(&self) -> &DMatrix<Complex64> {
        &self.values
    }

    pub fn value_at(&self, x: f64, y: f64) -> Complex64 {
        self.spectrum.eval(x - y)
    }

    /// `∂_x I(x, y)` at an arbitrary pair.
    pub fn divergence_at(&self, x: f64, y: f64) -> Complex64 {
        self.spectrum.derivative().eval(x - y)
    }

    /// Upper bound on `|Re I|` over all `(x, y)`.
    pub fn real_part_bound(&self) -> f64 {
        self.spectrum.real_part().abs_bound()
    }
}

fn pair_sum(basis: &ModeBasis, occ: &OccupationSet) -> Field {
    let cfg = basis.config();
    let q2 = cfg.charge * cfg.charge;
    let scale = q2 / (cfg.box_length * cfg.box_length);
    let mut spectrum = Field::zeros(cfg.box_length, cfg.site_count - 1);
    let s = basis.overlaps();
    let a = basis.alpha_overlaps();
    let unocc = occ.unoccupied();
    for &m in occ.occupied() {
        for &n in &unocc {
            let t = s[(m, n)] * a[(n, m)] * scale;
            let k = basis.pair_frequency(n, m);
            spectrum.add_to_coeff(k, t);
            spectrum.add_to_coeff(-k, -t.conj());
        }
    }
    spectrum
}

fn from_spectrum(basis: &ModeBasis, vacuum: VacuumSpec, spectrum: Field) -> SchwingerKernel {
    let cfg = basis.config();
    let grid = cfg.grid();
    let values = DMatrix::from_fn(cfg.site_count, cfg.site_count, |j, k| {
        spectrum.eval(grid[j] - grid[k])
    });
    SchwingerKernel {
        config: *cfg,
        vacuum,
        spectrum,
        values,
    }
}

/// Kernel of an arbitrary determinant vacuum given by its occupied modes.
pub fn schwinger_for_occupation(basis: &ModeBasis, occ: &OccupationSet, vacuum: VacuumSpec) -> SchwingerKernel {
    from_spectrum(basis, vacuum, pair_sum(basis, occ))
}

pub fn schwinger_standard(basis: &ModeBasis) -> SchwingerKernel {
    let occ = occupation_set(&VacuumSpec::Standard, basis).expect("standard vacuum is always admissible");
    schwinger_for_occupation(basis, &occ, VacuumSpec::Standard)
}

pub fn schwinger_band(basis: &ModeBasis, spec: &VacuumSpec) -> Result<SchwingerKernel> {
    if !matches!(spec, VacuumSpec::Band { .. }) {
        return Err(Error::Config(format!(
            "band kernel requested for the {} vacuum",
            spec.label()
        )));
    }
    let occ = occupation_set(spec, basis)?;
    Ok(schwinger_for_occupation(basis, &occ, *spec))
}

/// Dispatches on the vacuum kind; the bare vacuum gives the zero kernel.
pub fn schwinger_kernel(basis: &ModeBasis, spec: &VacuumSpec) -> Result<SchwingerKernel> {
    let occ = occupation_set(spec, basis)?;
    Ok(schwinger_for_occupation(basis, &occ, *spec))
}

/// `I(x, y)` by direct summation over mode pairs at explicit positions,
/// with no use of translation covariance.
pub fn schwinger_direct(basis: &ModeBasis, occ: &OccupationSet, x: f64, y: f64) -> Complex64 {
    let q = basis.config().charge;
    let mut acc = Complex64::new(0.0, 0.0);
    let unocc = occ.unoccupied();
    for &m in occ.occupied() {
        let (my, mx) = (basis.value_at(m, y), basis.value_at(m, x));
        for &n in &unocc {
            let t = spinor_dot(&my, &basis.value_at(n, y)) * spinor_alpha(&basis.value_at(n, x), &mx);
            acc += t - t.conj();
        }
    }
    acc * q * q
}

/// `∂_x I` on grid pairs, taken as the exact derivative of the stored
/// polynomial in `x` at fixed `y`.
pub fn divergence_of_kernel(kernel: &SchwingerKernel) -> DMatrix<Complex64> {
    let d = kernel.spectrum.derivative();
    let grid = kernel.config.grid();
    let n = kernel.config.site_count;
    DMatrix::from_fn(n, n, |j, k| d.eval(grid[j] - grid[k]))
}

/// Coincident-point divergence from energies and plain spinor overlaps:
/// `-2i q²/L² Σ_{m∈occ, n∉occ} (λ_nE_n - λ_mE_m) |u_m†u_n|²`.
///
/// For the filled sea every term has `λ_nE_n - λ_mE_m = E_n + E_m > 0`.
pub fn divergence_diag_closed_form(basis: &ModeBasis, occ: &OccupationSet) -> Complex64 {
    let cfg = basis.config();
    let q2 = cfg.charge * cfg.charge;
    let eps = basis.signed_energies();
    let s = basis.overlaps();
    let unocc = occ.unoccupied();
    let mut acc = 0.0;
    for &m in occ.occupied() {
        for &n in &unocc {
            acc += (eps[n] - eps[m]) * s[(m, n)].norm_sqr();
        }
    }
    Complex64::new(0.0, -2.0 * q2 * acc / (cfg.box_length * cfg.box_length))
}

/// Same quantity as [`divergence_diag_closed_form`] at an explicit position,
/// summing `|φ_m†(x)φ_n(x)|²` directly.
pub fn divergence_diag_at(basis: &ModeBasis, occ: &OccupationSet, x: f64) -> Complex64 {
    let q2 = basis.config().charge.powi(2);
    let eps = basis.signed_energies();
    let unocc = occ.unoccupied();
    let mut acc = 0.0;
    for &m in occ.occupied() {
        let um = basis.value_at(m, x);
        for &n in &unocc {
            acc += (eps[n] - eps[m]) * spinor_dot(&um, &basis.value_at(n, x)).norm_sqr();
        }
    }
    Complex64::new(0.0, -2.0 * q2 * acc)
}

/// `max |F₂ - F₂†|` over grid pairs, where `F₂` is the in-band pair sum
/// `Σ_{m,n∈band} (φ_m†(y)φ_n(y))(φ_n†(x)αφ_m(x))` and `F₂†` is the sum of
/// the conjugated summands, each accumulated separately. No `q²` factor.
pub fn f2_identity_check(basis: &ModeBasis, spec: &VacuumSpec) -> Result<f64> {
    let (f2, f2_dag) = f2_pair(basis, spec)?;
    Ok((f2 - f2_dag).iter().map(|v| v.norm()).fold(0.0, f64::max))
}

/// `(F₂, F₂†)` on grid pairs.
pub fn f2_pair(basis: &ModeBasis, spec: &VacuumSpec) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    let occ = occupation_set(spec, basis)?;
    let cfg = basis.config();
    let grid = cfg.grid();
    let n_sites = cfg.site_count;
    let values: Vec<Vec<_>> = grid
        .iter()
        .map(|&x| (0..basis.dim()).map(|n| basis.value_at(n, x)).collect())
        .collect();
    let mut f2 = DMatrix::zeros(n_sites, n_sites);
    let mut f2_dag = DMatrix::zeros(n_sites, n_sites);
    for j in 0..n_sites {
        for k in 0..n_sites {
            let (vx, vy) = (&values[j], &values[k]);
            for &m in occ.occupied() {
                for &n in occ.occupied() {
                    f2[(j, k)] += spinor_dot(&vy[m], &vy[n]) * spinor_alpha(&vx[n], &vx[m]);
                    f2_dag[(j, k)] += spinor_dot(&vy[n], &vy[m]) * spinor_alpha(&vx[m], &vx[n]);
                }
            }
        }
    }
    Ok((f2, f2_dag))
}

/// `∫∫ g(x) I(x, y) h(y) dx dy`, exact for trigonometric-polynomial `g, h`.
pub fn weak_limit_pairing(kernel: &SchwingerKernel, g: &Field, h: &Field) -> Complex64 {
    let l = kernel.config.box_length;
    let kk = kernel.spectrum.max_index() as i64;
    (-kk..=kk)
        .map(|k| kernel.spectrum.coeff(k) * g.coeff(-k) * h.coeff(k))
        .sum::<Complex64>()
        * (l * l)
}

/// [`weak_limit_pairing`] for real grid samples of `g` and `h`, paired
/// through their trigonometric interpolants.
pub fn weak_limit_pairing_samples(kernel: &SchwingerKernel, g: &[f64], h: &[f64]) -> Result<Complex64> {
    let l = kernel.config.box_length;
    let g = Field::from_real_samples(l, g)?;
    let h = Field::from_real_samples(l, h)?;
    Ok(weak_limit_pairing(kernel, &g, &h))
}
