//! Time evolution of Slater determinants under external potentials.
//!
//! The Hamiltonian is a fermion bilinear for classical potentials, so a
//! determinant stays a determinant and it suffices to propagate its occupied
//! orbitals. Orbitals are stored as mode coefficients (`2N × N_occ`, columns
//! orthonormal); the one-body density matrix is `Γ = CC†` with
//! `Γ_mn = ⟨a_n† a_m⟩`.

mod experiments;
mod gauge;

pub use experiments::{
    build_kick_chi, extract_energy, finite_difference_density_rate, gauge_pair_experiment,
    particle_number_floor, EnergyExtractionReport, EnergyPoint, GaugePairReport,
};
pub use gauge::{
    free_continuity_derivative, free_density_matrix_derivative, potential_matrix, Envelope,
    GaugeFunction, KickRecipe, Potential, Profile,
};

use std::sync::Arc;

use log::warn;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::lattice::{EnergySign, ModeBasis};
use crate::operators::{bilinear_field, renorm_constants, Bilinear};
use crate::vacua::{density_matrix, occupation_set, OccupationSet, VacuumSpec};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Vacuum whose expectation values are subtracted from every observable.
#[derive(Clone, Debug)]
pub struct Reference {
    pub spec: VacuumSpec,
    pub occupation: OccupationSet,
    pub rho: Field,
    pub current: Field,
    pub xi_r: f64,
}

impl Reference {
    pub fn new(basis: &ModeBasis, spec: VacuumSpec) -> Result<Self> {
        let occupation = occupation_set(&spec, basis)?;
        let d = density_matrix(&occupation);
        Ok(Self {
            spec,
            rho: bilinear_field(basis, &d, Bilinear::Charge),
            current: bilinear_field(basis, &d, Bilinear::Current),
            xi_r: renorm_constants(basis, &occupation).xi_r,
            occupation,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SlaterState {
    pub orbitals: DMatrix<Complex64>,
    pub time: f64,
    pub reference: Arc<Reference>,
}

impl SlaterState {
    /// The reference vacuum itself: one mode orbital per occupied mode.
    pub fn vacuum(basis: &ModeBasis, reference: Arc<Reference>, time: f64) -> Self {
        let occ = reference.occupation.occupied();
        let mut orbitals = DMatrix::zeros(basis.dim(), occ.len());
        for (o, &n) in occ.iter().enumerate() {
            orbitals[(n, o)] = Complex64::new(1.0, 0.0);
        }
        Self {
            orbitals,
            time,
            reference,
        }
    }

    pub fn orbital_count(&self) -> usize {
        self.orbitals.ncols()
    }

    pub fn density_matrix(&self) -> DMatrix<Complex64> {
        &self.orbitals * self.orbitals.adjoint()
    }

    /// `max |C†C - 1|`.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.orbitals.adjoint() * &self.orbitals;
        let id = DMatrix::<Complex64>::identity(g.nrows(), g.ncols());
        (g - id).camax()
    }

    /// Orbitals sampled on the grid, row `2j + s`.
    pub fn grid_orbitals(&self, basis: &ModeBasis) -> DMatrix<Complex64> {
        basis.wavefunctions() * &self.orbitals
    }

    /// Appends `Σ_n c_n φ_n` after projecting out the occupied orbitals.
    pub fn add_orbital(&self, coeffs: &DVector<Complex64>) -> Result<SlaterState> {
        if coeffs.len() != self.orbitals.nrows() {
            return Err(Error::Dimension {
                expected: self.orbitals.nrows(),
                actual: coeffs.len(),
            });
        }
        let overlap = self.orbitals.adjoint() * coeffs;
        let projected = coeffs - &self.orbitals * overlap;
        let norm = projected.norm();
        if norm < 1e-12 * coeffs.norm().max(1e-300) {
            return Err(Error::Config(
                "added orbital lies inside the occupied space".into(),
            ));
        }
        let projected = projected / Complex64::new(norm, 0.0);
        let n_occ = self.orbitals.ncols();
        let mut orbitals = self.orbitals.clone().insert_column(n_occ, ZERO);
        orbitals.set_column(n_occ, &projected);
        Ok(SlaterState {
            orbitals,
            time: self.time,
            reference: self.reference.clone(),
        })
    }
}

/// Momentum-space Gaussian over positive-energy modes,
/// `c_k ∝ exp(-(p_k - p̄)²/(4σ²))`, added as one extra orbital.
///
/// `σ` is the width of the probability `|c_k|²`. Fails when the amplitude at
/// the cutoff momentum exceeds `1e-6` of the peak.
pub fn excite_wavepacket(
    basis: &ModeBasis,
    state: &SlaterState,
    p_center: f64,
    sigma: f64,
) -> Result<SlaterState> {
    if !(sigma > 0.0 && sigma.is_finite() && p_center.is_finite()) {
        return Err(Error::Config(format!(
            "packet needs finite p_center and sigma > 0, got ({p_center}, {sigma})"
        )));
    }
    let cfg = basis.config();
    let p_edge = cfg.momentum(cfg.max_index() as i64);
    let amp = |p: f64| (-(p - p_center).powi(2) / (4.0 * sigma * sigma)).exp();
    let peak = if p_center.abs() <= p_edge { 1.0 } else { amp(p_edge.copysign(p_center)) };
    let edge = amp(p_edge).max(amp(-p_edge));
    if peak == 0.0 || edge > 1e-6 * peak {
        return Err(Error::PacketSupport(format!(
            "amplitude at |p| = {p_edge:.4} is {:.3e} of the peak for p_center = {p_center}, sigma = {sigma}",
            if peak > 0.0 { edge / peak } else { f64::INFINITY }
        )));
    }
    let coeffs = DVector::from_fn(basis.dim(), |n, _| {
        let mode = basis.mode(n);
        match mode.sign {
            EnergySign::Positive => Complex64::new(amp(mode.momentum), 0.0),
            EnergySign::Negative => ZERO,
        }
    });
    let heaviest = coeffs.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    if heaviest > (1.0 - 1e-9) * coeffs.norm_squared() {
        warn!("wave packet is a single eigenmode; its density is stationary");
    }
    state.add_orbital(&coeffs)
}

/// `h(t) = diag(λ_nE_n) + V(t)` in the mode basis.
pub fn single_particle_hamiltonian(basis: &ModeBasis, potential: &Potential, t: f64) -> DMatrix<Complex64> {
    let eps = basis.signed_energies();
    let mut h = potential
        .matrix(basis, t)
        .unwrap_or_else(|| DMatrix::zeros(basis.dim(), basis.dim()));
    for (n, e) in eps.iter().enumerate() {
        h[(n, n)] += e;
    }
    h
}

/// `exp(-i h dt)` for hermitian `h`.
fn propagator(h: &DMatrix<Complex64>, dt: f64) -> DMatrix<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l * dt)));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// One midpoint-exponential step: `C ← exp(-i h(t + dt/2) dt) C`.
pub fn step(basis: &ModeBasis, state: &SlaterState, potential: &Potential, dt: f64) -> SlaterState {
    let orbitals = match potential.matrix(basis, state.time + 0.5 * dt) {
        None => {
            let eps = basis.signed_energies();
            let mut c = state.orbitals.clone();
            for (n, mut row) in c.row_iter_mut().enumerate() {
                row *= Complex64::from_polar(1.0, -eps[n] * dt);
            }
            c
        }
        Some(v) => {
            let mut h = v;
            for (n, e) in basis.signed_energies().iter().enumerate() {
                h[(n, n)] += e;
            }
            propagator(&h, dt) * &state.orbitals
        }
    };
    SlaterState {
        orbitals,
        time: state.time + dt,
        reference: state.reference.clone(),
    }
}

/// Vacuum-subtracted observables at one instant.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub time: f64,
    pub rho: Field,
    pub current: Field,
    /// `∂ρ_e/∂t` from `dΓ/dt = -i[h(t), Γ]`.
    pub rho_rate: Field,
    pub current_rate: Field,
    pub xi0: f64,
    /// `L = ∂ρ_e/∂t + ∂J_e/∂x`.
    pub continuity: Field,
}

impl Snapshot {
    /// Largest imaginary part carried by any observable.
    pub fn imag_bound(&self) -> f64 {
        [&self.rho, &self.current, &self.rho_rate, &self.current_rate, &self.continuity]
            .iter()
            .map(|f| f.imag_bound())
            .fold(0.0, f64::max)
    }
}

pub fn observables(basis: &ModeBasis, state: &SlaterState, potential: &Potential) -> Snapshot {
    let gamma = state.density_matrix();
    let h = single_particle_hamiltonian(basis, potential, state.time);
    let hg = &h * &gamma;
    let rate = (&hg - hg.adjoint()) * Complex64::new(0.0, -1.0);
    let reference = &state.reference;
    let rho = &bilinear_field(basis, &gamma, Bilinear::Charge) - &reference.rho;
    let current = &bilinear_field(basis, &gamma, Bilinear::Current) - &reference.current;
    let rho_rate = bilinear_field(basis, &rate, Bilinear::Charge);
    let current_rate = bilinear_field(basis, &rate, Bilinear::Current);
    let continuity = &rho_rate + &current.derivative();
    let xi0 = basis
        .signed_energies()
        .iter()
        .enumerate()
        .map(|(n, e)| e * gamma[(n, n)].re)
        .sum::<f64>()
        - reference.xi_r;
    Snapshot {
        time: state.time,
        rho,
        current,
        rho_rate,
        current_rate,
        xi0,
        continuity,
    }
}

/// Largest stable default step: `0.01 · 2π/E_max`.
pub fn default_dt(basis: &ModeBasis) -> f64 {
    0.01 * 2.0 * std::f64::consts::PI / basis.config().e_max()
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub potential: Potential,
    pub dt: f64,
    pub snapshots: Vec<Snapshot>,
    pub initial: SlaterState,
    pub last: SlaterState,
    /// Largest orbital Gram-matrix deviation seen at any step.
    pub max_orthonormality_error: f64,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    pub fn xi0(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.xi0).collect()
    }

    /// Snapshot closest to `t`.
    pub fn snapshot_at(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots.iter().min_by(|a, b| {
            (a.time - t).abs().total_cmp(&(b.time - t).abs())
        })
    }

    pub fn index_of(&self, t: f64) -> Option<usize> {
        let s = self.snapshot_at(t)?;
        ((s.time - t).abs() <= 1e-9 * self.dt.max(t.abs())).then(|| {
            self.snapshots
                .iter()
                .position(|x| std::ptr::eq(x, s))
                .expect("snapshot belongs to trajectory")
        })
    }

    pub fn max_continuity_residual(&self, n_points: usize) -> f64 {
        self.snapshots
            .iter()
            .map(|s| s.continuity.max_abs_on_grid(n_points))
            .fold(0.0, f64::max)
    }
}

/// Evolves from `state.time` to `t_end` in equal steps no longer than
/// `dt_max`, recording a snapshot at every step including both ends.
pub fn evolve(
    basis: &ModeBasis,
    state: &SlaterState,
    potential: &Potential,
    t_end: f64,
    dt_max: f64,
) -> Result<Trajectory> {
    if !(dt_max > 0.0) || !(t_end > state.time) {
        return Err(Error::Config(format!(
            "evolution needs dt > 0 and t_end > t_start, got dt = {dt_max}, [{}, {t_end}]",
            state.time
        )));
    }
    let span = t_end - state.time;
    let steps = (span / dt_max).ceil().max(1.0) as usize;
    evolve_steps(basis, state, potential, span / steps as f64, steps)
}

/// Takes exactly `steps` steps of size `dt`, recording every step.
pub fn evolve_steps(
    basis: &ModeBasis,
    state: &SlaterState,
    potential: &Potential,
    dt: f64,
    steps: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0) || steps == 0 {
        return Err(Error::Config(format!(
            "evolution needs dt > 0 and at least one step, got dt = {dt}, steps = {steps}"
        )));
    }
    let t0 = state.time;
    let mut snapshots = Vec::with_capacity(steps + 1);
    let mut current = state.clone();
    let mut worst = current.orthonormality_error();
    snapshots.push(observables(basis, &current, potential));
    for i in 1..=steps {
        let mut next = step(basis, &current, potential, dt);
        // pin the clock to avoid accumulated rounding in t
        next.time = t0 + dt * i as f64;
        worst = worst.max(next.orthonormality_error());
        snapshots.push(observables(basis, &next, potential));
        current = next;
    }
    if worst > 1e-10 {
        return Err(Error::Invariant(format!(
            "orbital orthonormality drifted to {worst:.3e}"
        )));
    }
    Ok(Trajectory {
        potential: potential.clone(),
        dt,
        snapshots,
        initial: state.clone(),
        last: current,
        max_orthonormality_error: worst,
    })
}

/// `max_t |dξ₀/dt - (∫∂_tJ_e·A dx - ∫∂_tρ_e·A₀ dx)|` with `dξ₀/dt` from
/// centered differences over interior samples.
pub fn rate_identity_residual(basis: &ModeBasis, traj: &Trajectory) -> Result<f64> {
    Ok(rate_identity_series(basis, traj)?
        .into_iter()
        .map(|(_, lhs, rhs)| (lhs - rhs).abs())
        .fold(0.0, f64::max))
}

/// `(t, dξ₀/dt, right side)` at every interior sample.
pub fn rate_identity_series(basis: &ModeBasis, traj: &Trajectory) -> Result<Vec<(f64, f64, f64)>> {
    let s = &traj.snapshots;
    if s.len() < 3 {
        return Err(Error::TooFewSamples(s.len()));
    }
    let mut out = Vec::with_capacity(s.len() - 2);
    for i in 1..s.len() - 1 {
        let lhs = (s[i + 1].xi0 - s[i - 1].xi0) / (s[i + 1].time - s[i - 1].time);
        let rhs = match traj.potential.fields(basis, s[i].time) {
            None => 0.0,
            Some((a0, a)) => {
                (s[i].current_rate.integral_product(&a) - s[i].rho_rate.integral_product(&a0)).re
            }
        };
        out.push((s[i].time, lhs, rhs));
    }
    Ok(out)
}

/// `L(x, t)` for every snapshot.
pub fn continuity_residual(traj: &Trajectory) -> Vec<(f64, Field)> {
    traj.snapshots
        .iter()
        .map(|s| (s.time, s.continuity.clone()))
        .collect()
}
