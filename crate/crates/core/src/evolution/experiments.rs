//! Gauge-pair comparison and the gauge-kick energy-extraction experiment.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::lattice::ModeBasis;

use super::gauge::{Envelope, GaugeFunction, KickRecipe, Potential, Profile};
use super::{evolve_steps, SlaterState, Trajectory};

/// Builds the kick `χ` from a potential-free reference trajectory.
///
/// The density-rate recipe needs a snapshot at exactly `t_b`.
pub fn build_kick_chi(
    traj: &Trajectory,
    recipe: KickRecipe,
    f: f64,
    t_a: f64,
    t_b: f64,
) -> Result<GaugeFunction> {
    if !traj.potential.is_zero() {
        return Err(Error::NotPotentialFree);
    }
    if !(t_b > t_a) {
        return Err(Error::Config(format!("kick window needs t_b > t_a, got [{t_a}, {t_b}]")));
    }
    let (envelope, profile) = match recipe {
        KickRecipe::DensityRate => {
            let i = traj.index_of(t_b).ok_or_else(|| {
                Error::Config(format!("reference trajectory has no sample at t_b = {t_b}"))
            })?;
            (
                Envelope::Smoothstep { t_a, t_b },
                Profile::Static(traj.snapshots[i].rho_rate.real_part()),
            )
        }
        KickRecipe::ContinuityRate => (
            Envelope::Bump { t_a, t_b },
            Profile::FreeContinuityRate {
                gamma0: traj.initial.density_matrix(),
                t0: traj.initial.time,
            },
        ),
    };
    Ok(GaugeFunction {
        recipe: Some(recipe),
        strength: f,
        envelope,
        profile,
    })
}

/// Centered difference of the recorded density at `t`.
pub fn finite_difference_density_rate(traj: &Trajectory, t: f64) -> Result<Field> {
    let i = traj
        .index_of(t)
        .ok_or_else(|| Error::Config(format!("trajectory has no sample at t = {t}")))?;
    let s = &traj.snapshots;
    if i == 0 || i + 1 >= s.len() {
        return Err(Error::TooFewSamples(s.len()));
    }
    let width = s[i + 1].time - s[i - 1].time;
    Ok((&s[i + 1].rho - &s[i - 1].rho) * (1.0 / width))
}

/// Lowest free-field energy reachable with `particles` orbitals:
/// the `particles` lowest single-particle levels minus `ξ_R`.
pub fn particle_number_floor(basis: &ModeBasis, particles: usize, xi_r: f64) -> f64 {
    let mut eps = basis.signed_energies();
    eps.sort_by(f64::total_cmp);
    eps.iter().take(particles).sum::<f64>() - xi_r
}

#[derive(Clone, Debug)]
pub struct GaugePairReport {
    /// `max_{t, x_j} |ρ_e⁽²⁾ - ρ_e⁽¹⁾|`.
    pub max_rho_deviation: f64,
    pub max_current_deviation: f64,
    pub xi0_branch1: f64,
    pub xi0_branch2: f64,
    /// `ξ₀⁽¹⁾(t_b) - ∫ ∂_tρ_e⁽¹⁾(x, t_b) χ(x, t_b) dx`.
    pub predicted_xi0_branch2: f64,
    /// `∫ (∂_tρ_e⁽²⁾ - ∂_tρ_e⁽¹⁾)(x, t_b) χ(x, t_b) dx`: the cost of using the
    /// reference branch's density rate in the prediction.
    pub rate_substitution_gap: f64,
    pub branch1: Trajectory,
    pub branch2: Trajectory,
}

fn step_plan(t_a: f64, t_b: f64, dt: f64) -> Result<(f64, usize)> {
    if !(t_b > t_a) || !(dt > 0.0) {
        return Err(Error::Config(format!(
            "need t_b > t_a and dt > 0, got [{t_a}, {t_b}], dt = {dt}"
        )));
    }
    let steps = ((t_b - t_a) / dt).ceil().max(1.0) as usize;
    Ok(((t_b - t_a) / steps as f64, steps))
}

fn compare(
    basis: &ModeBasis,
    chi: &GaugeFunction,
    branch1: Trajectory,
    branch2: Trajectory,
    t_b: f64,
) -> Result<GaugePairReport> {
    let n = basis.config().site_count;
    let mut max_rho: f64 = 0.0;
    let mut max_cur: f64 = 0.0;
    for (s2, s1) in branch2.snapshots.iter().zip(&branch1.snapshots) {
        max_rho = max_rho.max((&s2.rho - &s1.rho).max_abs_on_grid(n));
        max_cur = max_cur.max((&s2.current - &s1.current).max_abs_on_grid(n));
    }
    let i1 = branch1.index_of(t_b).ok_or(Error::TooFewSamples(branch1.snapshots.len()))?;
    let i2 = branch2.index_of(t_b).ok_or(Error::TooFewSamples(branch2.snapshots.len()))?;
    let (s1, s2) = (&branch1.snapshots[i1], &branch2.snapshots[i2]);
    let chi_b = chi.value(basis, t_b);
    let overlap1 = s1.rho_rate.integral_product(&chi_b).re;
    let overlap2 = s2.rho_rate.integral_product(&chi_b).re;
    Ok(GaugePairReport {
        max_rho_deviation: max_rho,
        max_current_deviation: max_cur,
        xi0_branch1: s1.xi0,
        xi0_branch2: s2.xi0,
        predicted_xi0_branch2: s1.xi0 - overlap1,
        rate_substitution_gap: overlap2 - overlap1,
        branch1,
        branch2,
    })
}

/// Evolves the same initial state with zero potential and with the pure
/// gauge potential of `chi`, then compares observables.
pub fn gauge_pair_experiment(
    basis: &ModeBasis,
    state0: &SlaterState,
    chi: &GaugeFunction,
    t_a: f64,
    t_b: f64,
    dt: f64,
) -> Result<GaugePairReport> {
    let (dt, steps) = step_plan(t_a, t_b, dt)?;
    let start = SlaterState {
        time: t_a,
        ..state0.clone()
    };
    let branch1 = evolve_steps(basis, &start, &Potential::Zero, dt, steps)?;
    let branch2 = evolve_steps(basis, &start, &Potential::PureGauge(chi.clone()), dt, steps)?;
    compare(basis, chi, branch1, branch2, t_b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyPoint {
    pub f: f64,
    pub xi0_branch2: f64,
    /// First-order prediction `ξ₀⁽¹⁾(t_b) - ∫∂_tρ_e⁽¹⁾ χ dx`.
    pub predicted: f64,
    pub in_linear_range: bool,
}

#[derive(Clone, Debug)]
pub struct EnergyExtractionReport {
    pub recipe: KickRecipe,
    pub xi0_branch1: f64,
    /// `-∫ (∂_tρ_e⁽¹⁾(x, t_b))² dx`.
    pub predicted_slope: f64,
    /// Least-squares slope of `ξ₀⁽²⁾(t_b)` against `f` over the linear range.
    pub fitted_slope: f64,
    /// Lowest energy any state with the same particle number can have.
    pub floor: f64,
    /// `max |∂_tρ_e⁽¹⁾ - centered difference|` on the grid at `t_b`.
    pub rate_fd_discrepancy: f64,
    pub points: Vec<EnergyPoint>,
}

impl EnergyExtractionReport {
    pub fn relative_slope_error(&self) -> f64 {
        ((self.fitted_slope - self.predicted_slope) / self.predicted_slope).abs()
    }
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Runs the reference branch once and one kicked branch per strength.
///
/// `linear_f` is fitted for the slope; `saturation_f` only probes the
/// large-kick regime.
#[allow(clippy::too_many_arguments)]
pub fn extract_energy(
    basis: &ModeBasis,
    state0: &SlaterState,
    recipe: KickRecipe,
    linear_f: &[f64],
    saturation_f: &[f64],
    t_a: f64,
    t_b: f64,
    dt: f64,
) -> Result<EnergyExtractionReport> {
    if linear_f.len() < 2 {
        return Err(Error::Config("slope fit needs at least two kick strengths".into()));
    }
    let (dt, steps) = step_plan(t_a, t_b, dt)?;
    let start = SlaterState {
        time: t_a,
        ..state0.clone()
    };
    // one extra step past t_b for the centered-difference cross-check
    let branch1 = evolve_steps(basis, &start, &Potential::Zero, dt, steps + 1)?;
    let i_b = branch1.index_of(t_b).ok_or(Error::TooFewSamples(branch1.snapshots.len()))?;
    let reference = &branch1.snapshots[i_b];
    let xi1 = reference.xi0;
    let rate = reference.rho_rate.real_part();
    let n = basis.config().site_count;
    let fd = finite_difference_density_rate(&branch1, t_b)?;
    let rate_fd_discrepancy = (&fd - &rate).max_abs_on_grid(n);

    let mut points = Vec::with_capacity(linear_f.len() + saturation_f.len());
    for (&f, linear) in linear_f
        .iter()
        .map(|f| (f, true))
        .chain(saturation_f.iter().map(|f| (f, false)))
    {
        let chi = build_kick_chi(&branch1, recipe, f, t_a, t_b)?;
        let branch2 = evolve_steps(basis, &start, &Potential::PureGauge(chi.clone()), dt, steps)?;
        let xi2 = branch2.snapshots.last().expect("nonempty trajectory").xi0;
        let predicted = xi1 - rate.integral_product(&chi.value(basis, t_b)).re;
        points.push(EnergyPoint {
            f,
            xi0_branch2: xi2,
            predicted,
            in_linear_range: linear,
        });
    }
    let (fs, xs): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.in_linear_range)
        .map(|p| (p.f, p.xi0_branch2))
        .unzip();
    let floor = particle_number_floor(basis, state0.orbital_count(), state0.reference.xi_r);
    Ok(EnergyExtractionReport {
        recipe,
        xi0_branch1: xi1,
        predicted_slope: -rate.norm_sqr_integral(),
        fitted_slope: least_squares_slope(&fs, &xs),
        floor,
        rate_fd_discrepancy,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{excite_wavepacket, Reference};
    use crate::lattice::LatticeConfig;
    use crate::vacua::VacuumSpec;
    use num_complex::Complex64;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn packet_state(n: usize) -> (ModeBasis, SlaterState) {
        let b = ModeBasis::build(LatticeConfig::new(2.0 * PI, n, 1.0, 1.0).unwrap()).unwrap();
        let r = Arc::new(Reference::new(&b, VacuumSpec::Standard).unwrap());
        let vac = SlaterState::vacuum(&b, r, 0.0);
        let s = excite_wavepacket(&b, &vac, 1.0, 0.5).unwrap();
        (b, s)
    }

    #[test]
    fn slope_fit_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 4.0 - 1.5 * x).collect();
        assert!((least_squares_slope(&xs, &ys) + 1.5).abs() < 1e-14);
    }

    #[test]
    fn zero_kick_leaves_branches_identical() {
        let (b, s) = packet_state(11);
        let traj = evolve_steps(&b, &s, &Potential::Zero, 0.01, 20).unwrap();
        let chi = build_kick_chi(&traj, KickRecipe::DensityRate, 0.0, 0.0, 0.2).unwrap();
        let r = gauge_pair_experiment(&b, &s, &chi, 0.0, 0.2, 0.01).unwrap();
        assert!(r.max_rho_deviation < 1e-12);
        assert!(r.max_current_deviation < 1e-12);
        assert!((r.xi0_branch1 - r.xi0_branch2).abs() < 1e-12);
    }

    #[test]
    fn uniform_gauge_function_is_invisible() {
        let (b, s) = packet_state(11);
        let chi = GaugeFunction::new(
            3.0,
            Envelope::Smoothstep { t_a: 0.0, t_b: 0.5 },
            Profile::Static(Field::constant(2.0 * PI, 0, Complex64::new(1.0, 0.0))),
        );
        let r = gauge_pair_experiment(&b, &s, &chi, 0.0, 0.5, 0.01).unwrap();
        assert!(r.max_rho_deviation < 1e-12);
        assert!(r.max_current_deviation < 1e-12);
        assert!((r.xi0_branch1 - r.xi0_branch2).abs() < 1e-12);
    }

    #[test]
    fn kick_requires_potential_free_reference() {
        let (b, s) = packet_state(11);
        let chi = GaugeFunction::new(
            1.0,
            Envelope::Smoothstep { t_a: 0.0, t_b: 0.1 },
            Profile::Static(Field::constant(2.0 * PI, 0, Complex64::new(1.0, 0.0))),
        );
        let traj = evolve_steps(&b, &s, &Potential::PureGauge(chi), 0.01, 10).unwrap();
        assert_eq!(
            build_kick_chi(&traj, KickRecipe::DensityRate, 1.0, 0.0, 0.1).unwrap_err(),
            Error::NotPotentialFree
        );
    }

    #[test]
    fn kick_vanishes_with_zero_value_and_rate_at_start() {
        let (b, s) = packet_state(11);
        let traj = evolve_steps(&b, &s, &Potential::Zero, 0.01, 30).unwrap();
        for recipe in [KickRecipe::DensityRate, KickRecipe::ContinuityRate] {
            let chi = build_kick_chi(&traj, recipe, 2.0, 0.0, 0.3).unwrap();
            assert_eq!(chi.value(&b, 0.0).abs_bound(), 0.0);
            assert_eq!(chi.rate(&b, 0.0).abs_bound(), 0.0);
        }
        let continuity_kick = build_kick_chi(&traj, KickRecipe::ContinuityRate, 2.0, 0.0, 0.3).unwrap();
        assert_eq!(continuity_kick.value(&b, 0.3).abs_bound(), 0.0);
    }

    #[test]
    fn analytic_rate_matches_finite_difference() {
        let (b, s) = packet_state(11);
        let mut errs = Vec::new();
        for dt in [0.02f64, 0.01] {
            let steps = (0.4 / dt).round() as usize;
            let traj = evolve_steps(&b, &s, &Potential::Zero, dt, steps + 1).unwrap();
            let fd = finite_difference_density_rate(&traj, 0.4).unwrap();
            let exact = &traj.snapshot_at(0.4).unwrap().rho_rate;
            errs.push((&fd - exact).max_abs_on_grid(11));
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 1.9, "order {order}, errors {errs:?}");
    }

    #[test]
    fn floor_of_sea_plus_particle_is_mass() {
        let (b, s) = packet_state(11);
        let f = particle_number_floor(&b, s.orbital_count(), s.reference.xi_r);
        assert!((f - 1.0).abs() < 1e-12);
    }
}
