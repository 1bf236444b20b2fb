//! First-order vacuum response to external potentials.
//!
//! For a determinant vacuum `D` and perturbation `V(t)` the first-order
//! density matrix is
//!
//! ```text
//! Γ¹_mn(t) = -i (d_n - d_m) ∫_{t_s}^t V_mn(t') e^{-i(ε_m - ε_n)(t - t')} dt'
//! ```
//!
//! and every first-order observable is the corresponding bilinear of `Γ¹`.
//! The time integral is composite Simpson with a step tied to the fastest
//! pair frequency `2E_max`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::{Envelope, GaugeFunction, Potential};
use crate::field::Field;
use crate::lattice::{EnergySign, ModeBasis};
use crate::operators::{bilinear_field, Bilinear};
use crate::schwinger::schwinger_kernel;
use crate::vacua::{occupation_set, VacuumSpec};

pub const MIN_SAMPLES_PER_PERIOD: usize = 40;
pub const DEFAULT_SAMPLES_PER_PERIOD: usize = 200;

/// Composite Simpson nodes and weights on `[t0, t1]` with at least
/// `samples` points per period of the angular frequency `omega_max`.
pub fn simpson_rule(t0: f64, t1: f64, omega_max: f64, samples: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if samples < MIN_SAMPLES_PER_PERIOD {
        return Err(Error::Config(format!(
            "need at least {MIN_SAMPLES_PER_PERIOD} samples per fastest period, got {samples}"
        )));
    }
    if !(t1 >= t0) {
        return Err(Error::Config(format!("quadrature interval [{t0}, {t1}] is reversed")));
    }
    if t1 == t0 {
        return Ok((vec![t0], vec![0.0]));
    }
    let h_max = 2.0 * std::f64::consts::PI / omega_max.max(1e-12) / samples as f64;
    let mut intervals = ((t1 - t0) / h_max).ceil().max(2.0) as usize;
    intervals += intervals % 2;
    let h = (t1 - t0) / intervals as f64;
    let nodes = (0..=intervals).map(|i| t0 + h * i as f64).collect();
    let weights = (0..=intervals)
        .map(|i| {
            let w = if i == 0 || i == intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect();
    Ok((nodes, weights))
}

#[derive(Clone, Debug)]
pub struct FirstOrderResponse {
    pub time: f64,
    pub density: Field,
    pub current: Field,
}

/// `J¹(x, t)` and `ρ¹(x, t)` of the vacuum `spec` under `potential`, with
/// the time integral started at `t_start`.
pub fn first_order_current(
    basis: &ModeBasis,
    spec: &VacuumSpec,
    potential: &Potential,
    t_start: f64,
    t: f64,
    samples_per_period: usize,
) -> Result<FirstOrderResponse> {
    let occ = occupation_set(spec, basis)?;
    let dim = basis.dim();
    let eps = basis.signed_energies();
    let d: Vec<f64> = (0..dim).map(|n| if occ.contains(n) { 1.0 } else { 0.0 }).collect();
    let (nodes, weights) = simpson_rule(t_start, t, 2.0 * basis.config().e_max(), samples_per_period)?;
    let mut z = DMatrix::<Complex64>::zeros(dim, dim);
    for (&tp, &w) in nodes.iter().zip(&weights) {
        let Some(v) = potential.matrix(basis, tp) else {
            continue;
        };
        for m in 0..dim {
            for n in 0..dim {
                if d[n] == d[m] {
                    continue;
                }
                let phase = Complex64::from_polar(w, -(eps[m] - eps[n]) * (t - tp));
                z[(m, n)] += v[(m, n)] * phase;
            }
        }
    }
    let gamma1 = DMatrix::from_fn(dim, dim, |m, n| z[(m, n)] * Complex64::new(0.0, -(d[n] - d[m])));
    Ok(FirstOrderResponse {
        time: t,
        density: bilinear_field(basis, &gamma1, Bilinear::Charge).real_part(),
        current: bilinear_field(basis, &gamma1, Bilinear::Current).real_part(),
    })
}

/// `i ∫ I(x, y) χ(y, t) dy` with the commutator kernel of `spec`.
///
/// The sign follows from `h = h₀ - qα·A + qA₀` and the usual linear
/// response `δ⟨O⟩ = -i ∫ ⟨[Ô(t), Ĥ_int(t')]⟩ dt'`; it agrees with
/// [`first_order_current`] under the pure-gauge potential of `chi`.
pub fn gauge_variation_response(
    basis: &ModeBasis,
    spec: &VacuumSpec,
    chi: &GaugeFunction,
    t: f64,
) -> Result<Field> {
    let kernel = schwinger_kernel(basis, spec)?;
    let chi_t = chi.value(basis, t);
    Ok(kernel
        .spectrum()
        .convolve(&chi_t)
        .scale(Complex64::new(0.0, 1.0))
        .real_part())
}

/// `∫dt ∫dx φ_n†(x, t) V(x, t) Φ(x, t)` for `V(x, t) = e(t) v(x)` and a
/// freely evolving orbital `Φ = Σ_k c_k φ_k e^{-iλ_kE_k t}`.
#[allow(clippy::too_many_arguments)]
pub fn deep_state_coupling(
    basis: &ModeBasis,
    v: &Field,
    envelope: &Envelope,
    packet: &DVector<Complex64>,
    n: usize,
    t0: f64,
    t1: f64,
    samples_per_period: usize,
) -> Result<Complex64> {
    if packet.len() != basis.dim() {
        return Err(Error::Dimension {
            expected: basis.dim(),
            actual: packet.len(),
        });
    }
    if n >= basis.dim() {
        return Err(Error::Config(format!("mode index {n} outside 0..{}", basis.dim())));
    }
    let eps = basis.signed_energies();
    let s = basis.overlaps();
    // spatial integral per packet component, then one phase per component
    let terms: Vec<(Complex64, f64)> = (0..basis.dim())
        .filter(|&k| packet[k] != Complex64::new(0.0, 0.0))
        .map(|k| {
            let spatial = s[(n, k)] * v.coeff(-basis.pair_frequency(n, k)) * packet[k];
            (spatial, eps[n] - eps[k])
        })
        .collect();
    let omega_max = terms.iter().map(|(_, w)| w.abs()).fold(0.0, f64::max);
    let (nodes, weights) = simpson_rule(t0, t1, omega_max, samples_per_period)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&t, &w) in nodes.iter().zip(&weights) {
        let e = envelope.value(t);
        if e == 0.0 {
            continue;
        }
        for &(a, omega) in &terms {
            acc += a * Complex64::from_polar(w * e, omega * t);
        }
    }
    Ok(acc)
}

/// `∫_{t0}^{t1} e^{iΩt} dt` in closed form.
pub fn phase_integral(omega: f64, t0: f64, t1: f64) -> Complex64 {
    if omega == 0.0 {
        return Complex64::new(t1 - t0, 0.0);
    }
    (Complex64::from_polar(1.0, omega * t1) - Complex64::from_polar(1.0, omega * t0))
        / Complex64::new(0.0, omega)
}

/// Negative-energy mode at momentum index `k`.
pub fn deep_mode(basis: &ModeBasis, k: i64) -> Result<usize> {
    basis
        .index_of(k, EnergySign::Negative)
        .ok_or_else(|| Error::Config(format!("momentum index {k} outside the cutoff")))
}
