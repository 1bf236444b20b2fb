//! First-order response: two analytic paths and the nonperturbative check.

use dirac_lab::evolution::{default_dt, evolve, Envelope, GaugeFunction, Potential, Profile, Reference, SlaterState};
use dirac_lab::response::{deep_mode, deep_state_coupling, first_order_current, gauge_variation_response};
use dirac_lab::{EnergySign, Field, LatticeConfig, ModeBasis, VacuumSpec};
use nalgebra::DVector;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

fn basis(n: usize) -> ModeBasis {
    ModeBasis::build(LatticeConfig::new(2.0 * PI, n, 1.0, 1.0).unwrap()).unwrap()
}

fn cos_chi(l: f64) -> GaugeFunction {
    GaugeFunction::new(
        1.0,
        Envelope::Smoothstep { t_a: 0.0, t_b: 1.0 },
        Profile::Static(Field::from_fn(l, 1, |x| Complex64::new(x.cos(), 0.0))),
    )
}

#[test]
fn gauge_variation_matches_direct_response_in_both_vacua() {
    let b = basis(15);
    let chi = cos_chi(b.config().box_length);
    let pot = Potential::PureGauge(chi.clone());
    let probe = 4 * b.config().site_count;
    for spec in [VacuumSpec::Standard, VacuumSpec::coupled_band(b.config(), 0.5)] {
        let direct = first_order_current(&b, &spec, &pot, 0.0, 1.0, 200).unwrap();
        let gauge = gauge_variation_response(&b, &spec, &chi, 1.0).unwrap();
        let diff = (&direct.current - &gauge).max_abs_on_grid(probe);
        assert!(diff < 1e-6, "{}: {diff}", spec.label());
    }
    let standard = gauge_variation_response(&b, &VacuumSpec::Standard, &chi, 1.0).unwrap();
    assert!(standard.max_abs_on_grid(probe) > 1e-2);
}

#[test]
fn band_vacuum_gauge_variation_is_weaker_and_shrinks() {
    let mut band = Vec::new();
    for n in [9, 15, 21] {
        let b = basis(n);
        let l = b.config().box_length;
        let chi = GaugeFunction::new(
            1.0,
            Envelope::Smoothstep { t_a: 0.0, t_b: 1.0 },
            Profile::Static(Field::from_fn(l, n - 1, |x| Complex64::new((-(x - PI).powi(2) / 0.5).exp(), 0.0))),
        );
        let probe = 4 * n;
        let s = gauge_variation_response(&b, &VacuumSpec::Standard, &chi, 1.0).unwrap().max_abs_on_grid(probe);
        let w = gauge_variation_response(&b, &VacuumSpec::coupled_band(b.config(), 0.5), &chi, 1.0)
            .unwrap()
            .max_abs_on_grid(probe);
        assert!(w < s);
        band.push(w);
    }
    assert!(band.windows(2).all(|p| p[1] < p[0]), "{band:?}");
}

#[test]
fn first_order_current_matches_evolution_to_second_order() {
    let b = basis(9);
    let l = b.config().box_length;
    let pot = Potential::Custom {
        a0: Field::from_fn(l, 2, |x| Complex64::new(x.cos(), 0.0)),
        a: Field::from_fn(l, 2, |x| Complex64::new(0.5 * (2.0 * x).sin(), 0.0)),
        envelope: Envelope::Bump { t_a: 0.0, t_b: 0.6 },
    };
    let j1 = first_order_current(&b, &VacuumSpec::Standard, &pot, 0.0, 1.0, 200).unwrap();
    let r = Arc::new(Reference::new(&b, VacuumSpec::Standard).unwrap());
    let vac = SlaterState::vacuum(&b, r, 0.0);
    let errors: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&eps| {
            let tr = evolve(&b, &vac, &pot.scaled(eps), 1.0, default_dt(&b) / 4.0).unwrap();
            let j = &tr.snapshots.last().unwrap().current;
            (j - &(j1.current.clone() * eps)).max_abs_on_grid(4 * 9)
        })
        .collect();
    for w in errors.windows(2) {
        let order = f64::log2(w[0] / w[1]);
        assert!(order >= 1.8, "{errors:?}");
    }
}

#[test]
fn deep_coupling_falls_when_band_deepens() {
    let b = basis(21);
    let l = b.config().box_length;
    let v = Field::from_fn(l, 10, |x| Complex64::new((-(x - PI).powi(2) / 0.5).exp(), 0.0));
    let mut packet = DVector::zeros(b.dim());
    for k in -2i64..=2 {
        let n = b.index_of(k, EnergySign::Positive).unwrap();
        packet[n] = Complex64::new((-(k as f64).powi(2) / 2.0).exp(), 0.0);
    }
    let env = Envelope::Bump { t_a: 0.0, t_b: 2.0 };
    let coupling = |k: i64| {
        deep_state_coupling(&b, &v, &env, &packet, deep_mode(&b, k).unwrap(), 0.0, 2.0, 200)
            .unwrap()
            .norm()
    };
    for k in [2, 3, 4, 5] {
        assert!(coupling(2 * k) < coupling(k), "p index {k}");
    }
}
