//! Bare, filled-sea and band vacua as occupation sets of the mode basis.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{EnergySign, LatticeConfig, Mode, ModeBasis};

/// Which single-particle modes a vacuum fills.
///
/// Deserializes from `{"vacuum": "bare" | "standard" | "band", "delta_Ew": x}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "vacuum", rename_all = "lowercase")]
pub enum VacuumSpec {
    Bare,
    Standard,
    Band {
        #[serde(rename = "delta_Ew")]
        delta_ew: f64,
    },
}

impl VacuumSpec {
    pub fn label(&self) -> &'static str {
        match self {
            VacuumSpec::Bare => "bare",
            VacuumSpec::Standard => "standard",
            VacuumSpec::Band { .. } => "band",
        }
    }

    pub fn band_width(&self) -> Option<f64> {
        match self {
            VacuumSpec::Band { delta_ew } => Some(*delta_ew),
            _ => None,
        }
    }

    /// Band vacuum whose width is a fixed fraction of `E_max - m`.
    ///
    /// Sweeping the cutoff with a fixed ratio is how the `ΔE_w → ∞` limit is
    /// approached without collapsing onto the filled sea.
    pub fn coupled_band(config: &LatticeConfig, ratio: f64) -> Self {
        VacuumSpec::Band {
            delta_ew: ratio * (config.e_max() - config.mass),
        }
    }

    pub fn validate(&self, config: &LatticeConfig) -> Result<()> {
        if let VacuumSpec::Band { delta_ew } = *self {
            if !(delta_ew >= 0.0 && delta_ew.is_finite()) {
                return Err(Error::Config(format!(
                    "band width delta_Ew must be non-negative, got {delta_ew}"
                )));
            }
            let band_floor = config.mass + delta_ew;
            let e_max = config.e_max();
            if band_floor >= e_max {
                return Err(Error::Headroom { band_floor, e_max });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    Positive,
    InBand,
    BelowBand,
}

/// Band edges are inclusive: `E ∈ [m, m + ΔE_w]` is in the band.
pub fn classify(mode: &Mode, spec: &VacuumSpec, mass: f64) -> Region {
    match mode.sign {
        EnergySign::Positive => Region::Positive,
        EnergySign::Negative => match spec {
            VacuumSpec::Band { delta_ew } if mode.energy > mass + delta_ew => Region::BelowBand,
            _ => Region::InBand,
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OccupationSet {
    dim: usize,
    occupied: Vec<usize>,
}

impl OccupationSet {
    pub fn new(dim: usize, mut occupied: Vec<usize>) -> Result<Self> {
        occupied.sort_unstable();
        occupied.dedup();
        if let Some(&bad) = occupied.iter().find(|&&n| n >= dim) {
            return Err(Error::Config(format!(
                "occupied mode {bad} outside 0..{dim}"
            )));
        }
        Ok(Self { dim, occupied })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn occupied(&self) -> &[usize] {
        &self.occupied
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    pub fn contains(&self, n: usize) -> bool {
        self.occupied.binary_search(&n).is_ok()
    }

    pub fn unoccupied(&self) -> Vec<usize> {
        (0..self.dim).filter(|&n| !self.contains(n)).collect()
    }

    pub fn is_subset(&self, other: &OccupationSet) -> bool {
        self.occupied.iter().all(|&n| other.contains(n))
    }

    /// Particle-hole flip of the whole set.
    pub fn complement(&self) -> OccupationSet {
        OccupationSet {
            dim: self.dim,
            occupied: self.unoccupied(),
        }
    }
}

pub fn occupation_set(spec: &VacuumSpec, basis: &ModeBasis) -> Result<OccupationSet> {
    let config = basis.config();
    spec.validate(config)?;
    let occupied = match spec {
        VacuumSpec::Bare => Vec::new(),
        _ => basis
            .modes()
            .iter()
            .enumerate()
            .filter(|(_, m)| classify(m, spec, config.mass) == Region::InBand)
            .map(|(n, _)| n)
            .collect(),
    };
    OccupationSet::new(basis.dim(), occupied)
}

/// One-body density matrix of the determinant: the projector onto `occ`.
pub fn density_matrix(occ: &OccupationSet) -> DMatrix<Complex64> {
    let mut d = DMatrix::zeros(occ.dim(), occ.dim());
    for &n in occ.occupied() {
        d[(n, n)] = Complex64::new(1.0, 0.0);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn basis(n: usize, m: f64) -> ModeBasis {
        ModeBasis::build(LatticeConfig::new(2.0 * PI, n, m, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn rest_mode_always_in_band() {
        let b = basis(5, 1.0);
        let rest = b.index_of(0, EnergySign::Negative).unwrap();
        for w in [0.0, 0.3, 1.0] {
            let spec = VacuumSpec::Band { delta_ew: w };
            assert_eq!(classify(b.mode(rest), &spec, 1.0), Region::InBand);
        }
        for n in 0..5 {
            assert_eq!(classify(b.mode(n), &VacuumSpec::Standard, 1.0), Region::Positive);
        }
    }

    #[test]
    fn upper_band_edge_is_inclusive() {
        let b = basis(5, 1.0);
        let n1 = b.index_of(1, EnergySign::Negative).unwrap();
        let edge = b.mode(n1).energy - 1.0;
        let spec = VacuumSpec::Band { delta_ew: edge };
        assert_eq!(classify(b.mode(n1), &spec, 1.0), Region::InBand);
    }

    #[test]
    fn standard_fills_negative_modes() {
        let b = basis(5, 1.0);
        let occ = occupation_set(&VacuumSpec::Standard, &b).unwrap();
        assert_eq!(occ.len(), 5);
        assert!(occ
            .occupied()
            .iter()
            .all(|&n| b.mode(n).sign == EnergySign::Negative));
        assert!(occupation_set(&VacuumSpec::Bare, &b).unwrap().is_empty());
    }

    #[test]
    fn band_just_above_first_shell() {
        let b = basis(7, 1.0);
        let e1 = (1.0f64 + 1.0).sqrt();
        let spec = VacuumSpec::Band { delta_ew: e1 - 1.0 + 1e-9 };
        let occ = occupation_set(&spec, &b).unwrap();
        let mut ks: Vec<i64> = occ.occupied().iter().map(|&n| b.mode(n).momentum_index).collect();
        ks.sort_unstable();
        assert_eq!(ks, vec![-1, 0, 1]);
    }

    #[test]
    fn headroom_guard() {
        let b = basis(5, 1.0);
        let e_max = b.config().e_max();
        let err = occupation_set(&VacuumSpec::Band { delta_ew: e_max - 1.0 }, &b).unwrap_err();
        assert!(matches!(err, Error::Headroom { .. }));
        assert!(err.to_string().contains("E_max"));
    }

    #[test]
    fn band_grows_monotonically_towards_sea() {
        let b = basis(11, 0.7);
        let sea = occupation_set(&VacuumSpec::Standard, &b).unwrap();
        let e_max = b.config().e_max();
        let mut prev = OccupationSet::new(b.dim(), vec![]).unwrap();
        for i in 0..40 {
            let w = (e_max - 0.7) * i as f64 / 40.0;
            let occ = occupation_set(&VacuumSpec::Band { delta_ew: w }, &b).unwrap();
            assert!(prev.is_subset(&occ));
            assert!(occ.is_subset(&sea));
            prev = occ;
        }
    }

    #[test]
    fn density_matrix_is_projector() {
        let occ = OccupationSet::new(6, vec![1, 4]).unwrap();
        let d = density_matrix(&occ);
        assert!((&d * &d - &d).norm() < 1e-15);
        assert_eq!(d.trace().re, 2.0);
        let full = density_matrix(&OccupationSet::new(3, vec![0, 1, 2]).unwrap());
        assert_eq!(full, DMatrix::identity(3, 3));
        assert_eq!(
            density_matrix(&OccupationSet::new(3, vec![]).unwrap()),
            DMatrix::zeros(3, 3)
        );
    }

    #[test]
    fn spec_deserializes_from_cli_keys() {
        let s: VacuumSpec = serde_json::from_str(r#"{"vacuum":"band","delta_Ew":1.5}"#).unwrap();
        assert_eq!(s, VacuumSpec::Band { delta_ew: 1.5 });
        let s: VacuumSpec = serde_json::from_str(r#"{"vacuum":"standard"}"#).unwrap();
        assert_eq!(s, VacuumSpec::Standard);
    }
}
