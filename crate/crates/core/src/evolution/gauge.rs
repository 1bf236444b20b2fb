//! Temporal envelopes, gauge functions and the external potentials built
//! from them.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::Field;
use crate::lattice::ModeBasis;
use crate::operators::{bilinear_field, Bilinear};

/// Smooth switching profile in time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Envelope {
    /// `10s³ - 15s⁴ + 6s⁵` with `s = (t - t_a)/(t_b - t_a)` clamped to `[0, 1]`.
    Smoothstep { t_a: f64, t_b: f64 },
    /// `4g(1 - g)` for the smoothstep `g`: peak 1 at the midpoint, value and
    /// first derivative zero outside `(t_a, t_b)`.
    Bump { t_a: f64, t_b: f64 },
    Constant,
}

impl Envelope {
    fn unit(t: f64, t_a: f64, t_b: f64) -> (f64, f64) {
        let width = t_b - t_a;
        let s = ((t - t_a) / width).clamp(0.0, 1.0);
        let g = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
        let dg = 30.0 * s * s * (1.0 - s) * (1.0 - s) / width;
        (g, dg)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.value_and_rate(t).0
    }

    pub fn rate(&self, t: f64) -> f64 {
        self.value_and_rate(t).1
    }

    pub fn value_and_rate(&self, t: f64) -> (f64, f64) {
        match *self {
            Envelope::Smoothstep { t_a, t_b } => Self::unit(t, t_a, t_b),
            Envelope::Bump { t_a, t_b } => {
                let (g, dg) = Self::unit(t, t_a, t_b);
                (4.0 * g * (1.0 - g), 4.0 * dg * (1.0 - 2.0 * g))
            }
            Envelope::Constant => (1.0, 0.0),
        }
    }

    /// Interval outside of which the envelope and its rate vanish, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Envelope::Bump { t_a, t_b } => Some((t_a, t_b)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KickRecipe {
    /// Static profile `∂ρ_e/∂t(x, t_b)` of the reference branch under a
    /// smoothstep envelope.
    #[serde(rename = "eq39")]
    DensityRate,
    /// Time-dependent profile `-∂L/∂t(x, t)` of the reference branch under a
    /// bump envelope.
    #[serde(rename = "eq42")]
    ContinuityRate,
}

/// Spatial profile of a gauge function, possibly time dependent.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Static(Field),
    /// `-∂L/∂t` of a potential-free determinant whose one-body density
    /// matrix at `t0` is `gamma0`. Free evolution is diagonal in the mode
    /// basis, so every time derivative is available in closed form.
    FreeContinuityRate { gamma0: DMatrix<Complex64>, t0: f64 },
}

/// `dʳΓ/dtʳ` for free evolution: `Γ_mn(t) = Γ_mn(t0) e^{-i(ε_m - ε_n)(t - t0)}`.
pub fn free_density_matrix_derivative(
    basis: &ModeBasis,
    gamma0: &DMatrix<Complex64>,
    t0: f64,
    t: f64,
    order: u32,
) -> DMatrix<Complex64> {
    let eps = basis.signed_energies();
    DMatrix::from_fn(gamma0.nrows(), gamma0.ncols(), |m, n| {
        let w = eps[m] - eps[n];
        let factor = Complex64::new(0.0, -w).powu(order);
        gamma0[(m, n)] * factor * Complex64::from_polar(1.0, -w * (t - t0))
    })
}

/// `L = ∂ρ/∂t + ∂J/∂x` and its time derivatives for free evolution;
/// `order = 0` gives `L` itself.
pub fn free_continuity_derivative(
    basis: &ModeBasis,
    gamma0: &DMatrix<Complex64>,
    t0: f64,
    t: f64,
    order: u32,
) -> Field {
    let rate = free_density_matrix_derivative(basis, gamma0, t0, t, order + 1);
    let lower = free_density_matrix_derivative(basis, gamma0, t0, t, order);
    let rho = bilinear_field(basis, &rate, Bilinear::Charge);
    let div_j = bilinear_field(basis, &lower, Bilinear::Current).derivative();
    &rho + &div_j
}

impl Profile {
    pub fn value(&self, basis: &ModeBasis, t: f64) -> Field {
        match self {
            Profile::Static(f) => f.clone(),
            Profile::FreeContinuityRate { gamma0, t0 } => {
                -&free_continuity_derivative(basis, gamma0, *t0, t, 1)
            }
        }
    }

    pub fn rate(&self, basis: &ModeBasis, t: f64) -> Option<Field> {
        match self {
            Profile::Static(_) => None,
            Profile::FreeContinuityRate { gamma0, t0 } => {
                Some(-&free_continuity_derivative(basis, gamma0, *t0, t, 2))
            }
        }
    }
}

/// `χ(x, t) = f · e(t) · P(x, t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeFunction {
    pub recipe: Option<KickRecipe>,
    pub strength: f64,
    pub envelope: Envelope,
    pub profile: Profile,
}

impl GaugeFunction {
    pub fn new(strength: f64, envelope: Envelope, profile: Profile) -> Self {
        Self {
            recipe: None,
            strength,
            envelope,
            profile,
        }
    }

    pub fn value(&self, basis: &ModeBasis, t: f64) -> Field {
        let e = self.envelope.value(t);
        self.profile.value(basis, t) * (self.strength * e)
    }

    /// `∂χ/∂t`.
    pub fn rate(&self, basis: &ModeBasis, t: f64) -> Field {
        let (e, de) = self.envelope.value_and_rate(t);
        let mut out = self.profile.value(basis, t) * (self.strength * de);
        if let Some(dp) = self.profile.rate(basis, t) {
            out = &out + &(dp * (self.strength * e));
        }
        out
    }

    pub fn with_strength(&self, strength: f64) -> Self {
        Self {
            strength,
            ..self.clone()
        }
    }
}

/// External classical potential `(A₀, A)` entering `h = h₀ - qαA + qA₀`.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    Zero,
    /// `(A₀, A) = (∂χ/∂t, -∂χ/∂x)`.
    PureGauge(GaugeFunction),
    /// `(A₀, A) = e(t)·(a0(x), a(x))`.
    Custom { a0: Field, a: Field, envelope: Envelope },
}

impl Potential {
    pub fn is_zero(&self) -> bool {
        matches!(self, Potential::Zero)
    }

    /// `(A₀(·, t), A(·, t))`, or `None` for the zero potential.
    pub fn fields(&self, basis: &ModeBasis, t: f64) -> Option<(Field, Field)> {
        match self {
            Potential::Zero => None,
            Potential::PureGauge(chi) => {
                let a0 = chi.rate(basis, t);
                let a = -&chi.value(basis, t).derivative();
                Some((a0.real_part(), a.real_part()))
            }
            Potential::Custom { a0, a, envelope } => {
                let e = envelope.value(t);
                Some(((a0.real_part()) * e, (a.real_part()) * e))
            }
        }
    }

    /// Mode-basis matrix `V_nm = ∫φ_n†(qA₀ - qαA)φ_m dx`, or `None` for the
    /// zero potential.
    pub fn matrix(&self, basis: &ModeBasis, t: f64) -> Option<DMatrix<Complex64>> {
        self.fields(basis, t).map(|(a0, a)| potential_matrix(basis, &a0, &a))
    }

    pub fn scaled(&self, c: f64) -> Potential {
        match self {
            Potential::Zero => Potential::Zero,
            Potential::PureGauge(chi) => Potential::PureGauge(chi.with_strength(chi.strength * c)),
            Potential::Custom { a0, a, envelope } => Potential::Custom {
                a0: a0.clone() * c,
                a: a.clone() * c,
                envelope: *envelope,
            },
        }
    }
}

/// Galerkin matrix of a scalar and vector potential pair:
/// `V_nm = q[u_n†u_m Â₀(k_n - k_m) - u_n†αu_m Â(k_n - k_m)]`.
pub fn potential_matrix(basis: &ModeBasis, a0: &Field, a: &Field) -> DMatrix<Complex64> {
    let q = basis.config().charge;
    let s = basis.overlaps();
    let al = basis.alpha_overlaps();
    DMatrix::from_fn(basis.dim(), basis.dim(), |n, m| {
        let k = -basis.pair_frequency(n, m);
        (s[(n, m)] * a0.coeff(k) - al[(n, m)] * a.coeff(k)) * q
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeConfig;
    use crate::operators::{charge_kernel_at, current_kernel_at};
    use std::f64::consts::PI;

    #[test]
    fn smoothstep_boundary_conditions() {
        let e = Envelope::Smoothstep { t_a: 0.5, t_b: 1.5 };
        assert_eq!(e.value_and_rate(0.5), (0.0, 0.0));
        assert_eq!(e.value_and_rate(0.0), (0.0, 0.0));
        assert_eq!(e.value(1.5), 1.0);
        assert_eq!(e.rate(1.5), 0.0);
        assert!((e.value(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn envelope_rates_match_finite_differences() {
        let h = 1e-6;
        for e in [
            Envelope::Smoothstep { t_a: 0.0, t_b: 2.0 },
            Envelope::Bump { t_a: 0.2, t_b: 1.0 },
        ] {
            for t in [0.3, 0.5, 0.77, 0.9] {
                let fd = (e.value(t + h) - e.value(t - h)) / (2.0 * h);
                assert!((fd - e.rate(t)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn bump_is_compact_with_unit_peak() {
        let e = Envelope::Bump { t_a: 1.0, t_b: 3.0 };
        assert!((e.value(2.0) - 1.0).abs() < 1e-15);
        for t in [0.0, 1.0, 3.0, 4.0] {
            assert_eq!(e.value_and_rate(t), (0.0, 0.0));
        }
    }

    #[test]
    fn recipe_tags() {
        let r: KickRecipe = serde_json::from_str("\"eq42\"").unwrap();
        assert_eq!(r, KickRecipe::ContinuityRate);
        assert_eq!(serde_json::to_string(&KickRecipe::DensityRate).unwrap(), "\"eq39\"");
    }

    #[test]
    fn potential_matrix_is_projected_kernel_integral() {
        let b = ModeBasis::build(LatticeConfig::new(2.0 * PI, 5, 0.8, 1.4).unwrap()).unwrap();
        let l = 2.0 * PI;
        let a0 = Field::from_fn(l, 4, |x| Complex64::new(x.cos() + 0.3 * (2.0 * x).sin(), 0.0));
        let a = Field::from_fn(l, 4, |x| Complex64::new(0.5 * (3.0 * x).cos(), 0.0));
        let v = potential_matrix(&b, &a0, &a);
        assert!((&v - v.adjoint()).camax() < 1e-14);
        // ∫(ρ̂ A₀ - Ĵ A) by fine quadrature of the site kernels; the integrand
        // has degree ≤ 8, so 41 points integrate it exactly
        let nq = 41;
        let mut direct = DMatrix::<Complex64>::zeros(b.dim(), b.dim());
        for j in 0..nq {
            let x = l * j as f64 / nq as f64;
            let w = Complex64::new(l / nq as f64, 0.0);
            direct += charge_kernel_at(&b, x).coeffs * a0.eval(x) * w;
            direct -= current_kernel_at(&b, x).coeffs * a.eval(x) * w;
        }
        assert!((v - direct).camax() < 1e-13);
    }

    #[test]
    fn pure_gauge_fields_follow_chi() {
        let b = ModeBasis::build(LatticeConfig::new(2.0 * PI, 5, 1.0, 1.0).unwrap()).unwrap();
        let prof = Field::from_fn(2.0 * PI, 2, |x| Complex64::new(x.sin(), 0.0));
        let env = Envelope::Smoothstep { t_a: 0.0, t_b: 1.0 };
        let chi = GaugeFunction::new(2.0, env, Profile::Static(prof));
        let pot = Potential::PureGauge(chi);
        let (a0, a) = pot.fields(&b, 0.4).unwrap();
        let (e, de) = env.value_and_rate(0.4);
        for x in [0.0, 1.0, 2.5] {
            assert!((a0.eval(x).re - 2.0 * de * x.sin()).abs() < 1e-14);
            assert!((a.eval(x).re + 2.0 * e * x.cos()).abs() < 1e-14);
        }
        assert!(pot.matrix(&b, 0.0).unwrap().camax() == 0.0);
        assert!(Potential::Zero.matrix(&b, 0.3).is_none());
    }
}
