//! Physical parameters of the double-dot device, the dimensionless reduction
//! that drives every rate, and the four Fermi occupation factors.
//!
//! Units: `k_B = ħ = 1`. Temperatures are energies; the energy unit itself is
//! arbitrary because every quantity downstream depends on the dimensionless
//! barrier `χ = (ε − μ)/U` and thermal energy `ξ = T/U`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The two reservoirs, each tunnel-coupled to its own dot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lead {
    #[serde(alias = "l")]
    Left,
    #[serde(alias = "r")]
    Right,
}

impl Lead {
    pub fn other(self) -> Lead {
        match self {
            Lead::Left => Lead::Right,
            Lead::Right => Lead::Left,
        }
    }
}

impl std::fmt::Display for Lead {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Lead::Left => "L",
            Lead::Right => "R",
        })
    }
}

impl std::str::FromStr for Lead {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l" | "left" => Ok(Lead::Left),
            "r" | "right" => Ok(Lead::Right),
            _ => Err(Error::Config(format!("unknown lead {s:?} (expected L or R)"))),
        }
    }
}

/// Dot energies, Coulomb coupling and bare tunnelling rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub eps_l: f64,
    pub eps_r: f64,
    pub u: f64,
    pub gamma_l: f64,
    pub gamma_r: f64,
}

impl SystemParams {
    pub fn new(eps_l: f64, eps_r: f64, u: f64, gamma_l: f64, gamma_r: f64) -> Result<Self> {
        let sys = SystemParams {
            eps_l,
            eps_r,
            u,
            gamma_l,
            gamma_r,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        finite("eps_l", self.eps_l)?;
        finite("eps_r", self.eps_r)?;
        positive("u", self.u)?;
        positive("gamma_l", self.gamma_l)?;
        positive("gamma_r", self.gamma_r)
    }

    pub fn transition_energies(&self) -> TransitionEnergies {
        TransitionEnergies {
            w21: self.eps_l,
            w31: self.eps_r,
            w42: self.eps_r + self.u,
            w43: self.eps_l + self.u,
        }
    }
}

/// Temperature and chemical potential of one reservoir.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    pub temperature: f64,
    pub mu: f64,
}

impl BathParams {
    pub fn new(temperature: f64, mu: f64) -> Result<Self> {
        let bath = BathParams { temperature, mu };
        bath.validate()?;
        Ok(bath)
    }

    pub fn validate(&self) -> Result<()> {
        positive("temperature", self.temperature)?;
        finite("mu", self.mu)
    }
}

/// Dimensionless barriers `χ_α = (ε_α − μ_α)/U` and thermal energies `ξ_α = T_α/U`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedParams {
    pub chi_l: f64,
    pub chi_r: f64,
    pub xi_l: f64,
    pub xi_r: f64,
}

impl ReducedParams {
    pub fn new(chi_l: f64, chi_r: f64, xi_l: f64, xi_r: f64) -> Result<Self> {
        let rp = ReducedParams {
            chi_l,
            chi_r,
            xi_l,
            xi_r,
        };
        rp.validate()?;
        Ok(rp)
    }

    pub fn validate(&self) -> Result<()> {
        finite("chi_l", self.chi_l)?;
        finite("chi_r", self.chi_r)?;
        positive("xi_l", self.xi_l)?;
        positive("xi_r", self.xi_r)
    }

    pub fn chi(&self, lead: Lead) -> f64 {
        match lead {
            Lead::Left => self.chi_l,
            Lead::Right => self.chi_r,
        }
    }

    pub fn xi(&self, lead: Lead) -> f64 {
        match lead {
            Lead::Left => self.xi_l,
            Lead::Right => self.xi_r,
        }
    }

    pub fn with_chi(mut self, lead: Lead, chi: f64) -> Self {
        match lead {
            Lead::Left => self.chi_l = chi,
            Lead::Right => self.chi_r = chi,
        }
        self
    }

    /// The same device with the two bath temperatures exchanged.
    pub fn swap_temperatures(self) -> Self {
        ReducedParams {
            xi_l: self.xi_r,
            xi_r: self.xi_l,
            ..self
        }
    }

    /// Reconstruct bath parameters for the given dot energies and coupling.
    pub fn to_baths(&self, sys: &SystemParams) -> (BathParams, BathParams) {
        (
            BathParams {
                temperature: self.xi_l * sys.u,
                mu: sys.eps_l - self.chi_l * sys.u,
            },
            BathParams {
                temperature: self.xi_r * sys.u,
                mu: sys.eps_r - self.chi_r * sys.u,
            },
        )
    }
}

/// Transition energies `ω_ij = E_i − E_j` of the four allowed transitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionEnergies {
    pub w21: f64,
    pub w31: f64,
    pub w42: f64,
    pub w43: f64,
}

/// A Fermi factor stored together with its complement.
///
/// Both halves are evaluated from the logistic directly, so `1 − f` keeps full
/// relative precision even when `f` rounds to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiFactor {
    value: f64,
    complement: f64,
}

impl FermiFactor {
    pub fn new(chi: f64, xi: f64) -> Self {
        FermiFactor {
            value: fermi_factor(chi, xi),
            complement: fermi_factor(-chi, xi),
        }
    }

    /// Build from a bare occupation, computing the complement by subtraction.
    pub fn from_value(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::domain("fermi factor", value, "must lie in [0, 1]"));
        }
        Ok(FermiFactor {
            value,
            complement: 1.0 - value,
        })
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    pub fn complement(&self) -> f64 {
        self.complement
    }
}

/// The four occupation factors `f_L¹, f_L², f_R¹, f_R²`.
///
/// The first factor of each lead is evaluated at the bare level `ω = ε_α`,
/// the second at the Coulomb-shifted level `ω = ε_α + U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiSet {
    pub l1: FermiFactor,
    pub l2: FermiFactor,
    pub r1: FermiFactor,
    pub r2: FermiFactor,
}

impl FermiSet {
    pub fn from_values(fl1: f64, fl2: f64, fr1: f64, fr2: f64) -> Result<Self> {
        if fl2 > fl1 {
            return Err(Error::domain("fl2", fl2, "must not exceed fl1"));
        }
        if fr2 > fr1 {
            return Err(Error::domain("fr2", fr2, "must not exceed fr1"));
        }
        Ok(FermiSet {
            l1: FermiFactor::from_value(fl1)?,
            l2: FermiFactor::from_value(fl2)?,
            r1: FermiFactor::from_value(fr1)?,
            r2: FermiFactor::from_value(fr2)?,
        })
    }

    pub fn fl1(&self) -> f64 {
        self.l1.value
    }
    pub fn fl2(&self) -> f64 {
        self.l2.value
    }
    pub fn fr1(&self) -> f64 {
        self.r1.value
    }
    pub fn fr2(&self) -> f64 {
        self.r2.value
    }

    /// Total occupation `f_α¹ + f_α²` seen by one lead; lies in `[0, 2]`.
    pub fn total(&self, lead: Lead) -> f64 {
        match lead {
            Lead::Left => self.l1.value + self.l2.value,
            Lead::Right => self.r1.value + self.r2.value,
        }
    }
}

pub fn reduce_params(sys: &SystemParams, bath_l: &BathParams, bath_r: &BathParams) -> Result<ReducedParams> {
    sys.validate()?;
    if !(bath_l.temperature > 0.0) || !bath_l.temperature.is_finite() {
        return Err(Error::domain("T_L", bath_l.temperature, "must be positive"));
    }
    if !(bath_r.temperature > 0.0) || !bath_r.temperature.is_finite() {
        return Err(Error::domain("T_R", bath_r.temperature, "must be positive"));
    }
    finite("mu_l", bath_l.mu)?;
    finite("mu_r", bath_r.mu)?;
    ReducedParams::new(
        (sys.eps_l - bath_l.mu) / sys.u,
        (sys.eps_r - bath_r.mu) / sys.u,
        bath_l.temperature / sys.u,
        bath_r.temperature / sys.u,
    )
}

/// Fermi–Dirac occupation `1 / (1 + exp(χ/ξ))`.
///
/// Evaluated on the branch whose exponential cannot overflow; saturates to
/// exactly 0 or 1 instead of producing NaN.
pub fn fermi_factor(chi: f64, xi: f64) -> f64 {
    debug_assert!(xi > 0.0, "fermi_factor requires xi > 0");
    let x = chi / xi;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

pub fn fermi_set(rp: &ReducedParams) -> FermiSet {
    FermiSet {
        l1: FermiFactor::new(rp.chi_l, rp.xi_l),
        l2: FermiFactor::new(rp.chi_l + 1.0, rp.xi_l),
        r1: FermiFactor::new(rp.chi_r, rp.xi_r),
        r2: FermiFactor::new(rp.chi_r + 1.0, rp.xi_r),
    }
}

fn finite(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(field, value, "must be finite"))
    }
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(field, value, "must be positive"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sys(eps_l: f64, eps_r: f64, u: f64) -> SystemParams {
        SystemParams::new(eps_l, eps_r, u, 1.0, 1.0).unwrap()
    }

    #[test]
    fn reduce_direct_definition() {
        let rp = reduce_params(
            &sys(1.0, 2.0, 1.0),
            &BathParams::new(0.5, 1.5).unwrap(),
            &BathParams::new(1.0, 2.0).unwrap(),
        )
        .unwrap();
        assert_eq!(rp.chi_l, -0.5);
        assert_eq!(rp.xi_l, 0.5);
        assert_eq!(rp.chi_r, 0.0);
    }

    #[test]
    fn reduce_zero_barrier_when_mu_equals_level() {
        let rp = reduce_params(
            &sys(0.0, 2.0, 4.0),
            &BathParams::new(1.0, 0.0).unwrap(),
            &BathParams::new(2.0, 2.0).unwrap(),
        )
        .unwrap();
        assert_eq!(rp.chi_r, 0.0);
        assert_eq!(rp.xi_r, 0.5);
    }

    #[test]
    fn reduce_hand_arithmetic() {
        let rp = reduce_params(
            &sys(0.3, 0.0, 0.8),
            &BathParams::new(0.2, 0.9).unwrap(),
            &BathParams::new(0.2, 0.0).unwrap(),
        )
        .unwrap();
        assert!((rp.chi_l + 0.75).abs() < 1e-15);
        assert!((rp.xi_l - 0.25).abs() < 1e-15);
    }

    #[test]
    fn reduce_rejects_bad_fields() {
        let bath = BathParams {
            temperature: 1.0,
            mu: 0.0,
        };
        let bad_u = SystemParams {
            eps_l: 0.0,
            eps_r: 0.0,
            u: 0.0,
            gamma_l: 1.0,
            gamma_r: 1.0,
        };
        match reduce_params(&bad_u, &bath, &bath) {
            Err(Error::Domain { field, .. }) => assert_eq!(field, "u"),
            other => panic!("expected domain error, got {other:?}"),
        }
        let cold = BathParams {
            temperature: -1.0,
            mu: 0.0,
        };
        match reduce_params(&sys(0.0, 0.0, 1.0), &bath, &cold) {
            Err(Error::Domain { field, .. }) => assert_eq!(field, "T_R"),
            other => panic!("expected domain error, got {other:?}"),
        }
        assert!(BathParams::new(0.0, 0.0).is_err());
        assert!(SystemParams::new(0.0, 0.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn fermi_examples() {
        assert_eq!(fermi_factor(0.0, 0.3), 0.5);
        assert_eq!(fermi_factor(0.0, 7.0), 0.5);
        let deep = fermi_factor(40.0, 0.05);
        assert!(deep.is_finite() && (0.0..1e-300).contains(&deep));
        assert_eq!(fermi_factor(-40.0, 0.05), 1.0);
        assert!((fermi_factor(-0.5, 0.5) - 0.731_058_578_630).abs() < 1e-12);
        // |chi/xi| well past the exp overflow point
        assert_eq!(fermi_factor(1e4, 1.0), 0.0);
        assert_eq!(fermi_factor(-1e4, 1.0), 1.0);
    }

    #[test]
    fn fermi_set_examples() {
        let fs = fermi_set(&ReducedParams::new(0.0, -0.5, 1e-3, 0.5).unwrap());
        assert_eq!(fs.total(Lead::Right), 1.0);
        assert_eq!(fs.fl1(), 0.5);
        assert!(fs.fl2() < 1e-300);

        let fs = fermi_set(&ReducedParams::new(-2.0, 0.0, 0.25, 1.0).unwrap());
        assert!((fs.fl1() - 1.0 / (1.0 + (-8.0f64).exp())).abs() < 1e-16);
        assert!((fs.fl2() - 1.0 / (1.0 + (-4.0f64).exp())).abs() < 1e-16);
    }

    #[test]
    fn complement_survives_saturation() {
        let f = FermiFactor::new(-5.0, 0.05);
        assert_eq!(f.value(), 1.0);
        assert!(f.complement() > 0.0);
        assert!((f.complement().ln() + 100.0).abs() < 1e-12);
    }

    #[test]
    fn transition_energies_differ_by_u() {
        let te = sys(0.3, 1.1, 0.7).transition_energies();
        assert_eq!(te.w21, 0.3);
        assert_eq!(te.w31, 1.1);
        assert!((te.w43 - te.w21 - 0.7).abs() < 1e-15);
        assert!((te.w42 - te.w31 - 0.7).abs() < 1e-15);
    }

    #[test]
    fn from_values_checks_ordering() {
        assert!(FermiSet::from_values(0.2, 0.3, 0.5, 0.5).is_err());
        assert!(FermiSet::from_values(0.5, 0.5, 1.2, 0.5).is_err());
        let fs = FermiSet::from_values(0.5, 0.5, 0.5, 0.5).unwrap();
        assert_eq!(fs.r1.complement(), 0.5);
    }

    /// Bisection on `f¹ + f² − 1`, independent of the closed-form root.
    fn criterion_root(xi: f64) -> f64 {
        let g = |chi: f64| fermi_factor(chi, xi) + fermi_factor(chi + 1.0, xi) - 1.0;
        let (mut lo, mut hi) = (-1.0, 0.0);
        assert!(g(lo) > 0.0 && g(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn total_occupation_crosses_one_at_magic_mean() {
        for xi in [0.05, 0.2, 0.5, 1.0, 3.0, 10.0] {
            let root = criterion_root(xi);
            assert!((root + 0.5).abs() < 1e-12, "xi={xi} root={root}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn fermi_particle_hole_symmetry(chi in -50.0f64..50.0, xi in 0.01f64..20.0) {
            let s = fermi_factor(chi, xi) + fermi_factor(-chi, xi);
            prop_assert!((s - 1.0).abs() <= 1e-15);
        }

        #[test]
        fn fermi_strictly_decreasing(a in -5.0f64..5.0, gap in 1e-3f64..2.0, xi in 0.1f64..10.0) {
            prop_assert!(fermi_factor(a, xi) > fermi_factor(a + gap, xi));
        }

        #[test]
        fn fermi_set_ordering(chi_l in -10.0f64..10.0, chi_r in -10.0f64..10.0,
                              xi_l in 1e-3f64..20.0, xi_r in 1e-3f64..20.0) {
            let fs = fermi_set(&ReducedParams::new(chi_l, chi_r, xi_l, xi_r).unwrap());
            for (f1, f2) in [(fs.l1, fs.l2), (fs.r1, fs.r2)] {
                prop_assert!(1.0 >= f1.value() && f1.value() >= f2.value() && f2.value() >= 0.0);
                prop_assert!(f1.complement() <= f2.complement());
            }
            prop_assert!((0.0..=2.0).contains(&fs.total(Lead::Left)));
        }

        #[test]
        fn total_occupation_is_one_only_at_magic_mean(chi in -4.0f64..3.0, xi in 0.05f64..10.0) {
            let total = fermi_factor(chi, xi) + fermi_factor(chi + 1.0, xi);
            // strictly decreasing in chi, so the sign of the deviation locates the root
            if chi < -0.5 - 1e-9 {
                prop_assert!(total > 1.0);
            } else if chi > -0.5 + 1e-9 {
                prop_assert!(total < 1.0);
            }
        }

        #[test]
        fn reduction_round_trips(eps_l in -5.0f64..5.0, eps_r in -5.0f64..5.0, u in 0.1f64..10.0,
                                 t_l in 0.01f64..10.0, t_r in 0.01f64..10.0,
                                 mu_l in -5.0f64..5.0, mu_r in -5.0f64..5.0) {
            let s = SystemParams::new(eps_l, eps_r, u, 1.0, 1.0).unwrap();
            let bl = BathParams::new(t_l, mu_l).unwrap();
            let br = BathParams::new(t_r, mu_r).unwrap();
            let rp = reduce_params(&s, &bl, &br).unwrap();
            let (bl2, br2) = rp.to_baths(&s);
            let scale = eps_l.abs().max(mu_l.abs()).max(eps_r.abs()).max(mu_r.abs()).max(u);
            prop_assert!((bl2.temperature - t_l).abs() <= 1e-14 * t_l);
            prop_assert!((br2.temperature - t_r).abs() <= 1e-14 * t_r);
            prop_assert!((bl2.mu - mu_l).abs() <= 1e-14 * scale);
            prop_assert!((br2.mu - mu_r).abs() <= 1e-14 * scale);
        }
    }
}
