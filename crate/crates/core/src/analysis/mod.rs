//! Diode figures of merit built on the heat current, plus parameter sweeps.

mod figures;
mod sweep;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{fermi_factor, reduce_params, BathParams, ReducedParams, SystemParams};
use crate::transport::{heat_currents_closed_form, max_heat_current};

pub use figures::{figure, FigureName, FIGURE_NAMES};
pub use sweep::{sweep, Axis, AxisRange, Quantity, SweepResult, SweepRow, SweepSpec};

/// Forward and reverse heat-current magnitudes and the rectification factor
/// `R = |J_fwd − J_rev| / (J_fwd + J_rev)`.
///
/// Forward is the configuration with the hotter bath on the right; reverse
/// exchanges the two temperatures and nothing else. Both currents are the
/// magnitudes of the current into the cold bath, so `R ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RectificationResult {
    pub r: f64,
    pub j_forward: f64,
    pub j_reverse: f64,
}

pub fn rectification_factor(
    sys: &SystemParams,
    bath_l: &BathParams,
    bath_r: &BathParams,
) -> Result<RectificationResult> {
    let rp = reduce_params(sys, bath_l, bath_r)?;
    rectification_reduced(&rp, sys.gamma_l, sys.gamma_r, sys.u)
}

pub fn rectification_reduced(rp: &ReducedParams, gamma_l: f64, gamma_r: f64, u: f64) -> Result<RectificationResult> {
    if rp.xi_l == rp.xi_r {
        return Err(Error::UndefinedRectification);
    }
    let forward = if rp.xi_r > rp.xi_l { *rp } else { rp.swap_temperatures() };
    let j_forward = heat_currents_closed_form(&forward, gamma_l, gamma_r, u)?.j_r.abs();
    let j_reverse = heat_currents_closed_form(&forward.swap_temperatures(), gamma_l, gamma_r, u)?
        .j_r
        .abs();
    let total = j_forward + j_reverse;
    if total <= 1e-300 {
        return Err(Error::UndefinedRectification);
    }
    Ok(RectificationResult {
        r: (j_forward - j_reverse).abs() / total,
        j_forward,
        j_reverse,
    })
}

/// Regimes of a single barrier `χ`.
///
/// `D3` is the window `−1 ≤ χ ≤ 0` between the half-filling points of the
/// two Fermi factors. Outside it, `D1` (`D5`) has both factors saturated at
/// one (zero) to within the threshold, and `D2` (`D4`) is the unsaturated
/// shoulder below (above) the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Domain {
    D1,
    D2,
    D3,
    D4,
    D5,
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DomainLabel {
    pub domain: Domain,
    pub delta: f64,
}

pub const DEFAULT_DOMAIN_DELTA: f64 = 0.01;

pub fn classify_domain(chi: f64, xi: f64, delta: f64) -> Result<DomainLabel> {
    if !(delta > 0.0 && delta <= 0.25) {
        return Err(Error::domain("delta", delta, "must lie in (0, 0.25]"));
    }
    ReducedParams::new(chi, chi, xi, xi)?;
    let f1 = fermi_factor(chi, xi);
    let f2 = fermi_factor(chi + 1.0, xi);
    let domain = if (-1.0..=0.0).contains(&chi) {
        Domain::D3
    } else if f1 >= 1.0 - delta && f2 >= 1.0 - delta {
        Domain::D1
    } else if f1 <= delta && f2 <= delta {
        Domain::D5
    } else if chi < -1.0 {
        Domain::D2
    } else {
        Domain::D4
    };
    Ok(DomainLabel { domain, delta })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SwitchState {
    On,
    Off,
}

impl std::fmt::Display for SwitchState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SwitchState::On => "ON",
            SwitchState::Off => "OFF",
        })
    }
}

/// `|J|` relative to the peak current at the same temperatures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwitchReport {
    pub state: SwitchState,
    pub ratio: f64,
    /// Equal temperatures: no current anywhere, so the ratio is meaningless.
    pub degenerate: bool,
}

pub const DEFAULT_ON_THRESHOLD: f64 = 0.5;

pub fn switch_state(
    sys: &SystemParams,
    bath_l: &BathParams,
    bath_r: &BathParams,
    on_threshold: f64,
) -> Result<SwitchReport> {
    let rp = reduce_params(sys, bath_l, bath_r)?;
    switch_state_reduced(&rp, sys.gamma_l, sys.gamma_r, sys.u, on_threshold)
}

pub fn switch_state_reduced(
    rp: &ReducedParams,
    gamma_l: f64,
    gamma_r: f64,
    u: f64,
    on_threshold: f64,
) -> Result<SwitchReport> {
    if !(on_threshold > 0.0 && on_threshold < 1.0) {
        return Err(Error::domain("on_threshold", on_threshold, "must lie in (0, 1)"));
    }
    let peak = max_heat_current(rp.xi_l, rp.xi_r, gamma_l, gamma_r, u)?;
    if peak == 0.0 {
        return Ok(SwitchReport {
            state: SwitchState::Off,
            ratio: 0.0,
            degenerate: true,
        });
    }
    let j = heat_currents_closed_form(rp, gamma_l, gamma_r, u)?.j_r.abs();
    let ratio = j / peak;
    Ok(SwitchReport {
        state: if ratio >= on_threshold {
            SwitchState::On
        } else {
            SwitchState::Off
        },
        ratio,
        degenerate: false,
    })
}
