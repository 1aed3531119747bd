use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::{reduce_params, BathParams, ReducedParams, SystemParams};

/// Device and bath parameters in physical units.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSection {
    pub eps_l: Option<f64>,
    pub eps_r: Option<f64>,
    pub u: Option<f64>,
    pub gamma_l: Option<f64>,
    pub gamma_r: Option<f64>,
    pub t_l: Option<f64>,
    pub t_r: Option<f64>,
    pub mu_l: Option<f64>,
    pub mu_r: Option<f64>,
}

/// Dimensionless barriers and temperatures plus rates and coupling.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedSection {
    pub chi_l: Option<f64>,
    pub chi_r: Option<f64>,
    pub xi_l: Option<f64>,
    pub xi_r: Option<f64>,
    pub gamma_l: Option<f64>,
    pub gamma_r: Option<f64>,
    pub u: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    pub seed: Option<u64>,
    pub delta: Option<f64>,
    pub on_threshold: Option<f64>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    pub lead: Option<String>,
    /// Barrier scan for the optimum search, `lo:hi:n`.
    pub scan: Option<String>,
    pub t_final: Option<f64>,
    pub dt: Option<f64>,
    pub p0: Option<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisEntry {
    pub axis: String,
    /// `lo:hi:n`
    pub range: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub quantity: Option<String>,
    #[serde(default)]
    pub axes: Vec<AxisEntry>,
}

/// Contents of a run configuration file.
///
/// Parameters come in exactly one of two styles, `[physical]` or `[reduced]`.
/// Command-line overrides are applied on top with [`RunConfig::apply_override`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub physical: Option<PhysicalSection>,
    pub reduced: Option<ReducedSection>,
    #[serde(default)]
    pub options: Options,
    pub sweep: Option<SweepSection>,
}

/// Parameters resolved and validated from a [`RunConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Params {
    Physical {
        sys: SystemParams,
        bath_l: BathParams,
        bath_r: BathParams,
    },
    Reduced {
        rp: ReducedParams,
        gamma_l: f64,
        gamma_r: f64,
        u: f64,
    },
}

/// Used when a run specifies no parameters at all: both barriers on the
/// magic mean, cold left bath at ξ = 0.2, hot right bath at ξ = 0.5.
pub const DEFAULT_REDUCED: (f64, f64, f64, f64) = (-0.5, -0.5, 0.2, 0.5);

impl Params {
    /// `(rp, γ_L, γ_R, U)`.
    pub fn reduced(&self) -> Result<(ReducedParams, f64, f64, f64)> {
        match self {
            Params::Physical { sys, bath_l, bath_r } => {
                Ok((reduce_params(sys, bath_l, bath_r)?, sys.gamma_l, sys.gamma_r, sys.u))
            }
            Params::Reduced {
                rp,
                gamma_l,
                gamma_r,
                u,
            } => Ok((*rp, *gamma_l, *gamma_r, *u)),
        }
    }

    /// Physical parameters; a reduced configuration is realised with both dot
    /// energies at zero.
    pub fn physical(&self) -> Result<(SystemParams, BathParams, BathParams)> {
        match self {
            Params::Physical { sys, bath_l, bath_r } => Ok((*sys, *bath_l, *bath_r)),
            Params::Reduced {
                rp,
                gamma_l,
                gamma_r,
                u,
            } => {
                let sys = SystemParams::new(0.0, 0.0, *u, *gamma_l, *gamma_r)?;
                let (bl, br) = rp.to_baths(&sys);
                Ok((sys, bl, br))
            }
        }
    }

    /// Parameter block recorded in output metadata.
    pub fn describe(&self) -> Value {
        match self {
            Params::Physical { sys, bath_l, bath_r } => json!({
                "style": "physical",
                "eps_L": sys.eps_l, "eps_R": sys.eps_r, "U": sys.u,
                "gamma_L": sys.gamma_l, "gamma_R": sys.gamma_r,
                "T_L": bath_l.temperature, "T_R": bath_r.temperature,
                "mu_L": bath_l.mu, "mu_R": bath_r.mu,
            }),
            Params::Reduced {
                rp,
                gamma_l,
                gamma_r,
                u,
            } => json!({
                "style": "reduced",
                "chi_L": rp.chi_l, "chi_R": rp.chi_r, "xi_L": rp.xi_l, "xi_R": rp.xi_r,
                "gamma_L": gamma_l, "gamma_R": gamma_r, "U": u,
            }),
        }
    }
}

const REDUCED_ONLY: [&str; 4] = ["chi_l", "chi_r", "xi_l", "xi_r"];
const PHYSICAL_ONLY: [&str; 6] = ["eps_l", "eps_r", "t_l", "t_r", "mu_l", "mu_r"];
const SHARED: [&str; 3] = ["gamma_l", "gamma_r", "u"];

fn require(section: &'static str, field: &'static str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::Config(format!("missing parameter {section}.{field}")))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Apply one `key=value` parameter override. Style-specific keys create
    /// their section if needed; shared keys go to whichever section is present.
    /// A reduced-style override on a config without parameters starts from
    /// the default operating point.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
        let key = key.trim().to_ascii_lowercase();
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("override {key}: {value:?} is not a number")))?;
        let to_physical = PHYSICAL_ONLY.contains(&key.as_str())
            || (SHARED.contains(&key.as_str()) && self.physical.is_some() && self.reduced.is_none());
        if to_physical {
            let p = self.physical.get_or_insert_with(Default::default);
            let slot = match key.as_str() {
                "eps_l" => &mut p.eps_l,
                "eps_r" => &mut p.eps_r,
                "t_l" => &mut p.t_l,
                "t_r" => &mut p.t_r,
                "mu_l" => &mut p.mu_l,
                "mu_r" => &mut p.mu_r,
                "gamma_l" => &mut p.gamma_l,
                "gamma_r" => &mut p.gamma_r,
                _ => &mut p.u,
            };
            *slot = Some(value);
        } else if REDUCED_ONLY.contains(&key.as_str()) || SHARED.contains(&key.as_str()) {
            if self.reduced.is_none() && self.physical.is_none() {
                let (cl, cr, xl, xr) = DEFAULT_REDUCED;
                self.reduced = Some(ReducedSection {
                    chi_l: Some(cl),
                    chi_r: Some(cr),
                    xi_l: Some(xl),
                    xi_r: Some(xr),
                    ..Default::default()
                });
            }
            let r = self.reduced.get_or_insert_with(Default::default);
            let slot = match key.as_str() {
                "chi_l" => &mut r.chi_l,
                "chi_r" => &mut r.chi_r,
                "xi_l" => &mut r.xi_l,
                "xi_r" => &mut r.xi_r,
                "gamma_l" => &mut r.gamma_l,
                "gamma_r" => &mut r.gamma_r,
                _ => &mut r.u,
            };
            *slot = Some(value);
        } else {
            return Err(Error::Config(format!("unknown parameter {key:?}")));
        }
        Ok(())
    }

    /// Validate and resolve the parameter block.
    pub fn params(&self) -> Result<Params> {
        match (&self.physical, &self.reduced) {
            (Some(_), Some(_)) => Err(Error::Config(
                "give parameters either as [physical] or as [reduced], not both".into(),
            )),
            (Some(p), None) => {
                let s = "physical";
                let sys = SystemParams::new(
                    require(s, "eps_l", p.eps_l)?,
                    require(s, "eps_r", p.eps_r)?,
                    require(s, "u", p.u)?,
                    p.gamma_l.unwrap_or(1.0),
                    p.gamma_r.unwrap_or(1.0),
                )?;
                let bath_l = BathParams {
                    temperature: require(s, "t_l", p.t_l)?,
                    mu: require(s, "mu_l", p.mu_l)?,
                };
                let bath_r = BathParams {
                    temperature: require(s, "t_r", p.t_r)?,
                    mu: require(s, "mu_r", p.mu_r)?,
                };
                // names the offending side
                reduce_params(&sys, &bath_l, &bath_r)?;
                Ok(Params::Physical { sys, bath_l, bath_r })
            }
            (None, Some(r)) => {
                let s = "reduced";
                let rp = ReducedParams::new(
                    require(s, "chi_l", r.chi_l)?,
                    require(s, "chi_r", r.chi_r)?,
                    require(s, "xi_l", r.xi_l)?,
                    require(s, "xi_r", r.xi_r)?,
                )?;
                let sys = SystemParams::new(
                    0.0,
                    0.0,
                    r.u.unwrap_or(1.0),
                    r.gamma_l.unwrap_or(1.0),
                    r.gamma_r.unwrap_or(1.0),
                )?;
                Ok(Params::Reduced {
                    rp,
                    gamma_l: sys.gamma_l,
                    gamma_r: sys.gamma_r,
                    u: sys.u,
                })
            }
            (None, None) => {
                let (cl, cr, xl, xr) = DEFAULT_REDUCED;
                Ok(Params::Reduced {
                    rp: ReducedParams::new(cl, cr, xl, xr)?,
                    gamma_l: 1.0,
                    gamma_r: 1.0,
                    u: 1.0,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_style_with_defaults() {
        let cfg = RunConfig::from_toml("[reduced]\nchi_l = -0.5\nchi_r = 0.3\nxi_l = 0.2\nxi_r = 0.5\n").unwrap();
        let (rp, gl, gr, u) = cfg.params().unwrap().reduced().unwrap();
        assert_eq!((rp.chi_r, gl, gr, u), (0.3, 1.0, 1.0, 1.0));
    }

    #[test]
    fn physical_style_reduces() {
        let text = "[physical]\neps_l = 1.0\neps_r = 2.0\nu = 1.0\nt_l = 0.5\nt_r = 0.7\nmu_l = 1.5\nmu_r = 2.0\n\n[options]\nseed = 7\n";
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg.options.seed, Some(7));
        let (rp, ..) = cfg.params().unwrap().reduced().unwrap();
        assert_eq!((rp.chi_l, rp.xi_l, rp.chi_r), (-0.5, 0.5, 0.0));
    }

    #[test]
    fn both_styles_rejected() {
        let text = "[physical]\neps_l = 1.0\n[reduced]\nchi_l = 0.0\n";
        let err = RunConfig::from_toml(text).unwrap().params().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let mut cfg = RunConfig::from_toml("[physical]\neps_l = 1.0\n").unwrap();
        cfg.apply_override("xi_l=0.3").unwrap();
        assert!(cfg.params().is_err());
    }

    #[test]
    fn overrides_win_over_file_values() {
        let mut cfg =
            RunConfig::from_toml("[reduced]\nchi_l = -0.5\nchi_r = 0.3\nxi_l = 0.2\nxi_r = 0.5\ngamma_l = 2.0\n")
                .unwrap();
        cfg.apply_override("chi_r=-1.25").unwrap();
        cfg.apply_override("gamma_l = 3").unwrap();
        let (rp, gl, ..) = cfg.params().unwrap().reduced().unwrap();
        assert_eq!((rp.chi_r, gl), (-1.25, 3.0));
        assert!(cfg.apply_override("nope=1").is_err());
        assert!(cfg.apply_override("chi_l").is_err());
        assert!(cfg.apply_override("chi_l=abc").is_err());
    }

    #[test]
    fn overrides_without_config_start_from_default_point() {
        let mut cfg = RunConfig::default();
        cfg.apply_override("chi_r=3").unwrap();
        let (rp, gl, gr, u) = cfg.params().unwrap().reduced().unwrap();
        assert_eq!((rp.chi_l, rp.chi_r, rp.xi_l, rp.xi_r), (-0.5, 3.0, 0.2, 0.5));
        assert_eq!((gl, gr, u), (1.0, 1.0, 1.0));
    }

    #[test]
    fn errors_name_the_field() {
        let err = RunConfig::from_toml("[reduced]\nchi_l = 0\nchi_r = 0\nxi_l = -1\nxi_r = 1\n")
            .unwrap()
            .params()
            .unwrap_err();
        assert!(err.to_string().contains("xi_l"), "{err}");
        let err = RunConfig::from_toml("[reduced]\nchi_l = 0\nchi_r = 0\nxi_l = 1\n")
            .unwrap()
            .params()
            .unwrap_err();
        assert!(err.to_string().contains("reduced.xi_r"));
        let text = "[physical]\neps_l = 1.0\neps_r = 2.0\nu = 1.0\nt_l = 0.5\nt_r = -0.7\nmu_l = 1.5\nmu_r = 2.0\n";
        let err = RunConfig::from_toml(text).unwrap().params().unwrap_err();
        assert!(err.to_string().contains("T_R"), "{err}");
        assert!(RunConfig::from_toml("[reduced]\nchi = 1\n").is_err());
    }

    #[test]
    fn empty_config_uses_default_point() {
        let p = RunConfig::default().params().unwrap();
        let (rp, ..) = p.reduced().unwrap();
        assert_eq!((rp.chi_l, rp.xi_r), (-0.5, 0.5));
        let (sys, bl, br) = p.physical().unwrap();
        let back = reduce_params(&sys, &bl, &br).unwrap();
        assert_eq!(back, rp);
    }

    #[test]
    fn sweep_section_parses() {
        let text = "[sweep]\nquantity = \"absJ\"\n[[sweep.axes]]\naxis = \"chi_l\"\nrange = \"-2:1:5\"\n";
        let cfg = RunConfig::from_toml(text).unwrap();
        let s = cfg.sweep.unwrap();
        assert_eq!(s.axes[0].range, "-2:1:5");
    }
}
