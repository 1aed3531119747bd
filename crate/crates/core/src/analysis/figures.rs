//! Named presets that regenerate plot-ready data for the diode figures.
//!
//! Tunnelling rates, fixed barriers and the temperature pairs of each curve
//! are chosen presets. Every table records its full parameter set in the
//! metadata.

use serde_json::{json, Value};

use super::sweep::{sweep, Axis, AxisRange, Quantity, SweepSpec};
use crate::error::{Error, Result};
use crate::model::ReducedParams;
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureName {
    Fig3,
    Fig4a,
    Fig4bc,
    Fig5a,
    Fig5b,
    Fig5c,
}

pub const FIGURE_NAMES: [&str; 6] = ["fig3", "fig4a", "fig4bc", "fig5a", "fig5b", "fig5c"];

impl std::str::FromStr for FigureName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "fig3" => FigureName::Fig3,
            "fig4a" => FigureName::Fig4a,
            "fig4bc" => FigureName::Fig4bc,
            "fig5a" => FigureName::Fig5a,
            "fig5b" => FigureName::Fig5b,
            "fig5c" => FigureName::Fig5c,
            _ => {
                return Err(Error::Config(format!(
                    "unknown figure {s:?} (expected one of {})",
                    FIGURE_NAMES.join(", ")
                )))
            }
        })
    }
}

const GAMMA: f64 = 1.0;
const U: f64 = 1.0;

/// Build the table for one figure preset.
pub fn figure(name: FigureName) -> Result<Table> {
    let (label, table) = match name {
        FigureName::Fig3 => ("fig3", fig3()?),
        FigureName::Fig4a => ("fig4a", fig4a()?),
        FigureName::Fig4bc => ("fig4bc", fig4bc()?),
        FigureName::Fig5a => ("fig5a", fig5a()?),
        FigureName::Fig5b => ("fig5b", fig5b()?),
        FigureName::Fig5c => ("fig5c", fig5c()?),
    };
    Ok(table
        .with_meta("figure", label)
        .with_meta("provenance", "reconstructed preset parameters")
        .with_meta("gamma_L", GAMMA)
        .with_meta("gamma_R", GAMMA)
        .with_meta("U", U)
        .with_meta(
            "prefactor_convention",
            "J_R = U * gamma_L*gamma_R/(gamma_L+gamma_R) * (e^{1/xi_L} - e^{1/xi_R}) / X",
        )
        .with_meta("tool_version", env!("CARGO_PKG_VERSION"))
        .with_meta("schema_version", 1))
}

fn rp(chi_l: f64, chi_r: f64, xi_l: f64, xi_r: f64) -> Result<ReducedParams> {
    ReducedParams::new(chi_l, chi_r, xi_l, xi_r)
}

fn range(lo: f64, hi: f64, n: usize) -> AxisRange {
    AxisRange { lo, hi, n }
}

/// Fermi factors of one lead and their domain labels across the barrier axis.
fn fig3() -> Result<Table> {
    let xis = [0.05, 0.1, 0.25];
    let chi = range(-3.0, 2.0, 501);
    let mut table = Table::new(["xi", "chi", "f1", "f2", "f_total", "domain"]);
    for &xi in &xis {
        let spec = SweepSpec::new(rp(-0.5, -0.5, 0.2, xi)?, GAMMA, GAMMA, U, Quantity::Domain).axis(Axis::ChiR, chi);
        for row in sweep(&spec)?.rows {
            let mut cells = vec![Cell::Num(xi), Cell::Num(row.coords[0])];
            cells.extend(row.values);
            table.push(cells);
        }
    }
    Ok(table.with_meta(
        "parameters",
        json!({"xi": xis, "chi": [chi.lo, chi.hi, chi.n], "delta": super::DEFAULT_DOMAIN_DELTA}),
    ))
}

/// Current and its first two barrier derivatives through the magic mean.
fn fig4a() -> Result<Table> {
    let chi = range(-2.0, 1.0, 601);
    let spec = SweepSpec::new(rp(-0.5, -0.5, 0.2, 0.5)?, GAMMA, GAMMA, U, Quantity::J).axis(Axis::ChiR, chi);
    let res = sweep(&spec)?;
    let j = res.values("J").expect("J column");
    let h = (chi.hi - chi.lo) / (chi.n - 1) as f64;
    let (dj, d2j) = derivatives(&j, h);
    let mut table = Table::new(["chi_R", "J", "dJ", "d2J"]);
    for (i, row) in res.rows.iter().enumerate() {
        table.push(vec![row.coords[0].into(), j[i].into(), dj[i].into(), d2j[i].into()]);
    }
    Ok(table.with_meta(
        "parameters",
        json!({"chi_L": -0.5, "xi_L": 0.2, "xi_R": 0.5, "chi_R": [chi.lo, chi.hi, chi.n]}),
    ))
}

/// Central differences in the interior, second-order one-sided at the ends.
pub(crate) fn derivatives(y: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let mut d1 = vec![f64::NAN; n];
    let mut d2 = vec![f64::NAN; n];
    if n < 4 {
        return (d1, d2);
    }
    for i in 1..n - 1 {
        d1[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
        d2[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
    }
    d1[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    d1[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
    d2[0] = (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / (h * h);
    d2[n - 1] = (2.0 * y[n - 1] - 5.0 * y[n - 2] + 4.0 * y[n - 3] - y[n - 4]) / (h * h);
    (d1, d2)
}

/// |J| over both barriers for two temperature pairs.
fn fig4bc() -> Result<Table> {
    let pairs = [(0.2, 0.5), (0.5, 1.0)];
    let chi = range(-2.0, 1.0, 121);
    let mut table = Table::new(["xi_L", "xi_R", "chi_L", "chi_R", "absJ"]);
    for &(xl, xr) in &pairs {
        let spec = SweepSpec::new(rp(-0.5, -0.5, xl, xr)?, GAMMA, GAMMA, U, Quantity::AbsJ)
            .axis(Axis::ChiL, chi)
            .axis(Axis::ChiR, chi);
        for row in sweep(&spec)?.rows {
            table.push(vec![
                xl.into(),
                xr.into(),
                row.coords[0].into(),
                row.coords[1].into(),
                row.values[0].clone(),
            ]);
        }
    }
    Ok(table.with_meta(
        "parameters",
        json!({"xi_pairs": pairs, "chi_L": [chi.lo, chi.hi, chi.n], "chi_R": [chi.lo, chi.hi, chi.n]}),
    ))
}

/// Switching curves: scaled |J| against the cold barrier for several cold
/// temperatures. The cold bath is on the left.
fn fig5a() -> Result<Table> {
    let xi_colds = [0.02, 0.05, 0.1];
    let (chi_hot, xi_hot) = (-0.5, 0.5);
    let chi = range(-3.0, 2.0, 501);
    let mut table = Table::new(["xi_cold", "chi_cold", "absJ_scaled"]);
    for &xc in &xi_colds {
        let spec =
            SweepSpec::new(rp(-0.5, chi_hot, xc, xi_hot)?, GAMMA, GAMMA, U, Quantity::AbsJ).axis(Axis::ChiL, chi);
        for row in sweep(&spec)?.rows {
            let scaled = row.values[0].as_f64().unwrap_or(f64::NAN) / (GAMMA * U);
            table.push(vec![xc.into(), row.coords[0].into(), scaled.into()]);
        }
    }
    Ok(table.with_meta(
        "parameters",
        json!({"xi_cold": xi_colds, "chi_hot": chi_hot, "xi_hot": xi_hot,
               "chi_cold": [chi.lo, chi.hi, chi.n], "cold_lead": "L",
               "normalization": "|J|/(gamma*U)"}),
    ))
}

/// One rectification curve: cold bath on the left, `χ_hot − χ_cold = |Δχ|`.
struct Curve {
    name: &'static str,
    xi_cold: f64,
    xi_hot: f64,
    chi_bar: f64,
}

impl Curve {
    fn meta(&self) -> Value {
        json!({"curve": self.name, "xi_cold": self.xi_cold, "xi_hot": self.xi_hot, "chi_bar": self.chi_bar})
    }
}

pub(crate) const FIG5B_CURVES: [(&str, f64, f64, f64); 4] = [
    ("red", 0.2, 0.5, -0.5),
    ("purple", 0.2, 0.5, 1.0),
    ("green", 0.2, 0.5, 1.5),
    ("blue", 0.1, 0.5, 1.5),
];

pub(crate) const FIG5C_CURVES: [(&str, f64, f64, f64); 5] = [
    ("baseline", 0.2, 0.5, 1.5),
    ("cold_down", 0.1, 0.5, 1.5),
    ("cold_up", 0.3, 0.5, 1.5),
    ("hot_up", 0.2, 0.6, 1.5),
    ("hot_down", 0.2, 0.4, 1.5),
];

const DELTA_CHI: AxisRange = AxisRange {
    lo: 0.0,
    hi: 4.0,
    n: 201,
};

fn rectification_curves(curves: &[(&'static str, f64, f64, f64)]) -> Result<Table> {
    let mut table = Table::new([
        "curve",
        "xi_cold",
        "xi_hot",
        "chi_bar",
        "abs_delta_chi",
        "R",
        "J_forward",
        "J_reverse",
    ]);
    let mut meta = Vec::new();
    for &(name, xi_cold, xi_hot, chi_bar) in curves {
        let c = Curve {
            name,
            xi_cold,
            xi_hot,
            chi_bar,
        };
        let spec = SweepSpec::new(rp(chi_bar, chi_bar, c.xi_cold, c.xi_hot)?, GAMMA, GAMMA, U, Quantity::R)
            .axis(Axis::DeltaChi, DELTA_CHI);
        for row in sweep(&spec)?.rows {
            let mut cells = vec![
                Cell::from(c.name),
                c.xi_cold.into(),
                c.xi_hot.into(),
                c.chi_bar.into(),
                row.coords[0].into(),
            ];
            cells.extend(row.values);
            table.push(cells);
        }
        meta.push(c.meta());
    }
    Ok(table.with_meta(
        "parameters",
        json!({"curves": meta, "abs_delta_chi": [DELTA_CHI.lo, DELTA_CHI.hi, DELTA_CHI.n],
               "cold_lead": "L", "delta_chi": "chi_hot - chi_cold"}),
    ))
}

fn fig5b() -> Result<Table> {
    rectification_curves(&FIG5B_CURVES)
}

fn fig5c() -> Result<Table> {
    rectification_curves(&FIG5C_CURVES)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig4a_peaks_at_magic_mean() {
        let t = figure(FigureName::Fig4a).unwrap();
        assert_eq!(t.rows.len(), 601);
        let chi = t.column("chi_R").unwrap();
        let j = t.column("J").unwrap();
        let dj = t.column("dJ").unwrap();
        let d2j = t.column("d2J").unwrap();
        assert_eq!(chi[300], -0.5);
        let imax = (0..j.len()).max_by(|&a, &b| j[a].total_cmp(&j[b])).unwrap();
        assert_eq!(imax, 300);
        assert!(dj[299] > 0.0 && dj[301] < 0.0);
        assert!(d2j[300] < 0.0);
    }

    #[test]
    fn derivative_stencils_are_exact_on_quadratics() {
        let h = 0.1;
        let y: Vec<f64> = (0..6).map(|i| (i as f64 * h).powi(2)).collect();
        let (d1, d2) = derivatives(&y, h);
        for i in 0..6 {
            assert!((d1[i] - 2.0 * i as f64 * h).abs() < 1e-12);
            assert!((d2[i] - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn every_preset_builds_without_faults() {
        for name in FIGURE_NAMES {
            let t = figure(name.parse().unwrap()).unwrap();
            assert!(!t.rows.is_empty());
            assert_eq!(t.metadata["provenance"], "reconstructed preset parameters");
            for row in &t.rows {
                for c in row {
                    if let Cell::Num(x) = c {
                        assert!(x.is_finite(), "{name}");
                    }
                }
            }
        }
        assert!("fig9".parse::<FigureName>().is_err());
    }
}
