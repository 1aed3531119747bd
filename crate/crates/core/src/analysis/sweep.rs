use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify_domain, rectification_reduced, switch_state_reduced, DEFAULT_DOMAIN_DELTA, DEFAULT_ON_THRESHOLD};
use crate::error::{Error, Result};
use crate::model::{fermi_factor, Lead, ReducedParams};
use crate::table::{Cell, Table};
use crate::transport::heat_currents_closed_form;

/// Sweepable parameters. `delta_chi` and `chi_bar` are the difference and
/// mean of the two barriers with the right lead taken as hot:
/// `χ_R = χ̄ + Δχ/2`, `χ_L = χ̄ − Δχ/2`. `delta_xi` sets `ξ_R = ξ_L + Δξ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    ChiL,
    ChiR,
    XiL,
    XiR,
    DeltaChi,
    ChiBar,
    DeltaXi,
}

impl Axis {
    pub const ALL: [Axis; 7] = [
        Axis::ChiL,
        Axis::ChiR,
        Axis::XiL,
        Axis::XiR,
        Axis::DeltaChi,
        Axis::ChiBar,
        Axis::DeltaXi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::ChiL => "chi_L",
            Axis::ChiR => "chi_R",
            Axis::XiL => "xi_L",
            Axis::XiR => "xi_R",
            Axis::DeltaChi => "delta_chi",
            Axis::ChiBar => "chi_bar",
            Axis::DeltaXi => "delta_xi",
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        Axis::ALL
            .into_iter()
            .find(|a| a.name().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::Config(format!("unknown sweep axis {s:?}")))
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive; `n = 1` gives `lo`
/// alone and `n = 0` an empty axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl AxisRange {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Config(format!("range bounds must be finite, got {lo}:{hi}")));
        }
        Ok(AxisRange { lo, hi, n })
    }

    pub fn values(&self) -> Vec<f64> {
        match self.n {
            0 => vec![],
            1 => vec![self.lo],
            n => {
                let step = (self.hi - self.lo) / (n - 1) as f64;
                (0..n)
                    .map(|i| if i + 1 == n { self.hi } else { self.lo + i as f64 * step })
                    .collect()
            }
        }
    }
}

impl std::str::FromStr for AxisRange {
    type Err = Error;

    /// Parses `lo:hi:n`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Config(format!("range {s:?} is not of the form lo:hi:n"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo = parts[0].trim().parse().map_err(|_| bad())?;
        let hi = parts[1].trim().parse().map_err(|_| bad())?;
        let n = parts[2].trim().parse().map_err(|_| bad())?;
        AxisRange::new(lo, hi, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "J")]
    J,
    #[serde(rename = "absJ")]
    AbsJ,
    R,
    #[serde(rename = "domain")]
    Domain,
    #[serde(rename = "switch")]
    Switch,
}

impl Quantity {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Quantity::J => &["J"],
            Quantity::AbsJ => &["absJ"],
            Quantity::R => &["R", "J_forward", "J_reverse"],
            Quantity::Domain => &["f1", "f2", "f_total", "domain"],
            Quantity::Switch => &["ratio", "state"],
        }
    }
}

impl std::str::FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "J" | "j" => Ok(Quantity::J),
            "absJ" | "absj" | "abs_j" => Ok(Quantity::AbsJ),
            "R" | "r" => Ok(Quantity::R),
            "domain" => Ok(Quantity::Domain),
            "switch" => Ok(Quantity::Switch),
            _ => Err(Error::Config(format!(
                "unknown quantity {s:?} (expected J, absJ, R, domain or switch)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axes: Vec<(Axis, AxisRange)>,
    /// Values of every parameter not on a sweep axis.
    pub base: ReducedParams,
    pub gamma_l: f64,
    pub gamma_r: f64,
    pub u: f64,
    pub quantity: Quantity,
    /// Saturation threshold for the domain quantity.
    pub delta: f64,
    pub on_threshold: f64,
    /// Lead whose barrier the domain quantity classifies.
    pub domain_lead: Lead,
}

impl SweepSpec {
    pub fn new(base: ReducedParams, gamma_l: f64, gamma_r: f64, u: f64, quantity: Quantity) -> Self {
        SweepSpec {
            axes: Vec::new(),
            base,
            gamma_l,
            gamma_r,
            u,
            quantity,
            delta: DEFAULT_DOMAIN_DELTA,
            on_threshold: DEFAULT_ON_THRESHOLD,
            domain_lead: Lead::Right,
        }
    }

    pub fn axis(mut self, axis: Axis, range: AxisRange) -> Self {
        self.axes.push((axis, range));
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        let has = |a: Axis| self.axes.iter().any(|(x, _)| *x == a);
        for (i, (a, _)) in self.axes.iter().enumerate() {
            if self.axes[..i].iter().any(|(b, _)| b == a) {
                return Err(Error::Config(format!("sweep axis {} given twice", a.name())));
            }
        }
        if (has(Axis::DeltaChi) || has(Axis::ChiBar)) && (has(Axis::ChiL) || has(Axis::ChiR)) {
            return Err(Error::Config(
                "delta_chi/chi_bar axes cannot be combined with chi_L/chi_R axes".into(),
            ));
        }
        if has(Axis::DeltaXi) && has(Axis::XiR) {
            return Err(Error::Config("delta_xi axis cannot be combined with xi_R".into()));
        }
        Ok(())
    }

    /// Parameters at one grid point, axis values given in `self.axes` order.
    pub fn params_at(&self, coords: &[f64]) -> Result<ReducedParams> {
        let mut rp = self.base;
        let mut delta_chi = None;
        let mut chi_bar = None;
        let mut delta_xi = None;
        for ((axis, _), &v) in self.axes.iter().zip(coords) {
            match axis {
                Axis::ChiL => rp.chi_l = v,
                Axis::ChiR => rp.chi_r = v,
                Axis::XiL => rp.xi_l = v,
                Axis::XiR => rp.xi_r = v,
                Axis::DeltaChi => delta_chi = Some(v),
                Axis::ChiBar => chi_bar = Some(v),
                Axis::DeltaXi => delta_xi = Some(v),
            }
        }
        if delta_chi.is_some() || chi_bar.is_some() {
            let d = delta_chi.unwrap_or(self.base.chi_r - self.base.chi_l);
            let m = chi_bar.unwrap_or(0.5 * (self.base.chi_r + self.base.chi_l));
            rp.chi_r = m + 0.5 * d;
            rp.chi_l = m - 0.5 * d;
        }
        if let Some(d) = delta_xi {
            rp.xi_r = rp.xi_l + d;
        }
        rp.validate()?;
        Ok(rp)
    }

    fn evaluate(&self, rp: &ReducedParams) -> Result<Vec<Cell>> {
        let (gl, gr, u) = (self.gamma_l, self.gamma_r, self.u);
        Ok(match self.quantity {
            Quantity::J => vec![heat_currents_closed_form(rp, gl, gr, u)?.j_r.into()],
            Quantity::AbsJ => vec![heat_currents_closed_form(rp, gl, gr, u)?.j_r.abs().into()],
            Quantity::R => {
                let res = rectification_reduced(rp, gl, gr, u)?;
                vec![res.r.into(), res.j_forward.into(), res.j_reverse.into()]
            }
            Quantity::Domain => {
                let (chi, xi) = (rp.chi(self.domain_lead), rp.xi(self.domain_lead));
                let label = classify_domain(chi, xi, self.delta)?;
                let f1 = fermi_factor(chi, xi);
                let f2 = fermi_factor(chi + 1.0, xi);
                vec![f1.into(), f2.into(), (f1 + f2).into(), label.domain.to_string().into()]
            }
            Quantity::Switch => {
                let rep = switch_state_reduced(rp, gl, gr, u, self.on_threshold)?;
                vec![rep.ratio.into(), rep.state.to_string().into()]
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub coords: Vec<f64>,
    pub values: Vec<Cell>,
    /// Evaluation fault at this point; `values` are then placeholders.
    pub fault: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axes: Vec<(Axis, Vec<f64>)>,
    pub columns: Vec<String>,
    /// Row-major over the axes: the last axis varies fastest.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn faults(&self) -> usize {
        self.rows.iter().filter(|r| r.fault.is_some()).count()
    }

    /// Values of one quantity column, NaN at faulted points.
    pub fn values(&self, column: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == column)?;
        Some(
            self.rows
                .iter()
                .map(|r| r.values[i].as_f64().unwrap_or(f64::NAN))
                .collect(),
        )
    }

    /// Flatten into a table: axis columns, quantity columns, then `status`.
    pub fn to_table(&self) -> Table {
        let mut cols: Vec<String> = self.axes.iter().map(|(a, _)| a.name().to_owned()).collect();
        cols.extend(self.columns.iter().cloned());
        cols.push("status".into());
        let mut table = Table::new(cols);
        for row in &self.rows {
            let mut cells: Vec<Cell> = row.coords.iter().map(|&x| Cell::Num(x)).collect();
            cells.extend(row.values.iter().cloned());
            cells.push(match &row.fault {
                None => Cell::from("ok"),
                Some(msg) => Cell::from(format!("fault: {msg}")),
            });
            table.push(cells);
        }
        table
    }
}

/// Evaluate the requested quantity on every grid point.
///
/// Points are evaluated in parallel and assembled in grid order. A failing
/// point is recorded in its row and does not stop the sweep.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let axes: Vec<(Axis, Vec<f64>)> = spec.axes.iter().map(|(a, r)| (*a, r.values())).collect();
    let lens: Vec<usize> = axes.iter().map(|(_, v)| v.len()).collect();
    let total: usize = lens.iter().product();
    let columns: Vec<String> = spec.quantity.columns().iter().map(|s| s.to_string()).collect();

    let rows = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rem = flat;
            let mut coords = vec![0.0; axes.len()];
            for k in (0..axes.len()).rev() {
                coords[k] = axes[k].1[rem % lens[k]];
                rem /= lens[k];
            }
            match spec.params_at(&coords).and_then(|rp| spec.evaluate(&rp)) {
                Ok(values) => SweepRow {
                    coords,
                    values,
                    fault: None,
                },
                Err(e) => SweepRow {
                    coords,
                    values: spec.quantity.columns().iter().map(|_| Cell::Num(f64::NAN)).collect(),
                    fault: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(SweepResult { axes, columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ReducedParams {
        ReducedParams::new(-0.5, -0.5, 0.2, 0.5).unwrap()
    }

    #[test]
    fn grid_shape_and_order() {
        let spec = SweepSpec::new(base(), 1.0, 1.0, 1.0, Quantity::J)
            .axis(Axis::ChiL, AxisRange::new(-1.0, 0.0, 3).unwrap())
            .axis(Axis::ChiR, AxisRange::new(-2.0, 1.0, 4).unwrap());
        let res = sweep(&spec).unwrap();
        assert_eq!(res.rows.len(), 12);
        assert_eq!(res.rows[1].coords, vec![-1.0, -1.0]);
        assert_eq!(res.rows[4].coords, vec![-0.5, -2.0]);
        assert_eq!(res.faults(), 0);
        let t = res.to_table();
        assert_eq!(t.columns, vec!["chi_L", "chi_R", "J", "status"]);
    }

    #[test]
    fn empty_axis_gives_no_rows() {
        let spec = SweepSpec::new(base(), 1.0, 1.0, 1.0, Quantity::AbsJ)
            .axis(Axis::ChiR, AxisRange::new(0.0, 1.0, 0).unwrap());
        assert!(sweep(&spec).unwrap().rows.is_empty());
    }

    #[test]
    fn faults_are_recorded_in_band() {
        // xi_R = 0.2 + delta_xi goes negative for the first points
        let spec = SweepSpec::new(base(), 1.0, 1.0, 1.0, Quantity::J)
            .axis(Axis::DeltaXi, AxisRange::new(-0.5, 0.5, 5).unwrap());
        let res = sweep(&spec).unwrap();
        assert_eq!(res.faults(), 2);
        assert!(res.rows[0].fault.as_ref().unwrap().contains("xi_r"));
        assert!(res.rows[0].values[0].as_f64().unwrap().is_nan());
        // delta_xi = 0 has no gradient: J is zero but valid
        assert_eq!(res.rows[2].values[0], Cell::Num(0.0));

        let spec = SweepSpec::new(base(), 1.0, 1.0, 1.0, Quantity::R)
            .axis(Axis::DeltaXi, AxisRange::new(0.0, 0.3, 4).unwrap());
        let res = sweep(&spec).unwrap();
        assert_eq!(res.faults(), 1);
    }

    #[test]
    fn derived_axes_map_to_barriers() {
        let spec = SweepSpec::new(
            ReducedParams::new(1.0, 1.0, 0.2, 0.5).unwrap(),
            1.0,
            1.0,
            1.0,
            Quantity::R,
        )
        .axis(Axis::DeltaChi, AxisRange::new(0.0, 4.0, 5).unwrap());
        let rp = spec.params_at(&[2.0]).unwrap();
        assert_eq!((rp.chi_l, rp.chi_r), (0.0, 2.0));
        let res = sweep(&spec).unwrap();
        assert!(res.values("R").unwrap()[0] <= 1e-10);

        let spec = SweepSpec::new(base(), 1.0, 1.0, 1.0, Quantity::R)
            .axis(Axis::DeltaChi, AxisRange::new(0.0, 4.0, 41).unwrap());
        for r in sweep(&spec).unwrap().values("R").unwrap() {
            assert!(r <= 1e-10);
        }
    }

    #[test]
    fn rejects_conflicting_axes() {
        let r = AxisRange::new(0.0, 1.0, 2).unwrap();
        let spec = SweepSpec::new(base(), 1.0, 1.0, 1.0, Quantity::J)
            .axis(Axis::ChiL, r)
            .axis(Axis::ChiBar, r);
        assert!(matches!(sweep(&spec), Err(Error::Config(_))));
        let spec = SweepSpec::new(base(), 1.0, 1.0, 1.0, Quantity::J)
            .axis(Axis::ChiL, r)
            .axis(Axis::ChiL, r);
        assert!(sweep(&spec).is_err());
    }

    #[test]
    fn parses_ranges_and_names() {
        let r: AxisRange = "-2:1:601".parse().unwrap();
        assert_eq!((r.lo, r.hi, r.n), (-2.0, 1.0, 601));
        assert_eq!(r.values()[300], -0.5);
        assert!("1:2".parse::<AxisRange>().is_err());
        assert!("a:2:3".parse::<AxisRange>().is_err());
        assert_eq!("chi-r".parse::<Axis>().unwrap(), Axis::ChiR);
        assert_eq!("delta_xi".parse::<Axis>().unwrap(), Axis::DeltaXi);
        assert_eq!("absJ".parse::<Quantity>().unwrap(), Quantity::AbsJ);
    }

    #[test]
    fn switch_and_domain_quantities() {
        let spec = SweepSpec::new(
            ReducedParams::new(-0.5, -0.5, 0.05, 0.5).unwrap(),
            1.0,
            1.0,
            1.0,
            Quantity::Switch,
        )
        .axis(Axis::ChiL, AxisRange::new(-0.5, 3.0, 2).unwrap());
        let t = sweep(&spec).unwrap().to_table();
        assert!((t.rows[0][1].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(t.rows[0][2], Cell::from("ON"));
        assert_eq!(t.rows[1][2], Cell::from("OFF"));

        let spec = SweepSpec::new(base(), 1.0, 1.0, 1.0, Quantity::Domain)
            .axis(Axis::ChiR, AxisRange::new(-0.5, -0.5, 1).unwrap());
        let res = sweep(&spec).unwrap();
        assert_eq!(res.values("f_total").unwrap()[0], 1.0);
        assert_eq!(res.rows[0].values[3], Cell::from("D3"));
    }
}
