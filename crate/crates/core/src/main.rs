use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qdiode::analysis::{
    classify_domain, figure, rectification_reduced, sweep, switch_state_reduced, Axis, AxisRange, FigureName, Quantity,
    SweepSpec, DEFAULT_DOMAIN_DELTA, DEFAULT_ON_THRESHOLD,
};
use qdiode::io::{emit, Format, Params, RunConfig};
use qdiode::kinetics::{build_generator, evolve, relaxation_gap, Occupations};
use qdiode::model::{fermi_set, Lead};
use qdiode::table::{Cell, Table};
use qdiode::transport::{compare_routes, heat_currents_numeric, max_heat_current, optimal_barrier, solve_steady, Scan};
use qdiode::verify::{report_table, run_all, DEFAULT_SEED};
use qdiode::{Error, Result};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "qdiode",
    version,
    about = "Heat transport through a Coulomb-coupled double-dot thermal diode"
)]
struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long, global = true)]
    format: Option<Format>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override a parameter, e.g. `--set chi_l=0.3` (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Saturation threshold for domain labels
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Forward/reverse ratio above which the switch is ON
    #[arg(long, global = true)]
    on_threshold: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Steady-state occupations, net rates, cycle rate and heat currents
    Steady,
    /// Closed-form current against the rate-equation solution
    Current,
    /// Barrier that maximises |J| for one lead
    Optimum {
        /// L or R
        #[arg(long)]
        lead: Option<Lead>,
        /// Bracketing scan lo:hi:n
        #[arg(long, allow_hyphen_values = true)]
        scan: Option<String>,
    },
    /// Rectification factor and switch state
    Rectify,
    /// Grid sweep of one quantity
    Sweep(SweepArgs),
    /// Time evolution of the populations
    Dynamics {
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Initial populations p1,p2,p3,p4
        #[arg(long, value_delimiter = ',')]
        p0: Option<Vec<f64>>,
    },
    /// Randomised invariant and acceptance checks
    Verify,
    /// Plot-ready data for a named preset
    Figure {
        /// fig3, fig4a, fig4bc, fig5a, fig5b or fig5c
        name: FigureName,
    },
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// J, absJ, R, domain or switch
    #[arg(long)]
    quantity: Option<Quantity>,
    #[arg(long, allow_hyphen_values = true, value_name = "LO:HI:N")]
    chi_l: Option<AxisRange>,
    #[arg(long, allow_hyphen_values = true, value_name = "LO:HI:N")]
    chi_r: Option<AxisRange>,
    #[arg(long, allow_hyphen_values = true, value_name = "LO:HI:N")]
    xi_l: Option<AxisRange>,
    #[arg(long, allow_hyphen_values = true, value_name = "LO:HI:N")]
    xi_r: Option<AxisRange>,
    #[arg(long, allow_hyphen_values = true, value_name = "LO:HI:N")]
    delta_chi: Option<AxisRange>,
    #[arg(long, allow_hyphen_values = true, value_name = "LO:HI:N")]
    chi_bar: Option<AxisRange>,
    #[arg(long, allow_hyphen_values = true, value_name = "LO:HI:N")]
    delta_xi: Option<AxisRange>,
    /// Lead whose Fermi factors label the domain
    #[arg(long)]
    domain_lead: Option<Lead>,
}

impl SweepArgs {
    fn axes(&self) -> Vec<(Axis, AxisRange)> {
        [
            (Axis::ChiL, self.chi_l),
            (Axis::ChiR, self.chi_r),
            (Axis::XiL, self.xi_l),
            (Axis::XiR, self.xi_r),
            (Axis::DeltaChi, self.delta_chi),
            (Axis::ChiBar, self.chi_bar),
            (Axis::DeltaXi, self.delta_xi),
        ]
        .into_iter()
        .filter_map(|(a, r)| r.map(|r| (a, r)))
        .collect()
    }
}

/// Config file merged with command-line flags; flags win.
struct Run {
    config: RunConfig,
    params: Params,
    out: Option<PathBuf>,
    format: Format,
    seed: u64,
    delta: f64,
    on_threshold: f64,
}

impl Run {
    fn new(cli: &Cli) -> Result<Run> {
        let mut config = match &cli.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        for o in &cli.overrides {
            config.apply_override(o)?;
        }
        let params = config.params()?;
        let opts = &config.options;
        let out = cli.out.clone().or_else(|| opts.out.clone());
        let format = match (cli.format, &opts.format) {
            (Some(f), _) => f,
            (None, Some(f)) => f.parse()?,
            (None, None) => out.as_deref().and_then(Format::from_path).unwrap_or_default(),
        };
        let delta = cli.delta.or(opts.delta).unwrap_or(DEFAULT_DOMAIN_DELTA);
        let on_threshold = cli.on_threshold.or(opts.on_threshold).unwrap_or(DEFAULT_ON_THRESHOLD);
        Ok(Run {
            seed: cli.seed.or(opts.seed).unwrap_or(DEFAULT_SEED),
            config,
            params,
            out,
            format,
            delta,
            on_threshold,
        })
    }

    fn emit(&self, command: &str, table: Table) -> Result<()> {
        let table = table
            .with_meta("command", command)
            .with_meta("parameters", self.params.describe())
            .with_meta("tool_version", env!("CARGO_PKG_VERSION"))
            .with_meta("schema_version", SCHEMA_VERSION);
        emit(&table, self.out.as_deref(), self.format)
    }
}

fn steady(run: &Run) -> Result<Table> {
    let (rp, gl, gr, u) = run.params.reduced()?;
    let sol = solve_steady(&rp, gl, gr, u)?;
    // physical inputs go through the energy-weighted current as well
    let currents = match &run.params {
        Params::Physical { sys, bath_l, bath_r } => heat_currents_numeric(sys, bath_l, bath_r)?,
        Params::Reduced { .. } => sol.currents,
    };
    let p = sol.occupations.probabilities();
    let r = &sol.rates;
    let mut t = Table::new([
        "p1", "p2", "p3", "p4", "G12_L", "G24_R", "G43_L", "G31_R", "Gamma", "J_L", "J_R",
    ]);
    let mut row: Vec<Cell> = p.iter().map(|&x| Cell::Num(x)).collect();
    row.extend([r.g12_l(), r.g24_r(), r.g43_l(), r.g31_r()].map(Cell::Num));
    row.extend([currents.gamma, currents.j_l, currents.j_r].map(Cell::Num));
    t.push(row);
    Ok(t)
}

fn current(run: &Run) -> Result<Table> {
    let (rp, gl, gr, u) = run.params.reduced()?;
    let cmp = compare_routes(&rp, gl, gr, u)?;
    let peak = max_heat_current(rp.xi_l, rp.xi_r, gl, gr, u)?;
    let mut t = Table::new(["J_oracle", "J_closed_form", "relative_error", "J_max", "agreement"]);
    t.push(vec![
        Cell::Num(cmp.oracle.j_r),
        Cell::Num(cmp.closed_form.j_r),
        Cell::Num(cmp.relative_error),
        Cell::Num(peak),
        (if cmp.relative_error <= 1e-9 { "ok" } else { "degraded" }).into(),
    ]);
    Ok(t)
}

fn optimum(run: &Run, lead: Option<Lead>, scan: Option<&str>) -> Result<Table> {
    let (rp, gl, gr, u) = run.params.reduced()?;
    let opts = &run.config.options;
    let leads = match lead.map(Ok).or_else(|| opts.lead.as_deref().map(str::parse)) {
        Some(l) => vec![l?],
        None => vec![Lead::Left, Lead::Right],
    };
    let scan = match scan.or(opts.scan.as_deref()) {
        Some(s) => parse_scan(s)?,
        None => Scan::new(-2.0, 1.0, 301)?,
    };
    let mut t = Table::new(["lead", "chi_star", "J_max", "criterion_residual", "at_boundary"]);
    for lead in leads {
        let rep = optimal_barrier(lead, &rp, gl, gr, u, scan)?;
        t.push(vec![
            lead.to_string().into(),
            Cell::Num(rep.chi_star),
            Cell::Num(rep.j_max),
            Cell::Num(rep.criterion_residual),
            rep.at_boundary.into(),
        ]);
    }
    Ok(t)
}

fn parse_scan(s: &str) -> Result<Scan> {
    let r: AxisRange = s.parse()?;
    Scan::new(r.lo, r.hi, r.n)
}

fn rectify(run: &Run) -> Result<Table> {
    let (rp, gl, gr, u) = run.params.reduced()?;
    let rect = rectification_reduced(&rp, gl, gr, u)?;
    let sw = switch_state_reduced(&rp, gl, gr, u, run.on_threshold)?;
    let dl = classify_domain(rp.chi_l, rp.xi_l, run.delta)?;
    let dr = classify_domain(rp.chi_r, rp.xi_r, run.delta)?;
    let mut t = Table::new(["R", "J_forward", "J_reverse", "ratio", "state", "domain_L", "domain_R"]);
    t.push(vec![
        Cell::Num(rect.r),
        Cell::Num(rect.j_forward),
        Cell::Num(rect.j_reverse),
        Cell::Num(sw.ratio),
        sw.state.to_string().into(),
        dl.domain.to_string().into(),
        dr.domain.to_string().into(),
    ]);
    Ok(t)
}

fn sweep_cmd(run: &Run, args: &SweepArgs) -> Result<Table> {
    let (rp, gl, gr, u) = run.params.reduced()?;
    let section = run.config.sweep.as_ref();
    let quantity = match (args.quantity, section.and_then(|s| s.quantity.as_deref())) {
        (Some(q), _) => q,
        (None, Some(q)) => q.parse()?,
        (None, None) => Quantity::J,
    };
    let mut axes = args.axes();
    if axes.is_empty() {
        for entry in section.map(|s| s.axes.as_slice()).unwrap_or_default() {
            axes.push((entry.axis.parse()?, entry.range.parse()?));
        }
    }
    let mut spec = SweepSpec::new(rp, gl, gr, u, quantity);
    spec.delta = run.delta;
    spec.on_threshold = run.on_threshold;
    if let Some(lead) = args.domain_lead {
        spec.domain_lead = lead;
    }
    for (axis, range) in axes {
        spec = spec.axis(axis, range);
    }
    let result = sweep(&spec)?;
    if result.faults() > 0 {
        log::warn!("{} of {} sweep cells faulted", result.faults(), result.rows.len());
    }
    Ok(result.to_table().with_meta("seed", run.seed))
}

fn dynamics(run: &Run, t_final: Option<f64>, dt: Option<f64>, p0: Option<Vec<f64>>) -> Result<Table> {
    let (rp, gl, gr, _) = run.params.reduced()?;
    let opts = &run.config.options;
    let fs = fermi_set(&rp);
    let gen = build_generator(&fs, gl, gr)?;
    let p0 = match p0 {
        Some(v) => {
            let p: [f64; 4] = v
                .try_into()
                .map_err(|v: Vec<f64>| Error::Config(format!("p0 needs 4 populations, got {}", v.len())))?;
            Occupations::new(p)?
        }
        None => match opts.p0 {
            Some(p) => Occupations::new(p)?,
            None => Occupations::new([1.0, 0.0, 0.0, 0.0])?,
        },
    };
    // default horizon: thirty relaxation times
    let t_final = t_final
        .or(opts.t_final)
        .unwrap_or_else(|| 30.0 / relaxation_gap(&fs, gl, gr));
    let dt = dt.or(opts.dt).unwrap_or(0.05 / gen.max_exit_rate());
    let traj = evolve(&gen, &p0, t_final, dt)?;
    let mut t = Table::new(["t", "p1", "p2", "p3", "p4"])
        .with_meta("dt", dt)
        .with_meta("renormalizations", traj.renormalizations);
    for (time, p) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![Cell::Num(*time)];
        row.extend(p.iter().map(|&x| Cell::Num(x)));
        t.push(row);
    }
    Ok(t)
}

fn run(cli: Cli) -> Result<bool> {
    let run = Run::new(&cli)?;
    let (name, table) = match &cli.command {
        Command::Steady => ("steady", steady(&run)?),
        Command::Current => ("current", current(&run)?),
        Command::Optimum { lead, scan } => ("optimum", optimum(&run, *lead, scan.as_deref())?),
        Command::Rectify => ("rectify", rectify(&run)?),
        Command::Sweep(args) => ("sweep", sweep_cmd(&run, args)?),
        Command::Dynamics { t_final, dt, p0 } => ("dynamics", dynamics(&run, *t_final, *dt, p0.clone())?),
        Command::Verify => {
            let reports = run_all(run.seed);
            let failed = reports.iter().filter(|r| !r.passed).count();
            for r in &reports {
                eprintln!("{}", r.line());
            }
            let table = report_table(&reports).with_meta("seed", run.seed);
            run.emit("verify", table)?;
            return Ok(failed == 0);
        }
        Command::Figure { name } => {
            emit(&figure(*name)?, run.out.as_deref(), run.format)?;
            return Ok(true);
        }
    };
    run.emit(name, table)?;
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        // downstream closed the pipe (e.g. `| head`)
        Err(Error::Io { source, .. }) if source.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
