//! Randomised verification of the model's invariants.
//!
//! [`acceptance_suite`] runs the ten acceptance checks; [`property_suite`]
//! covers the remaining model invariants. Every check reports its worst-case residual against its tolerance.
//! Draws come from a ChaCha stream seeded per check, so a given seed always
//! reproduces the same report.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{classify_domain, figure, rectification_reduced, switch_state_reduced, Domain, FigureName};
use crate::error::Result;
use crate::kinetics::{
    build_generator, evolve, relaxation_gap, steady_state, steady_state_dense, Occupations, NUM_STATES,
};
use crate::model::{fermi_factor, fermi_set, FermiFactor, Lead, ReducedParams};
use crate::table::{Cell, Table};
use crate::transport::{
    compare_routes, gamma_closed_form, heat_currents_closed_form, heat_currents_oracle, max_heat_current,
    optimal_barrier, rate_prefactor, relative_difference, solve_steady, Scan,
};

pub const DEFAULT_SEED: u64 = 20240601;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub id: String,
    pub name: String,
    pub passed: bool,
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckReport {
    fn new(id: &str, name: &str, worst: f64, tolerance: f64, passed: bool, detail: String) -> Self {
        CheckReport {
            id: id.to_owned(),
            name: name.to_owned(),
            passed,
            worst,
            tolerance,
            detail,
        }
    }

    /// Pass when `worst ≤ tolerance` and no draw failed to evaluate.
    fn bounded(id: &str, name: &str, worst: Result<f64>, tolerance: f64, detail: String) -> Self {
        match worst {
            Ok(w) => CheckReport::new(id, name, w, tolerance, w <= tolerance, detail),
            Err(e) => CheckReport::new(id, name, f64::NAN, tolerance, false, format!("{detail}; error: {e}")),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {:<5} {:<44} worst={:.3e} tol={:.1e}  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.worst,
            self.tolerance,
            self.detail
        )
    }
}

pub fn report_table(reports: &[CheckReport]) -> Table {
    let mut t = Table::new(["id", "name", "status", "worst", "tolerance", "detail"]);
    for r in reports {
        t.push(vec![
            r.id.as_str().into(),
            r.name.as_str().into(),
            (if r.passed { "pass" } else { "fail" }).into(),
            Cell::Num(r.worst),
            Cell::Num(r.tolerance),
            r.detail.as_str().into(),
        ]);
    }
    t
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A random operating point.
#[derive(Debug, Clone, Copy)]
struct Draw {
    rp: ReducedParams,
    gl: f64,
    gr: f64,
    u: f64,
}

#[derive(Debug, Clone, Copy)]
struct BoxSpec {
    chi: (f64, f64),
    xi: (f64, f64),
    gamma: (f64, f64),
    u: (f64, f64),
}

/// The randomisation box of the oracle-equivalence criterion.
const FULL_BOX: BoxSpec = BoxSpec {
    chi: (-5.0, 4.0),
    xi: (0.05, 10.0),
    gamma: (0.1, 10.0),
    u: (0.1, 10.0),
};

/// Net-rate equality is checked on this narrower box; see [`acceptance_suite`].
pub const RATE_EQUALITY_CHI: (f64, f64) = (-3.0, 2.0);
pub const RATE_EQUALITY_XI: (f64, f64) = (0.1, 10.0);

const RATE_BOX: BoxSpec = BoxSpec {
    chi: RATE_EQUALITY_CHI,
    xi: RATE_EQUALITY_XI,
    gamma: (0.1, 10.0),
    u: (0.1, 10.0),
};

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    rng.gen_range(lo..hi)
}

fn draw(rng: &mut ChaCha8Rng, b: BoxSpec) -> Draw {
    let rp = ReducedParams {
        chi_l: uniform(rng, b.chi),
        chi_r: uniform(rng, b.chi),
        xi_l: uniform(rng, b.xi),
        xi_r: uniform(rng, b.xi),
    };
    Draw {
        rp,
        gl: uniform(rng, b.gamma),
        gr: uniform(rng, b.gamma),
        u: uniform(rng, b.u),
    }
}

fn draws(seed: u64, stream: u64, n: usize, b: BoxSpec) -> Vec<Draw> {
    let mut rng = rng_for(seed, stream);
    (0..n).map(|_| draw(&mut rng, b)).collect()
}

/// Largest value of `f` over all draws; the first failing draw in draw order
/// aborts with its error.
fn worst_of<T: Sync>(items: &[T], f: impl Fn(&T) -> Result<f64> + Sync) -> Result<f64> {
    let vals: Vec<Result<f64>> = items.par_iter().map(&f).collect();
    let mut worst = 0.0f64;
    for v in vals {
        let v = v?;
        worst = if v.is_nan() { f64::NAN } else { worst.max(v) };
        if worst.is_nan() {
            break;
        }
    }
    Ok(worst)
}

const DRAWS: usize = 10_000;

/// The ten acceptance checks, in order.
///
/// Net-rate equality (criterion 3) is evaluated on `χ ∈ [−3, 2]`,
/// `ξ ∈ [0.1, 10]`. Each net rate is a difference of gross flows; at the
/// corners of the wider box the gross flow through some transition exceeds
/// the cycle rate by more than thirty decades, so no fixed-precision
/// evaluation of that difference can meet a relative tolerance of 1e-10.
pub fn acceptance_suite(seed: u64) -> Vec<CheckReport> {
    vec![
        criterion_oracle_equivalence(seed),
        criterion_magic_mean(seed),
        criterion_net_rates(seed),
        criterion_conservation(seed),
        criterion_mirror(seed),
        criterion_peak_formula(seed),
        criterion_rectification(seed),
        criterion_fig4a(),
        criterion_dynamics(seed),
        criterion_detailed_balance(seed),
    ]
}

pub fn criterion_oracle_equivalence(seed: u64) -> CheckReport {
    let start = Instant::now();
    let ds = draws(seed, 1, DRAWS, FULL_BOX);
    let worst = worst_of(&ds, |d| Ok(compare_routes(&d.rp, d.gl, d.gr, d.u)?.relative_error));
    let secs = start.elapsed().as_secs_f64();
    let mut rep = CheckReport::bounded(
        "C1",
        "closed form vs rate-equation current",
        worst,
        1e-9,
        format!("{DRAWS} draws in {secs:.2} s"),
    );
    if secs >= 10.0 {
        rep.passed = false;
        rep.detail.push_str(" (exceeds 10 s budget)");
    }
    rep
}

pub fn criterion_magic_mean(seed: u64) -> CheckReport {
    let mut rng = rng_for(seed, 2);
    let settings: Vec<Draw> = (0..20).map(|_| draw(&mut rng, FULL_BOX)).collect();
    let scan = Scan {
        lo: -2.0,
        hi: 1.0,
        n: 301,
    };
    let results: Vec<Result<(f64, f64, bool)>> = settings
        .par_iter()
        .flat_map_iter(|d| {
            [Lead::Left, Lead::Right].map(|lead| {
                let rep = optimal_barrier(lead, &d.rp, d.gl, d.gr, d.u, scan)?;
                Ok(((rep.chi_star + 0.5).abs(), rep.criterion_residual, rep.at_boundary))
            })
        })
        .collect();
    let mut loc = 0.0f64;
    let mut res = 0.0f64;
    let mut boundary = false;
    for r in results {
        match r {
            Ok((l, c, b)) => {
                loc = loc.max(l);
                res = res.max(c);
                boundary |= b;
            }
            Err(e) => return CheckReport::new("C2", "magic mean universality", f64::NAN, 1e-6, false, e.to_string()),
        }
    }
    CheckReport::new(
        "C2",
        "magic mean universality",
        loc,
        1e-6,
        loc <= 1e-6 && res <= 1e-8 && !boundary,
        format!("20 settings x 2 leads; worst |f1+f2-1| = {res:.2e} (tol 1e-8)"),
    )
}

pub fn criterion_net_rates(seed: u64) -> CheckReport {
    let ds = draws(seed, 3, DRAWS, RATE_BOX);
    let spreads = worst_of(&ds, |d| {
        let sol = solve_steady(&d.rp, d.gl, d.gr, d.u)?;
        Ok(sol.rates.spread() / sol.currents.gamma.abs())
    });
    let residual = worst_of(&ds, |d| {
        let gen = build_generator(&fermi_set(&d.rp), d.gl, d.gr)?;
        let p = steady_state(&gen)?;
        Ok(gen.residual(&p) / gen.norm())
    });
    let detail = match &residual {
        Ok(r) => format!("{DRAWS} draws, chi in [-3,2], xi in [0.1,10]; worst residual/norm = {r:.2e} (tol 1e-12)"),
        Err(e) => format!("residual check failed: {e}"),
    };
    let res_ok = matches!(residual, Ok(r) if r <= 1e-12);
    let mut rep = CheckReport::bounded("C3", "net-rate equality and stationarity", spreads, 1e-10, detail);
    rep.passed &= res_ok;
    rep
}

pub fn criterion_conservation(seed: u64) -> CheckReport {
    let ds = draws(seed, 4, DRAWS, FULL_BOX);
    let sums = worst_of(&ds, |d| {
        let j = heat_currents_oracle(&d.rp, d.gl, d.gr, d.u)?;
        Ok((j.j_l + j.j_r).abs() / j.j_r.abs().max(f64::MIN_POSITIVE))
    });
    let sign_failures: Result<usize> = ds
        .par_iter()
        .map(|d| {
            let expect = (d.rp.xi_r - d.rp.xi_l).signum();
            let o = heat_currents_oracle(&d.rp, d.gl, d.gr, d.u)?.j_r;
            let c = heat_currents_closed_form(&d.rp, d.gl, d.gr, d.u)?.j_r;
            Ok(usize::from(
                o.signum() != expect || c.signum() != expect || o == 0.0 || c == 0.0,
            ))
        })
        .sum();
    let equal: Vec<Draw> = draws(seed, 5, 1000, FULL_BOX)
        .into_iter()
        .map(|mut d| {
            d.rp.xi_r = d.rp.xi_l;
            d
        })
        .collect();
    let zero_bias = worst_of(&equal, |d| {
        let scale = d.u * d.gl.min(d.gr);
        let o = heat_currents_oracle(&d.rp, d.gl, d.gr, d.u)?.j_r.abs();
        let c = heat_currents_closed_form(&d.rp, d.gl, d.gr, d.u)?.j_r.abs();
        Ok(o.max(c) / scale)
    });
    let (sign_failures, zero_bias) = match (sign_failures, zero_bias) {
        (Ok(s), Ok(z)) => (s, z),
        (Err(e), _) | (_, Err(e)) => {
            return CheckReport::new(
                "C4",
                "conservation and sign laws",
                f64::NAN,
                1e-12,
                false,
                e.to_string(),
            )
        }
    };
    let mut rep = CheckReport::bounded(
        "C4",
        "conservation and sign laws",
        sums.map(|s| s.max(zero_bias)),
        1e-12,
        format!("{DRAWS} draws, {sign_failures} sign violations; equal-temperature |J|/(U*min gamma) = {zero_bias:.2e} over 1000 draws"),
    );
    rep.passed &= sign_failures == 0;
    rep
}

pub fn criterion_mirror(seed: u64) -> CheckReport {
    let ds = draws(seed, 6, DRAWS, FULL_BOX);
    let worst = worst_of(&ds, |d| {
        let base = heat_currents_closed_form(&d.rp, d.gl, d.gr, d.u)?.j_r;
        let mut w = 0.0f64;
        for lead in [Lead::Left, Lead::Right] {
            let m = d.rp.with_chi(lead, -1.0 - d.rp.chi(lead));
            let mirrored = heat_currents_closed_form(&m, d.gl, d.gr, d.u)?.j_r;
            w = w.max(relative_difference(base, mirrored));
        }
        Ok(w)
    });
    CheckReport::bounded(
        "C5",
        "mirror symmetry about chi = -1/2",
        worst,
        1e-12,
        format!("{DRAWS} draws, both leads"),
    )
}

/// Brute-force maximum of |J| over a square barrier grid.
///
/// The current is `(e^{1/ξ_L} − e^{1/ξ_R}) / X` up to constant factors, and
/// `X = K₀(χ_L) + K₊(χ_L) e^{χ_R/ξ_R} + K₋(χ_L) e^{−χ_R/ξ_R}`, so the scan
/// minimises `X` row by row with a few flops per cell.
#[derive(Debug, Clone, Copy)]
pub struct GridPeak {
    pub peak: f64,
    pub chi_l: f64,
    pub chi_r: f64,
    /// Largest drop of |J| from the best cell to any of its grid neighbours.
    pub cell_variation: f64,
}

pub fn grid_peak(xi_l: f64, xi_r: f64, gamma_l: f64, gamma_r: f64, u: f64, scan: Scan) -> GridPeak {
    let n = scan.n;
    let chi = scan.points();
    let a = (1.0 / xi_l).exp();
    let b = (1.0 / xi_r).exp();
    let er: Vec<f64> = chi.iter().map(|c| (c / xi_r).exp()).collect();
    let emr: Vec<f64> = er.iter().map(|e| 1.0 / e).collect();
    let x_at = |i: usize, j: usize| -> f64 {
        let el = (chi[i] / xi_l).exp();
        let eml = 1.0 / el;
        let k0 = 2.0 * a + a * el + 2.0 * b + b * eml + a * b * el + eml;
        let kp = b * (1.0 + eml) + a * b * (1.0 + el);
        let km = a * (1.0 + el) + (1.0 + eml);
        k0 + kp * er[j] + km * emr[j]
    };
    let (bi, bj, xmin) = (0..n)
        .into_par_iter()
        .map(|i| {
            let el = (chi[i] / xi_l).exp();
            let eml = 1.0 / el;
            let k0 = 2.0 * a + a * el + 2.0 * b + b * eml + a * b * el + eml;
            let kp = b * (1.0 + eml) + a * b * (1.0 + el);
            let km = a * (1.0 + el) + (1.0 + eml);
            let mut best = (0, f64::INFINITY);
            for j in 0..n {
                let x = k0 + kp * er[j] + km * emr[j];
                if x < best.1 {
                    best = (j, x);
                }
            }
            (i, best.0, best.1)
        })
        .reduce(
            || (0, 0, f64::INFINITY),
            |p, q| {
                if q.2 < p.2 || (q.2 == p.2 && (q.0, q.1) < (p.0, p.1)) {
                    q
                } else {
                    p
                }
            },
        );
    let scale = u * rate_prefactor(gamma_l, gamma_r) * (a - b).abs();
    let peak = scale / xmin;
    let mut variation = 0.0f64;
    for di in -1i64..=1 {
        for dj in -1i64..=1 {
            let (i, j) = (bi as i64 + di, bj as i64 + dj);
            if (di, dj) != (0, 0) && i >= 0 && j >= 0 && (i as usize) < n && (j as usize) < n {
                variation = variation.max(peak - scale / x_at(i as usize, j as usize));
            }
        }
    }
    GridPeak {
        peak,
        chi_l: chi[bi],
        chi_r: chi[bj],
        cell_variation: variation,
    }
}

pub fn criterion_peak_formula(seed: u64) -> CheckReport {
    let mut rng = rng_for(seed, 7);
    let pairs: Vec<(f64, f64)> = (0..5)
        .map(|_| (uniform(&mut rng, FULL_BOX.xi), uniform(&mut rng, FULL_BOX.xi)))
        .collect();
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut detail = String::from("3001x3001 grid on [-2,1]^2;");
    for &(xl, xr) in &pairs {
        let formula = match max_heat_current(xl, xr, 1.0, 1.0, 1.0) {
            Ok(f) => f,
            Err(e) => {
                return CheckReport::new(
                    "C6",
                    "peak-current formula vs grid scan",
                    f64::NAN,
                    0.0,
                    false,
                    e.to_string(),
                )
            }
        };
        let g = grid_peak(
            xl,
            xr,
            1.0,
            1.0,
            1.0,
            Scan {
                lo: -2.0,
                hi: 1.0,
                n: 3001,
            },
        );
        // the grid cannot beat the true maximum, and misses it by at most
        // the variation across one cell
        let gap = (formula - g.peak) / formula;
        let allowed = g.cell_variation / formula;
        ok &= gap >= -1e-12 && gap <= allowed;
        ok &= (g.chi_l + 0.5).abs() <= 1e-3 && (g.chi_r + 0.5).abs() <= 1e-3;
        worst = worst.max(gap.abs() / allowed.max(f64::MIN_POSITIVE));
        detail.push_str(&format!(" ({xl:.3},{xr:.3}): rel gap {gap:.1e}/{allowed:.1e}"));
    }
    CheckReport::new(
        "C6",
        "peak-current formula vs grid scan",
        worst,
        1.0,
        ok && worst <= 1.0,
        detail,
    )
}

/// Cold bath, hot bath, temperatures and barriers of the documented
/// complete-rectification point.
pub const COMPLETE_RECTIFICATION: (f64, f64, f64, f64) = (-0.5, 3.0, 0.02, 0.5);

pub fn criterion_rectification(seed: u64) -> CheckReport {
    let mut rng = rng_for(seed, 8);
    let mut cases = Vec::new();
    for _ in 0..200 {
        let xi_cold = uniform(&mut rng, FULL_BOX.xi);
        let xi_hot = uniform(&mut rng, FULL_BOX.xi);
        let chi = uniform(&mut rng, FULL_BOX.chi);
        let dchi = uniform(&mut rng, (-5.0, 5.0));
        // equal barriers
        cases.push(ReducedParams {
            chi_l: chi,
            chi_r: chi,
            xi_l: xi_cold,
            xi_r: xi_hot,
        });
        // mean barrier on the magic mean
        cases.push(ReducedParams {
            chi_l: -0.5 - 0.5 * dchi,
            chi_r: -0.5 + 0.5 * dchi,
            xi_l: xi_cold,
            xi_r: xi_hot,
        });
    }
    let nulls = worst_of(&cases, |rp| Ok(rectification_reduced(rp, 1.0, 1.0, 1.0)?.r));
    let (chi_cold, chi_hot, xi_cold, xi_hot) = COMPLETE_RECTIFICATION;
    let point = rectification_reduced(
        &ReducedParams {
            chi_l: chi_cold,
            chi_r: chi_hot,
            xi_l: xi_cold,
            xi_r: xi_hot,
        },
        1.0,
        1.0,
        1.0,
    );
    match (nulls, point) {
        (Ok(n), Ok(p)) => {
            let ratio = p.j_reverse / p.j_forward;
            CheckReport::new(
                "C7",
                "rectification nulls and completeness",
                n,
                1e-10,
                n <= 1e-10 && p.r >= 0.999 && ratio <= 1e-5,
                format!(
                    "400 null cases; at chi_cold={chi_cold}, chi_hot={chi_hot}, xi_cold={xi_cold}, xi_hot={xi_hot}: R = {:.12}, J_rev/J_fwd = {ratio:.2e}",
                    p.r
                ),
            )
        }
        (Err(e), _) | (_, Err(e)) => CheckReport::new(
            "C7",
            "rectification nulls and completeness",
            f64::NAN,
            1e-10,
            false,
            e.to_string(),
        ),
    }
}

pub fn criterion_fig4a() -> CheckReport {
    let name = "fig4a peak and derivatives";
    let t = match figure(FigureName::Fig4a) {
        Ok(t) => t,
        Err(e) => return CheckReport::new("C8", name, f64::NAN, 0.0, false, e.to_string()),
    };
    let col = |c: &str| t.column(c).unwrap_or_default();
    let (chi, j, dj, d2j) = (col("chi_R"), col("J"), col("dJ"), col("d2J"));
    let n = j.len();
    if n < 3 {
        return CheckReport::new("C8", name, f64::NAN, 0.0, false, "figure has too few rows".into());
    }
    let h = chi[1] - chi[0];
    let imax = (0..n).max_by(|&a, &b| j[a].total_cmp(&j[b])).unwrap();
    let interior = imax > 0 && imax + 1 < n;
    let rising = (1..=imax).all(|i| j[i] > j[i - 1]);
    let falling = (imax + 1..n).all(|i| j[i] < j[i - 1]);
    let offset = (chi[imax] + 0.5).abs();
    let slope_flip = interior && dj[imax - 1] > 0.0 && dj[imax + 1] < 0.0;
    let concave = d2j[imax] < 0.0;
    CheckReport::new(
        "C8",
        name,
        offset,
        0.5 * h,
        interior && rising && falling && offset <= 0.5 * h && slope_flip && concave,
        format!(
            "{n} rows; peak at chi_R = {:.6}, dJ {:.2e} -> {:.2e}, d2J = {:.3e}, unique={}",
            chi[imax],
            dj[imax.saturating_sub(1)],
            dj[(imax + 1).min(n - 1)],
            d2j[imax],
            rising && falling
        ),
    )
}

pub fn criterion_dynamics(seed: u64) -> CheckReport {
    let name = "RK4 relaxation to the steady state";
    let mut rng = rng_for(seed, 9);
    let dyn_box = BoxSpec {
        chi: (-3.0, 2.0),
        xi: (0.2, 2.0),
        gamma: (0.5, 2.0),
        u: (1.0, 1.0 + f64::EPSILON),
    };
    let runs: Vec<(Draw, [f64; NUM_STATES])> = (0..10)
        .map(|_| {
            let d = draw(&mut rng, dyn_box);
            let w: [f64; NUM_STATES] = std::array::from_fn(|_| -rng.gen_range(f64::EPSILON..1.0).ln());
            let s: f64 = w.iter().sum();
            (d, w.map(|x| x / s))
        })
        .collect();
    let results: Vec<Result<(f64, f64, usize)>> = runs
        .par_iter()
        .map(|(d, p0)| {
            let gen = build_generator(&fermi_set(&d.rp), d.gl, d.gr)?;
            let ss = steady_state(&gen)?;
            let t_final = 30.0 / relaxation_gap(&fermi_set(&d.rp), d.gl, d.gr);
            let dt = 0.05 / gen.max_exit_rate();
            let p0 = Occupations::new(*p0)?;
            let traj = evolve(&gen, &p0, t_final, dt)?;
            let simplex = traj
                .states
                .iter()
                .map(|s| {
                    let neg = s.iter().fold(0.0f64, |m, &x| m.max(-x));
                    neg.max((s.iter().sum::<f64>() - 1.0).abs())
                })
                .fold(0.0f64, f64::max);
            Ok((traj.last().l1_distance(&ss), simplex, traj.states.len()))
        })
        .collect();
    let mut dist = 0.0f64;
    let mut simplex = 0.0f64;
    let mut samples = 0;
    for r in results {
        match r {
            Ok((d, s, n)) => {
                dist = dist.max(d);
                simplex = simplex.max(s);
                samples += n;
            }
            Err(e) => return CheckReport::new("C9", name, f64::NAN, 1e-8, false, e.to_string()),
        }
    }
    CheckReport::new(
        "C9",
        name,
        dist,
        1e-8,
        dist <= 1e-8 && simplex <= 1e-10,
        format!("10 runs, {samples} samples; worst simplex violation {simplex:.2e} (tol 1e-10)"),
    )
}

pub fn criterion_detailed_balance(seed: u64) -> CheckReport {
    let ds: Vec<Draw> = draws(seed, 10, 1000, FULL_BOX)
        .into_iter()
        .map(|mut d| {
            d.rp.xi_r = d.rp.xi_l;
            d
        })
        .collect();
    let worst = worst_of(&ds, |d| {
        let sol = solve_steady(&d.rp, d.gl, d.gr, d.u)?;
        Ok(sol.rates.as_array().iter().fold(0.0f64, |m, x| m.max(x.abs())))
    });
    CheckReport::bounded(
        "C10",
        "detailed balance at equal temperatures",
        worst,
        1e-12,
        "1000 draws, per-transition |forward - backward| flux".into(),
    )
}

/// Invariants beyond the acceptance checks.
pub fn property_suite(seed: u64) -> Vec<CheckReport> {
    vec![
        prop_fermi(seed),
        prop_generator_columns(seed),
        prop_stationarity_full_box(seed),
        prop_dense_route(seed),
        prop_rational_gamma(seed),
        prop_peak_at_magic_mean(seed),
        prop_grid_argmax(seed),
        prop_total_fermi(seed),
        prop_rectification_range(seed),
        prop_fig5b_monotone(),
        prop_fig5c_cold_dominates(),
        prop_fig4bc_surfaces(),
        prop_domains(seed),
        prop_switch_contrast(),
        prop_determinism(),
    ]
}

pub fn run_all(seed: u64) -> Vec<CheckReport> {
    let mut all = acceptance_suite(seed);
    all.extend(property_suite(seed));
    all
}

fn prop_fermi(seed: u64) -> CheckReport {
    let mut rng = rng_for(seed, 101);
    let mut sym = 0.0f64;
    let mut order_fail = 0usize;
    let mut mono_fail = 0usize;
    for _ in 0..100_000 {
        let chi = uniform(&mut rng, (-20.0, 20.0));
        let xi = uniform(&mut rng, (0.01, 10.0));
        sym = sym.max((fermi_factor(chi, xi) + fermi_factor(-chi, xi) - 1.0).abs());
        let fs = fermi_set(&ReducedParams {
            chi_l: chi,
            chi_r: chi,
            xi_l: xi,
            xi_r: xi,
        });
        order_fail += usize::from(fs.fl1() < fs.fl2());
        let c2 = chi + uniform(&mut rng, (1e-3, 1.0));
        // strict decrease wherever the drop is well above rounding
        let (a, b) = (fermi_factor(chi, xi), fermi_factor(c2, xi));
        let drop = a * FermiFactor::new(chi, xi).complement() * (c2 - chi) / xi;
        mono_fail += usize::from(b > a || (b == a && a > 1e-300 && drop > 1e-14 * a));
    }
    let mut rep = CheckReport::new(
        "P1",
        "Fermi factor symmetry, order, monotonicity",
        sym,
        1e-15,
        sym <= 1e-15,
        format!("1e5 draws; {order_fail} ordering and {mono_fail} monotonicity violations"),
    );
    rep.passed &= order_fail == 0 && mono_fail == 0;
    rep
}

fn prop_generator_columns(seed: u64) -> CheckReport {
    let ds = draws(seed, 102, DRAWS, FULL_BOX);
    let worst = worst_of(&ds, |d| {
        let gen = build_generator(&fermi_set(&d.rp), d.gl, d.gr)?;
        Ok(gen.max_column_sum() / gen.norm())
    });
    CheckReport::bounded(
        "P2",
        "generator columns sum to zero",
        worst,
        4.0 * f64::EPSILON,
        format!("{DRAWS} draws"),
    )
}

fn prop_stationarity_full_box(seed: u64) -> CheckReport {
    let ds = draws(seed, 103, DRAWS, FULL_BOX);
    let worst = worst_of(&ds, |d| {
        let gen = build_generator(&fermi_set(&d.rp), d.gl, d.gr)?;
        let p = steady_state(&gen)?;
        let sum: f64 = p.probabilities().iter().sum();
        Ok((gen.residual(&p) / gen.norm()).max((sum - 1.0).abs()))
    });
    CheckReport::bounded(
        "P3",
        "stationary residual, full box",
        worst,
        1e-12,
        format!("{DRAWS} draws"),
    )
}

fn prop_dense_route(seed: u64) -> CheckReport {
    let b = BoxSpec {
        chi: (-2.0, 1.0),
        xi: (0.3, 10.0),
        gamma: (0.1, 10.0),
        u: (1.0, 2.0),
    };
    let ds = draws(seed, 104, 2000, b);
    let worst = worst_of(&ds, |d| {
        let gen = build_generator(&fermi_set(&d.rp), d.gl, d.gr)?;
        Ok(steady_state(&gen)?.l1_distance(&steady_state_dense(&gen)?))
    });
    CheckReport::bounded(
        "P4",
        "reduction and dense solves agree",
        worst,
        1e-10,
        "2000 well-conditioned draws, L1 distance".into(),
    )
}

fn prop_rational_gamma(seed: u64) -> CheckReport {
    let ds = draws(seed, 105, DRAWS, FULL_BOX);
    let worst = worst_of(&ds, |d| {
        let g = gamma_closed_form(&fermi_set(&d.rp), d.gl, d.gr)?;
        let o = heat_currents_oracle(&d.rp, d.gl, d.gr, d.u)?.gamma;
        Ok(relative_difference(g, o))
    });
    CheckReport::bounded(
        "P5",
        "rational cycle rate vs rate equations",
        worst,
        1e-10,
        format!("{DRAWS} draws"),
    )
}

fn prop_peak_at_magic_mean(seed: u64) -> CheckReport {
    let ds = draws(seed, 106, DRAWS, FULL_BOX);
    let worst = worst_of(&ds, |d| {
        let at = ReducedParams {
            chi_l: -0.5,
            chi_r: -0.5,
            ..d.rp
        };
        let j = heat_currents_closed_form(&at, d.gl, d.gr, d.u)?.j_r.abs();
        Ok(relative_difference(
            j,
            max_heat_current(d.rp.xi_l, d.rp.xi_r, d.gl, d.gr, d.u)?,
        ))
    });
    CheckReport::bounded(
        "P6",
        "peak formula equals current at chi = -1/2",
        worst,
        1e-12,
        format!("{DRAWS} draws"),
    )
}

fn prop_grid_argmax(seed: u64) -> CheckReport {
    let ds = draws(seed, 107, 20, FULL_BOX);
    let scan = Scan {
        lo: -2.0,
        hi: 1.0,
        n: 301,
    };
    let worst = worst_of(&ds, |d| {
        let mut w = 0.0f64;
        for lead in [Lead::Left, Lead::Right] {
            let pts = scan.points();
            let vals = pts
                .iter()
                .map(|&c| {
                    Ok(heat_currents_closed_form(&d.rp.with_chi(lead, c), d.gl, d.gr, d.u)?
                        .j_r
                        .abs())
                })
                .collect::<Result<Vec<f64>>>()?;
            let i = (0..vals.len()).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
            w = w.max((pts[i] + 0.5).abs());
        }
        Ok(w)
    });
    CheckReport::bounded(
        "P7",
        "grid argmax sits on chi = -1/2",
        worst,
        1e-12,
        "20 settings, 301-point scan per lead".into(),
    )
}

fn prop_total_fermi(seed: u64) -> CheckReport {
    let mut rng = rng_for(seed, 108);
    let mut at_mean = 0.0f64;
    let mut out_of_range = 0usize;
    let mut root = 0.0f64;
    for _ in 0..1000 {
        let xi = uniform(&mut rng, (0.01, 10.0));
        let chi = uniform(&mut rng, (-50.0, 50.0));
        let total = fermi_factor(chi, xi) + fermi_factor(chi + 1.0, xi);
        out_of_range += usize::from(!(0.0..=2.0).contains(&total));
        at_mean = at_mean.max((fermi_factor(-0.5, xi) + fermi_factor(0.5, xi) - 1.0).abs());
        // total is decreasing: bisect for where it crosses one, comparing
        // f(chi + 1) with 1 - f(chi) so the test keeps precision at small xi
        let (mut lo, mut hi) = (-3.0, 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if fermi_factor(mid + 1.0, xi) > FermiFactor::new(mid, xi).complement() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        root = root.max((0.5 * (lo + hi) + 0.5).abs());
    }
    CheckReport::new(
        "P8",
        "total Fermi function crosses one at chi = -1/2",
        root,
        1e-12,
        root <= 1e-12 && at_mean <= 1e-15 && out_of_range == 0,
        format!("1000 draws; |f(-1/2) - 1| = {at_mean:.1e}, {out_of_range} values outside [0,2]"),
    )
}

fn prop_rectification_range(seed: u64) -> CheckReport {
    let ds = draws(seed, 109, DRAWS, FULL_BOX);
    let worst = worst_of(&ds, |d| {
        let r = rectification_reduced(&d.rp, d.gl, d.gr, d.u)?.r;
        Ok(if (0.0..=1.0).contains(&r) { 0.0 } else { 1.0 })
    });
    CheckReport::bounded(
        "P9",
        "rectification factor within [0, 1]",
        worst,
        0.0,
        format!("{DRAWS} draws"),
    )
}

fn rect_curves(t: &Table) -> Vec<(String, Vec<f64>)> {
    let ci = t.column_index("curve").expect("curve column");
    let ri = t.column_index("R").expect("R column");
    let mut out: Vec<(String, Vec<f64>)> = Vec::new();
    for row in &t.rows {
        let name = row[ci].as_str().unwrap_or_default().to_owned();
        let r = row[ri].as_f64().unwrap_or(f64::NAN);
        match out.last_mut() {
            Some((n, v)) if *n == name => v.push(r),
            _ => out.push((name, vec![r])),
        }
    }
    out
}

fn prop_fig5b_monotone() -> CheckReport {
    let name = "R grows with |delta chi| off the magic mean";
    let t = match figure(FigureName::Fig5b) {
        Ok(t) => t,
        Err(e) => return CheckReport::new("P10", name, f64::NAN, 0.0, false, e.to_string()),
    };
    let mut worst_drop = 0.0f64;
    let mut red_max = 0.0f64;
    for (curve, r) in rect_curves(&t) {
        if curve == "red" {
            red_max = r.iter().cloned().fold(0.0, f64::max);
            continue;
        }
        for w in r.windows(2) {
            worst_drop = worst_drop.max(w[0] - w[1]);
        }
    }
    CheckReport::new(
        "P10",
        name,
        worst_drop,
        0.0,
        worst_drop <= 0.0 && red_max <= 1e-10,
        format!("largest decrease along a curve; red (chi_bar = -1/2) max R = {red_max:.1e}"),
    )
}

fn prop_fig5c_cold_dominates() -> CheckReport {
    let name = "cold temperature moves R more than hot";
    let t = match figure(FigureName::Fig5c) {
        Ok(t) => t,
        Err(e) => return CheckReport::new("P11", name, f64::NAN, 0.0, false, e.to_string()),
    };
    let curves = rect_curves(&t);
    let get = |n: &str| {
        curves
            .iter()
            .find(|(c, _)| c == n)
            .map(|(_, v)| v.clone())
            .unwrap_or_default()
    };
    let base = get("baseline");
    let shift = |n: &str| get(n).iter().zip(&base).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let (cd, cu, hu, hd) = (shift("cold_down"), shift("cold_up"), shift("hot_up"), shift("hot_down"));
    CheckReport::new(
        "P11",
        name,
        (hu / cd).max(hd / cu),
        1.0,
        cd > hu && cu > hd,
        format!("max|dR|: cold -0.1 {cd:.3}, hot +0.1 {hu:.3}; cold +0.1 {cu:.3}, hot -0.1 {hd:.3}"),
    )
}

fn prop_fig4bc_surfaces() -> CheckReport {
    let name = "|J| surfaces peak at (-1/2, -1/2)";
    let t = match figure(FigureName::Fig4bc) {
        Ok(t) => t,
        Err(e) => return CheckReport::new("P12", name, f64::NAN, 0.0, false, e.to_string()),
    };
    let (xl, cl, cr, j) = (
        t.column("xi_L").unwrap_or_default(),
        t.column("chi_L").unwrap_or_default(),
        t.column("chi_R").unwrap_or_default(),
        t.column("absJ").unwrap_or_default(),
    );
    let mut worst = 0.0f64;
    let mut areas = Vec::new();
    for pair in [0.2, 0.5] {
        let idx: Vec<usize> = (0..j.len()).filter(|&i| xl[i] == pair).collect();
        let imax = *idx.iter().max_by(|&&a, &&b| j[a].total_cmp(&j[b])).unwrap();
        worst = worst.max((cl[imax] + 0.5).abs()).max((cr[imax] + 0.5).abs());
        let half = idx.iter().filter(|&&i| j[i] >= 0.5 * j[imax]).count();
        areas.push(half);
    }
    CheckReport::new(
        "P12",
        name,
        worst,
        1e-12,
        worst <= 1e-12 && areas[1] > areas[0],
        format!(
            "cells above half maximum: {} (xi 0.2/0.5) vs {} (xi 0.5/1)",
            areas[0], areas[1]
        ),
    )
}

fn prop_domains(seed: u64) -> CheckReport {
    let mut rng = rng_for(seed, 110);
    let mut bad = 0usize;
    for _ in 0..100_000 {
        let chi = uniform(&mut rng, (-20.0, 20.0));
        let xi = uniform(&mut rng, (0.01, 10.0));
        let delta = uniform(&mut rng, (1e-3, 0.25));
        match classify_domain(chi, xi, delta) {
            Ok(l) => {
                let d3 = l.domain == Domain::D3;
                let side_ok = match l.domain {
                    Domain::D1 | Domain::D2 => chi < -1.0,
                    Domain::D4 | Domain::D5 => chi > 0.0,
                    Domain::D3 => true,
                };
                bad += usize::from(d3 != (-1.0..=0.0).contains(&chi) || !side_ok);
            }
            Err(_) => bad += 1,
        }
    }
    CheckReport::new(
        "P13",
        "domain labels partition the barrier axis",
        bad as f64,
        0.0,
        bad == 0,
        "1e5 draws".into(),
    )
}

fn prop_switch_contrast() -> CheckReport {
    let mut worst = 0.0f64;
    for xi_cold in [0.02, 0.05] {
        let on = ReducedParams {
            chi_l: -0.5,
            chi_r: -0.5,
            xi_l: xi_cold,
            xi_r: 0.5,
        };
        let on_ratio = match switch_state_reduced(&on, 1.0, 1.0, 1.0, 0.5) {
            Ok(r) => r.ratio,
            Err(e) => return CheckReport::new("P14", "switch contrast", f64::NAN, 1e-4, false, e.to_string()),
        };
        for i in 1..=350 {
            let chi = 0.5 + i as f64 * 0.01;
            let off = ReducedParams { chi_l: chi, ..on };
            if let Ok(r) = switch_state_reduced(&off, 1.0, 1.0, 1.0, 0.5) {
                worst = worst.max(r.ratio / on_ratio);
            }
        }
    }
    CheckReport::new(
        "P14",
        "switch contrast for cold xi <= 0.05",
        worst,
        1e-4,
        worst <= 1e-4,
        "cold barrier in (0.5, 4], hot at chi = -1/2, xi = 0.5".into(),
    )
}

fn prop_determinism() -> CheckReport {
    let a = figure(FigureName::Fig5b);
    let b = figure(FigureName::Fig5b);
    let same = match (&a, &b) {
        (Ok(a), Ok(b)) => {
            let mut x = Vec::new();
            let mut y = Vec::new();
            crate::io::write_csv(&mut x, a).is_ok() && crate::io::write_csv(&mut y, b).is_ok() && x == y
        }
        _ => false,
    };
    CheckReport::new(
        "P15",
        "repeated runs are byte-identical",
        if same { 0.0 } else { 1.0 },
        0.0,
        same,
        "fig5b emitted twice".into(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_peak_finds_magic_mean() {
        let g = grid_peak(
            0.2,
            0.5,
            1.0,
            1.0,
            1.0,
            Scan {
                lo: -2.0,
                hi: 1.0,
                n: 301,
            },
        );
        assert!((g.chi_l + 0.5).abs() < 1e-12 && (g.chi_r + 0.5).abs() < 1e-12);
        let f = max_heat_current(0.2, 0.5, 1.0, 1.0, 1.0).unwrap();
        assert!(relative_difference(f, g.peak) < 1e-13);
    }

    #[test]
    fn seeds_reproduce() {
        let a = draws(7, 1, 3, FULL_BOX);
        let b = draws(7, 1, 3, FULL_BOX);
        assert_eq!(a[2].rp, b[2].rp);
        let c = draws(8, 1, 3, FULL_BOX);
        assert_ne!(a[2].rp, c[2].rp);
    }
}
