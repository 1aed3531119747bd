//! Classical master equation for the four charge states of the double dot.
//!
//! Basis order is `|1⟩ = |00⟩, |2⟩ = |10⟩, |3⟩ = |01⟩, |4⟩ = |11⟩`, stored at
//! indices `0..4`. The left lead drives `1 ↔ 2` and `3 ↔ 4`, the right lead
//! drives `1 ↔ 3` and `2 ↔ 4`. Upward (electron-in) rates are `γ_α f` and
//! downward rates `γ_α (1 − f)`.

mod dd;
mod evolve;
mod steady;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{FermiSet, Lead};

pub(crate) use dd::Dd;
pub use evolve::{evolve, relaxation_gap, Trajectory};
pub use steady::{steady_state, steady_state_dense, SINGULAR_CONDITION};

pub const NUM_STATES: usize = 4;

/// One of the four allowed transitions, oriented along the cycle
/// `1 → 2 → 4 → 3 → 1` that carries heat from the right bath to the left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleEdge {
    pub from: usize,
    pub to: usize,
    pub lead: Lead,
}

/// Cycle order: `1→2` (L), `2→4` (R), `4→3` (L), `3→1` (R).
pub const CYCLE: [CycleEdge; 4] = [
    CycleEdge {
        from: 0,
        to: 1,
        lead: Lead::Left,
    },
    CycleEdge {
        from: 1,
        to: 3,
        lead: Lead::Right,
    },
    CycleEdge {
        from: 3,
        to: 2,
        lead: Lead::Left,
    },
    CycleEdge {
        from: 2,
        to: 0,
        lead: Lead::Right,
    },
];

/// Generator of the population dynamics, `dp/dt = M p`.
///
/// `m[i][j]` is the rate from state `j` into state `i`; every column sums to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateMatrix {
    m: [[f64; NUM_STATES]; NUM_STATES],
}

/// Off-diagonal positions (to, from) that a sequential-tunnelling generator may populate.
const ALLOWED: [(usize, usize); 8] = [(1, 0), (0, 1), (3, 2), (2, 3), (2, 0), (0, 2), (3, 1), (1, 3)];

impl RateMatrix {
    /// Build from off-diagonal rates, filling the diagonal so columns sum to zero.
    pub fn from_rates(rates: [[f64; NUM_STATES]; NUM_STATES]) -> Result<Self> {
        let mut m = [[0.0; NUM_STATES]; NUM_STATES];
        for (i, row) in rates.iter().enumerate() {
            for (j, &r) in row.iter().enumerate() {
                if i == j {
                    continue;
                }
                if !ALLOWED.contains(&(i, j)) {
                    if r != 0.0 {
                        return Err(Error::domain("rate", r, "transition not allowed"));
                    }
                    continue;
                }
                if !(r >= 0.0 && r.is_finite()) {
                    return Err(Error::domain("rate", r, "must be finite and non-negative"));
                }
                m[i][j] = r;
            }
        }
        for j in 0..NUM_STATES {
            let out: f64 = (0..NUM_STATES).filter(|&i| i != j).map(|i| m[i][j]).sum();
            m[j][j] = -out;
        }
        let gen = RateMatrix { m };
        debug_assert!(gen.max_column_sum() <= 4.0 * f64::EPSILON * gen.norm());
        Ok(gen)
    }

    #[inline]
    pub fn rate(&self, to: usize, from: usize) -> f64 {
        self.m[to][from]
    }

    pub fn as_array(&self) -> [[f64; NUM_STATES]; NUM_STATES] {
        self.m
    }

    /// Largest absolute entry.
    pub fn norm(&self) -> f64 {
        self.m.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    pub fn max_exit_rate(&self) -> f64 {
        (0..NUM_STATES).fold(0.0f64, |acc, i| acc.max(-self.m[i][i]))
    }

    pub fn max_column_sum(&self) -> f64 {
        (0..NUM_STATES)
            .map(|j| (0..NUM_STATES).map(|i| self.m[i][j]).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, p: &[f64; NUM_STATES]) -> [f64; NUM_STATES] {
        let mut out = [0.0; NUM_STATES];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..NUM_STATES).map(|j| self.m[i][j] * p[j]).sum();
        }
        out
    }

    /// Largest per-equation stationarity residual `|(M p)_i|`.
    pub fn residual(&self, p: &Occupations) -> f64 {
        self.apply(&p.probabilities())
            .iter()
            .fold(0.0f64, |acc, r| acc.max(r.abs()))
    }

    /// Net flow along each cycle edge for populations `p`.
    pub fn net_rates(&self, p: &Occupations) -> NetRates {
        let edges = CYCLE.map(|e| {
            let forward = Dd::from_f64(self.m[e.to][e.from]) * p.dd(e.from);
            let backward = Dd::from_f64(self.m[e.from][e.to]) * p.dd(e.to);
            EdgeFlux {
                forward: forward.to_f64(),
                backward: backward.to_f64(),
                net: (forward - backward).to_f64(),
            }
        });
        NetRates { edges }
    }
}

pub fn build_generator(fs: &FermiSet, gamma_l: f64, gamma_r: f64) -> Result<RateMatrix> {
    if !(gamma_l > 0.0 && gamma_l.is_finite()) {
        return Err(Error::domain("gamma_l", gamma_l, "must be positive"));
    }
    if !(gamma_r > 0.0 && gamma_r.is_finite()) {
        return Err(Error::domain("gamma_r", gamma_r, "must be positive"));
    }
    let mut r = [[0.0; NUM_STATES]; NUM_STATES];
    // left lead: 1 <-> 2 at the bare level, 3 <-> 4 at the shifted level
    r[1][0] = gamma_l * fs.l1.value();
    r[0][1] = gamma_l * fs.l1.complement();
    r[3][2] = gamma_l * fs.l2.value();
    r[2][3] = gamma_l * fs.l2.complement();
    // right lead: 1 <-> 3 bare, 2 <-> 4 shifted
    r[2][0] = gamma_r * fs.r1.value();
    r[0][2] = gamma_r * fs.r1.complement();
    r[3][1] = gamma_r * fs.r2.value();
    r[1][3] = gamma_r * fs.r2.complement();
    RateMatrix::from_rates(r)
}

/// State populations. Each probability is kept as an unevaluated sum of a
/// leading value and a small correction so that net flows, which are
/// differences of nearly equal gross flows, can be formed accurately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occupations {
    hi: [f64; NUM_STATES],
    lo: [f64; NUM_STATES],
}

impl Occupations {
    pub fn new(p: [f64; NUM_STATES]) -> Result<Self> {
        for &x in &p {
            if !(x.is_finite() && (0.0..=1.0).contains(&x)) {
                return Err(Error::domain("occupation", x, "must lie in [0, 1]"));
            }
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::domain("occupation sum", sum, "must equal 1"));
        }
        Ok(Occupations {
            hi: p,
            lo: [0.0; NUM_STATES],
        })
    }

    pub fn uniform() -> Self {
        Occupations {
            hi: [0.25; NUM_STATES],
            lo: [0.0; NUM_STATES],
        }
    }

    pub(crate) fn from_dd(p: [Dd; NUM_STATES]) -> Self {
        Occupations {
            hi: p.map(|x| x.hi),
            lo: p.map(|x| x.lo),
        }
    }

    pub(crate) fn from_raw(p: [f64; NUM_STATES]) -> Self {
        Occupations {
            hi: p,
            lo: [0.0; NUM_STATES],
        }
    }

    #[inline]
    pub(crate) fn dd(&self, i: usize) -> Dd {
        Dd {
            hi: self.hi[i],
            lo: self.lo[i],
        }
    }

    pub fn probabilities(&self) -> [f64; NUM_STATES] {
        self.hi
    }

    pub fn get(&self, i: usize) -> f64 {
        self.hi[i]
    }

    pub fn l1_distance(&self, other: &Occupations) -> f64 {
        self.hi.iter().zip(other.hi.iter()).map(|(a, b)| (a - b).abs()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeFlux {
    pub forward: f64,
    pub backward: f64,
    pub net: f64,
}

impl EdgeFlux {
    pub fn gross(&self) -> f64 {
        self.forward.max(self.backward)
    }

    /// `|net| / gross`: how much of the gross flow survives the cancellation.
    fn resolution(&self) -> f64 {
        let g = self.gross();
        if g > 0.0 {
            self.net.abs() / g
        } else {
            0.0
        }
    }
}

/// Net transition rates around the heat-carrying cycle, positive along
/// `1 → 2 → 4 → 3 → 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NetRates {
    edges: [EdgeFlux; 4],
}

impl NetRates {
    /// `Γ_12^L`: net flow 1 → 2.
    pub fn g12_l(&self) -> f64 {
        self.edges[0].net
    }
    /// `Γ_24^R`: net flow 2 → 4.
    pub fn g24_r(&self) -> f64 {
        self.edges[1].net
    }
    /// `Γ_43^L`: net flow 4 → 3.
    pub fn g43_l(&self) -> f64 {
        self.edges[2].net
    }
    /// `Γ_31^R`: net flow 3 → 1.
    pub fn g31_r(&self) -> f64 {
        self.edges[3].net
    }

    /// Net rates in cycle order `[Γ_12^L, Γ_24^R, Γ_43^L, Γ_31^R]`.
    pub fn as_array(&self) -> [f64; 4] {
        self.edges.map(|e| e.net)
    }

    pub fn edges(&self) -> &[EdgeFlux; 4] {
        &self.edges
    }

    /// Largest gross flow through any edge.
    pub fn flux_scale(&self) -> f64 {
        self.edges.iter().fold(0.0f64, |acc, e| acc.max(e.gross()))
    }

    /// Largest difference between any two of the four net rates.
    pub fn spread(&self) -> f64 {
        let nets = self.as_array();
        let max = nets.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = nets.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// The common stationary cycle rate `Γ`, read off the edge whose net flow
    /// is the largest fraction of its gross flow.
    pub fn cycle_rate(&self) -> f64 {
        self.edges
            .iter()
            .max_by(|a, b| a.resolution().total_cmp(&b.resolution()))
            .map(|e| e.net)
            .unwrap_or(0.0)
    }
}

pub fn net_transition_rates(p: &Occupations, fs: &FermiSet, gamma_l: f64, gamma_r: f64) -> Result<NetRates> {
    Ok(build_generator(fs, gamma_l, gamma_r)?.net_rates(p))
}
