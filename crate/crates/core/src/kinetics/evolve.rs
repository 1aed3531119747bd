use serde::Serialize;

use super::{Occupations, RateMatrix, NUM_STATES};
use crate::error::{Error, Result};
use crate::model::FermiSet;

/// Sampled population trajectory, one sample per integration step
/// (including the initial state).
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<[f64; NUM_STATES]>,
    /// Number of samples whose total probability drifted by more than 1e-12
    /// and was rescaled.
    pub renormalizations: usize,
}

impl Trajectory {
    pub fn last(&self) -> Occupations {
        Occupations::from_raw(*self.states.last().expect("trajectory holds the initial state"))
    }
}

/// Slowest relaxation rate of the master equation.
///
/// The mean dot occupations obey a closed 2x2 linear system whose slower
/// eigenvalue is the gap; the remaining nonzero mode decays at `γ_L + γ_R`.
pub fn relaxation_gap(fs: &FermiSet, gamma_l: f64, gamma_r: f64) -> f64 {
    let b_l = fs.fl1() - fs.fl2();
    let b_r = fs.fr1() - fs.fr2();
    let disc = (0.5 * (gamma_l - gamma_r)).powi(2) + gamma_l * gamma_r * b_l * b_r;
    0.5 * (gamma_l + gamma_r) - disc.sqrt()
}

const DRIFT_TOLERANCE: f64 = 1e-12;

/// Integrate `dp/dt = M p` with fixed-step classical Runge–Kutta.
///
/// The step is capped at `0.1 / max|M_ii|`; larger steps are rejected. The
/// final step is shortened so that the last sample lands on `t_final`.
pub fn evolve(gen: &RateMatrix, p0: &Occupations, t_final: f64, dt: f64) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain("dt", dt, "must be positive"));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::domain("t_final", t_final, "must be non-negative"));
    }
    let max_rate = gen.max_exit_rate();
    if max_rate > 0.0 {
        let limit = 0.1 / max_rate;
        if dt > limit {
            return Err(Error::StepSize { dt, limit });
        }
    }

    let steps = (t_final / dt).ceil() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut renormalizations = 0;

    let mut t = 0.0;
    let mut p = p0.probabilities();
    times.push(t);
    states.push(p);
    for step in 0..steps {
        let h = if step + 1 == steps { t_final - t } else { dt };
        if h <= 0.0 {
            break;
        }
        p = rk4_step(gen, &p, h);
        t = if step + 1 == steps { t_final } else { t + dt };

        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > DRIFT_TOLERANCE {
            log::debug!("renormalising populations at t={t}: sum drifted to {sum}");
            p.iter_mut().for_each(|x| *x /= sum);
            renormalizations += 1;
        }
        times.push(t);
        states.push(p);
    }
    Ok(Trajectory {
        times,
        states,
        renormalizations,
    })
}

fn rk4_step(gen: &RateMatrix, p: &[f64; NUM_STATES], h: f64) -> [f64; NUM_STATES] {
    let axpy = |x: &[f64; NUM_STATES], a: f64, y: &[f64; NUM_STATES]| {
        let mut out = *x;
        out.iter_mut().zip(y).for_each(|(o, yi)| *o += a * yi);
        out
    };
    let k1 = gen.apply(p);
    let k2 = gen.apply(&axpy(p, 0.5 * h, &k1));
    let k3 = gen.apply(&axpy(p, 0.5 * h, &k2));
    let k4 = gen.apply(&axpy(p, h, &k3));
    let mut out = *p;
    for i in 0..NUM_STATES {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::{build_generator, steady_state};
    use crate::model::{fermi_set, FermiSet, ReducedParams};

    #[test]
    fn steady_state_is_a_fixed_point() {
        let rp = ReducedParams::new(-0.5, -0.5, 0.2, 0.5).unwrap();
        let gen = build_generator(&fermi_set(&rp), 1.0, 1.0).unwrap();
        let ss = steady_state(&gen).unwrap();
        let traj = evolve(&gen, &ss, 20.0, 0.05).unwrap();
        for s in &traj.states {
            let d: f64 = s.iter().zip(ss.probabilities()).map(|(a, b)| (a - b).abs()).sum();
            assert!(d < 1e-12);
        }
    }

    #[test]
    fn rejects_unstable_step() {
        let fs = FermiSet::from_values(0.5, 0.5, 0.5, 0.5).unwrap();
        let gen = build_generator(&fs, 10.0, 10.0).unwrap();
        let p0 = Occupations::uniform();
        assert!(matches!(evolve(&gen, &p0, 1.0, 0.02), Err(Error::StepSize { .. })));
        assert!(evolve(&gen, &p0, 1.0, 0.005).is_ok());
        assert!(evolve(&gen, &p0, 1.0, 0.0).is_err());
        assert!(evolve(&gen, &p0, -1.0, 0.001).is_err());
    }

    #[test]
    fn lands_on_final_time() {
        let fs = FermiSet::from_values(0.5, 0.5, 0.5, 0.5).unwrap();
        let gen = build_generator(&fs, 1.0, 1.0).unwrap();
        let traj = evolve(&gen, &Occupations::uniform(), 1.05, 0.1).unwrap();
        assert_eq!(traj.times.len(), 12);
        assert_eq!(*traj.times.last().unwrap(), 1.05);
        let zero = evolve(&gen, &Occupations::uniform(), 0.0, 0.1).unwrap();
        assert_eq!(zero.states.len(), 1);
    }
}
