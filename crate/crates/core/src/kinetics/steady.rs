use super::{Dd, Occupations, RateMatrix, NUM_STATES};
use crate::error::{Error, Result};

/// Condition-number threshold above which the normalised linear system is
/// reported as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Stationary populations of `gen`.
///
/// States are eliminated one at a time, each time folding the eliminated
/// state's exits back onto the states that remain (state reduction). Every
/// update is a sum of non-negative products, so no cancellation occurs and
/// each population is obtained to full relative accuracy, including
/// populations many orders of magnitude below one. The arithmetic runs in
/// double-double. At each step the state with the largest exit rate is
/// eliminated first, which plays the role of pivoting.
///
/// Fails when the chain has more than one closed class, i.e. when the
/// stationary state is not unique.
pub fn steady_state(gen: &RateMatrix) -> Result<Occupations> {
    let n = NUM_STATES;
    // a[i][j]: rate i -> j of the current censored chain
    let mut a = [[Dd::ZERO; NUM_STATES]; NUM_STATES];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            if i != j {
                *x = Dd::from_f64(gen.rate(j, i));
            }
        }
    }

    let mut active = [true; NUM_STATES];
    let mut order = Vec::with_capacity(n - 1);
    for _ in 0..n - 1 {
        let exit = |k: usize, a: &[[Dd; NUM_STATES]; NUM_STATES], active: &[bool; NUM_STATES]| {
            (0..n)
                .filter(|&j| j != k && active[j])
                .fold(Dd::ZERO, |s, j| s + a[k][j])
        };
        let (k, s) = (0..n)
            .filter(|&k| active[k])
            .map(|k| (k, exit(k, &a, &active)))
            .max_by(|x, y| x.1.hi.total_cmp(&y.1.hi))
            .expect("at least two active states");
        if s.is_zero() {
            return Err(Error::SingularSystem(format!(
                "{} states left with no exits; stationary state is not unique",
                active.iter().filter(|&&x| x).count()
            )));
        }
        active[k] = false;
        for i in (0..n).filter(|&i| active[i]) {
            a[i][k] = a[i][k] / s;
        }
        for i in (0..n).filter(|&i| active[i]) {
            if a[i][k].is_zero() {
                continue;
            }
            for j in (0..n).filter(|&j| active[j] && j != i) {
                a[i][j] = a[i][j] + a[i][k] * a[k][j];
            }
        }
        order.push(k);
    }

    let last = (0..n).find(|&k| active[k]).expect("one state remains");
    let mut p = [Dd::ZERO; NUM_STATES];
    let mut known = [false; NUM_STATES];
    p[last] = Dd::ONE;
    known[last] = true;
    for &k in order.iter().rev() {
        p[k] = (0..n)
            .filter(|&i| known[i])
            .fold(Dd::ZERO, |acc, i| acc + p[i] * a[i][k]);
        known[k] = true;
    }
    let total = p.iter().fold(Dd::ZERO, |acc, &x| acc + x);
    let p = p.map(|x| x / total);
    let occ = Occupations::from_dd(p);

    let residual = gen.residual(&occ);
    if residual > 1e-12 * gen.norm() {
        return Err(Error::Consistency(format!(
            "stationary residual {residual:e} exceeds 1e-12 of generator norm {:e}",
            gen.norm()
        )));
    }
    Ok(occ)
}

/// Stationary populations from the normalised linear system: the last rate
/// equation (redundant because columns sum to zero) is replaced by
/// `p1 + p2 + p3 + p4 = 1` and the system is solved by Gaussian elimination
/// with partial pivoting.
///
/// This route loses relative accuracy in populations far below one; it is
/// kept as an independent cross-check of [`steady_state`]. A condition number
/// above [`SINGULAR_CONDITION`] is reported as a singular system.
pub fn steady_state_dense(gen: &RateMatrix) -> Result<Occupations> {
    let mut m = gen.as_array();
    m[NUM_STATES - 1] = [1.0; NUM_STATES];
    let mut rhs = [0.0; NUM_STATES];
    rhs[NUM_STATES - 1] = 1.0;

    let lu = Lu::factor(m)?;
    let inv_norm = (0..NUM_STATES)
        .map(|c| {
            let mut e = [0.0; NUM_STATES];
            e[c] = 1.0;
            lu.solve(e).iter().map(|x| x.abs()).sum::<f64>()
        })
        .fold(0.0, f64::max);
    let cond = norm1(&m) * inv_norm;
    if !(cond <= SINGULAR_CONDITION) {
        return Err(Error::SingularSystem(format!(
            "normalised rate system has condition number {cond:e}"
        )));
    }
    Ok(Occupations::from_raw(lu.solve(rhs)))
}

fn norm1(m: &[[f64; NUM_STATES]; NUM_STATES]) -> f64 {
    (0..NUM_STATES)
        .map(|j| (0..NUM_STATES).map(|i| m[i][j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

struct Lu {
    lu: [[f64; NUM_STATES]; NUM_STATES],
    perm: [usize; NUM_STATES],
}

impl Lu {
    fn factor(mut a: [[f64; NUM_STATES]; NUM_STATES]) -> Result<Self> {
        let mut perm = [0, 1, 2, 3];
        for k in 0..NUM_STATES {
            let piv = (k..NUM_STATES)
                .max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs()))
                .unwrap();
            if a[piv][k] == 0.0 {
                return Err(Error::SingularSystem(format!("zero pivot in column {k}")));
            }
            a.swap(k, piv);
            perm.swap(k, piv);
            for i in k + 1..NUM_STATES {
                let f = a[i][k] / a[k][k];
                a[i][k] = f;
                for j in k + 1..NUM_STATES {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
        Ok(Lu { lu: a, perm })
    }

    fn solve(&self, b: [f64; NUM_STATES]) -> [f64; NUM_STATES] {
        let mut x = [0.0; NUM_STATES];
        for i in 0..NUM_STATES {
            x[i] = b[self.perm[i]] - (0..i).map(|j| self.lu[i][j] * x[j]).sum::<f64>();
        }
        for i in (0..NUM_STATES).rev() {
            let s: f64 = (i + 1..NUM_STATES).map(|j| self.lu[i][j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i][i];
        }
        x
    }
}
