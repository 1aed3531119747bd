//! Exact rational solution of the four-state master equation, used as an
//! oracle for the floating-point solvers and the closed-form cycle rate.
//!
//! Fermi factors and tunnelling rates are drawn as dyadic rationals so the
//! same numbers are exactly representable on both sides.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qdiode::kinetics::{build_generator, steady_state, steady_state_dense};
use qdiode::model::{BathParams, FermiSet, ReducedParams, SystemParams};
use qdiode::transport::{gamma_closed_form, heat_currents_numeric, relative_difference};

type Q = BigRational;

fn q(x: f64) -> Q {
    Q::from_float(x).expect("finite")
}

fn one() -> Q {
    Q::one()
}

/// Random dyadic value in (0, 1) with `bits` fractional bits.
fn dyadic(rng: &mut ChaCha8Rng, bits: u32) -> f64 {
    let n = 1u64 << bits;
    rng.gen_range(1..n) as f64 / n as f64
}

struct Case {
    f: [f64; 4],
    gl: f64,
    gr: f64,
}

impl Case {
    fn random(rng: &mut ChaCha8Rng) -> Case {
        let mut a = dyadic(rng, 20);
        let mut b = dyadic(rng, 20);
        if a < b {
            std::mem::swap(&mut a, &mut b);
        }
        let mut c = dyadic(rng, 20);
        let mut d = dyadic(rng, 20);
        if c < d {
            std::mem::swap(&mut c, &mut d);
        }
        Case {
            f: [a, b, c, d],
            gl: rng.gen_range(1..64) as f64 / 8.0,
            gr: rng.gen_range(1..64) as f64 / 8.0,
        }
    }

    fn fermi(&self) -> FermiSet {
        FermiSet::from_values(self.f[0], self.f[1], self.f[2], self.f[3]).unwrap()
    }
}

/// Exact stationary state and the net 1→2 flux (the cycle rate).
///
/// States: 0 = empty, 1 = left dot filled, 2 = right dot filled, 3 = both.
fn exact_solution(c: &Case) -> ([Q; 4], Q) {
    let [a, b, cc, d] = c.f.map(q);
    let (gl, gr) = (q(c.gl), q(c.gr));
    // (from, to, rate)
    let transitions = [
        (0, 1, &gl * &a),
        (1, 0, &gl * (one() - &a)),
        (2, 3, &gl * &b),
        (3, 2, &gl * (one() - &b)),
        (0, 2, &gr * &cc),
        (2, 0, &gr * (one() - &cc)),
        (1, 3, &gr * &d),
        (3, 1, &gr * (one() - &d)),
    ];
    let mut m: Vec<Vec<Q>> = vec![vec![Q::zero(); 5]; 4];
    for (from, to, k) in &transitions {
        m[*to][*from] += k;
        m[*from][*from] -= k;
    }
    // normalisation replaces the last balance equation
    m[3] = vec![one(), one(), one(), one(), one()];
    for col in 0..4 {
        let pivot = (col..4).find(|&r| !m[r][col].is_zero()).expect("regular");
        m.swap(col, pivot);
        for r in 0..4 {
            if r != col && !m[r][col].is_zero() {
                let factor = &m[r][col] / &m[col][col];
                for k in col..5 {
                    let t = &factor * &m[col][k];
                    m[r][k] -= t;
                }
            }
        }
    }
    let p: [Q; 4] = std::array::from_fn(|i| &m[i][4] / &m[i][i]);
    let flux = &p[0] * &transitions[0].2 - &p[1] * &transitions[1].2;
    (p, flux)
}

fn rel(exact: &Q, approx: f64) -> f64 {
    let e = exact.to_f64().unwrap();
    relative_difference(e, approx)
}

#[test]
fn stationary_state_matches_exact_solution() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let c = Case::random(&mut rng);
        let (p, _) = exact_solution(&c);
        let gen = build_generator(&c.fermi(), c.gl, c.gr).unwrap();
        for (name, sol) in [
            ("reduction", steady_state(&gen).unwrap()),
            ("dense", steady_state_dense(&gen).unwrap()),
        ] {
            for i in 0..4 {
                let err = rel(&p[i], sol.get(i));
                assert!(err <= 1e-13, "{name} p[{i}] off by {err:e} for f = {:?}", c.f);
            }
        }
    }
}

#[test]
fn net_rates_equal_exact_cycle_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let c = Case::random(&mut rng);
        let (_, flux) = exact_solution(&c);
        let gen = build_generator(&c.fermi(), c.gl, c.gr).unwrap();
        let rates = gen.net_rates(&steady_state(&gen).unwrap());
        let scale = rates.flux_scale();
        for (k, r) in rates.as_array().iter().enumerate() {
            let err = (flux.to_f64().unwrap() - r).abs() / scale;
            assert!(err <= 1e-14, "edge {k}: {err:e}");
        }
    }
}

/// `γ_Lγ_R/(γ_L+γ_R) · (a d (1−b)(1−c) − (1−a)(1−d) b c) / (1 − (a−b)(c−d))`
/// with `a, b` the left and `c, d` the right Fermi factors, in exact arithmetic.
fn exact_closed_form(c: &Case) -> Q {
    let [a, b, cc, d] = c.f.map(q);
    let (gl, gr) = (q(c.gl), q(c.gr));
    let pref = &gl * &gr / (&gl + &gr);
    let num = &a * &d * (one() - &b) * (one() - &cc) - (one() - &a) * (one() - &d) * &b * &cc;
    let den = one() - (&a - &b) * (&cc - &d);
    pref * num / den
}

#[test]
fn closed_form_cycle_rate_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let c = Case::random(&mut rng);
        let (_, flux) = exact_solution(&c);
        assert_eq!(exact_closed_form(&c), flux, "f = {:?}", c.f);
        let g = gamma_closed_form(&c.fermi(), c.gl, c.gr).unwrap();
        assert!(
            rel(&flux, g) <= 1e-13,
            "floating closed form off by {:e}",
            rel(&flux, g)
        );
    }
}

#[test]
fn optimum_condition_ratio_is_scaled_negative_cycle_rate() {
    // The polynomial ratio whose barrier derivative vanishes at the optimum
    // equals -Γ (γ_L+γ_R)/(γ_Lγ_R), so it shares its stationary points with Γ.
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..100 {
        let c = Case::random(&mut rng);
        let [fl1, fl2, fr1, fr2] = c.f.map(q);
        let num = &fr1 * &fr2 * &fl2 - &fr1 * &fr2 * &fl1 + &fl1 * &fl2 * &fr1 - &fl1 * &fl2 * &fr2 + &fl1 * &fr2
            - &fl2 * &fr1;
        let den = &fl1 * &fr1 + &fl2 * &fr2 - &fl1 * &fr2 - &fl2 * &fr1 - one();
        let ratio = num / den;
        let (gl, gr) = (q(c.gl), q(c.gr));
        let (_, flux) = exact_solution(&c);
        assert_eq!(ratio, -(flux * (&gl + &gr) / (&gl * &gr)));
    }
}

#[test]
fn physical_inputs_reproduce_exact_current() {
    // Temperatures and levels chosen so the reduced parameters are simple.
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..100 {
        let u = rng.gen_range(1..16) as f64 / 4.0;
        let sys = SystemParams::new(
            rng.gen_range(-8..8) as f64 / 4.0,
            rng.gen_range(-8..8) as f64 / 4.0,
            u,
            1.0,
            2.0,
        )
        .unwrap();
        let bl = BathParams::new(rng.gen_range(1..40) as f64 / 16.0, rng.gen_range(-8..8) as f64 / 4.0).unwrap();
        let br = BathParams::new(rng.gen_range(1..40) as f64 / 16.0, rng.gen_range(-8..8) as f64 / 4.0).unwrap();
        if bl.temperature == br.temperature {
            continue;
        }
        let rp = ReducedParams::new(
            (sys.eps_l - bl.mu) / u,
            (sys.eps_r - br.mu) / u,
            bl.temperature / u,
            br.temperature / u,
        )
        .unwrap();
        let fs = qdiode::model::fermi_set(&rp);
        let c = Case {
            f: [fs.fl1(), fs.fl2(), fs.fr1(), fs.fr2()],
            gl: 1.0,
            gr: 2.0,
        };
        let (_, flux) = exact_solution(&c);
        let j = heat_currents_numeric(&sys, &bl, &br).unwrap();
        let exact_j = (&flux * q(u)).to_f64().unwrap();
        assert!(
            relative_difference(exact_j, j.j_r) <= 1e-12 || exact_j.abs() < 1e-280,
            "{exact_j:e} vs {:e}",
            j.j_r
        );
        assert_eq!(j.j_l, -j.j_r);
        assert!(flux.is_zero() || flux.is_positive() == (br.temperature > bl.temperature));
    }
}

#[test]
fn exact_state_is_normalised() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let c = Case::random(&mut rng);
    let (p, _) = exact_solution(&c);
    let total: Q = p.iter().cloned().sum();
    assert_eq!(total, Q::from_integer(BigInt::from(1)));
}
