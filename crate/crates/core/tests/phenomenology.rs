//! Qualitative behaviour of the diode: occupation domains, the optimal
//! barrier, rectification trends and switching.

use qdiode::analysis::{
    classify_domain, figure, rectification_reduced, switch_state_reduced, Domain, FigureName, SwitchState,
};
use qdiode::model::{fermi_factor, Lead, ReducedParams};
use qdiode::transport::{heat_currents_closed_form, heat_currents_oracle, max_heat_current, optimal_barrier, Scan};

fn rp(chi_l: f64, chi_r: f64, xi_l: f64, xi_r: f64) -> ReducedParams {
    ReducedParams::new(chi_l, chi_r, xi_l, xi_r).unwrap()
}

fn j(p: &ReducedParams) -> f64 {
    heat_currents_closed_form(p, 1.0, 1.0, 1.0).unwrap().j_r
}

#[test]
fn fermi_factors_cross_one_half_at_domain_edges() {
    for xi in [0.02, 0.1, 0.5, 2.0, 10.0] {
        // f1 at chi = 0 and f2 (chi + 1 = 0) at chi = -1
        assert_eq!(fermi_factor(0.0, xi), 0.5);
        assert_eq!(fermi_factor(-1.0 + 1.0, xi), 0.5);
        assert!((fermi_factor(-0.5, xi) + fermi_factor(0.5, xi) - 1.0).abs() <= f64::EPSILON);
    }
}

#[test]
fn saturated_domains_block_the_cycle() {
    let (xl, xr) = (0.05, 0.5);
    let peak = max_heat_current(xl, xr, 1.0, 1.0, 1.0).unwrap();
    for (chi, want) in [(-3.0, Domain::D1), (2.0, Domain::D5)] {
        assert_eq!(classify_domain(chi, xl, 0.01).unwrap().domain, want);
        let ratio = j(&rp(chi, -0.5, xl, xr)).abs() / peak;
        assert!(ratio < 1e-10, "{want}: {ratio:e}");
    }
    // the intermediate domains carry reduced but finite current
    for (chi, want) in [(-1.1, Domain::D2), (0.1, Domain::D4)] {
        assert_eq!(classify_domain(chi, 0.2, 0.01).unwrap().domain, want);
        let ratio = j(&rp(chi, -0.5, 0.2, xr)).abs() / max_heat_current(0.2, xr, 1.0, 1.0, 1.0).unwrap();
        assert!(ratio > 1e-3 && ratio < 1.0, "{want}: {ratio}");
    }
}

#[test]
fn optimum_sits_at_minus_one_half_for_any_temperatures() {
    let scan = Scan::new(-2.0, 1.0, 301).unwrap();
    for (xl, xr) in [(0.2, 0.5), (0.5, 1.0), (0.05, 3.0), (4.0, 0.3)] {
        for lead in [Lead::Left, Lead::Right] {
            for other in [-2.0, -0.5, 0.7] {
                let base = rp(other, other, xl, xr);
                let rep = optimal_barrier(lead, &base, 1.0, 1.0, 1.0, scan).unwrap();
                assert!((rep.chi_star + 0.5).abs() <= 1e-6, "{lead} {xl} {xr}: {}", rep.chi_star);
            }
        }
    }
}

#[test]
fn fixture_current_matches_peak_formula() {
    let p = rp(-0.5, -0.5, 0.2, 0.5);
    let oracle = heat_currents_oracle(&p, 1.0, 1.0, 1.0).unwrap().j_r;
    let peak = max_heat_current(0.2, 0.5, 1.0, 1.0, 1.0).unwrap();
    assert!((oracle - 0.04827081033718789).abs() <= 1e-15);
    assert!((peak - oracle).abs() <= 1e-15);
}

#[test]
fn no_rectification_on_magic_mean_or_equal_barriers() {
    for xi_hot in [0.3, 0.5, 1.0, 3.0] {
        for dchi in [0.5, 1.0, 3.0] {
            let r =
                rectification_reduced(&rp(-0.5 - dchi / 2.0, -0.5 + dchi / 2.0, 0.2, xi_hot), 1.0, 1.0, 1.0).unwrap();
            assert!(r.r <= 1e-12);
        }
        let r = rectification_reduced(&rp(1.3, 1.3, 0.2, xi_hot), 1.0, 1.0, 1.0).unwrap();
        assert!(r.r <= 1e-12);
    }
}

#[test]
fn rectification_grows_with_barrier_and_temperature_contrast() {
    let r = |chi_bar: f64, dchi: f64, xc: f64, xh: f64| {
        rectification_reduced(&rp(chi_bar - dchi / 2.0, chi_bar + dchi / 2.0, xc, xh), 1.0, 1.0, 1.0)
            .unwrap()
            .r
    };
    let mut last = 0.0;
    for k in 1..=20 {
        let now = r(1.5, 0.2 * k as f64, 0.1, 0.5);
        assert!(now > last);
        last = now;
    }
    assert!(last > 0.999999);
    assert!(r(1.0, 1.0, 0.2, 1.0) > r(1.0, 1.0, 0.2, 0.5));
    assert!(r(1.0, 1.0, 0.1, 0.5) > r(1.0, 1.0, 0.2, 0.5));
    // moving the mean barrier off the magic mean switches rectification on;
    // far from it R saturates rather than growing monotonically
    assert!(r(-0.5, 1.0, 0.2, 0.5) <= 1e-12);
    assert!(r(0.0, 1.0, 0.2, 0.5) > 0.5);
    assert!(r(0.5, 1.0, 0.2, 0.5) > r(0.0, 1.0, 0.2, 0.5));
    assert!(r(3.0, 1.0, 0.2, 0.5) > 0.9);
}

#[test]
fn complete_rectification_curve_reaches_micro_reverse_current() {
    let t = figure(FigureName::Fig5b).unwrap();
    let col = |n: &str| t.column_index(n).unwrap();
    let (c, r, jf, jr) = (col("curve"), col("R"), col("J_forward"), col("J_reverse"));
    let blue: Vec<_> = t.rows.iter().filter(|row| row[c].as_str() == Some("blue")).collect();
    let ratios: Vec<f64> = blue
        .iter()
        .map(|row| row[jr].as_f64().unwrap() / row[jf].as_f64().unwrap())
        .collect();
    let k = ratios.iter().position(|&x| x <= 1e-6).expect("ratio falls below 1e-6");
    assert!(k > 0 && ratios[k - 1] > 1e-6);
    assert!(blue[k][r].as_f64().unwrap() > 0.9999);
}

#[test]
fn cold_bath_is_the_sensitive_one() {
    let r = |xc: f64, xh: f64, dchi: f64| {
        rectification_reduced(&rp(1.5 - dchi / 2.0, 1.5 + dchi / 2.0, xc, xh), 1.0, 1.0, 1.0)
            .unwrap()
            .r
    };
    for dchi in [0.3, 0.6, 1.0] {
        let base = r(0.2, 0.5, dchi);
        assert!((r(0.1, 0.5, dchi) - base).abs() > (r(0.2, 0.6, dchi) - base).abs());
        assert!((r(0.3, 0.5, dchi) - base).abs() > (r(0.2, 0.4, dchi) - base).abs());
    }
}

#[test]
fn cold_barrier_switches_the_current() {
    for xi_cold in [0.02, 0.05] {
        let on = switch_state_reduced(&rp(-0.5, -0.5, xi_cold, 0.5), 1.0, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(on.state, SwitchState::On);
        for chi in [0.5, 1.0, 2.0, 3.0] {
            let off = switch_state_reduced(&rp(chi, -0.5, xi_cold, 0.5), 1.0, 1.0, 1.0, 0.5).unwrap();
            assert_eq!(off.state, SwitchState::Off);
            assert!(off.ratio / on.ratio <= 1e-4, "chi {chi}: {:e}", off.ratio);
        }
    }
}
