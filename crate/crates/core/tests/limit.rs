use std::f64::consts::LN_2;

use gremlab::limit::{
    free_energy_curve, global_from_restricted, grem_free_energy, grem_ground_state, legendre_restrict,
    rem_free_energy_closed, rem_free_energy_variational, rem_restricted_free_energy,
};
use gremlab::scalar::{cramer_entropy, ground_state_constant, rho, t_star};
use gremlab::{OrderParameter, TabulatedFunction};
use proptest::prelude::*;

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let mut out: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc / total
        })
        .collect();
    *out.last_mut().unwrap() = 1.0;
    out
}

fn order_parameter() -> impl Strategy<Value = OrderParameter> {
    (1usize..=5).prop_flat_map(|n| {
        (
            prop::collection::vec(0.05f64..1.0, n),
            prop::collection::vec(0.05f64..1.0, n),
        )
            .prop_map(|(wx, wq)| OrderParameter::new(cumulative(&wx), cumulative(&wq)).unwrap())
    })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn variational_agrees_with_closed_form_on_grid() {
    for beta in linspace(0.1, 4.0, 40) {
        for h in linspace(0.0, 2.0, 20) {
            let c = rem_free_energy_closed(beta, h).unwrap();
            let v = rem_free_energy_variational(beta, h, 4096).unwrap();
            assert!((c - v).abs() <= 1e-8, "beta={beta} h={h}: {c} vs {v}");
        }
    }
}

#[test]
fn closed_form_reference_values() {
    let t = t_star(0.5, 1e-13).unwrap();
    let m = rho(t).unwrap() + 0.5 * t;
    assert!((rem_free_energy_closed(8.0, 0.5).unwrap() - 8.0 * m).abs() < 1e-12);
    let beta = 0.3;
    let high = LN_2 + (beta / 2.0f64).cosh().ln() + beta * beta / 2.0;
    assert!((rem_free_energy_closed(beta, 0.5).unwrap() - high).abs() < 1e-15);
}

#[test]
fn restricted_rem_via_legendre_transform() {
    let beta = 1.2;
    // p(λ) is the REM free energy with field λ/β
    let lambdas = linspace(-12.0, 12.0, 4801);
    let p = TabulatedFunction::from_fn(lambdas, |l| rem_free_energy_closed(beta, l.abs() / beta).unwrap()).unwrap();
    for t in linspace(-0.9, 0.9, 19) {
        let r = legendre_restrict(&p, t);
        assert!(!r.boundary);
        let direct = {
            let g = 1.0 - cramer_entropy(t).unwrap().value / LN_2;
            let b = beta / g.sqrt();
            let p0 = if b <= (2.0 * LN_2).sqrt() { LN_2 + b * b / 2.0 } else { b * (2.0 * LN_2).sqrt() };
            g * p0
        };
        assert!((r.value - direct).abs() < 1e-6, "t={t}: {} vs {direct}", r.value);
        assert!((rem_restricted_free_energy(beta, t).unwrap() - direct).abs() < 1e-14);
    }
}

#[test]
fn restrict_then_globalize_recovers_rem() {
    for (beta, h) in [(0.8, 0.5), (2.5, 0.5), (1.5, 1.2)] {
        let lambdas = linspace(-15.0, 15.0, 6001);
        let p = TabulatedFunction::from_fn(lambdas, |l| rem_free_energy_closed(beta, l.abs() / beta).unwrap()).unwrap();
        // constraint on the field term F = βh·N m_N, so q = βh t
        let ts = linspace(-0.98, 0.98, 393);
        let qs: Vec<f64> = ts.iter().map(|t| beta * h * t).collect();
        let vals: Vec<f64> = ts.iter().map(|&t| legendre_restrict(&p, t).value).collect();
        let f = TabulatedFunction::new(qs, vals).unwrap();
        let g = global_from_restricted(&f);
        let exact = rem_free_energy_closed(beta, h).unwrap();
        assert!((g.value - exact).abs() < 1e-6, "beta={beta} h={h}: {} vs {exact}", g.value);
    }
}

#[test]
fn restricted_free_energy_is_concave_in_constraint() {
    let beta = 1.7;
    let p = TabulatedFunction::from_fn(linspace(-10.0, 10.0, 2001), |l| {
        rem_free_energy_closed(beta, l.abs() / beta).unwrap()
    })
    .unwrap();
    let v: Vec<f64> = linspace(-0.8, 0.8, 81).iter().map(|&q| legendre_restrict(&p, q).value).collect();
    for w in v.windows(3) {
        assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-8);
    }
}

#[test]
fn branch_continuity_on_field_grid() {
    for h in linspace(0.0, 3.0, 61) {
        let b0 = rho(t_star(h, 1e-13).unwrap()).unwrap();
        let below = LN_2 + (b0 * h).cosh().ln() + b0 * b0 / 2.0;
        let above = b0 * ground_state_constant(h).unwrap();
        assert!((below - above).abs() <= 1e-12, "h={h}");
        assert!((rem_free_energy_closed(b0, h).unwrap() - above).abs() <= 1e-12);
    }
}

#[test]
fn two_level_frozen_matches_classic_formula() {
    let op = OrderParameter::new(vec![0.5, 1.0], vec![0.75, 1.0]).unwrap();
    let c = (2.0 * LN_2).sqrt();
    let gs = c * ((0.75f64 * 0.5).sqrt() + (0.25f64 * 0.5).sqrt());
    for beta in [5.0, 10.0] {
        assert!((grem_free_energy(&op, 0.0, beta).unwrap() - beta * gs).abs() < 1e-12);
    }
    assert!((grem_ground_state(&op, 0.0).unwrap() - gs).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn free_energy_over_beta_tends_to_ground_state(op in order_parameter(), h in 0.0f64..2.0) {
        let gs = grem_ground_state(&op, h).unwrap();
        let ratio = grem_free_energy(&op, h, 1e3).unwrap() / 1e3;
        prop_assert!(((ratio - gs) / gs).abs() <= 1e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn convex_in_beta_and_monotone_in_h(op in order_parameter(), h in 0.0f64..2.0) {
        let betas = linspace(0.01, 5.0, 400);
        let curve = free_energy_curve(&op, h, &betas).unwrap();
        for w in curve.values.windows(3) {
            prop_assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-10);
        }
        for w in curve.values.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-10);
        }
        let step = betas[1] - betas[0];
        let slope_bound = 2.0 * (5.0 + h) * step + 1e-9;
        for w in curve.values.windows(2) {
            prop_assert!((w[1] - w[0]).abs() <= slope_bound);
        }
        for beta in [0.3, 1.0, 3.0] {
            let lo = grem_free_energy(&op, h, beta).unwrap();
            let hi = grem_free_energy(&op, h + 0.1, beta).unwrap();
            prop_assert!(hi >= lo - 1e-10);
        }
    }
}
