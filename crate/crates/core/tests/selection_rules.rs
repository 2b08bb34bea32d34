//! Charge-parity structure of the qubit states across parameter space.

use cos2phi::elements::{matrix_elements, quarter_period_shift, symmetry_metric_of};
use cos2phi::spectrum::{charge_dispersion, solve};
use cos2phi::CircuitParams64;

fn params(ratio_ej2_ec: f64, dphi: f64, ng: f64) -> CircuitParams64 {
    let ec = 0.5;
    CircuitParams64::from_ratio(ec, ratio_ej2_ec * ec, -0.1, 0.01, dphi, ng, 60)
}

/// Both states: even sector symmetric, odd sector antisymmetric, beyond `level`.
fn selection_rule_holds(p: &CircuitParams64, level: f64) -> bool {
    let s = solve(p, 2).unwrap();
    (0..2).all(|i| {
        let shifted = quarter_period_shift(s.state(i).unwrap(), p.n_trunc);
        match symmetry_metric_of(&shifted, p.n_trunc, p.ng) {
            (Some(e), Some(o)) => e > level && o < -level,
            (Some(e), None) => e > level,
            (None, Some(o)) => o < -level,
            (None, None) => false,
        }
    })
}

#[test]
fn selection_rule_implies_small_charge_element() {
    // An offset charge moves the inversion centre off the lattice, capping
    // the metric near 0.986 at n_g = 0.25, so the grid runs over n_g too.
    let mut held = 0;
    for r in [10.0, 20.0, 40.0, 80.0, 150.0] {
        for ng in [0.0, 0.02, 0.05, 0.1, 0.25] {
            let p = params(r, 1e-4, ng);
            if selection_rule_holds(&p, 0.99) {
                held += 1;
                let m_n = matrix_elements(&p).unwrap().m_n;
                assert!(m_n < 1e-2, "E_J2/E_C {r}, n_g {ng}: M_n {m_n}");
            }
        }
    }
    assert!(held >= 5, "selection rule held at only {held} grid points");
}

#[test]
fn charge_element_is_robust_in_flux() {
    let at = |dphi| matrix_elements(&params(40.0, dphi, 0.25)).unwrap().m_n;
    let values: Vec<f64> = [1e-6, 1e-5, 1e-4].into_iter().map(at).collect();
    let (lo, hi) = values.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi / lo < 10.0, "{values:?}");
}

#[test]
fn dispersion_dichotomy() {
    // Pure potential: degenerate at half-integer offset, so the dispersion is f01(n_g = 0).
    let pure = CircuitParams64 { ec: 1.0, ejs1: 0.0, ejs2: 20.0, d1: 0.0, d2: 0.0, dphi: 0.0, ng: 0.0, n_trunc: 40 };
    let f0 = solve(&pure, 2).unwrap().f01();
    let disp = charge_dispersion(&pure, (0, 1)).unwrap();
    assert!((disp / f0 - 1.0).abs() < 1e-6, "{disp} vs {f0}");

    let p = CircuitParams64::from_ratio(1.0, 150.0, -0.1, 0.01, 1e-3, 0.25, 60);
    let f01 = solve(&p, 2).unwrap().f01();
    assert!(charge_dispersion(&p, (0, 1)).unwrap() / f01 < 1e-2);
}
