mod common;

use cc_tunnel::matelem::*;
use cc_tunnel::model::*;
use common::{barrier_by_quadrature, field_by_quadrature, integrate, mode_product};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

#[test]
fn partial_overlap_of_first_two_modes() {
    let reference = integrate(|y| mode_product(1, 2, 5.0, y), 1.0, 3.0, 1e-14);
    let closed = well_overlap_integral(1.0, 1.0, 3.0, 1, 2, 5.0).unwrap();
    assert!((closed - reference).abs() < 1e-12, "{closed} vs {reference}");
}

#[test]
fn orthonormal_modes() {
    for i in 1..=8 {
        for j in 1..=8 {
            let v = well_overlap_integral(1.0, 0.0, 5.0, i, j, 5.0).unwrap();
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-14, "({i},{j}) -> {v}");
        }
    }
    assert!((well_overlap_integral(1.0, 0.0, 2.5, 1, 1, 5.0).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn barrier_with_one_band_inside_the_well() {
    let p = ModelParams::new(1.0, 1.0, 5.0, 5.0, 0.0);
    let reference = integrate(|y| mode_product(1, 1, 5.0, y), 0.5, 2.5, 1e-14);
    assert!((barrier_matrix_element(1, 1, 2.0, &p) - reference).abs() < TOL);
    assert_eq!(barrier_matrix_element(1, 1, 0.0, &p), 0.0);
    let far = integration_domain(&p).x_right + 1.0;
    assert_eq!(barrier_matrix_element(1, 1, far, &p), 0.0);
}

#[test]
fn two_by_two_coupling_at_one_position() {
    let p = ModelParams { n_max: 1, ..ModelParams::new(1.0, 1.0, 5.0, 5.0, 0.05) };
    let ch = open_channels(&p, channel_energy(&p, 1) + 0.5).unwrap();
    let v = assemble_coupling(1.8, &ch, &p).into_inner();
    let w = 4.0 * barrier_by_quadrature(1, 1, 1.8, &p);
    let f = -4.0 * field_by_quadrature(1, 1, 1.8, &p);
    assert!(f != 0.0 && w != 0.0);
    for (r, c, expect) in [(0, 0, w), (1, 1, w), (0, 1, f), (1, 0, f)] {
        assert!((v[(r, c)] - expect).abs() < 4.0 * TOL, "({r},{c}) {} vs {expect}", v[(r, c)]);
    }
}

#[test]
fn derived_field_covering_the_well_is_diagonal() {
    let p = ModelParams::new(1.0, 20.0, 5.0, 5.0, 0.3).with_convention(Convention::Derived);
    assert!((field_matrix_element(1, 1, 0.0, &p) - 0.3).abs() < 1e-15);
    assert!(field_matrix_element(1, 2, 0.0, &p).abs() < 1e-15);
}

fn any_params() -> impl Strategy<Value = ModelParams> {
    (0.1..3.0f64, 0.0..20.0f64, 0.05..8.0f64, 0.0..8.0f64, 0.0..0.5f64, any::<bool>()).prop_map(|(a, b, d, l, u, derived)| {
        let c = if derived { Convention::Derived } else { Convention::PaperCode };
        ModelParams::new(a, b, d, l, u).with_convention(c)
    })
}

proptest! {
    #[test]
    fn closed_forms_match_quadrature(p in any_params(), t in -1.3..1.3f64, i in 1usize..6, j in 1usize..6) {
        let x = t * integration_domain(&p).x_right;
        let w = barrier_matrix_element(i, j, x, &p);
        prop_assert!((w - barrier_by_quadrature(i, j, x, &p)).abs() < TOL);
        let f = field_matrix_element(i, j, x, &p);
        prop_assert!((f - field_by_quadrature(i, j, x, &p)).abs() < TOL);
    }

    #[test]
    fn barrier_is_even(p in any_params(), t in 0.0..1.3f64, i in 1usize..6, j in 1usize..6) {
        let x = t * integration_domain(&p).x_right;
        prop_assert!((barrier_matrix_element(i, j, x, &p) - barrier_matrix_element(i, j, -x, &p)).abs() < 1e-14);
    }

    #[test]
    fn field_window_translates(p in any_params(), x in -5.0..5.0f64, dx in 0.0..1.0f64) {
        let open = |x: f64| (2.0 * (x - p.b), 2.0 * (x + p.b));
        let (lo0, hi0) = open(x);
        let (lo1, hi1) = open(x + dx);
        prop_assert!((lo1 - lo0 - 2.0 * dx).abs() < 1e-12 && (hi1 - hi0 - 2.0 * dx).abs() < 1e-12);
        // the clamped window is the translated window intersected with the fixed range
        if let (Some((a0, _)), Some((a1, _))) = (field_window(x, &p), field_window(x + dx, &p)) {
            prop_assert!(a1 >= a0 - 1e-12);
        }
    }

    #[test]
    fn coupling_is_symmetric_and_spin_exchange_invariant(p in any_params(), t in -1.2..1.2f64) {
        let n = 3;
        let p = ModelParams { n_max: n, ..p };
        let ch = open_channels(&p, channel_energy(&p, n) + 0.1).unwrap();
        let v = assemble_coupling(t * integration_domain(&p).x_right, &ch, &p).into_inner();
        prop_assert_eq!(v.clone(), v.transpose());
        let swap = |c: usize| (c + n) % (2 * n);
        for r in 0..2 * n {
            for c in 0..2 * n {
                prop_assert_eq!(v[(r, c)], v[(swap(r), swap(c))]);
            }
        }
    }
}

#[test]
fn derived_coupling_vanishes_outside_domain() {
    let p = ModelParams::new(1.0, 2.0, 5.0, 3.0, 0.1).with_convention(Convention::Derived);
    let ch = open_channels(&p, channel_energy(&p, 2) + 0.1).unwrap();
    let xr = integration_domain(&p).x_right;
    for x in [xr, xr + 0.01, xr + 5.0, -xr, -xr - 3.0] {
        assert!(assemble_coupling(x, &ch, &p).into_inner().iter().all(|&e| e == 0.0), "x = {x}");
    }
}
