use super::*;
use approx::assert_abs_diff_eq;
use proptest::prelude::*;

const KAPPAS: [f64; 6] = [0.5, 2.0, 8.0 / 3.0, 4.0, 6.0, 8.0 - 1e-6];

#[test]
fn special_values_kappa_2() {
    let p = SpectrumParams::new(2.0).unwrap();
    assert_eq!(p.a, 1.0);
    assert_eq!(p.d, 1.25);
    assert_eq!(p.r_c, 2.5);
    assert_eq!(p.r_star, 1.0);
    assert_abs_diff_eq!(p.beta_hash, -2.0 / 3.0, epsilon = 1e-15);
    assert_abs_diff_eq!(p.beta_star, -0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(p.alpha_star, 2.0 / 3.0, epsilon = 1e-15);
    // unrationalised forms
    let s = 10f64.sqrt();
    assert_abs_diff_eq!(p.beta_plus, -1.0 + 2.0 / (14.0 - 4.0 * s), epsilon = 1e-14);
    assert_abs_diff_eq!(p.beta_minus, -1.0 + 2.0 / (14.0 + 4.0 * s), epsilon = 1e-15);
    assert_abs_diff_eq!(p.r_plus, 2.0 * (s - 2.0), epsilon = 1e-15);
    assert_abs_diff_eq!(p.alpha_plus, 1.0 / (1.0 - p.beta_plus), epsilon = 1e-13);
}

#[test]
fn parameter_ordering() {
    for kappa in [0.1, 0.5, 1.0, 2.0, 4.0, 6.0, 7.9, 8.0, 8.5, 12.0, 40.0] {
        let p = SpectrumParams::new(kappa).unwrap();
        assert!(-1.0 < p.beta_minus, "κ={kappa}");
        assert!(p.beta_minus < p.beta_hash);
        assert!(p.beta_hash <= p.beta_star);
        assert!(p.beta_star <= p.beta_plus + 1e-15);
        assert!(p.beta_plus <= 1.0);
        assert!(0.0 < p.r_star && p.r_star <= p.r_c);
    }
    let p = SpectrumParams::new(8.0).unwrap();
    assert_eq!(p.beta_plus, 1.0);
    assert_eq!(p.beta_star, 1.0);
    assert_eq!(p.alpha_plus, f64::INFINITY);
    assert_eq!(p.holder_exponent(), 0.0);
}

#[test]
fn holder_exponent_matches_direct_form() {
    for kappa in [0.5, 2.0, 4.0, 6.0] {
        let p = SpectrumParams::new(kappa).unwrap();
        let beta_plus = -1.0 + kappa / (12.0 + kappa - 4.0 * (8.0 + kappa).sqrt());
        assert_abs_diff_eq!(p.holder_exponent(), (1.0 - beta_plus) / 2.0, epsilon = 1e-12);
    }
}

#[test]
fn exponent_point_examples() {
    for kappa in KAPPAS {
        let p = SpectrumParams::new(kappa).unwrap();
        let zero = ExponentPoint::from_r(kappa, 0.0).unwrap();
        assert_eq!((zero.lambda, zero.zeta, zero.rho), (0.0, 0.0, 0.0));
        assert_abs_diff_eq!(zero.beta, p.beta_hash, epsilon = 1e-15);

        let star = ExponentPoint::from_r(kappa, p.r_star).unwrap();
        assert_abs_diff_eq!(star.lambda, p.d, epsilon = 1e-12);
        assert_abs_diff_eq!(star.zeta, 2.0 - p.d, epsilon = 1e-12);
        assert_abs_diff_eq!(star.beta, p.beta_star, epsilon = 1e-9);

        let c = ExponentPoint::from_r(kappa, p.r_c).unwrap();
        assert_abs_diff_eq!(c.beta, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.lambda, p.lambda_c, epsilon = 1e-12);
        assert!(ExponentPoint::from_r(kappa, p.r_c + 1e-9).is_err());
        assert!(ExponentPoint::from_lambda(kappa, p.lambda_c + 1e-9).is_err());
    }
    let (_, dbeta) = dims_of_beta(2.0, -0.5).unwrap();
    assert_abs_diff_eq!(dbeta, 1.25, epsilon = 1e-14);
}

#[test]
fn rho_examples() {
    assert_abs_diff_eq!(rho_of_beta(2.0, 0.0).unwrap(), 1.0, epsilon = 1e-15);
    for kappa in KAPPAS {
        let p = SpectrumParams::new(kappa).unwrap();
        assert_abs_diff_eq!(rho_of_beta(kappa, p.beta_hash).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho_of_beta(kappa, p.beta_plus).unwrap(), 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(rho_of_beta(kappa, p.beta_minus).unwrap(), 2.0, epsilon = 1e-10);
    }
    assert!(rho_of_beta(2.0, -1.0).is_err());
}

#[test]
fn dims_examples() {
    for kappa in KAPPAS {
        let p = SpectrumParams::new(kappa).unwrap();
        let (dhat, _) = dims_of_beta(kappa, p.beta_hash).unwrap();
        assert_abs_diff_eq!(dhat, 1.0, epsilon = 1e-12);
        let (_, dstar) = dims_of_beta(kappa, p.beta_star).unwrap();
        assert_abs_diff_eq!(dstar, p.d, epsilon = 1e-10);
        let (dh, db) = dims_of_beta(kappa, p.beta_plus).unwrap();
        assert_abs_diff_eq!(dh, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(db, 0.0, epsilon = 1e-9);
        assert!(dims_of_beta(kappa, p.beta_minus - 1e-3).is_err());
    }
    let (dhat, dbeta) = dims_of_beta(8.0, 1.0).unwrap();
    assert_eq!(dbeta, 2.0);
    assert_eq!(dhat, 0.0);
}

#[test]
fn f_tip_examples() {
    assert_abs_diff_eq!(f_tip(2.0, 2.0 / 3.0).unwrap(), 1.25, epsilon = 1e-14);
    // unexpanded form
    for kappa in [2.0f64, 4.0, 6.0] {
        for alpha in [0.6, 0.8, 1.0, 1.5] {
            let direct = alpha * (1.0 - 4.0 / kappa) + (4.0 + kappa).powi(2) / (8.0 * kappa)
                - kappa / 8.0 * alpha * alpha / (2.0 * alpha - 1.0);
            assert_abs_diff_eq!(f_tip(kappa, alpha).unwrap(), direct, epsilon = 1e-13);
        }
        let p = SpectrumParams::new(kappa).unwrap();
        assert_abs_diff_eq!(f_tip(kappa, p.alpha_minus).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f_tip(kappa, p.alpha_plus).unwrap(), 0.0, epsilon = 1e-12);
    }
    assert!(f_tip(2.0, 0.5).is_err());
}

#[test]
fn f_bulk_example() {
    assert_abs_diff_eq!(f_bulk(4.0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
    assert!(f_bulk(4.0, 0.4).is_err());
}

#[test]
fn forward_examples() {
    let f = forward_exponents(2.0, 0.6).unwrap();
    assert_abs_diff_eq!(f.r_u, -4.0, epsilon = 1e-12);
    assert_abs_diff_eq!(f.lambda_u, 6.0, epsilon = 1e-12);
    assert_abs_diff_eq!(f.xi_u, 4.0, epsilon = 1e-12);
    assert_abs_diff_eq!(f.rho_u, 0.8, epsilon = 1e-12);
    let g = forward_exponents(2.0, 2.0 / 3.0).unwrap();
    assert_abs_diff_eq!(g.rho_u, 0.75, epsilon = 1e-12);
    assert_abs_diff_eq!(2.0 - g.rho_u, f_tip(2.0, 2.0 / 3.0).unwrap(), epsilon = 1e-12);
    assert!(forward_exponents(2.0, 0.5 + 1e-9).unwrap().rho_u > 1e6);
    assert!(forward_exponents(8.0, 0.6).is_err());
    assert!(forward_exponents(2.0, 0.5).is_err());
}

#[test]
fn dim_of_r_matches_dims_of_beta() {
    for kappa in [2.0, 4.0, 6.0] {
        let p = SpectrumParams::new(kappa).unwrap();
        for k in 0..50 {
            let r = p.r_minus + (p.r_plus - p.r_minus) * k as f64 / 49.0;
            let e = ExponentPoint::from_r(kappa, r).unwrap();
            let (_, db) = dims_of_beta(kappa, e.beta).unwrap();
            assert_abs_diff_eq!(dim_of_r(kappa, r), db, epsilon = 1e-10);
        }
    }
}

#[test]
fn figure1_maxima() {
    let curves = figure1_curves(&[2.0, 4.0, 6.0], 401).unwrap();
    for (c, d) in curves.iter().zip([1.25, 1.5, 1.75]) {
        assert_abs_diff_eq!(c.max_value, d, epsilon = 1e-10);
        assert_eq!(c.alpha_at_max, c.alpha_star);
        assert_abs_diff_eq!(c.f_tip[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(*c.f_tip.last().unwrap(), 0.0, epsilon = 1e-12);
    }
    assert!(figure1_curves(&[9.0], 10).is_err());
    let k8 = figure1_curves(&[8.0], 100).unwrap();
    assert!(k8[0].max_value < 2.0 && k8[0].max_value > 1.99);
}

#[test]
fn table_rows_consistent() {
    let rows = spectrum_table(6.0, 101).unwrap();
    for row in &rows {
        assert_abs_diff_eq!(row.dbeta, row.f_tip, epsilon = 1e-10);
        assert_abs_diff_eq!(row.dhat, 1.0 - row.rho / 2.0, epsilon = 1e-10);
    }
}

proptest! {
    #[test]
    fn beta_increasing_in_r(kappa in 0.2f64..8.0, t in 0.0f64..1.0, dt in 1e-6f64..1.0) {
        let r_c = SpectrumParams::new(kappa).unwrap().r_c;
        let r1 = -20.0 + t * (r_c + 20.0);
        let r2 = r1 + dt * (r_c - r1);
        prop_assume!(r2 > r1);
        let b1 = ExponentPoint::from_r(kappa, r1).unwrap().beta;
        let b2 = ExponentPoint::from_r(kappa, r2).unwrap().beta;
        prop_assert!(b2 > b1);
    }

    #[test]
    fn r_lambda_roundtrip(kappa in 0.2f64..8.0, t in 0.0f64..1.0) {
        let p = SpectrumParams::new(kappa).unwrap();
        let r = -5.0 + t * (p.r_c - 1e-6 + 5.0);
        let e = ExponentPoint::from_r(kappa, r).unwrap();
        prop_assert!((r_of_lambda(kappa, e.lambda) - r).abs() <= 1e-12 * (1.0 + r.abs()));
    }

    #[test]
    fn q_relation(kappa in 0.2f64..8.0, r in -10.0f64..0.5) {
        let e = ExponentPoint::from_r(kappa, r).unwrap();
        prop_assert!(((1.0 - 2.0 * e.q) / (1.0 + 2.0 * e.q) - e.beta).abs() <= 1e-12);
        prop_assert!((e.rho - (e.zeta + e.lambda * e.beta)).abs() <= 1e-10 * (1.0 + e.rho));
        prop_assert!(e.rho >= 0.0);
    }

    #[test]
    fn routes_agree(kappa in 0.2f64..8.0, t in 0.01f64..0.99) {
        let p = SpectrumParams::new(kappa).unwrap();
        let beta = p.beta_minus + t * (p.beta_plus - p.beta_minus);
        let e = ExponentPoint::from_beta(kappa, beta).unwrap();
        prop_assert!((e.rho - rho_of_beta(kappa, beta).unwrap()).abs() <= 1e-9);
        let l = ExponentPoint::from_lambda(kappa, e.lambda).unwrap();
        prop_assert!((l.r - e.r).abs() <= 1e-9 * (1.0 + e.r.abs()));
        let (dhat, dbeta) = dims_of_beta(kappa, beta).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&dhat));
        prop_assert!(dbeta >= -1e-12 && dbeta <= p.d + 1e-12);
    }
}

#[test]
fn single_row_matches_table_and_rejects_outside() {
    let rows = spectrum_table(4.0, 11).unwrap();
    let row = spectrum_row(4.0, rows[3].alpha).unwrap();
    assert_eq!(row, rows[3]);
    let p = SpectrumParams::new(4.0).unwrap();
    assert!(spectrum_row(4.0, p.alpha_minus * 0.99).is_err());
    assert!(spectrum_row(4.0, p.alpha_plus * 1.01).is_err());
}
