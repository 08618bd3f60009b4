mod common;

use common::*;
use walkdet::ldp::*;
use walkdet::spectral::*;

#[test]
fn entropy_at_minus_h_and_its_slope() {
    for c in [two_state(), triangle(), random_chain(&mut rng(3), 6, 0.4)] {
        let h = entropy_rate(&c);
        let s = entropy_density(&c, -h).unwrap();
        assert!((s.s - h).abs() < 1e-8);
        let d = 1e-4;
        let slope = (entropy_density(&c, -h + d).unwrap().s - entropy_density(&c, -h - d).unwrap().s) / (2.0 * d);
        assert!((slope + 1.0).abs() < 1e-4, "{slope}");
    }
}

#[test]
fn legendre_round_trip() {
    let c = two_state();
    let range = rho_extremes(&c);
    let width = range.rho_max - range.rho_min;
    let h = 1e-5 * width;
    for k in 1..=50 {
        let rho = range.rho_min + width * k as f64 / 51.0;
        let t = -(entropy_density(&c, rho + h).unwrap().s - entropy_density(&c, rho - h).unwrap().s) / (2.0 * h);
        let back = log_lambda_deriv(&c, t).unwrap();
        assert!((back - rho).abs() < 1e-5, "rho {rho}: t {t} gives {back}");
    }
}

#[test]
fn curve_is_nonnegative_and_concave() {
    for c in [two_state(), triangle(), random_chain(&mut rng(5), 5, 0.5)] {
        let curve = entropy_curve(&c).unwrap();
        assert!(curve.s_values.iter().all(|&s| s >= -1e-9));
        // interior points are evenly spaced
        let inner = &curve.s_values[1..curve.s_values.len() - 1];
        for w in inner.windows(3) {
            assert!(w[1] >= 0.5 * (w[0] + w[2]) - 1e-8);
        }
        assert!(curve.rho_grid.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn rate2_domain_boundary() {
    let c = triangle();
    let range = rho_extremes(&c);
    for k in 1..10 {
        let rho = range.rho_min + (range.rho_max - range.rho_min) * k as f64 / 10.0;
        let s = entropy_density(&c, rho).unwrap().s;
        let edge = (2.0 * s).sqrt();
        assert!(rate2(&c, rho, 0.999 * edge).unwrap().i_value.is_finite());
        assert!(rate2(&c, rho, -0.999 * edge).unwrap().i_value.is_finite());
        assert_eq!(rate2(&c, rho, 1.001 * edge).unwrap().i_value, f64::INFINITY);
    }
}

#[test]
fn path_measure_matches_rate_function() {
    let c = triangle();
    for seed in [0, 1, 2] {
        let measure = enumerate_path_measure(&c, 12, seed).unwrap();
        assert_eq!(measure.points.len() as f64, count_paths(&c, 12));
        let bins = check_measure(&c, &measure, DEFAULT_BIN_WIDTH, DEFAULT_MIN_COUNT).unwrap();
        assert!(!bins.is_empty());
        for b in &bins {
            assert!(b.discrepancy() <= 0.25, "{b:?}");
        }
    }
}
