mod common;

use common::{families, rel_err, theta_from_unit};
use expgeo::convex::{bregman, dual_point, solve_inverse_gradient};
use expgeo::linalg::{fd_gradient, max_abs_diff};
use expgeo::{log_density, log_density_bregman};
use proptest::prelude::*;

fn unit_pair() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    (0..5usize).prop_flat_map(|i| {
        let d = families()[i].dimension();
        (
            Just(i),
            prop::collection::vec(-1.0..=1.0f64, d),
            prop::collection::vec(-1.0..=1.0f64, d),
        )
    })
}

proptest! {
    #[test]
    fn bregman_is_nonnegative_and_vanishes_only_on_the_diagonal((i, u, v) in unit_pair()) {
        let fam = &families()[i];
        let p = fam.to_mean(&theta_from_unit(fam, &u)).unwrap();
        let q = fam.to_mean(&theta_from_unit(fam, &v)).unwrap();
        let b = bregman(fam.dual(), &p, &q).unwrap();
        prop_assert!(b >= 0.0);
        prop_assert_eq!(bregman(fam.dual(), &p, &p).unwrap(), 0.0);
        if max_abs_diff(&p, &q) > 1e-3 {
            prop_assert!(b > 1e-12);
        }
    }

    #[test]
    fn duality_flip((i, u, v) in unit_pair()) {
        let fam = &families()[i];
        let p = fam.to_mean(&theta_from_unit(fam, &u)).unwrap();
        let q = fam.to_mean(&theta_from_unit(fam, &v)).unwrap();
        let lhs = bregman(fam.dual(), &p, &q).unwrap();
        let rhs = bregman(
            fam.log_partition(),
            &dual_point(fam.dual(), &q).unwrap(),
            &dual_point(fam.dual(), &p).unwrap(),
        )
        .unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + lhs.abs()), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn round_trip_through_both_inverses((i, u, _v) in unit_pair()) {
        let fam = &families()[i];
        let numeric = fam.clone().with_numerical_inverse();
        let theta = theta_from_unit(fam, &u);
        let mu = fam.to_mean(&theta).unwrap();
        for f in [fam, &numeric] {
            let back = f.to_natural(&mu).unwrap();
            prop_assert!(back.iter().zip(&theta).all(|(a, b)| rel_err(*a, *b) <= 1e-8));
            let again = f.to_mean(&back).unwrap();
            prop_assert!(again.iter().zip(&mu).all(|(a, b)| rel_err(*a, *b) <= 1e-8));
        }
        let solved = solve_inverse_gradient(fam.log_partition(), &mu).unwrap();
        prop_assert!(solved.iter().zip(&theta).all(|(a, b)| rel_err(*a, *b) <= 1e-8));
    }

    #[test]
    fn analytic_gradients_match_finite_differences((i, u, _v) in unit_pair()) {
        let fam = &families()[i];
        let theta = theta_from_unit(fam, &u);
        let mu = fam.to_mean(&theta).unwrap();
        for (f, x) in [(fam.log_partition(), &theta), (fam.dual(), &mu)] {
            let analytic = f.gradient(x).unwrap();
            let fd = fd_gradient(|y| f.value(y).unwrap(), x, 1e-6);
            for (a, b) in analytic.iter().zip(&fd) {
                prop_assert!(rel_err(*a, *b) <= 1e-5, "{} vs {}", a, b);
            }
        }
    }

    #[test]
    fn bregman_form_of_the_density((i, u, v) in unit_pair()) {
        let fam = &families()[i];
        let theta = theta_from_unit(fam, &u);
        // Observations: the mean at another parameter, rounded to a valid
        // sufficient statistic for the discrete families.
        let m = fam.to_mean(&theta_from_unit(fam, &v)).unwrap();
        let x: Vec<f64> = match fam.name() {
            "bernoulli" => vec![m[0].round()],
            "poisson" => vec![m[0].round()],
            "categorical" => {
                let k = m.iter().enumerate().fold((m.len(), 1.0 - m.iter().sum::<f64>()), |best, (j, &p)| if p > best.1 { (j, p) } else { best }).0;
                (0..m.len()).map(|j| if j == k { 1.0 } else { 0.0 }).collect()
            }
            _ => m,
        };
        let a = log_density(fam, &x, &theta).unwrap();
        let b = log_density_bregman(fam, &x, &theta).unwrap();
        prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
    }
}
