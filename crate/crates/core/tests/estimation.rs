mod common;

use common::{families, grid_argmin, random_mean, random_theta, rel_err};
use expgeo::convex::ConvexFunction;
use expgeo::estimation::{
    conjugate_prediction, default_median_options, gradient_nonconjugate, MedianProblem,
};
use expgeo::linalg::{fd_gradient, fd_jacobian_sym, hessian_step, max_abs_diff, min_eigenvalue, norm};
use expgeo::{
    fit_map, fit_ml, minimize_nonconjugate, objective_nonconjugate, posterior_update, sample,
    solve_median_numerical, ConjugateHyperparams, Dataset, Space,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random data, hyperparameters with interior `alpha / beta`, for family `i`.
fn instance(i: usize, seed: u64) -> (Dataset, ConjugateHyperparams) {
    let fam = &families()[i];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=50);
    let theta = random_theta(fam, &mut rng);
    let data = sample(fam, &theta, n, rng.random()).unwrap();
    let beta = rng.random_range(0.1..10.0);
    let hp = ConjugateHyperparams::from_pseudo_observations(fam, &random_mean(fam, &mut rng), beta)
        .unwrap();
    (data, hp)
}

fn augmented(data: &Dataset, hp: &ConjugateHyperparams) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut points = data.points.clone();
    points.push(hp.pseudo_point());
    let mut weights = vec![1.0; data.n()];
    weights.push(hp.beta());
    (points, weights)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn closed_form_matches_numerical_median(i in 0..5usize, seed in any::<u64>()) {
        let fam = &families()[i];
        let (data, hp) = instance(i, seed);
        let closed = fit_map(fam, &data, &hp).unwrap();
        let (points, weights) = augmented(&data, &hp);
        let numerical = solve_median_numerical(fam, &points, &weights, Space::Mean).unwrap();
        prop_assert!(max_abs_diff(&closed.mu_hat, &numerical.mu_hat) <= 1e-6);
        // Invariant of the report: theta_hat is the dual of mu_hat.
        let dual = fam.to_natural(&numerical.mu_hat).unwrap();
        prop_assert!(max_abs_diff(&dual, &numerical.theta_hat) <= 1e-8);
    }

    #[test]
    fn mean_and_natural_solutions_are_dual(i in 0..5usize, seed in any::<u64>()) {
        let fam = &families()[i];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(1..8);
        let thetas: Vec<Vec<f64>> = (0..k).map(|_| random_theta(fam, &mut rng)).collect();
        let means: Vec<Vec<f64>> = thetas.iter().map(|t| fam.to_mean(t).unwrap()).collect();
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..3.0)).collect();
        let a = solve_median_numerical(fam, &means, &weights, Space::Mean).unwrap();
        let b = solve_median_numerical(fam, &thetas, &weights, Space::Natural).unwrap();
        prop_assert!(max_abs_diff(&a.mu_hat, &b.mu_hat) <= 1e-6);
        prop_assert!(max_abs_diff(&fam.to_natural(&a.mu_hat).unwrap(), &b.theta_hat) <= 1e-6);
    }

    #[test]
    fn integer_beta_is_beta_extra_points(i in 0..5usize, seed in any::<u64>(), beta in 1..=5usize) {
        let fam = &families()[i];
        let (data, hp) = instance(i, seed);
        let hp = ConjugateHyperparams::from_pseudo_observations(fam, &hp.pseudo_point(), beta as f64).unwrap();
        let map = fit_map(fam, &data, &hp).unwrap();
        let mut extended = data.points.clone();
        extended.extend(std::iter::repeat_n(hp.pseudo_point(), beta));
        let ml = fit_ml(fam, &Dataset::new(extended.clone())).unwrap();
        prop_assert!(max_abs_diff(&map.mu_hat, &ml.mu_hat) <= 1e-10);
        let numerical = solve_median_numerical(fam, &extended, &vec![1.0; extended.len()], Space::Mean).unwrap();
        prop_assert!(max_abs_diff(&map.mu_hat, &numerical.mu_hat) <= 1e-6);
    }

    #[test]
    fn more_pseudo_observations_shrink_toward_the_prior(i in 0..5usize, seed in any::<u64>()) {
        let fam = &families()[i];
        let (data, hp) = instance(i, seed);
        let point = hp.pseudo_point();
        let mut last = f64::INFINITY;
        for beta in [0.01, 0.1, 1.0, 3.0, 10.0, 100.0, 1e4] {
            let hp = ConjugateHyperparams::from_pseudo_observations(fam, &point, beta).unwrap();
            let r = fit_map(fam, &data, &hp).unwrap();
            let dist = norm(&expgeo::linalg::sub(&r.mu_hat, &point));
            prop_assert!(dist <= last + 1e-12);
            last = dist;
        }
    }

    #[test]
    fn posterior_mode_is_the_map_estimate(i in 0..5usize, seed in any::<u64>()) {
        let fam = &families()[i];
        let (data, hp) = instance(i, seed);
        let post = posterior_update(&hp, &data).unwrap();
        let map = fit_map(fam, &data, &hp).unwrap();
        prop_assert!(max_abs_diff(&post.pseudo_point(), &map.mu_hat) <= 1e-10);
    }

    #[test]
    fn median_objective_gradient_and_curvature(i in 0..5usize, seed in any::<u64>()) {
        let fam = &families()[i];
        let (data, hp) = instance(i, seed);
        let (points, weights) = augmented(&data, &hp);
        let problem = MedianProblem::new(fam, &points, &weights, Space::Mean).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let at = random_mean(fam, &mut rng);
        let (_, grad) = problem.evaluate(&at).unwrap();
        let fd = fd_gradient(|x| problem.evaluate(x).unwrap().0, &at, 1e-6);
        for (a, b) in grad.iter().zip(&fd) {
            prop_assert!(rel_err(*a, *b) <= 1e-5, "{} vs {}", a, b);
        }
        // Unique minimizer: the Hessian at the solution is positive definite.
        let sol = fit_map(fam, &data, &hp).unwrap().mu_hat;
        let h = fd_jacobian_sym(|x| problem.evaluate(x).unwrap().1, &sol, hessian_step(&sol));
        prop_assert!(min_eigenvalue(&h) > 0.0);

        let thetas: Vec<Vec<f64>> = (0..3).map(|_| random_theta(fam, &mut rng)).collect();
        let natural = MedianProblem::new(fam, &thetas, &[1.0, 2.0, 0.5], Space::Natural).unwrap();
        let at = random_theta(fam, &mut rng);
        let (_, grad) = natural.evaluate(&at).unwrap();
        let fd = fd_gradient(|x| natural.evaluate(x).unwrap().0, &at, 1e-6);
        for (a, b) in grad.iter().zip(&fd) {
            prop_assert!(rel_err(*a, *b) <= 1e-5, "{} vs {}", a, b);
        }
    }
}

fn softplus_and_quadratic() -> (ConvexFunction, ConvexFunction) {
    let g = families()[1].log_partition().clone();
    (g, ConvexFunction::quadratic(1, 1.0))
}

#[test]
fn nonconjugate_minimizer_departs_from_the_closed_form() {
    let (g, q) = softplus_and_quadratic();
    let duals = vec![vec![0.0]];
    let grid = grid_argmin(
        |t| objective_nonconjugate(&g, &q, &[t], &duals, &[1.0], 1.0).unwrap(),
        -4.0,
        4.0,
        1e-4,
    );
    let prediction = conjugate_prediction(&g, &duals, &[1.0], 1.0).unwrap()[0];
    assert!((grid - prediction).abs() > 1e-3, "{grid} vs {prediction}");
    let opts = default_median_options();
    let numeric = minimize_nonconjugate(&g, &q, &duals, &[1.0], 1.0, opts).unwrap();
    assert!((numeric.x[0] - grid).abs() <= 1e-4);
    // Stationarity: sigma(t) + t = 1.5.
    let t = numeric.x[0];
    assert!((1.0 / (1.0 + (-t).exp()) + t - 1.5).abs() < 1e-8);
}

#[test]
fn nonconjugate_gradient_matches_finite_differences() {
    let (g, q) = softplus_and_quadratic();
    let duals = vec![vec![-0.7], vec![1.3], vec![0.2]];
    for t in [-2.0, -0.3, 0.4, 2.5] {
        let a = gradient_nonconjugate(&g, &q, &[t], &duals, &[0.8], 2.5).unwrap()[0];
        let fd = fd_gradient(
            |x| objective_nonconjugate(&g, &q, x, &duals, &[0.8], 2.5).unwrap(),
            &[t],
            1e-6,
        )[0];
        assert!(rel_err(a, fd) <= 1e-5);
    }
}

#[test]
fn closed_form_and_prediction_agree_when_q_is_g() {
    let (g, _) = softplus_and_quadratic();
    let duals = vec![vec![0.0], vec![-1.1]];
    let prediction = conjugate_prediction(&g, &duals, &[1.0], 2.0).unwrap()[0];
    let grid = grid_argmin(
        |t| objective_nonconjugate(&g, &g, &[t], &duals, &[1.0], 2.0).unwrap(),
        -4.0,
        4.0,
        1e-4,
    );
    assert!((grid - prediction).abs() <= 1e-4);
}
