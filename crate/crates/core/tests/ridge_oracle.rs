use nalgebra::DMatrix;
use nucs_core::linalg::Matrix;
use nucs_core::ridge::{fit_ridge, RidgeConfig, RidgeSolver};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_problem(
    rng: &mut ChaCha8Rng,
    n: usize,
    d: usize,
    classes: usize,
) -> (Matrix, Vec<usize>) {
    let data: Vec<f64> = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
    let labels = (0..n).map(|_| rng.random_range(0..classes)).collect();
    (Matrix::from_vec(n, d, data).unwrap(), labels)
}

/// Dense normal-equation solve through nalgebra's LU.
fn oracle(x: &Matrix, labels: &[usize], classes: usize, lambda: f64, bias: bool) -> DMatrix<f64> {
    let p = x.cols() + usize::from(bias);
    let phi = DMatrix::from_fn(
        x.rows(),
        p,
        |i, j| if j < x.cols() { x.get(i, j) } else { 1.0 },
    );
    let y = DMatrix::from_fn(x.rows(), classes, |i, c| {
        f64::from(u8::from(labels[i] == c))
    });
    let a = phi.transpose() * &phi + DMatrix::identity(p, p) * lambda;
    a.lu().solve(&(phi.transpose() * y)).unwrap()
}

fn max_rel_diff(w: &Matrix, o: &DMatrix<f64>) -> f64 {
    let scale = o.amax().max(1e-300);
    let mut worst: f64 = 0.0;
    for i in 0..w.rows() {
        for j in 0..w.cols() {
            worst = worst.max((w.get(i, j) - o[(i, j)]).abs() / scale);
        }
    }
    worst
}

#[test]
fn matches_dense_oracle_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..100 {
        let n = rng.random_range(2..80);
        let d = rng.random_range(1..30);
        let classes = rng.random_range(2..6);
        let lambda = 10f64.powf(rng.random_range(-3.0..3.0));
        let bias = case % 2 == 0;
        let (x, labels) = random_problem(&mut rng, n, d, classes);
        let cfg = RidgeConfig {
            lambda,
            bias,
            solver: RidgeSolver::Auto,
        };
        let model = fit_ridge(&x, &labels, classes, &cfg).unwrap();
        let rel = max_rel_diff(model.weights(), &oracle(&x, &labels, classes, lambda, bias));
        assert!(rel <= 1e-8, "case {case}: n={n} d={d} rel={rel:e}");
    }
}

#[test]
fn primal_and_dual_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (n, d) in [(5, 40), (40, 5), (20, 20)] {
        let (x, labels) = random_problem(&mut rng, n, d, 3);
        let fit = |solver| {
            let cfg = RidgeConfig {
                lambda: 0.5,
                bias: true,
                solver,
            };
            fit_ridge(&x, &labels, 3, &cfg).unwrap()
        };
        let (p, q) = (fit(RidgeSolver::Primal), fit(RidgeSolver::Dual));
        let diff = p
            .weights()
            .as_slice()
            .iter()
            .zip(q.weights().as_slice())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(
            diff <= 1e-9 * (1.0 + p.weights().max_abs()),
            "n={n} d={d} diff={diff:e}"
        );
    }
}

#[test]
fn shrinkage_is_monotone_in_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (x, labels) = random_problem(&mut rng, 60, 8, 4);
    let mut prev = f64::INFINITY;
    for lambda in [1e-3, 1e-1, 1.0, 10.0, 1e3, 1e5] {
        let m = fit_ridge(&x, &labels, 4, &RidgeConfig::with_lambda(lambda)).unwrap();
        let norm = m.weights().frobenius();
        assert!(norm < prev, "lambda {lambda}: {norm} >= {prev}");
        prev = norm;
    }
}

#[test]
fn scaling_covariance_without_bias() {
    // scaling X by c and lambda by c^2 scales W by 1/c
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (x, labels) = random_problem(&mut rng, 30, 6, 3);
    let c = 4.0;
    let base = RidgeConfig {
        lambda: 0.7,
        bias: false,
        solver: RidgeSolver::Primal,
    };
    let scaled_cfg = RidgeConfig {
        lambda: 0.7 * c * c,
        ..base
    };
    let w = fit_ridge(&x, &labels, 3, &base).unwrap();
    let ws = fit_ridge(&x.scaled(c), &labels, 3, &scaled_cfg).unwrap();
    for (a, b) in w.weights().as_slice().iter().zip(ws.weights().as_slice()) {
        assert!((a - c * b).abs() <= 1e-10 * (1.0 + a.abs()));
    }
}

#[test]
fn predictions_invariant_to_sample_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (x, labels) = random_problem(&mut rng, 50, 7, 3);
    let mut perm: Vec<usize> = (0..50).collect();
    perm.reverse();
    let rows: Vec<Vec<f64>> = perm.iter().map(|&i| x.row(i).to_vec()).collect();
    let xp = Matrix::from_rows(&rows).unwrap();
    let lp: Vec<usize> = perm.iter().map(|&i| labels[i]).collect();
    let cfg = RidgeConfig::default();
    let a = fit_ridge(&x, &labels, 3, &cfg).unwrap();
    let b = fit_ridge(&xp, &lp, 3, &cfg).unwrap();
    for i in 0..50 {
        assert_eq!(a.predict_row(x.row(i)), b.predict_row(x.row(i)));
    }
}
