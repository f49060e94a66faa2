use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thetalab_core::escape::*;
use thetalab_core::evolution::{propagate, EvolutionSpec};
use thetalab_core::linalg::{self, C64};
use thetalab_core::spectra::gap_scan;
use thetalab_core::{LogBase, SymmetricOperator, ThetaModel};

fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<C64> {
    (0..d).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

fn orthonormalize(mut vs: Vec<Vec<C64>>) -> Vec<Vec<C64>> {
    for i in 0..vs.len() {
        for _ in 0..2 {
            for j in 0..i {
                let c = linalg::inner(&vs[j], &vs[i]);
                let vj = vs[j].clone();
                for (x, y) in vs[i].iter_mut().zip(&vj) {
                    *x -= c * y;
                }
            }
        }
        let n = linalg::norm(&vs[i]);
        vs[i].iter_mut().for_each(|x| *x /= n);
    }
    vs
}

#[test]
fn one_dimensional_escape_rate_is_energy_uncertainty() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let n = rng.random_range(1..40);
        let h = SymmetricOperator::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
        let v = orthonormalize(vec![random_vector(&mut rng, n + 1)]);
        let beta = escape_rate_general(&v, &h).unwrap();
        let sigma = energy_uncertainty(&v[0], &h).unwrap();
        assert!((beta - sigma).abs() <= 1e-9, "{beta} vs {sigma}");
    }
}

#[test]
fn escape_rate_is_largest_singular_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let d = rng.random_range(3..30);
        let m = rng.random_range(1..d);
        let h = SymmetricOperator::from_fn(d - 1, |_, _| rng.random_range(-1.0..1.0));
        let basis = orthonormalize((0..m).map(|_| random_vector(&mut rng, d)).collect());
        let beta = escape_rate_general(&basis, &h).unwrap();

        let b = DMatrix::from_fn(d, m, |i, j| nalgebra::Complex::new(basis[j][i].re, basis[j][i].im));
        let hm = DMatrix::from_fn(d, d, |i, j| nalgebra::Complex::new(h.get(i, j), 0.0));
        let proj = &b * b.adjoint();
        let leak = (DMatrix::identity(d, d) - proj) * hm * &b;
        let sv = leak.singular_values().max();
        assert!((beta - sv).abs() < 1e-9, "d={d} m={m}: {beta} vs {sv}");
    }
}

#[test]
fn rejects_non_orthonormal_basis() {
    let h = SymmetricOperator::identity(3);
    let v = vec![vec![C64::new(1.0, 0.0); 4]];
    assert!(matches!(escape_rate_general(&v, &h), Err(thetalab_core::Error::NotOrthonormal { .. })));
}

#[test]
fn capped_escape_rate_below_tail_bound() {
    let cfg = ThresholdConfig::default();
    for n in 2..=30 {
        for theta in 1..=n / 2 {
            let r = escape_rate_theta(n, theta, &cfg).unwrap();
            assert!(r.beta_sq_exact <= r.tail_bound * (1.0 + 1e-12), "n={n} θ={theta}");
        }
    }
}

#[test]
fn escape_rate_grows_with_theta() {
    let cfg = ThresholdConfig::default();
    for n in [5, 20, 64, 200] {
        let betas: Vec<f64> = (1..=n).map(|t| escape_rate_theta(n, t, &cfg).unwrap().beta).collect();
        assert!(betas.windows(2).all(|w| w[0] <= w[1] * (1.0 + 1e-12)), "n={n}");
    }
}

#[test]
fn uncapped_escape_rate_is_binomial_variance() {
    for n in 1..=40 {
        let r = escape_rate_theta(n, n, &ThresholdConfig::default()).unwrap();
        assert!((r.beta_sq_exact - n as f64 / 4.0).abs() < 1e-12 * n as f64);
        let m = ThetaModel::new(n, n).unwrap();
        let direct = escape_rate_general(&[m.initial_ground_state().into_amps()], m.h1()).unwrap();
        assert!((direct - r.beta).abs() < 1e-10);
    }
}

#[test]
fn threshold_examples() {
    let t = thresholds(100, &ThresholdConfig::default()).unwrap();
    let expected = 50.0 - (100.0 * 100f64.ln().powf(1.5)).sqrt();
    assert!((t.theta_l - expected).abs() < 1e-12);
    assert!((t.theta_l - 18.564).abs() < 1e-3);
    assert!(t.theta_h_clamped && t.theta_h == 100.0);
    let main = ThresholdConfig { theta_h_form: ThetaHForm::Narrow, ..Default::default() };
    let t = thresholds(100, &main).unwrap();
    assert!((t.theta_h - (50.0 + (40.0 * 100f64.ln()).sqrt())).abs() < 1e-12);
    let two = ThresholdConfig { log_base: LogBase::Two, ..Default::default() };
    let t = thresholds(1000, &two).unwrap();
    assert!((t.theta_l - (500.0 - (1000.0 * 1000f64.log2().powf(1.5)).sqrt())).abs() < 1e-9);
    assert!(thresholds(1, &ThresholdConfig::default()).is_err());
    assert!(thresholds(10, &ThresholdConfig { c: 1.0, ..Default::default() }).is_err());
}

#[test]
fn gap_bound_holds_at_n20() {
    for theta in [1, 3, 5, 7, 20] {
        let m = ThetaModel::new(20, theta).unwrap();
        let scan = gap_scan(&m, 201, 4).unwrap();
        let r = check_lemma2(&m, &scan).unwrap();
        assert_eq!(r.status, CheckStatus::Holds, "θ={theta}: {r:?}");
    }
    let small = ThetaModel::new(4, 1).unwrap();
    let r = check_lemma2(&small, &gap_scan(&small, 51, 2).unwrap()).unwrap();
    assert_eq!(r.status, CheckStatus::PreconditionFailed);
}

#[test]
fn overlap_bound_vacuous_for_long_runs() {
    let m = ThetaModel::new(10, 10).unwrap();
    let r = overlap_bound(&m, 1e4, 1.0, DEFAULT_SLACK).unwrap();
    assert_eq!(r.status, CheckStatus::Vacuous);
    let r = overlap_bound(&m, 0.0, 2f64.powi(-5), 0.0).unwrap();
    assert_eq!(r.status, CheckStatus::Holds);
}

#[test]
fn overlap_bound_holds_for_small_theta() {
    let m = ThetaModel::new(12, 3).unwrap();
    let beta = escape_rate_theta(12, 3, &ThresholdConfig::default()).unwrap().beta;
    let tau = 0.25 / beta;
    let steps = 4000;
    let trace = propagate(m.schedule(), &EvolutionSpec::new(tau, steps), m.initial_ground_state().amps()).unwrap();
    let r = check_lemma1(&m, tau, &trace, DEFAULT_SLACK).unwrap();
    assert_eq!(r.status, CheckStatus::Holds, "{r:?}");
}
