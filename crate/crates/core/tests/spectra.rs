use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thetalab_core::linalg::{jacobi_eigen, tridiagonal_eigen, Matrix};
use thetalab_core::oracle::{full_spectrum, symmetric_sector_levels, FullPath};
use thetalab_core::spectra::*;
use thetalab_core::{SymmetricOperator, ThetaModel};

fn random_symmetric(rng: &mut ChaCha8Rng, dim: usize) -> Matrix {
    let mut m = Matrix::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
    m = m.symmetrized();
    m
}

#[test]
fn eigensystem_residuals_on_random_operators() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..1000 {
        let dim = 2 + trial % 64;
        let m = random_symmetric(&mut rng, dim);
        let op = SymmetricOperator::from_upper(&m).unwrap();
        let eig = eigensystem(&op).unwrap();
        let norm = op.norm().unwrap();
        for k in 0..dim {
            let v = eig.vector(k);
            let av = m.apply_real(&v);
            let r: f64 = av.iter().zip(&v).map(|(a, x)| (a - eig.values[k] * x).powi(2)).sum::<f64>().sqrt();
            assert!(r <= 1e-9 * norm, "trial {trial} dim {dim} residual {r:e}");
            let first = v.iter().find(|x| x.abs() > 1e-10).unwrap();
            assert!(*first > 0.0);
        }
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn eigenvalues_agree_with_independent_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for dim in [2, 3, 10, 33, 65] {
        let m = random_symmetric(&mut rng, dim);
        let reference = DMatrix::from_row_slice(dim, dim, m.as_slice()).symmetric_eigen();
        let mut expected: Vec<f64> = reference.eigenvalues.iter().copied().collect();
        expected.sort_by(f64::total_cmp);
        for solver in [jacobi_eigen(&m).unwrap(), tridiagonal_eigen(&m).unwrap()] {
            for (a, b) in solver.values.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12, "dim {dim}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn gap_matches_closed_forms() {
    for n in [2, 4, 8, 16] {
        let m1 = ThetaModel::new(n, 1).unwrap();
        let mn = ThetaModel::new(n, n).unwrap();
        for i in 0..=20 {
            let s = i as f64 / 20.0;
            let a = closed_form_gap_theta1(n, s).unwrap();
            let g = gap_at(&m1, s).unwrap();
            let expected = if a.flat_band_closer { g } else { a.gap };
            assert!((g - expected).abs() < 1e-9, "θ=1 n={n} s={s}: {g} vs {}", a.gap);
            assert!((gap_at(&mn, s).unwrap() - closed_form_gap_thetan(s).unwrap()).abs() < 1e-9);
        }
    }
    let m = ThetaModel::new(8, 1).unwrap();
    assert!((gap_at(&m, 0.3).unwrap() - closed_form_gap_theta1(8, 0.3).unwrap().gap).abs() < 1e-10);
    let m = ThetaModel::new(10, 10).unwrap();
    assert!((gap_at(&m, 0.7).unwrap() - closed_form_gap_thetan(0.7).unwrap()).abs() < 1e-10);
}

#[test]
fn scan_minimum_is_a_lower_envelope() {
    for (n, theta) in [(6, 2), (10, 4), (20, 5)] {
        let scan = gap_scan(&ThetaModel::new(n, theta).unwrap(), 51, 3).unwrap();
        assert!(scan.samples.iter().all(|p| scan.min_gap <= p.gap && p.gap >= -1e-12));
        let first = scan.samples.iter().position(|p| p.gap == scan.min_gap).unwrap();
        assert_eq!(scan.samples[first].s, scan.min_s);
    }
}

#[test]
fn scans_are_deterministic() {
    let m = ThetaModel::new(14, 6).unwrap();
    assert_eq!(gap_scan(&m, 101, 4).unwrap(), gap_scan(&m, 101, 4).unwrap());
}

/// Measured Dicke-sector minimal gaps for n = 20, θ = 1..=20 (grid 201, four
/// refinement levels). The curve is the regression data for the sweep.
const PHASE_DIAGRAM_N20: [f64; 20] = [
    9.765625000001665e-4,
    1.9537211237437013e-3,
    2.9659157479930975e-3,
    4.649673253350972e-3,
    1.4335604924260892e-2,
    1.3801506539488662e-1,
    2.8378898581620104e-1,
    4.109858443448271e-1,
    5.389124325950312e-1,
    6.510896641429844e-1,
    7.06929476933984e-1,
    7.070858507126752e-1,
    7.071047882563946e-1,
    7.071066260576346e-1,
    7.071067719560551e-1,
    7.071067807736737e-1,
    7.071067811733909e-1,
    7.071067811862837e-1,
    7.071067811865444e-1,
    7.071067811865483e-1,
];

#[test]
fn phase_diagram_regression() {
    let thetas: Vec<usize> = (1..=20).collect();
    let rows = phase_diagram(20, &thetas, 201, 4).unwrap();
    for (row, expected) in rows.iter().zip(PHASE_DIAGRAM_N20) {
        assert!((row.min_gap - expected).abs() <= 1e-9 * expected, "θ={}: {} vs {expected}", row.theta, row.min_gap);
    }
    assert!(rows.windows(2).all(|w| w[0].min_gap <= w[1].min_gap));
    assert!((rows[0].min_gap - 2f64.powi(-10)).abs() < 1e-12);
    assert!((rows[19].min_gap - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
    // not the super-polynomially small value one might expect at θ = 5
    assert!(rows[4].min_gap > 1e-2);
}

#[test]
fn dicke_spectrum_matches_full_space() {
    let model = ThetaModel::new(10, 4).unwrap();
    let h = model.interpolate(0.3).unwrap();
    let dicke = eigensystem(&h).unwrap().values;
    let full = FullPath::theta(10, 4).unwrap().dense(0.3);
    let levels = symmetric_sector_levels(&full, 10, 1e-9).unwrap();
    assert_eq!(levels.len(), 11);
    for (a, b) in dicke.iter().zip(&levels) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn full_space_gap_at_dicke_minimum() {
    // The full-space check runs at the Dicke argmin; sweeping every s in 2^n
    // dimensions is left to the acceptance suite's spectrum inclusion test.
    for n in 2..=10 {
        for theta in 1..=n {
            let model = ThetaModel::new(n, theta).unwrap();
            let scan = gap_scan(&model, 41, 2).unwrap();
            let full = FullPath::theta(n, theta).unwrap().dense(scan.min_s);
            let levels = symmetric_sector_levels(&full, n, 1e-9).unwrap();
            let gap = levels[1] - levels[0];
            assert!((gap - scan.min_gap).abs() < 1e-8, "n={n} θ={theta}: {gap} vs {}", scan.min_gap);
        }
    }
}

#[test]
fn endpoint_spectra_in_full_space() {
    let path = FullPath::theta(6, 3).unwrap();
    let a = full_spectrum(&path.dense(0.0)).unwrap();
    let b = full_spectrum(&path.dense(1.0)).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-8);
    }
}
