mod common;

use common::{expm_taylor_oracle, gaussian, random_skew, random_spd, rng};
use std::f64::consts::{E, FRAC_PI_2};
use trivopt::dense::Matrix;
use trivopt::expm::{
    adjoint_dexpm, dexpm, expm, expm_with_report, logm_spd, sqrtm_spd, ExpmError,
};

fn rel_err(got: &Matrix, want: &Matrix) -> f64 {
    (got - want).frob() / want.frob()
}

/// The oracle itself is validated against references computed with 50-digit
/// arithmetic in an independent system, quoted to 17 significant digits.
#[test]
fn oracle_matches_independent_references() {
    let skew = Matrix::from_rows(&[
        &[0.0, 0.3, -0.2],
        &[-0.3, 0.0, 0.5],
        &[0.2, -0.5, 0.0],
    ]);
    let want_skew = Matrix::from_rows(&[
        &[0.93703243728491799, 0.32979433769225512, -0.11491695393636673],
        &[-0.23292116428443664, 0.83531560520670859, 0.49799153700292201],
        &[0.26022671404809445, -0.43986763295823092, 0.85953389855866320],
    ]);
    let got = expm_taylor_oracle(&skew);
    assert!(
        (&got - &want_skew).frob() <= 1e-15,
        "oracle drifted from the 50-digit reference by {:.3e}",
        (&got - &want_skew).frob()
    );

    let upper = Matrix::from_rows(&[
        &[0.4, 1.1, 0.0],
        &[0.0, -0.2, 0.7],
        &[0.0, 0.0, 0.1],
    ]);
    let want_upper = Matrix::from_rows(&[
        &[1.4918246976412703, 1.2340055650326955, 0.42869157342959352],
        &[0.0, 0.81873075307798186, 0.66836038499455345],
        &[0.0, 0.0, 1.1051709180756476],
    ]);
    let got = expm_taylor_oracle(&upper);
    assert!(
        (&got - &want_upper).frob() <= 1e-15,
        "oracle drifted from the triangular reference by {:.3e}",
        (&got - &want_upper).frob()
    );
}

#[test]
fn expm_of_zero_is_identity_exactly() {
    let (q, report) = expm_with_report(&Matrix::zeros(5, 5));
    assert_eq!(
        q.as_slice(),
        Matrix::identity(5).as_slice(),
        "expm(0) must be the identity bit for bit"
    );
    assert_eq!(report.scaling_exponent, 0);
    assert_eq!(report.input_norm, 0.0);
}

#[test]
fn expm_quarter_turn_rotation() {
    let a = Matrix::from_rows(&[&[0.0, -FRAC_PI_2], &[FRAC_PI_2, 0.0]]);
    let q = expm(&a);
    let want = Matrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
    assert!(
        (&q - &want).frob() <= 1e-15,
        "exp of a quarter-turn generator should be the quarter-turn rotation, off by {:.3e}",
        (&q - &want).frob()
    );
}

#[test]
fn expm_of_diagonal_exponentiates_entries() {
    let q = expm(&Matrix::diag(&[1.0, 2.0]));
    let want = Matrix::diag(&[E, E * E]);
    assert!(
        rel_err(&q, &want) <= 1e-14,
        "diagonal exponential wrong by {:.3e} relative",
        rel_err(&q, &want)
    );
}

#[test]
fn expm_matches_sixty_term_oracle_below_norm_four() {
    let mut r = rng(40);
    let mut worst = 0.0f64;
    for trial in 0..50 {
        let n = [3, 8, 16][trial % 3];
        let norm = 0.08 + 3.9 * (trial as f64) / 49.0;
        let g = gaussian(&mut r, n, n);
        let a = g.scale(norm / g.frob());
        let err = rel_err(&expm(&a), &expm_taylor_oracle(&a));
        worst = worst.max(err);
    }
    assert!(
        worst <= 5e-14,
        "worst relative error against the 60-term oracle was {worst:.3e}, above 5e-14"
    );
}

#[test]
fn expm_of_skew_is_orthogonal_across_two_hundred_seeds() {
    let mut worst = 0.0f64;
    for seed in 0..200u64 {
        let mut r = rng(seed);
        let n = [4, 16, 64][(seed % 3) as usize];
        let norm = 0.05 + 9.95 * (seed as f64) / 199.0;
        let a = random_skew(&mut r, n, norm);
        let q = expm(&a);
        let defect = (&q.transpose().matmul(&q) - &Matrix::identity(n)).frob();
        worst = worst.max(defect);
    }
    assert!(
        worst <= 1e-12,
        "worst orthogonality defect over 200 skew inputs was {worst:.3e}, above 1e-12"
    );
}

#[test]
fn expm_of_skew_has_unit_determinant() {
    for seed in 0..20u64 {
        let mut r = rng(1000 + seed);
        let a = random_skew(&mut r, 6, 3.0);
        let d = expm(&a).det();
        assert!(
            (d - 1.0).abs() <= 1e-12,
            "determinant of a rotation drifted to {d:.15}"
        );
    }
}

#[test]
fn expm_negation_gives_inverse() {
    for seed in 0..20u64 {
        let mut r = rng(2000 + seed);
        let n = 10;
        let g = gaussian(&mut r, n, n);
        let a = g.scale(2.0 / g.frob());
        let defect = (&expm(&a).matmul(&expm(&a.scale(-1.0))) - &Matrix::identity(n)).frob();
        assert!(
            defect <= 1e-11,
            "expm(A) expm(-A) deviates from the identity by {defect:.3e}"
        );
    }
}

#[test]
fn expm_commutes_with_transpose() {
    let mut r = rng(77);
    let g = gaussian(&mut r, 9, 9);
    let a = g.scale(3.0 / g.frob());
    let err = rel_err(&expm(&a.transpose()), &expm(&a).transpose());
    assert!(err <= 1e-13, "expm(A^T) vs expm(A)^T differ by {err:.3e}");
}

#[test]
fn report_degree_and_scaling_are_consistent() {
    let thresholds = [
        (1usize, 3.0e-8),
        (2, 1.4e-5),
        (4, 2.2e-3),
        (8, 8.0e-2),
        (12, 4.0e-1),
        (18, 1.4),
    ];
    let mut r = rng(88);
    for trial in 0..60 {
        let norm = 10f64.powf(-9.0 + 11.0 * (trial as f64) / 59.0);
        let g = gaussian(&mut r, 6, 6);
        let a = g.scale(norm / g.frob());
        let (_, rep) = expm_with_report(&a);
        let scaled = rep.input_norm * (0.5f64).powi(rep.scaling_exponent as i32);
        let theta = thresholds
            .iter()
            .find(|&&(d, _)| d == rep.taylor_degree)
            .map(|&(_, t)| t)
            .expect("reported degree must be one of the supported degrees");
        assert!(
            scaled <= theta * (1.0 + 1e-12),
            "scaled norm {scaled:.3e} exceeds the threshold {theta:.3e} for degree {}",
            rep.taylor_degree
        );
        if norm > 1.4 {
            assert!(rep.scaling_exponent >= 1, "large input must be scaled");
        }
    }
}

/// Regression sweep for the frozen degree thresholds: at each threshold the
/// relative error against the 60-term oracle must stay at the few-ulp level.
#[test]
fn threshold_regression_sweep() {
    let thresholds = [
        (1usize, 3.0e-8),
        (2, 1.4e-5),
        (4, 2.2e-3),
        (8, 8.0e-2),
        (12, 4.0e-1),
        (18, 1.4),
    ];
    for &(degree, theta) in &thresholds {
        // probe just inside the threshold so rounding in the norm cannot tip
        // the selection to the next degree
        let probe = 0.99 * theta;
        let mut worst = 0.0f64;
        for seed in 0..12u64 {
            let mut r = rng(3000 + seed);
            let n = [4, 8, 16][(seed % 3) as usize];
            let a = match seed % 2 {
                0 => {
                    let g = gaussian(&mut r, n, n);
                    g.scale(probe / g.frob())
                }
                _ => random_skew(&mut r, n, probe),
            };
            let (q, rep) = expm_with_report(&a);
            assert_eq!(
                rep.taylor_degree, degree,
                "input at norm {probe:.3e} should select degree {degree}"
            );
            worst = worst.max(rel_err(&q, &expm_taylor_oracle(&a)));
        }
        assert!(
            worst <= 5e-16,
            "degree {degree} at its threshold {theta:.3e} drifted to {worst:.3e} relative"
        );
    }
}

#[test]
fn dexpm_at_zero_returns_direction_exactly() {
    let mut r = rng(5);
    let e = gaussian(&mut r, 7, 7);
    let d = dexpm(&Matrix::zeros(7, 7), &e);
    assert_eq!(
        d.as_slice(),
        e.as_slice(),
        "the derivative of exp at zero is the identity map"
    );
}

#[test]
fn dexpm_is_linear_in_the_direction() {
    let mut r = rng(6);
    let x = random_skew(&mut r, 6, 2.0);
    let e1 = gaussian(&mut r, 6, 6);
    let e2 = gaussian(&mut r, 6, 6);
    let combo = &e1.scale(0.3) + &e2.scale(-1.7);
    let lhs = dexpm(&x, &combo);
    let rhs = &dexpm(&x, &e1).scale(0.3) + &dexpm(&x, &e2).scale(-1.7);
    assert!(
        rel_err(&lhs, &rhs) <= 1e-12,
        "directional derivative is not linear: {:.3e}",
        rel_err(&lhs, &rhs)
    );
}

#[test]
fn dexpm_matches_central_difference() {
    let mut r = rng(7);
    for trial in 0..10 {
        let n = [3, 5, 9][trial % 3];
        let gx = gaussian(&mut r, n, n);
        let x = gx.scale(1.5 / gx.frob());
        let ge = gaussian(&mut r, n, n);
        let e = ge.scale(1.0 / ge.frob());
        let h = 1e-5;
        let fd = (&expm(&(&x + &e.scale(h))) - &expm(&(&x - &e.scale(h)))).scale(1.0 / (2.0 * h));
        let an = dexpm(&x, &e);
        let err = (&fd - &an).frob() / an.frob();
        assert!(
            err <= 1e-6,
            "analytic derivative deviates from the central difference by {err:.3e}"
        );
    }
}

#[test]
fn adjoint_pairing_holds() {
    let mut r = rng(8);
    for _ in 0..20 {
        let n = 6;
        let x = random_skew(&mut r, n, 2.5);
        let e = gaussian(&mut r, n, n);
        let g = gaussian(&mut r, n, n);
        let lhs = dexpm(&x, &e).dot(&g);
        let rhs = e.dot(&adjoint_dexpm(&x, &g));
        assert!(
            (lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0),
            "pairing mismatch: <dexp E, G> = {lhs:.15e} but <E, adj G> = {rhs:.15e}"
        );
    }
}

#[test]
fn logm_spd_round_trips_with_expm() {
    let mut r = rng(9);
    for _ in 0..10 {
        let p = random_spd(&mut r, 7, 0.1, 10.0);
        let l = logm_spd(&p).expect("random SPD matrix must have a logarithm");
        let back = expm(&l);
        assert!(
            rel_err(&back, &p) <= 1e-10,
            "exp(log P) differs from P by {:.3e}",
            rel_err(&back, &p)
        );
        let asym = (&l - &l.transpose()).frob();
        assert!(asym <= 1e-14, "logarithm lost symmetry by {asym:.3e}");
    }
}

#[test]
fn logm_spd_inverts_expm_of_symmetric() {
    let mut r = rng(10);
    let g = gaussian(&mut r, 5, 5);
    let s = (&g + &g.transpose()).scale(0.25);
    let p = expm(&s);
    let l = logm_spd(&p).expect("exp of symmetric input is SPD");
    assert!(
        rel_err(&l, &s) <= 1e-12,
        "log(exp S) differs from S by {:.3e}",
        rel_err(&l, &s)
    );
}

#[test]
fn logm_spd_rejects_indefinite_input() {
    let err = logm_spd(&Matrix::diag(&[2.0, -0.5])).unwrap_err();
    match err {
        ExpmError::NotPositiveDefinite { eigenvalue, .. } => {
            assert!(
                (eigenvalue + 0.5).abs() <= 1e-12,
                "error should name the offending eigenvalue, got {eigenvalue}"
            );
        }
        other => panic!("expected a positive-definiteness error, got {other:?}"),
    }
}

#[test]
fn logm_spd_rejects_asymmetric_input() {
    let a = Matrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
    assert!(
        matches!(logm_spd(&a), Err(ExpmError::NotSymmetric(_))),
        "asymmetric input must be rejected before eigenvalue analysis"
    );
}

#[test]
fn sqrtm_spd_squares_back() {
    let mut r = rng(11);
    let p = random_spd(&mut r, 6, 0.5, 4.0);
    let root = sqrtm_spd(&p).expect("random SPD matrix must have a square root");
    assert!(
        rel_err(&root.matmul(&root), &p) <= 1e-11,
        "square of the square root differs from P by {:.3e}",
        rel_err(&root.matmul(&root), &p)
    );
}

#[test]
#[should_panic(expected = "dexpm requires equal square matrices")]
fn dexpm_rejects_mismatched_shapes() {
    let _ = dexpm(&Matrix::zeros(3, 3), &Matrix::zeros(4, 4));
}
