mod common;

use common::{gaussian, rng};
use trivopt::dense::{DenseError, Matrix};

#[test]
fn matmul_identity_returns_operand() {
    let mut r = rng(1);
    let a = gaussian(&mut r, 3, 3);
    let prod = Matrix::identity(3).matmul(&a);
    assert_eq!(prod, a, "I*A must equal A exactly");
}

#[test]
fn matmul_hand_expanded_2x2() {
    let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
    let b = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let expected = Matrix::from_rows(&[&[2.0, 1.0], &[4.0, 3.0]]);
    assert_eq!(a.matmul(&b), expected, "column swap of [[1,2],[3,4]]");
}

#[test]
fn matmul_associativity_within_1e13_relative() {
    let mut r = rng(2);
    let a = gaussian(&mut r, 8, 8);
    let b = gaussian(&mut r, 8, 8);
    let c = gaussian(&mut r, 8, 8);
    let left = a.matmul(&b).matmul(&c);
    let right = a.matmul(&b.matmul(&c));
    let rel = (&left - &right).frob() / left.frob();
    assert!(rel <= 1e-13, "associativity defect {rel:.3e} above 1e-13");
}

#[test]
#[should_panic(expected = "shape error")]
fn matmul_dimension_mismatch_is_a_shape_error() {
    let a = Matrix::zeros(2, 3);
    let b = Matrix::zeros(2, 2);
    let _ = a.matmul(&b);
}

#[test]
fn qr_of_identity_is_identity_pair() {
    let (q, r) = Matrix::identity(4).qr();
    assert!((&q - &Matrix::identity(4)).frob() <= 1e-15, "Q should be I");
    assert!((&r - &Matrix::identity(4)).frob() <= 1e-15, "R should be I");
}

#[test]
fn qr_three_four_five_column() {
    let a = Matrix::from_rows(&[&[3.0], &[4.0]]);
    let (q, r) = a.qr();
    assert!((q[(0, 0)] - 0.6).abs() <= 1e-15, "Q = [[0.6],[0.8]]");
    assert!((q[(1, 0)] - 0.8).abs() <= 1e-15, "Q = [[0.6],[0.8]]");
    assert!((r[(0, 0)] - 5.0).abs() <= 1e-14, "R = [[5]]");
}

#[test]
fn qr_random_6x3_reconstruction_and_orthogonality() {
    let mut r = rng(3);
    let a = gaussian(&mut r, 6, 3);
    let (q, rr) = a.qr();
    let ortho = (&q.transpose().matmul(&q) - &Matrix::identity(3)).frob();
    let recon = (&q.matmul(&rr) - &a).frob();
    assert!(ortho <= 1e-12, "orthogonality residual {ortho:.3e}");
    assert!(
        recon <= 1e-12 * a.frob(),
        "reconstruction residual {recon:.3e}"
    );
}

#[test]
fn qr_orthogonality_over_100_seeds() {
    for seed in 0..100u64 {
        let mut r = rng(seed);
        let rows = 2 + (seed as usize % 63);
        let cols = 1 + (seed as usize % rows.min(64));
        let a = gaussian(&mut r, rows.max(cols), cols);
        let (q, _) = a.qr();
        let ortho = (&q.transpose().matmul(&q) - &Matrix::identity(cols)).frob();
        assert!(
            ortho <= 1e-12,
            "seed {seed}: orthogonality residual {ortho:.3e} for {rows}x{cols}"
        );
    }
}

#[test]
fn qr_diagonal_sign_convention_non_negative() {
    for seed in 100..120u64 {
        let mut r = rng(seed);
        let a = gaussian(&mut r, 5, 5);
        let (_, rr) = a.qr();
        for j in 0..5 {
            assert!(
                rr[(j, j)] >= 0.0,
                "seed {seed}: R[{j},{j}] = {} negative",
                rr[(j, j)]
            );
        }
    }
}

#[test]
fn sym_eig_already_diagonal() {
    let (lam, v) = Matrix::diag(&[1.0, 2.0, 3.0]).sym_eig().unwrap();
    assert!(
        lam.iter()
            .zip([1.0, 2.0, 3.0])
            .all(|(a, b)| (a - b).abs() <= 1e-14),
        "eigenvalues of diag(1,2,3) are (1,2,3), got {lam:?}"
    );
    // V equals I up to column signs / permutation; check reconstruction.
    let recon = v
        .matmul(&Matrix::diag(&lam))
        .matmul(&v.transpose());
    assert!((&recon - &Matrix::diag(&[1.0, 2.0, 3.0])).frob() <= 1e-13);
}

#[test]
fn sym_eig_two_by_two_characteristic_roots() {
    let s = Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
    let (lam, _) = s.sym_eig().unwrap();
    assert!((lam[0] - 1.0).abs() <= 1e-14, "smaller root of (2-l)^2 = 1");
    assert!((lam[1] - 3.0).abs() <= 1e-14, "larger root of (2-l)^2 = 1");
}

#[test]
fn sym_eig_reconstruction_random_8x8() {
    let mut r = rng(4);
    let g = gaussian(&mut r, 8, 8);
    let s = &g + &g.transpose();
    let (lam, v) = s.sym_eig().unwrap();
    assert!(
        lam.windows(2).all(|w| w[0] <= w[1]),
        "eigenvalues must ascend"
    );
    let recon = v.matmul(&Matrix::diag(&lam)).matmul(&v.transpose());
    let resid = (&recon - &s).frob();
    assert!(
        resid <= 1e-12 * s.frob(),
        "reconstruction residual {resid:.3e}"
    );
    let vtv = (&v.transpose().matmul(&v) - &Matrix::identity(8)).frob();
    assert!(vtv <= 1e-12, "V orthogonality residual {vtv:.3e}");
}

#[test]
fn sym_eig_rejects_asymmetric_input() {
    let a = Matrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
    match a.sym_eig() {
        Err(DenseError::NotSymmetric { .. }) => {}
        other => panic!("expected NotSymmetric, got {other:?}"),
    }
}

#[test]
fn svd_of_identity() {
    let (u, s, v) = Matrix::identity(3).svd();
    assert!(s.iter().all(|&x| (x - 1.0).abs() <= 1e-14));
    let recon = u.matmul(&Matrix::diag(&s)).matmul(&v.transpose());
    assert!((&recon - &Matrix::identity(3)).frob() <= 1e-13);
}

#[test]
fn svd_permutation_has_unit_singular_values() {
    let p = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let (_, s, _) = p.svd();
    assert!(
        (s[0] - 1.0).abs() <= 1e-14 && (s[1] - 1.0).abs() <= 1e-14,
        "permutation is orthogonal so sigma = (1,1), got {s:?}"
    );
}

#[test]
fn svd_random_5x3_reconstruction() {
    let mut r = rng(5);
    let a = gaussian(&mut r, 5, 3);
    let (u, s, v) = a.svd();
    assert!(
        s.windows(2).all(|w| w[0] >= w[1]) && s.iter().all(|&x| x >= 0.0),
        "singular values non-negative descending, got {s:?}"
    );
    let recon = u.matmul(&Matrix::diag(&s)).matmul(&v.transpose());
    let resid = (&recon - &a).frob();
    assert!(
        resid <= 1e-11 * a.frob(),
        "reconstruction residual {resid:.3e}"
    );
    let uo = (&u.transpose().matmul(&u) - &Matrix::identity(3)).frob();
    let vo = (&v.transpose().matmul(&v) - &Matrix::identity(3)).frob();
    assert!(uo <= 1e-12 && vo <= 1e-12, "factor orthogonality {uo:.3e} {vo:.3e}");
}

#[test]
fn svd_wide_matrix_via_transpose() {
    let mut r = rng(6);
    let a = gaussian(&mut r, 3, 7);
    let (u, s, v) = a.svd();
    let recon = u.matmul(&Matrix::diag(&s)).matmul(&v.transpose());
    assert!((&recon - &a).frob() <= 1e-11 * a.frob());
}

#[test]
fn svd_rank_deficient_still_orthonormal() {
    let mut r = rng(7);
    let col = gaussian(&mut r, 6, 1);
    // Rank-1 matrix with three copies of one column direction.
    let a = col.matmul(&Matrix::from_rows(&[&[1.0, 2.0, -1.0]]));
    let (u, s, v) = a.svd();
    assert!(s[1].abs() <= 1e-12 * s[0] && s[2].abs() <= 1e-12 * s[0]);
    let uo = (&u.transpose().matmul(&u) - &Matrix::identity(3)).frob();
    assert!(uo <= 1e-10, "U orthonormal even for rank-1 input: {uo:.3e}");
    let recon = u.matmul(&Matrix::diag(&s)).matmul(&v.transpose());
    assert!((&recon - &a).frob() <= 1e-11 * a.frob());
}

#[test]
fn solve_identity_returns_rhs() {
    let mut r = rng(8);
    let b = gaussian(&mut r, 4, 2);
    let x = Matrix::identity(4).solve(&b).unwrap();
    assert!((&x - &b).frob() <= 1e-15, "solve(I, B) = B");
}

#[test]
fn solve_diagonal_division() {
    let a = Matrix::diag(&[2.0, 4.0]);
    let b = Matrix::from_rows(&[&[2.0], &[8.0]]);
    let x = a.solve(&b).unwrap();
    assert!((x[(0, 0)] - 1.0).abs() <= 1e-15 && (x[(1, 0)] - 2.0).abs() <= 1e-15);
}

#[test]
fn solve_random_10x10_residual() {
    let mut r = rng(9);
    // Diagonally dominated, hence well-conditioned.
    let a = &gaussian(&mut r, 10, 10) + &Matrix::identity(10).scale(8.0);
    let b = gaussian(&mut r, 10, 3);
    let x = a.solve(&b).unwrap();
    let resid = (&a.matmul(&x) - &b).frob();
    assert!(resid <= 1e-10 * b.frob(), "residual {resid:.3e}");
}

#[test]
fn solve_singular_reports_pivot_index() {
    let a = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
    match a.solve(&Matrix::identity(2)) {
        Err(DenseError::Singular { pivot_index, .. }) => {
            assert_eq!(pivot_index, 1, "rank-1 2x2 fails at the second pivot");
        }
        other => panic!("expected Singular, got {other:?}"),
    }
}

#[test]
fn frobenius_submultiplicative() {
    for seed in 0..20u64 {
        let mut r = rng(200 + seed);
        let a = gaussian(&mut r, 6, 4);
        let b = gaussian(&mut r, 4, 5);
        let lhs = a.matmul(&b).frob();
        let rhs = a.frob() * b.frob();
        assert!(
            lhs <= rhs * (1.0 + 1e-14),
            "seed {seed}: ||AB|| = {lhs} exceeds ||A||*||B|| = {rhs}"
        );
    }
}

#[test]
fn det_of_known_matrices() {
    assert!((Matrix::identity(5).det() - 1.0).abs() <= 1e-15);
    let a = Matrix::from_rows(&[&[2.0, 0.0], &[0.0, 3.0]]);
    assert!((a.det() - 6.0).abs() <= 1e-14);
    let rot = Matrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
    assert!((rot.det() - 1.0).abs() <= 1e-15, "rotation has det 1");
}
