use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use trivopt::curvature::{
    alpha_hat, ct, hess_exp_full_bound, hess_exp_normal_bound, hess_exp_radial_bounds,
    law_of_cosines_zetas, pi_kappa, rauch_bounds, sn, step_size, CurvatureProfile,
};

fn close(got: f64, want: f64, tol: f64, what: &str) {
    let err = if want == 0.0 {
        got.abs()
    } else {
        (got - want).abs() / want.abs()
    };
    assert!(
        err <= tol,
        "{what}: got {got:.17e}, want {want:.17e} (off by {err:.3e})"
    );
}

fn flat() -> CurvatureProfile {
    CurvatureProfile::new(0.0, 0.0, 0.0, f64::INFINITY)
}

/// δ = 0, Δ = 1/4, Λ = 0: the profile of the special orthogonal group with
/// the bi-invariant metric scaled by one half.
fn rotation_group() -> CurvatureProfile {
    CurvatureProfile::new(0.0, 0.25, 0.0, f64::INFINITY)
}

#[test]
fn sn_flat_is_the_identity() {
    assert_eq!(sn(0.0, 3.7), 3.7, "sn with zero curvature is exactly t");
}

#[test]
fn sn_unit_curvature_peaks_at_one() {
    close(sn(1.0, FRAC_PI_2), 1.0, 1e-15, "sn(1, pi/2)");
}

#[test]
fn sn_negative_curvature_is_scaled_sinh() {
    // sinh(1), 50-digit reference
    close(sn(-1.0, 1.0), 1.1752011936438015, 1e-15, "sn(-1, 1)");
}

#[test]
fn sn_series_and_closed_form_agree_at_the_switchover() {
    // references computed at 40-digit precision; |kappa| t^2 straddles 1e-8
    close(
        sn(1e-4, 0.0099),
        0.0098999999838283500,
        1e-15,
        "series branch",
    );
    close(
        sn(1e-4, 0.0101),
        0.010099999982828317,
        1e-15,
        "closed-form branch",
    );
    close(
        sn(-1e-4, 0.0099),
        0.0099000000161716500,
        1e-15,
        "series branch, negative curvature",
    );
}

#[test]
fn sn_solves_its_defining_equation() {
    let h = 1e-4;
    for &kappa in &[-2.0, -1.0, -0.3, 0.0, 0.5, 1.0, 2.0] {
        let t_max = (0.9 * pi_kappa(kappa)).min(2.0);
        let mut t = 0.1;
        while t < t_max {
            let second = (sn(kappa, t + h) - 2.0 * sn(kappa, t) + sn(kappa, t - h)) / (h * h);
            let residual = (second + kappa * sn(kappa, t)).abs();
            assert!(
                residual <= 1e-6,
                "x'' + kappa x should vanish, residual {residual:.3e} at kappa={kappa}, t={t}"
            );
            t += 0.17;
        }
    }
}

#[test]
fn sn_is_nonincreasing_in_curvature() {
    let kappas = [-3.0, -1.0, -0.25, 0.0, 0.1, 0.5, 1.0, 2.5];
    for &t in &[0.2, 0.7, 1.1] {
        let cap = (PI / t) * (PI / t);
        let valid: Vec<f64> = kappas.iter().cloned().filter(|&k| k <= cap).collect();
        for pair in valid.windows(2) {
            assert!(
                sn(pair[0], t) >= sn(pair[1], t) - 1e-12,
                "sn should not increase with curvature: sn({}, {t}) < sn({}, {t})",
                pair[0],
                pair[1]
            );
        }
    }
}

#[test]
fn sn_times_its_derivative_doubles_the_frequency() {
    // sn_k(t) sn_k'(t) = sn_4k(t), the identity behind the radial Hessian
    for &kappa in &[-1.5, -0.2, 0.0, 0.3, 1.0] {
        let t_max = (0.45 * pi_kappa(4.0 * kappa)).min(1.8);
        let mut t = 0.05;
        while t < t_max {
            let lhs = sn(kappa, t) * ct(kappa, t).unwrap() * sn(kappa, t);
            let rhs = sn(4.0 * kappa, t);
            close(lhs, rhs, 1e-12, "frequency-doubling identity");
            t += 0.13;
        }
    }
}

#[test]
fn ct_flat_is_the_reciprocal() {
    for &t in &[0.3, 1.0, 7.5] {
        close(ct(0.0, t).unwrap(), 1.0 / t, 1e-15, "ct(0, t)");
    }
}

#[test]
fn ct_rejects_arguments_past_the_first_zero() {
    let err = ct(1.0, 3.2).unwrap_err();
    close(err.limit, PI, 1e-15, "domain limit for kappa = 1");
    assert!(ct(1.0, 0.0).is_err(), "ct is undefined at t = 0");
}

#[test]
fn pi_kappa_examples() {
    close(pi_kappa(1.0), PI, 1e-15, "pi_kappa(1)");
    assert!(
        pi_kappa(-2.0).is_infinite(),
        "nonpositive curvature has no conjugate radius"
    );
    assert!(pi_kappa(0.0).is_infinite());
}

#[test]
fn rauch_bounds_flat_are_unit() {
    let (lo, hi, _) = rauch_bounds(&flat(), 2.3);
    assert_eq!((lo, hi), (1.0, 1.0), "flat space distorts nothing");
}

#[test]
fn rauch_bounds_on_the_unit_sphere_profile() {
    let sphere = CurvatureProfile::new(1.0, 1.0, 0.0, PI);
    let (lo, hi, domain) = rauch_bounds(&sphere, FRAC_PI_2);
    close(lo, 0.63661977236758134, 1e-15, "lower constant 2/pi");
    assert_eq!(hi, 1.0, "positive curvature never stretches");
    close(domain.radius_limit, PI, 1e-15, "domain is pi for sec = 1");
}

#[test]
fn rauch_upper_bound_in_negative_curvature() {
    let hyperbolic = CurvatureProfile::new(-1.0, 0.0, 0.0, f64::INFINITY);
    let (_, hi, _) = rauch_bounds(&hyperbolic, 1.0);
    close(hi, 1.1752011936438015, 1e-15, "upper constant sinh(1)");
}

#[test]
fn rauch_bounds_are_ordered_and_tend_to_one() {
    for &(lo_sec, hi_sec) in &[(-2.0, -0.5), (-1.0, 1.0), (0.1, 0.9), (0.0, 0.0)] {
        let p = CurvatureProfile::new(lo_sec, hi_sec, 0.0, f64::INFINITY);
        for &r in &[0.1, 0.6, 1.4] {
            let (lo, hi, _) = rauch_bounds(&p, r);
            assert!(lo <= hi, "lower bound {lo} exceeds upper bound {hi}");
        }
        let (lo, hi, _) = rauch_bounds(&p, 1e-6);
        assert!(
            (lo - 1.0).abs() <= 1e-9 && (hi - 1.0).abs() <= 1e-9,
            "both constants should approach 1 for tiny radii, got ({lo}, {hi})"
        );
    }
}

#[test]
fn radial_hessian_bounds_vanish_in_flat_space() {
    let (lo, hi) = hess_exp_radial_bounds(&flat(), 1.7).unwrap();
    close(lo, 0.0, 1e-15, "flat radial lower");
    close(hi, 0.0, 1e-15, "flat radial upper");
}

#[test]
fn radial_hessian_bounds_coincide_at_constant_curvature() {
    let sphere = CurvatureProfile::new(1.0, 1.0, 0.0, PI);
    let (lo, hi) = hess_exp_radial_bounds(&sphere, FRAC_PI_4).unwrap();
    close(lo, hi, 1e-14, "equality case at constant curvature");
    // 4/pi - 8/pi^2, 40-digit reference
    close(lo, 0.46267007559646051, 1e-15, "radial bound at pi/4");
}

#[test]
fn radial_hessian_bounds_respect_the_conjugate_radius() {
    let sphere = CurvatureProfile::new(1.0, 1.0, 0.0, PI);
    let err = hess_exp_radial_bounds(&sphere, PI + 0.01).unwrap_err();
    close(err.limit, PI, 1e-15, "radial domain limit");
}

#[test]
fn normal_hessian_bound_vanishes_at_constant_curvature() {
    let sphere = CurvatureProfile::new(1.0, 1.0, 0.0, PI);
    close(
        hess_exp_normal_bound(&sphere, 1.0).unwrap(),
        0.0,
        1e-15,
        "no normal component at constant curvature with flat derivative",
    );
}

#[test]
fn normal_hessian_bound_on_the_rotation_group_profile() {
    for &r in &[0.5, 1.0, 3.0, 8.0] {
        close(
            hess_exp_normal_bound(&rotation_group(), r).unwrap(),
            r / 9.0,
            1e-14,
            "rotation-group normal bound r/9",
        );
    }
    let limit = 2.0 * std::f64::consts::SQRT_2 * PI;
    assert!(hess_exp_normal_bound(&rotation_group(), limit - 1e-9).is_ok());
    let err = hess_exp_normal_bound(&rotation_group(), limit + 1e-9).unwrap_err();
    close(err.limit, limit, 1e-14, "rotation-group domain 2*sqrt(2)*pi");
}

#[test]
fn normal_hessian_bound_mixed_profile_reference() {
    let p = CurvatureProfile::new(-1.0, 0.0, 1.0, f64::INFINITY);
    // (8/9) sinh(1/2)^2 (3 sinh(1/2)^2 + 2 sinh(1)), 40-digit reference
    close(
        hess_exp_normal_bound(&p, 1.0).unwrap(),
        0.76393905974507027,
        1e-15,
        "normal bound on a pinched hyperbolic profile",
    );
}

#[test]
fn full_hessian_bound_vanishes_in_flat_space() {
    close(
        hess_exp_full_bound(&flat(), 2.0).unwrap(),
        0.0,
        1e-15,
        "flat full bound",
    );
}

#[test]
fn full_hessian_bound_on_the_rotation_group_profile() {
    for &r in &[0.5, 1.0, 3.0, 8.0] {
        close(
            hess_exp_full_bound(&rotation_group(), r).unwrap(),
            r / 3.0,
            1e-14,
            "rotation-group full bound r/3",
        );
    }
}

#[test]
fn grassmannian_profile_bounds_both_ways() {
    // profile (0, 2, 0): the full-Hessian formula gives 8r/3 while the
    // normal-part formula alone gives 8r/9; both are contract values
    let p = CurvatureProfile::new(0.0, 2.0, 0.0, FRAC_PI_2);
    close(
        hess_exp_full_bound(&p, 1.0).unwrap(),
        8.0 / 3.0,
        1e-14,
        "full-Hessian bound on the Grassmannian profile",
    );
    close(
        hess_exp_normal_bound(&p, 1.0).unwrap(),
        8.0 / 9.0,
        1e-14,
        "normal-part bound on the Grassmannian profile",
    );
}

#[test]
fn alpha_hat_flat_is_alpha() {
    close(
        alpha_hat(&flat(), 3.3, 0.9).unwrap(),
        3.3,
        1e-15,
        "flat pullback keeps the smoothness constant",
    );
}

#[test]
fn alpha_hat_on_the_rotation_group_profile() {
    close(
        alpha_hat(&rotation_group(), 1.0, 1.0).unwrap(),
        4.0 / 3.0,
        1e-14,
        "rotation-group alpha_hat at r = 1",
    );
}

#[test]
fn alpha_hat_hyperbolic_reference() {
    let p = CurvatureProfile::new(-1.0, 0.0, 0.0, f64::INFINITY);
    // sinh(1)^2 + (8/3) sinh(1/2)^2 * 2 sinh(1), 40-digit reference
    close(
        alpha_hat(&p, 1.0, 1.0).unwrap(),
        3.0830418729543702,
        1e-15,
        "alpha_hat on a hyperbolic profile",
    );
}

#[test]
fn alpha_hat_tends_to_alpha_for_small_radii() {
    for p in [
        flat(),
        rotation_group(),
        CurvatureProfile::new(-1.0, 1.0, 2.0, f64::INFINITY),
    ] {
        let got = alpha_hat(&p, 5.0, 1e-6).unwrap();
        close(got, 5.0, 1e-5, "alpha_hat limit at r -> 0");
    }
}

#[test]
fn zetas_flat_are_unit() {
    let (z1, z2) = law_of_cosines_zetas(0.0, 4.2).unwrap();
    assert_eq!((z1, z2), (1.0, 1.0), "flat law of cosines is Euclidean");
}

#[test]
fn zetas_reference_values() {
    let (z1, _) = law_of_cosines_zetas(-1.0, 1.0).unwrap();
    close(z1, 1.3130352854993313, 1e-15, "zeta_1 = coth(1)");
    let (_, z2) = law_of_cosines_zetas(1.0, FRAC_PI_4).unwrap();
    close(z2, 0.78539816339744831, 1e-15, "zeta_2 = pi/4 * cot(pi/4)");
}

#[test]
fn zetas_straddle_one() {
    for &kappa in &[-2.0, -0.5, 0.0, 0.5, 2.0] {
        for &r in &[0.1, 0.5, 1.2] {
            if r >= pi_kappa(kappa) {
                continue;
            }
            let (z1, z2) = law_of_cosines_zetas(kappa, r).unwrap();
            assert!(
                z2 <= 1.0 && 1.0 <= z1,
                "zeta ordering violated at kappa={kappa}, r={r}: ({z1}, {z2})"
            );
        }
    }
}

#[test]
fn step_size_examples() {
    close(
        step_size(&flat(), 2.0, 3.0).unwrap(),
        0.5,
        1e-15,
        "flat step size 1/alpha",
    );
    close(
        step_size(&rotation_group(), 1.0, 2.0).unwrap(),
        0.75,
        1e-14,
        "rotation-group step size at R = 2",
    );
    let hyperbolic = CurvatureProfile::new(-1.0, -1.0, 0.0, f64::INFINITY);
    // 1 / (sinh(1/2)^2/(1/4) + (8/3) sinh(1/4)^2 * 2 sinh(1/2)), 40 digits
    close(
        step_size(&hyperbolic, 1.0, 1.0).unwrap(),
        0.79144685713274477,
        1e-15,
        "constant negative curvature step size",
    );
}

#[test]
fn step_size_surfaces_domain_errors() {
    let sphere = CurvatureProfile::new(1.0, 1.0, 0.0, PI);
    assert!(
        step_size(&sphere, 1.0, 7.0).is_err(),
        "R/2 past the conjugate radius must be rejected"
    );
}

#[test]
#[should_panic(expected = "sec_lo <= sec_hi")]
fn profile_rejects_inverted_bounds() {
    let _ = CurvatureProfile::new(1.0, 0.0, 0.0, 1.0);
}

#[test]
#[should_panic(expected = "nonnegative")]
fn profile_rejects_negative_derivative_bound() {
    let _ = CurvatureProfile::new(0.0, 0.0, -1.0, 1.0);
}

#[test]
#[should_panic(expected = "injectivity radius")]
fn profile_rejects_zero_injectivity_radius() {
    let _ = CurvatureProfile::new(0.0, 0.0, 0.0, 0.0);
}
