//! Generalised trigonometric functions and the closed-form comparison
//! bounds they induce: first and second order control of the exponential
//! map, a curvature-aware law of cosines, and the guaranteed step size for
//! gradient descent through an exponential parametrisation.
//!
//! Everything here is a pure function of a curvature profile
//! (δ ≤ sec ≤ Δ, ‖∇R‖ ≤ Λ, injectivity radius) and a radius, so the same
//! code serves as a step-size provider inside the optimiser and as an
//! oracle inside the verification harness.

/// Sectional-curvature and curvature-derivative bounds of a manifold,
/// together with its injectivity radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureProfile {
    /// Lower sectional curvature bound δ.
    pub sec_lo: f64,
    /// Upper sectional curvature bound Δ.
    pub sec_hi: f64,
    /// Bound Λ on the covariant derivative of the curvature tensor.
    pub curv_deriv: f64,
    /// Injectivity radius; `f64::INFINITY` when unrestricted.
    pub inj: f64,
}

impl CurvatureProfile {
    /// # Panics
    /// Panics unless `sec_lo <= sec_hi`, `curv_deriv >= 0` and `inj > 0`.
    pub fn new(sec_lo: f64, sec_hi: f64, curv_deriv: f64, inj: f64) -> Self {
        assert!(
            sec_lo <= sec_hi,
            "curvature profile needs sec_lo <= sec_hi, got {sec_lo} > {sec_hi}"
        );
        assert!(
            curv_deriv >= 0.0,
            "curvature-derivative bound must be nonnegative, got {curv_deriv}"
        );
        assert!(inj > 0.0, "injectivity radius must be positive, got {inj}");
        CurvatureProfile {
            sec_lo,
            sec_hi,
            curv_deriv,
            inj,
        }
    }
}

/// Radius up to which a bound is valid; `f64::INFINITY` when unlimited.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundDomain {
    pub radius_limit: f64,
}

/// A radius fell outside the domain on which a bound is valid.
#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("radius {radius:.6e} is outside the bound's domain (limit {limit:.6e})")]
pub struct OutOfDomain {
    pub radius: f64,
    pub limit: f64,
}

fn check_domain(radius: f64, limit: f64) -> Result<(), OutOfDomain> {
    if radius > 0.0 && radius < limit {
        Ok(())
    } else {
        Err(OutOfDomain { radius, limit })
    }
}

/// First positive zero of [`sn`]: π/√κ for κ > 0, +∞ otherwise.
pub fn pi_kappa(kappa: f64) -> f64 {
    if kappa > 0.0 {
        std::f64::consts::PI / kappa.sqrt()
    } else {
        f64::INFINITY
    }
}

/// Generalised sine: the solution of x'' + κx = 0 with x(0) = 0, x'(0) = 1.
///
/// sin(√κ t)/√κ for κ > 0, t for κ = 0, sinh(√-κ t)/√-κ for κ < 0. A short
/// power series takes over for |κ|t² < 1e-8, which removes the removable
/// singularity at κ = 0 without losing precision.
///
/// # Panics
/// Panics if `t` is negative.
pub fn sn(kappa: f64, t: f64) -> f64 {
    assert!(t >= 0.0, "sn is defined for nonnegative arguments, got {t}");
    let u = kappa * t * t;
    if u.abs() < 1e-8 {
        return t * (1.0 - u / 6.0 + u * u / 120.0);
    }
    if kappa > 0.0 {
        let root = kappa.sqrt();
        (root * t).sin() / root
    } else {
        let root = (-kappa).sqrt();
        (root * t).sinh() / root
    }
}

/// Derivative of [`sn`] in `t`: cos(√κ t), 1, or cosh(√-κ t).
fn sn_prime(kappa: f64, t: f64) -> f64 {
    let u = kappa * t * t;
    if u.abs() < 1e-8 {
        return 1.0 - u / 2.0 + u * u / 24.0;
    }
    if kappa > 0.0 {
        (kappa.sqrt() * t).cos()
    } else {
        ((-kappa).sqrt() * t).cosh()
    }
}

/// Generalised cotangent sn'/sn, defined on 0 < t < [`pi_kappa`].
///
/// # Errors
/// [`OutOfDomain`] outside that interval.
pub fn ct(kappa: f64, t: f64) -> Result<f64, OutOfDomain> {
    check_domain(t, pi_kappa(kappa))?;
    Ok(sn_prime(kappa, t) / sn(kappa, t))
}

/// First-order comparison bounds for the differential of the exponential
/// map: for a tangent vector of length `r`,
/// `lower * ‖w‖ ≤ ‖(d exp)_rv(w)‖ ≤ upper * ‖w‖` on normal directions.
///
/// The lower constant min{1, sn_Δ(r)/r} is valid for r ≤ π_Δ (returned in
/// the domain), the upper constant max{1, sn_δ(r)/r} up to the first
/// conjugate point. Nothing is enforced here; callers check the domain.
pub fn rauch_bounds(profile: &CurvatureProfile, r: f64) -> (f64, f64, BoundDomain) {
    assert!(r > 0.0, "rauch_bounds needs a positive radius, got {r}");
    let lower = (sn(profile.sec_hi, r) / r).min(1.0);
    let upper = (sn(profile.sec_lo, r) / r).max(1.0);
    (
        lower,
        upper,
        BoundDomain {
            radius_limit: pi_kappa(profile.sec_hi),
        },
    )
}

/// Bounds on the radial part of the Hessian of the exponential map:
/// `⟨(∇ d exp)(w, w), γ̇⟩` for unit normal `w` lies in
/// `[1/r - sn_4δ(r)/r², 1/r - sn_4Δ(r)/r²]`.
///
/// # Errors
/// [`OutOfDomain`] unless 0 < r < π_Δ.
pub fn hess_exp_radial_bounds(
    profile: &CurvatureProfile,
    r: f64,
) -> Result<(f64, f64), OutOfDomain> {
    check_domain(r, pi_kappa(profile.sec_hi))?;
    let lo = 1.0 / r - sn(4.0 * profile.sec_lo, r) / (r * r);
    let hi = 1.0 / r - sn(4.0 * profile.sec_hi, r) / (r * r);
    Ok((lo, hi))
}

fn normal_domain(profile: &CurvatureProfile) -> f64 {
    pi_kappa(0.5 * (profile.sec_lo + profile.sec_hi))
}

/// Upper bound on the normal component of the Hessian of the exponential
/// map, per unit ‖w‖²:
/// `(8/(9r²)) sn_δ(r/2)² (3Λ sn_δ(r/2)² + 2(Δ-δ) sn_δ(r))`.
///
/// # Errors
/// [`OutOfDomain`] unless 0 < r < π_{(Δ+δ)/2}.
pub fn hess_exp_normal_bound(profile: &CurvatureProfile, r: f64) -> Result<f64, OutOfDomain> {
    check_domain(r, normal_domain(profile))?;
    let half = sn(profile.sec_lo, r / 2.0);
    let full = sn(profile.sec_lo, r);
    Ok(8.0 / (9.0 * r * r)
        * half
        * half
        * (3.0 * profile.curv_deriv * half * half
            + 2.0 * (profile.sec_hi - profile.sec_lo) * full))
}

/// Upper bound on the full Hessian of the exponential map, per unit ‖w‖²:
/// `(8/(3r²)) sn_δ(r/2)² (Λ sn_δ(r/2)² + 2 max{|Δ|, |δ|} sn_δ(r))`.
///
/// # Errors
/// [`OutOfDomain`] unless 0 < r < π_{(Δ+δ)/2}.
pub fn hess_exp_full_bound(profile: &CurvatureProfile, r: f64) -> Result<f64, OutOfDomain> {
    check_domain(r, normal_domain(profile))?;
    let half = sn(profile.sec_lo, r / 2.0);
    let full = sn(profile.sec_lo, r);
    let sec_abs = profile.sec_hi.abs().max(profile.sec_lo.abs());
    Ok(8.0 / (3.0 * r * r)
        * half
        * half
        * (profile.curv_deriv * half * half + 2.0 * sec_abs * full))
}

/// Smoothness constant of `f ∘ exp_p` on a ball of radius `r`, given a
/// Hessian bound `alpha` for `f` itself: `α̂ = α (C₁ + C₂)` with
/// `C₁ = max{1, sn_δ(r)²/r²}` and `C₂ = r²` times the full Hessian bound.
///
/// # Errors
/// [`OutOfDomain`] as for [`hess_exp_full_bound`].
pub fn alpha_hat(profile: &CurvatureProfile, alpha: f64, r: f64) -> Result<f64, OutOfDomain> {
    assert!(alpha >= 0.0, "Hessian bound must be nonnegative, got {alpha}");
    let ratio = sn(profile.sec_lo, r) / r;
    let c1 = (ratio * ratio).max(1.0);
    let c2 = r * r * hess_exp_full_bound(profile, r)?;
    Ok(alpha * (c1 + c2))
}

/// Comparison coefficients of the curvature-aware law of cosines:
/// `ζ₁ = max{1, r ct_κ(r)}` and `ζ₂ = min{1, r ct_κ(r)}`.
///
/// # Errors
/// [`OutOfDomain`] unless 0 < r < π_κ.
pub fn law_of_cosines_zetas(kappa: f64, r: f64) -> Result<(f64, f64), OutOfDomain> {
    let t = r * ct(kappa, r)?;
    Ok((t.max(1.0), t.min(1.0)))
}

/// Guaranteed step size 1/α̂_{R/2} for gradient descent on the pullback of
/// an α-smooth function, when iterates stay in a ball of radius R/2.
///
/// # Errors
/// [`OutOfDomain`] when R/2 falls outside the full-bound domain.
pub fn step_size(profile: &CurvatureProfile, alpha: f64, big_r: f64) -> Result<f64, OutOfDomain> {
    Ok(1.0 / alpha_hat(profile, alpha, big_r / 2.0)?)
}
