//! Matrix manifolds with closed-form Riemannian exponentials.
//!
//! Every manifold here is driven through an unconstrained `raw` parameter:
//! a frame map turns the raw matrix into a tangent vector at the current
//! base point, the matrix exponential turns that tangent vector into a new
//! point, and the adjoint of the whole chain pulls ambient gradients back
//! to raw coordinates. Optimisers therefore never see a constraint.
//!
//! The rotation group carries the metric ⟨A, B⟩ = ½ tr(AᵀB) on skew
//! matrices. The Stiefel manifold, the Grassmannian and the sphere are
//! driven through an n×n rotation lift: raw coordinates are zero-padded
//! into the lift's algebra, the lift moves by the group exponential, and
//! the visible point is a column slice of the lift. Symmetric positive
//! definite matrices use the affine-invariant metric, with
//! exp_A(Δ) = A·expm(A⁻¹Δ).

use crate::curvature::CurvatureProfile;
use crate::dense::Matrix;
use crate::expm::{dexpm, expm};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{FRAC_PI_2, PI};

/// Constraint tolerance for accepting a matrix as a point of a manifold.
pub const CONSTRAINT_TOL: f64 = 1e-9;

/// Which manifold a spec describes.
#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    /// Rotation matrices: n×n orthogonal with determinant +1.
    SpecialOrthogonal(usize),
    /// n×k matrices with orthonormal columns, 1 ≤ k < n.
    Stiefel(usize, usize),
    /// k-dimensional subspaces of Rⁿ, represented by n×k orthonormal
    /// frames and compared by principal angles.
    Grassmannian(usize, usize),
    /// Symmetric positive-definite n×n matrices, affine-invariant metric.
    Spd(usize),
    /// Unit vectors in Rⁿ (the round sphere), driven as Stiefel with k=1.
    Sphere(usize),
    /// Plain rows×cols matrices with no constraint.
    Euclidean(usize, usize),
    /// Cartesian product of the above; operations act componentwise.
    Product(Vec<ManifoldSpec>),
}

impl Kind {
    /// Short lowercase label, used in error messages and check reports.
    pub fn name(&self) -> &'static str {
        match self {
            Kind::SpecialOrthogonal(_) => "special orthogonal",
            Kind::Stiefel(_, _) => "stiefel",
            Kind::Grassmannian(_, _) => "grassmannian",
            Kind::Spd(_) => "spd",
            Kind::Sphere(_) => "sphere",
            Kind::Euclidean(_, _) => "euclidean",
            Kind::Product(_) => "product",
        }
    }
}

/// A manifold description: its kind plus derived shapes and curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSpec {
    pub kind: Kind,
}

/// A point on a manifold. For the lifted manifolds (Stiefel, Grassmannian,
/// sphere) the stored part is the full n×n rotation lift; [`value`] exposes
/// the ambient representative.
///
/// [`value`]: ManifoldPoint::value
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPoint {
    spec: ManifoldSpec,
    parts: Vec<Matrix>,
}

/// Unconstrained coordinates feeding the frame maps; one matrix per
/// product component.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentCoords {
    spec: ManifoldSpec,
    parts: Vec<Matrix>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ManifoldError {
    #[error("{kind} point violates its constraint: residual {residual:.3e} exceeds {tolerance:.0e}")]
    Constraint {
        kind: &'static str,
        residual: f64,
        tolerance: f64,
    },
    #[error("{kind} point has determinant {det:.6} instead of +1")]
    WrongComponent { kind: &'static str, det: f64 },
    #[error("spd point is not positive definite: minimum eigenvalue {min_eig:.6e}")]
    NotPositiveDefinite { min_eig: f64 },
    #[error(
        "spd trivialisation would overflow: exponent scale {scale:.3e} exceeds {limit}"
    )]
    TrivOverflow { scale: f64, limit: f64 },
}

impl ManifoldSpec {
    /// # Panics
    /// Panics for n < 2.
    pub fn special_orthogonal(n: usize) -> Self {
        assert!(n >= 2, "the rotation group needs n >= 2, got {n}");
        ManifoldSpec {
            kind: Kind::SpecialOrthogonal(n),
        }
    }

    /// # Panics
    /// Panics unless 1 ≤ k < n. For k = n use the rotation group: the
    /// square Stiefel manifold is disconnected and the lift construction
    /// does not apply.
    pub fn stiefel(n: usize, k: usize) -> Self {
        assert!(
            (1..n).contains(&k),
            "stiefel needs 1 <= k < n, got n = {n}, k = {k}"
        );
        ManifoldSpec {
            kind: Kind::Stiefel(n, k),
        }
    }

    /// # Panics
    /// Panics unless 1 ≤ k < n.
    pub fn grassmannian(n: usize, k: usize) -> Self {
        assert!(
            (1..n).contains(&k),
            "grassmannian needs 1 <= k < n, got n = {n}, k = {k}"
        );
        ManifoldSpec {
            kind: Kind::Grassmannian(n, k),
        }
    }

    /// # Panics
    /// Panics for n < 2.
    pub fn spd(n: usize) -> Self {
        assert!(n >= 2, "spd needs n >= 2, got {n}");
        ManifoldSpec { kind: Kind::Spd(n) }
    }

    /// The unit sphere in Rⁿ. # Panics for n < 2.
    pub fn sphere(n: usize) -> Self {
        assert!(n >= 2, "the sphere needs ambient dimension >= 2, got {n}");
        ManifoldSpec {
            kind: Kind::Sphere(n),
        }
    }

    pub fn euclidean(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "euclidean shape must be nonempty");
        ManifoldSpec {
            kind: Kind::Euclidean(rows, cols),
        }
    }

    /// # Panics
    /// Panics on an empty list or on nested products.
    pub fn product(components: Vec<ManifoldSpec>) -> Self {
        assert!(!components.is_empty(), "product of no manifolds");
        assert!(
            components
                .iter()
                .all(|c| !matches!(c.kind, Kind::Product(_))),
            "products do not nest; flatten the component list"
        );
        ManifoldSpec {
            kind: Kind::Product(components),
        }
    }

    /// The product components, or the spec itself for plain manifolds.
    pub fn components(&self) -> Vec<&ManifoldSpec> {
        match &self.kind {
            Kind::Product(list) => list.iter().collect(),
            _ => vec![self],
        }
    }

    /// Shape of the unconstrained raw parameter, per component.
    pub fn raw_shapes(&self) -> Vec<(usize, usize)> {
        self.components()
            .iter()
            .map(|c| match c.kind {
                Kind::SpecialOrthogonal(n) => (n, n),
                Kind::Stiefel(n, k) | Kind::Grassmannian(n, k) => (n, k),
                Kind::Spd(n) => (n, n),
                Kind::Sphere(n) => (n, 1),
                Kind::Euclidean(r, c) => (r, c),
                Kind::Product(_) => unreachable!("products do not nest"),
            })
            .collect()
    }

    /// Shape of the ambient representation, per component.
    pub fn point_shapes(&self) -> Vec<(usize, usize)> {
        self.raw_shapes()
    }

    /// Curvature profile in the ½ tr(AᵀB) metric, where one is shipped.
    ///
    /// The rotation-group bound of ½ is tight for n ≥ 4: orthonormal pairs
    /// inside one su(2) factor of an so(4) subalgebra have ‖[X,Y]‖² = 2, and
    /// the sharp skew commutator inequality ‖[X,Y]‖_F ≤ ‖X‖_F‖Y‖_F caps the
    /// bracket there, so sec = ¼‖[X,Y]‖² ≤ ½. SO(3) is the round projective
    /// space of constant curvature ¼ and SO(2) is flat; both sit inside
    /// [0, ½], so one profile serves every n.
    ///
    /// The Stiefel manifold has no closed-form profile in this metric and
    /// the positive-definite cone's lower bound depends on the eigenvalue
    /// range in play, so both return `None` and callers supply their own.
    pub fn curvature(&self) -> Option<CurvatureProfile> {
        match self.kind {
            Kind::SpecialOrthogonal(_) => Some(CurvatureProfile::new(0.0, 0.5, 0.0, PI)),
            Kind::Grassmannian(_, _) => Some(CurvatureProfile::new(0.0, 2.0, 0.0, FRAC_PI_2)),
            Kind::Sphere(_) => Some(CurvatureProfile::new(1.0, 1.0, 0.0, PI)),
            Kind::Euclidean(_, _) => {
                Some(CurvatureProfile::new(0.0, 0.0, 0.0, f64::INFINITY))
            }
            _ => None,
        }
    }
}

/// Frame map of the rotation group: A ↦ tril(A) − tril(A)ᵀ. The output is
/// exactly skew-symmetric and its strictly lower triangle equals the
/// input's.
///
/// # Panics
/// Panics on non-square input.
pub fn frame_skew(x: &Matrix) -> Matrix {
    assert!(x.is_square(), "frame_skew requires a square matrix");
    let n = x.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            out[(i, j)] = x[(i, j)];
            out[(j, i)] = -x[(i, j)];
        }
    }
    out
}

/// Adjoint of [`frame_skew`]: strict lower triangle of M − Mᵀ, upper part
/// and diagonal zero.
fn strict_lower_diff(m: &Matrix) -> Matrix {
    let n = m.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            out[(i, j)] = m[(i, j)] - m[(j, i)];
        }
    }
    out
}

/// Zero-pad an n×k matrix to n×n by appending zero columns.
fn pad_cols(x: &Matrix, n: usize) -> Matrix {
    Matrix::zeros(n, n).with_block(0, 0, x)
}

/// Zero the top k×k block (the coordinates a Grassmannian quotient kills).
fn zero_top_block(x: &Matrix, k: usize) -> Matrix {
    let mut out = x.clone();
    for i in 0..k {
        for j in 0..x.cols().min(k) {
            out[(i, j)] = 0.0;
        }
    }
    out
}

fn sym(x: &Matrix) -> Matrix {
    (&(x + &x.transpose())).scale(0.5)
}

/// Residual-checked constructors and accessors.
impl ManifoldPoint {
    /// Wrap raw parts as a point, enforcing each component's constraint to
    /// within [`CONSTRAINT_TOL`]. For Stiefel, Grassmannian and sphere
    /// components the part is the n×n rotation lift, not the n×k slice.
    ///
    /// # Errors
    /// [`ManifoldError`] describing the violated constraint.
    ///
    /// # Panics
    /// Panics if the number of parts or any shape disagrees with the spec.
    pub fn new(spec: ManifoldSpec, parts: Vec<Matrix>) -> Result<Self, ManifoldError> {
        let comps = spec.components();
        assert_eq!(
            parts.len(),
            comps.len(),
            "shape error: {} parts supplied for {} components",
            parts.len(),
            comps.len()
        );
        for (c, p) in comps.iter().zip(&parts) {
            let (rows, cols) = internal_shape(c);
            assert_eq!(
                (p.rows(), p.cols()),
                (rows, cols),
                "shape error: component {} expects a {}x{} part, got {}x{}",
                c.kind.name(),
                rows,
                cols,
                p.rows(),
                p.cols()
            );
            validate_part(c, p)?;
        }
        Ok(ManifoldPoint { spec, parts })
    }

    pub fn spec(&self) -> &ManifoldSpec {
        &self.spec
    }

    /// Internal parts: rotation lifts for lifted manifolds.
    pub fn parts(&self) -> &[Matrix] {
        &self.parts
    }

    /// Ambient representative of each component (column slices of the lift
    /// for Stiefel, Grassmannian and sphere components).
    pub fn values(&self) -> Vec<Matrix> {
        self.spec
            .components()
            .iter()
            .zip(&self.parts)
            .map(|(c, p)| match c.kind {
                Kind::Stiefel(n, k) | Kind::Grassmannian(n, k) => p.block(0, 0, n, k),
                Kind::Sphere(n) => p.block(0, 0, n, 1),
                _ => p.clone(),
            })
            .collect()
    }

    /// Ambient representative of a plain (non-product) manifold.
    ///
    /// # Panics
    /// Panics on product specs; use [`values`](Self::values).
    pub fn value(&self) -> Matrix {
        assert!(
            !matches!(self.spec.kind, Kind::Product(_)),
            "value() is for plain manifolds; products expose values()"
        );
        self.values().remove(0)
    }

    /// Largest constraint residual across components.
    pub fn constraint_residual(&self) -> f64 {
        self.spec
            .components()
            .iter()
            .zip(&self.parts)
            .map(|(c, p)| part_residual(c, p))
            .fold(0.0, f64::max)
    }
}

/// Shape of the stored part (the lift for lifted kinds).
fn internal_shape(spec: &ManifoldSpec) -> (usize, usize) {
    match spec.kind {
        Kind::SpecialOrthogonal(n)
        | Kind::Stiefel(n, _)
        | Kind::Grassmannian(n, _)
        | Kind::Sphere(n)
        | Kind::Spd(n) => (n, n),
        Kind::Euclidean(r, c) => (r, c),
        Kind::Product(_) => unreachable!("products do not nest"),
    }
}

fn part_residual(spec: &ManifoldSpec, p: &Matrix) -> f64 {
    match spec.kind {
        Kind::SpecialOrthogonal(n)
        | Kind::Stiefel(n, _)
        | Kind::Grassmannian(n, _)
        | Kind::Sphere(n) => {
            (&p.transpose().matmul(p) - &Matrix::identity(n)).frob()
        }
        Kind::Spd(_) => (p - &p.transpose()).frob() / p.frob().max(1.0),
        Kind::Euclidean(_, _) => 0.0,
        Kind::Product(_) => unreachable!("products do not nest"),
    }
}

fn validate_part(spec: &ManifoldSpec, p: &Matrix) -> Result<(), ManifoldError> {
    let kind = spec.kind.name();
    let residual = part_residual(spec, p);
    // negated comparisons so that a NaN residual is rejected, not waved
    // through
    if !(residual <= CONSTRAINT_TOL) {
        return Err(ManifoldError::Constraint {
            kind,
            residual,
            tolerance: CONSTRAINT_TOL,
        });
    }
    match spec.kind {
        Kind::SpecialOrthogonal(_)
        | Kind::Stiefel(_, _)
        | Kind::Grassmannian(_, _)
        | Kind::Sphere(_) => {
            let det = p.det();
            if !((det - 1.0).abs() <= 1e-6) {
                return Err(ManifoldError::WrongComponent { kind, det });
            }
        }
        Kind::Spd(_) => {
            let (lam, _) = sym(p)
                .sym_eig()
                .expect("symmetrised matrix must pass the symmetry check");
            let min_eig = lam[0];
            if !(min_eig > 0.0) {
                return Err(ManifoldError::NotPositiveDefinite { min_eig });
            }
        }
        _ => {}
    }
    Ok(())
}

impl TangentCoords {
    /// All-zero raw coordinates (the basepoint of every trivialisation).
    pub fn zeros(spec: &ManifoldSpec) -> Self {
        let parts = spec
            .raw_shapes()
            .into_iter()
            .map(|(r, c)| Matrix::zeros(r, c))
            .collect();
        TangentCoords {
            spec: spec.clone(),
            parts,
        }
    }

    /// # Panics
    /// Panics if the part count or shapes disagree with the spec.
    pub fn from_parts(spec: &ManifoldSpec, parts: Vec<Matrix>) -> Self {
        let shapes = spec.raw_shapes();
        assert_eq!(
            parts.len(),
            shapes.len(),
            "shape error: {} raw parts for {} components",
            parts.len(),
            shapes.len()
        );
        for (p, &(r, c)) in parts.iter().zip(&shapes) {
            assert_eq!(
                (p.rows(), p.cols()),
                (r, c),
                "shape error: raw part should be {}x{}, got {}x{}",
                r,
                c,
                p.rows(),
                p.cols()
            );
        }
        TangentCoords {
            spec: spec.clone(),
            parts,
        }
    }

    pub fn spec(&self) -> &ManifoldSpec {
        &self.spec
    }

    pub fn parts(&self) -> &[Matrix] {
        &self.parts
    }

    /// Raw matrix of a plain manifold.
    ///
    /// # Panics
    /// Panics on product specs.
    pub fn raw(&self) -> &Matrix {
        assert!(
            !matches!(self.spec.kind, Kind::Product(_)),
            "raw() is for plain manifolds; products expose parts()"
        );
        &self.parts[0]
    }

    /// Flat Euclidean norm across all raw parts. Under the shipped frames
    /// this equals the Riemannian norm of the tangent vector for the
    /// rotation group, Stiefel, Grassmannian and sphere.
    pub fn norm(&self) -> f64 {
        self.parts
            .iter()
            .map(|p| {
                let f = p.frob();
                f * f
            })
            .sum::<f64>()
            .sqrt()
    }

    /// self ← self + c · other, part by part.
    ///
    /// # Panics
    /// Panics on shape mismatch.
    pub fn add_scaled(&mut self, other: &TangentCoords, c: f64) {
        assert_eq!(
            self.parts.len(),
            other.parts.len(),
            "shape error: mismatched part counts"
        );
        for (a, b) in self.parts.iter_mut().zip(&other.parts) {
            *a = &*a + &b.scale(c);
        }
    }

    pub fn scale_in_place(&mut self, c: f64) {
        for p in self.parts.iter_mut() {
            *p = p.scale(c);
        }
    }

    pub fn set_zero(&mut self) {
        for p in self.parts.iter_mut() {
            *p = Matrix::zeros(p.rows(), p.cols());
        }
    }
}

/// The skew generator a raw part feeds into the lift's exponential.
fn lift_generator(spec: &ManifoldSpec, raw: &Matrix) -> Matrix {
    match spec.kind {
        Kind::SpecialOrthogonal(_) => frame_skew(raw),
        Kind::Stiefel(n, _) | Kind::Sphere(n) => frame_skew(&pad_cols(raw, n)),
        Kind::Grassmannian(n, k) => frame_skew(&pad_cols(&zero_top_block(raw, k), n)),
        _ => panic!("lift_generator applies to lifted manifolds only"),
    }
}

/// The SPD exponential is the one unbounded trivialisation: cap the
/// exponent so a divergent optimiser surfaces a typed error instead of
/// overflowing the dense layer. `exp(700)` is still finite in f64 with
/// room for the base multiplication.
const SPD_EXP_LIMIT: f64 = 700.0;

fn triv_part(spec: &ManifoldSpec, base: &Matrix, raw: &Matrix) -> Result<Matrix, ManifoldError> {
    Ok(match spec.kind {
        Kind::SpecialOrthogonal(_)
        | Kind::Stiefel(_, _)
        | Kind::Grassmannian(_, _)
        | Kind::Sphere(_) => base.matmul(&expm(&lift_generator(spec, raw))),
        Kind::Spd(_) => {
            let delta = sym(raw);
            let inner = base
                .solve(&delta)
                .expect("validated spd base must be invertible");
            let scale = inner.frob() + base.frob().max(1.0).ln();
            if scale > SPD_EXP_LIMIT {
                return Err(ManifoldError::TrivOverflow {
                    scale,
                    limit: SPD_EXP_LIMIT,
                });
            }
            let out = base.matmul(&expm(&inner));
            sym(&out)
        }
        Kind::Euclidean(_, _) => base + raw,
        Kind::Product(_) => unreachable!("products do not nest"),
    })
}

/// Move from `base` by the raw coordinates `x`: the Riemannian exponential
/// in the frame the manifold ships. Componentwise on products.
///
/// # Errors
/// [`ManifoldError`] when the basepoint (or, for SPD, the result) violates
/// its constraint, or when an SPD offset is so large its exponential
/// would overflow.
///
/// # Panics
/// Panics when specs or shapes disagree.
pub fn triv(base: &ManifoldPoint, x: &TangentCoords) -> Result<ManifoldPoint, ManifoldError> {
    assert_eq!(
        base.spec, x.spec,
        "shape error: basepoint and coordinates describe different manifolds"
    );
    let comps = base.spec.components();
    let mut parts = Vec::with_capacity(comps.len());
    for ((c, b), raw) in comps.iter().zip(&base.parts).zip(&x.parts) {
        validate_part(c, b)?;
        parts.push(triv_part(c, b, raw)?);
    }
    ManifoldPoint::new(base.spec.clone(), parts)
}

/// Exponential parametrisation of the rotation group:
/// B · expm(frame_skew(X)).
///
/// # Errors
/// Constraint error on an invalid basepoint.
pub fn triv_so(base: &ManifoldPoint, x: &TangentCoords) -> Result<ManifoldPoint, ManifoldError> {
    assert!(
        matches!(base.spec.kind, Kind::SpecialOrthogonal(_)),
        "triv_so expects a rotation-group point"
    );
    triv(base, x)
}

/// Stiefel trivialisation through the rotation lift: zero-pad the n×k raw
/// block into the lift's algebra, move the lift, keep the first k columns
/// as the visible point. `lift` is the full n×n rotation.
///
/// # Errors
/// Constraint error when the lift is not a rotation.
pub fn triv_stiefel(
    lift: &Matrix,
    x: &TangentCoords,
) -> Result<ManifoldPoint, ManifoldError> {
    assert!(
        matches!(x.spec.kind, Kind::Stiefel(_, _) | Kind::Sphere(_)),
        "triv_stiefel expects Stiefel or sphere coordinates"
    );
    let base = ManifoldPoint::new(x.spec.clone(), vec![lift.clone()])?;
    triv(&base, x)
}

/// Grassmannian trivialisation: kill the top k×k raw block (motion inside
/// the subspace), then follow the Stiefel path. Outputs are orthonormal
/// representatives of the subspace.
///
/// # Errors
/// Constraint error when the lift is not a rotation.
pub fn triv_grassmann(
    lift: &Matrix,
    x: &TangentCoords,
) -> Result<ManifoldPoint, ManifoldError> {
    assert!(
        matches!(x.spec.kind, Kind::Grassmannian(_, _)),
        "triv_grassmann expects Grassmannian coordinates"
    );
    let base = ManifoldPoint::new(x.spec.clone(), vec![lift.clone()])?;
    triv(&base, x)
}

/// Affine-invariant exponential on the positive-definite cone:
/// exp_A(sym X) = A · expm(A⁻¹ sym X).
///
/// # Errors
/// Constraint error on a non-SPD basepoint.
pub fn triv_spd(base: &ManifoldPoint, x: &TangentCoords) -> Result<ManifoldPoint, ManifoldError> {
    assert!(
        matches!(base.spec.kind, Kind::Spd(_)),
        "triv_spd expects a positive-definite point"
    );
    triv(base, x)
}

/// Projection onto the tangent space of the rotation group at B:
/// π_B(M) = ½(M − B Mᵀ B).
///
/// # Panics
/// Panics on shape mismatch.
pub fn tangent_project_so(b: &Matrix, m: &Matrix) -> Matrix {
    (&(m - &b.matmul(&m.transpose()).matmul(b))).scale(0.5)
}

fn pullback_part(spec: &ManifoldSpec, base: &Matrix, raw: &Matrix, g: &Matrix) -> Matrix {
    match spec.kind {
        Kind::SpecialOrthogonal(_) => {
            let s = lift_generator(spec, raw);
            let m = dexpm(&s.transpose(), &base.transpose().matmul(g));
            strict_lower_diff(&m)
        }
        Kind::Stiefel(n, k) | Kind::Grassmannian(n, k) => {
            let s = lift_generator(spec, raw);
            let g_pad = pad_cols(g, n);
            let m = dexpm(&s.transpose(), &base.transpose().matmul(&g_pad));
            let full = strict_lower_diff(&m).block(0, 0, n, k);
            if matches!(spec.kind, Kind::Grassmannian(_, _)) {
                zero_top_block(&full, k)
            } else {
                full
            }
        }
        Kind::Sphere(n) => {
            let s = lift_generator(spec, raw);
            let g_pad = pad_cols(g, n);
            let m = dexpm(&s.transpose(), &base.transpose().matmul(&g_pad));
            strict_lower_diff(&m).block(0, 0, n, 1)
        }
        Kind::Spd(_) => {
            let delta = sym(raw);
            let inner = base
                .solve(&delta)
                .expect("validated spd base must be invertible");
            let m = dexpm(&inner.transpose(), &base.matmul(g));
            sym(&base
                .solve(&m)
                .expect("validated spd base must be invertible"))
        }
        Kind::Euclidean(_, _) => g.clone(),
        Kind::Product(_) => unreachable!("products do not nest"),
    }
}

/// Pull an ambient gradient back to raw coordinates: the adjoint of the
/// trivialisation's differential at `x`, taken in the Frobenius pairing.
/// `g_ambient` holds one gradient per component, shaped like the ambient
/// representation.
///
/// At `x = 0` the raw gradient reproduces the Riemannian gradient: feeding
/// it back through the frame gives B(BᵀG − GᵀB) = G − BGᵀB on the rotation
/// group.
///
/// # Panics
/// Panics when shapes disagree with the spec.
pub fn pullback_grad(
    base: &ManifoldPoint,
    x: &TangentCoords,
    g_ambient: &[Matrix],
) -> TangentCoords {
    assert_eq!(
        base.spec, x.spec,
        "shape error: basepoint and coordinates describe different manifolds"
    );
    let comps = base.spec.components();
    assert_eq!(
        g_ambient.len(),
        comps.len(),
        "shape error: {} ambient gradients for {} components",
        g_ambient.len(),
        comps.len()
    );
    let point_shapes = base.spec.point_shapes();
    for (g, &(r, c)) in g_ambient.iter().zip(&point_shapes) {
        assert_eq!(
            (g.rows(), g.cols()),
            (r, c),
            "shape error: ambient gradient should be {}x{}, got {}x{}",
            r,
            c,
            g.rows(),
            g.cols()
        );
    }
    let parts = comps
        .iter()
        .zip(&base.parts)
        .zip(&x.parts)
        .zip(g_ambient)
        .map(|(((c, b), raw), g)| pullback_part(c, b, raw, g))
        .collect();
    TangentCoords::from_parts(&base.spec, parts)
}

/// Differential of the trivialisation at zero raw offset: the ambient
/// image of raw direction `e`. Used by finite-difference checks.
pub fn frame_ambient(base: &ManifoldPoint, e: &TangentCoords) -> Vec<Matrix> {
    assert_eq!(
        base.spec, e.spec,
        "shape error: basepoint and coordinates describe different manifolds"
    );
    base.spec
        .components()
        .iter()
        .zip(&base.parts)
        .zip(&e.parts)
        .map(|((c, b), raw)| match c.kind {
            Kind::SpecialOrthogonal(_) => b.matmul(&lift_generator(c, raw)),
            Kind::Stiefel(n, k) | Kind::Grassmannian(n, k) => {
                b.matmul(&lift_generator(c, raw)).block(0, 0, n, k)
            }
            Kind::Sphere(n) => b.matmul(&lift_generator(c, raw)).block(0, 0, n, 1),
            Kind::Spd(_) => sym(raw),
            Kind::Euclidean(_, _) => raw.clone(),
            Kind::Product(_) => unreachable!("products do not nest"),
        })
        .collect()
}

/// Haar-distributed rotation: QR of a Gaussian matrix with the R-diagonal
/// sign fix, then a last-column flip onto the determinant +1 component.
fn haar_rotation(r: &mut ChaCha8Rng, n: usize) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| r.sample(StandardNormal));
    let (mut q, _) = g.qr();
    if q.det() < 0.0 {
        for i in 0..n {
            q[(i, n - 1)] = -q[(i, n - 1)];
        }
    }
    q
}

/// Deterministic random point: Haar rotations for the lifted manifolds,
/// eigenvalues log-uniform in [1/2, 2] for the positive-definite cone,
/// standard Gaussian entries for Euclidean components.
pub fn random_point(spec: &ManifoldSpec, seed: u64) -> ManifoldPoint {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let parts = spec
        .components()
        .iter()
        .map(|c| match c.kind {
            Kind::SpecialOrthogonal(n)
            | Kind::Stiefel(n, _)
            | Kind::Grassmannian(n, _)
            | Kind::Sphere(n) => haar_rotation(&mut r, n),
            Kind::Spd(n) => {
                let q = haar_rotation(&mut r, n);
                let lam: Vec<f64> = (0..n)
                    .map(|_| {
                        let u: f64 = r.random();
                        (2.0f64).powf(2.0 * u - 1.0)
                    })
                    .collect();
                sym(&q.matmul(&Matrix::diag(&lam)).matmul(&q.transpose()))
            }
            Kind::Euclidean(rows, cols) => {
                Matrix::from_fn(rows, cols, |_, _| r.sample(StandardNormal))
            }
            Kind::Product(_) => unreachable!("products do not nest"),
        })
        .collect();
    ManifoldPoint::new(spec.clone(), parts)
        .expect("sampled points satisfy their constraints by construction")
}

/// Raw coordinates whose exponential is a block-diagonal rotation: one
/// angle per 2×2 diagonal block, i.i.d. uniform on [−π, π], the classic
/// orthogonal-RNN initialisation. Odd trailing dimension stays zero.
pub fn henaff_init(n: usize, seed: u64) -> TangentCoords {
    assert!(n >= 2, "block-diagonal initialisation needs n >= 2");
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let spec = ManifoldSpec::special_orthogonal(n);
    let mut raw = Matrix::zeros(n, n);
    for b in 0..n / 2 {
        let s = PI * (2.0 * r.random::<f64>() - 1.0);
        raw[(2 * b + 1, 2 * b)] = s;
    }
    TangentCoords::from_parts(&spec, vec![raw])
}

/// Compose manifolds into a product; operations act componentwise and
/// gradients concatenate.
pub fn product_compose(components: Vec<ManifoldSpec>) -> ManifoldSpec {
    ManifoldSpec::product(components)
}

/// Principal angles between the column spans of two orthonormal n×k
/// frames, ascending in [0, π/2].
///
/// Angles whose cosine exceeds 1/sqrt(2) are recomputed from the sine,
/// via the projection of one frame off the other; acos alone cannot
/// resolve angles below about 1e-8.
///
/// # Panics
/// Panics on shape mismatch.
pub fn principal_angles(u: &Matrix, v: &Matrix) -> Vec<f64> {
    assert_eq!(
        (u.rows(), u.cols()),
        (v.rows(), v.cols()),
        "shape error: principal angles need frames of equal shape"
    );
    let cross = u.transpose().matmul(v);
    let (_, cosines, _) = cross.svd();
    let residual = v - &u.matmul(&cross);
    let (_, sines, _) = residual.svd();
    let mut angles: Vec<f64> = cosines
        .iter()
        .map(|&c| c.clamp(-1.0, 1.0).acos())
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // sines come out descending; pair the smallest angle with the
    // smallest sine
    let mut sines = sines;
    sines.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (angle, &s) in angles.iter_mut().zip(&sines) {
        if angle.cos() > std::f64::consts::FRAC_1_SQRT_2 {
            *angle = s.clamp(-1.0, 1.0).asin();
        }
    }
    angles
}
