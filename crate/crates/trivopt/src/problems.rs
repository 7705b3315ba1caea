//! Benchmark objectives with analytic gradients and independent optima.
//!
//! Each constructor returns a [`Problem`]: an objective on a manifold,
//! its ambient (Frobenius) gradient, and where available an optimum
//! computed by independent linear algebra (SVD, eigendecomposition,
//! geodesic midpoint) rather than by running the optimiser. Every
//! gradient is validated at construction against central finite
//! differences through the trivialisation at random points, so a
//! Problem that constructs is a Problem whose gradient can be trusted.

use crate::dense::Matrix;
use crate::expm::{logm_spd, sqrtm_spd};
use crate::manifolds::{
    pullback_grad, random_point, triv, ManifoldError, ManifoldPoint, ManifoldSpec, TangentCoords,
};
use crate::trivialize::Objective;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use std::io::{Read, Write};

type ValueFn = Box<dyn Fn(&ManifoldPoint) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&ManifoldPoint) -> Vec<Matrix> + Send + Sync>;

/// An objective function bundled with its manifold, ambient gradient
/// and, where one exists in closed form, an independently computed
/// optimum to measure convergence against.
pub struct Problem {
    spec: ManifoldSpec,
    name: &'static str,
    f: ValueFn,
    ambient_grad: GradFn,
    oracle_optimum: Option<(f64, ManifoldPoint)>,
}

impl Problem {
    /// Bundle an objective and validate its gradient: at three random
    /// points, the pullback of `ambient_grad` must match a central
    /// finite difference of `f` through the trivialisation along two
    /// random raw directions each, to 1e-6 relative.
    ///
    /// # Panics
    /// Panics when the gradient disagrees with the finite difference,
    /// naming the point and direction indices.
    pub fn new(
        name: &'static str,
        spec: ManifoldSpec,
        f: ValueFn,
        ambient_grad: GradFn,
        oracle_optimum: Option<(f64, ManifoldPoint)>,
    ) -> Self {
        let problem = Problem {
            spec,
            name,
            f,
            ambient_grad,
            oracle_optimum,
        };
        problem.validate_gradient();
        problem
    }

    fn validate_gradient(&self) {
        let h = 1e-5;
        for point_idx in 0..3u64 {
            let p = random_point(&self.spec, 0xF0 + point_idx);
            let zero = TangentCoords::zeros(&self.spec);
            let raw_grad = pullback_grad(&p, &zero, &(self.ambient_grad)(&p));
            for dir_idx in 0..2u64 {
                let e = random_raw_direction(&self.spec, 0x1000 + 16 * point_idx + dir_idx);
                let offset = |t: f64| {
                    let mut c = zero.clone();
                    c.add_scaled(&e, t);
                    let q = triv(&p, &c).expect("small offsets stay on the manifold");
                    (self.f)(&q)
                };
                let fd = (offset(h) - offset(-h)) / (2.0 * h);
                let ip = coords_dot(&raw_grad, &e);
                let tol = 1e-6 * fd.abs().max(ip.abs()).max(1.0);
                assert!(
                    (fd - ip).abs() <= tol,
                    "{}: ambient gradient disagrees with finite differences at \
                     point {point_idx}, direction {dir_idx}: fd {fd:.9e} vs grad {ip:.9e}",
                    self.name
                );
            }
        }
    }

    pub fn spec(&self) -> &ManifoldSpec {
        &self.spec
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    /// Independently computed optimum `(value, point)`, if the problem
    /// family has one in closed form.
    pub fn oracle_optimum(&self) -> Option<&(f64, ManifoldPoint)> {
        self.oracle_optimum.as_ref()
    }
}

impl Objective for Problem {
    fn value(&self, p: &ManifoldPoint) -> f64 {
        (self.f)(p)
    }

    fn ambient_grad(&self, p: &ManifoldPoint) -> Vec<Matrix> {
        (self.ambient_grad)(p)
    }
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("spec", &self.spec)
            .field("has_oracle", &self.oracle_optimum.is_some())
            .finish()
    }
}

fn coords_dot(a: &TangentCoords, b: &TangentCoords) -> f64 {
    a.parts()
        .iter()
        .zip(b.parts())
        .map(|(x, y)| x.dot(y))
        .sum()
}

fn random_raw_direction(spec: &ManifoldSpec, seed: u64) -> TangentCoords {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let parts = spec
        .raw_shapes()
        .into_iter()
        .map(|(rows, cols)| Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut r)))
        .collect::<Vec<_>>();
    let mut c = TangentCoords::from_parts(spec, parts);
    let n = c.norm();
    c.scale_in_place(1.0 / n);
    c
}

/// Complete a unit column to a rotation whose first column it is.
fn lift_of_unit_column(v: &Matrix) -> Matrix {
    let n = v.rows();
    let mut r = ChaCha8Rng::seed_from_u64(0x11F7);
    let g = Matrix::from_fn(n, n, |i, j| {
        if j == 0 {
            v[(i, 0)]
        } else {
            StandardNormal.sample(&mut r)
        }
    });
    let (q, _) = g.qr();
    let mut lift = q.with_block(0, 0, v);
    if lift.det() < 0.0 {
        let flipped = lift.block(0, n - 1, n, 1).scale(-1.0);
        lift = lift.with_block(0, n - 1, &flipped);
    }
    lift
}

/// Nearest-rotation fitting: minimise ‖QA − B‖² over rotations Q.
///
/// The optimum comes from the orthogonal Procrustes solution with a
/// determinant correction: svd(BAᵀ) = UΣVᵀ and Q* = U diag(1,…,1,
/// det(UVᵀ)) Vᵀ, the closest special orthogonal matrix.
///
/// # Panics
/// Panics unless `a` and `b` are square with matching shape, n ≥ 2.
pub fn procrustes(a: &Matrix, b: &Matrix) -> Problem {
    let n = a.rows();
    assert!(
        a.is_square() && b.is_square() && b.rows() == n,
        "shape error: both factors must be n x n"
    );
    assert!(n >= 2, "the rotation group needs n >= 2");
    let spec = ManifoldSpec::special_orthogonal(n);

    let (u, _, v) = b.matmul(&a.transpose()).svd();
    let det_sign = u.matmul(&v.transpose()).det().signum();
    let correction = Matrix::from_fn(n, n, |i, j| {
        if i != j {
            0.0
        } else if i == n - 1 {
            det_sign
        } else {
            1.0
        }
    });
    let q_star = u.matmul(&correction).matmul(&v.transpose());
    let residual = &q_star.matmul(a) - b;
    let f_star = residual.dot(&residual);
    let oracle_point =
        ManifoldPoint::new(spec.clone(), vec![q_star]).expect("corrected svd factor is a rotation");

    let (fa, fb) = (a.clone(), b.clone());
    let f: ValueFn = Box::new(move |p: &ManifoldPoint| {
        let r = &p.value().matmul(&fa) - &fb;
        r.dot(&r)
    });
    let (ga, gb) = (a.clone(), b.clone());
    let grad: GradFn = Box::new(move |p: &ManifoldPoint| {
        let r = &p.value().matmul(&ga) - &gb;
        vec![r.matmul(&ga.transpose()).scale(2.0)]
    });
    Problem::new("procrustes", spec, f, grad, Some((f_star, oracle_point)))
}

/// Rayleigh quotient minimisation on the unit sphere: f(x) = xᵀAx for
/// symmetric A, whose minimum is the smallest eigenvalue.
///
/// # Panics
/// Panics if `a` is not symmetric (within the `sym_eig` contract) or
/// n < 2.
pub fn rayleigh(a: &Matrix) -> Problem {
    let n = a.rows();
    assert!(n >= 2, "the sphere needs n >= 2");
    let (mut lam, vecs) = a
        .sym_eig()
        .expect("the Rayleigh matrix must be symmetric");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| lam[i].partial_cmp(&lam[j]).expect("finite eigenvalues"));
    lam.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    let lambda_min = lam[0];
    let v_min = vecs.block(0, order[0], n, 1);
    let spec = ManifoldSpec::sphere(n);
    let oracle_point = ManifoldPoint::new(spec.clone(), vec![lift_of_unit_column(&v_min)])
        .expect("eigenvector completion is a rotation");

    let fa = a.clone();
    let f: ValueFn = Box::new(move |p: &ManifoldPoint| {
        let x = p.value();
        x.dot(&fa.matmul(&x))
    });
    let ga = a.clone();
    let grad: GradFn =
        Box::new(move |p: &ManifoldPoint| vec![ga.matmul(&p.value()).scale(2.0)]);
    Problem::new("rayleigh", spec, f, grad, Some((lambda_min, oracle_point)))
}

/// Squared affine-invariant distance on the positive-definite cone.
fn spd_distance_squared(p_inv_sqrt: &Matrix, a: &Matrix) -> f64 {
    let m = p_inv_sqrt.matmul(&a.matmul(p_inv_sqrt));
    let log = logm_spd(&sym(&m)).expect("congruence of spd matrices is spd");
    log.dot(&log)
}

fn sym(m: &Matrix) -> Matrix {
    (&(m + &m.transpose())).scale(0.5)
}

fn spd_inv_sqrt(p: &Matrix) -> Matrix {
    let root = sqrtm_spd(p).expect("karcher iterates must stay positive definite");
    root.solve(&Matrix::identity(p.rows()))
        .expect("spd square roots are invertible")
}

/// Karcher-mean objective on the positive-definite cone: the sum of
/// squared affine-invariant distances to the given points. For two
/// points the optimum is their geodesic midpoint A #_{1/2} B =
/// A^{1/2}(A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}.
///
/// The ambient gradient in the Frobenius pairing is
/// -2 Σ P^{-1/2} log(P^{-1/2} Aᵢ P^{-1/2}) P^{-1/2}, the log-map sum
/// conjugated back through the base.
///
/// # Errors
/// Any input that is not symmetric positive definite is rejected.
///
/// # Panics
/// Panics on an empty list, mismatched shapes, or a condition number
/// above 1e4 (documented precondition).
pub fn karcher_spd(points: &[Matrix]) -> Result<Problem, ManifoldError> {
    assert!(!points.is_empty(), "the karcher mean needs at least one point");
    let n = points[0].rows();
    let spec = ManifoldSpec::spd(n);
    for p in points {
        assert_eq!(
            (p.rows(), p.cols()),
            (n, n),
            "shape error: all karcher points must share one shape"
        );
        ManifoldPoint::new(spec.clone(), vec![sym(p)])?;
        let (lam, _) = sym(p).sym_eig().expect("validated spd point is symmetric");
        let lo = lam.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = lam.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(
            hi <= 1e4 * lo,
            "karcher inputs must have condition number at most 1e4, got {:.3e}",
            hi / lo
        );
    }

    let oracle = match points {
        [single] => Some((0.0, ManifoldPoint::new(spec.clone(), vec![sym(single)])?)),
        [a, b] => {
            let a = sym(a);
            let b = sym(b);
            let root = sqrtm_spd(&a).expect("validated spd input");
            let inv_root = spd_inv_sqrt(&a);
            let inner = sym(&inv_root.matmul(&b.matmul(&inv_root)));
            let inner_root = sqrtm_spd(&inner).expect("congruence of spd matrices is spd");
            let midpoint = sym(&root.matmul(&inner_root.matmul(&root)));
            let value = 2.0 * spd_distance_squared(&spd_inv_sqrt(&midpoint), &a);
            Some((value, ManifoldPoint::new(spec.clone(), vec![midpoint])?))
        }
        _ => None,
    };

    let f_points: Vec<Matrix> = points.iter().map(sym).collect();
    let f: ValueFn = Box::new(move |p: &ManifoldPoint| {
        let inv_root = spd_inv_sqrt(&p.value());
        f_points
            .iter()
            .map(|a| spd_distance_squared(&inv_root, a))
            .sum()
    });
    let g_points: Vec<Matrix> = points.iter().map(sym).collect();
    let grad: GradFn = Box::new(move |p: &ManifoldPoint| {
        let inv_root = spd_inv_sqrt(&p.value());
        let mut total = Matrix::zeros(inv_root.rows(), inv_root.cols());
        for a in &g_points {
            let m = sym(&inv_root.matmul(&a.matmul(&inv_root)));
            let log = logm_spd(&m).expect("congruence of spd matrices is spd");
            let pulled = inv_root.matmul(&log.matmul(&inv_root));
            total = &total - &pulled.scale(2.0);
        }
        vec![sym(&total)]
    });
    Ok(Problem::new("karcher", spec, f, grad, oracle))
}

/// Sizes and seed for the sequence-copy benchmark.
#[derive(Clone, Debug)]
pub struct CopyTaskConfig {
    /// Number of distinct payload symbols (the alphabet), at least 2.
    pub alphabet: u32,
    /// Payload length S, at least 1.
    pub payload_len: u32,
    /// Blank gap L between payload and recall, at least 1.
    pub spacing: u32,
    /// Hidden state width of the recurrence; alphabet + 2 or more fits
    /// the one-hot inputs without squashing.
    pub hidden: usize,
    /// Number of sequences evaluated per objective call.
    pub batch: usize,
    /// Seed for payload sampling and parameter initialisation.
    pub seed: u64,
}

impl CopyTaskConfig {
    /// # Panics
    /// Panics on an alphabet below 2, a zero length, or an empty batch.
    pub fn new(
        alphabet: u32,
        payload_len: u32,
        spacing: u32,
        hidden: usize,
        batch: usize,
        seed: u64,
    ) -> Self {
        assert!(alphabet >= 2, "the copy task needs at least 2 symbols, got {alphabet}");
        assert!(payload_len >= 1, "payload length must be positive");
        assert!(spacing >= 1, "spacing must be positive");
        assert!(hidden >= 2, "hidden width must be at least 2");
        assert!(batch >= 1, "batch must be positive");
        CopyTaskConfig {
            alphabet,
            payload_len,
            spacing,
            hidden,
            batch,
            seed,
        }
    }

    /// Total sequence length L + 2S.
    pub fn total_len(&self) -> usize {
        (self.spacing + 2 * self.payload_len) as usize
    }

    /// Number of input and output channels: the alphabet plus the
    /// blank and start markers.
    pub fn channels(&self) -> usize {
        self.alphabet as usize + 2
    }

    /// Loss of the strategy that always predicts blank and guesses the
    /// payload uniformly: S ln(A) / (L + 2S). Training must beat this
    /// to demonstrate the recurrence carries information across the gap.
    pub fn baseline_loss(&self) -> f64 {
        let s = f64::from(self.payload_len);
        let a = f64::from(self.alphabet);
        s * a.ln() / (self.spacing as f64 + 2.0 * s)
    }
}

/// A deterministic batch of copy-task sequences: channel indices per
/// time step, one row per batch element. Symbols occupy channels
/// 0..A-1, the blank is channel A and the start marker channel A+1.
#[derive(Clone, Debug, PartialEq)]
pub struct CopyBatch {
    pub alphabet: u32,
    pub payload_len: u32,
    pub spacing: u32,
    /// inputs[b][t] is the active input channel of sequence b at step t.
    pub inputs: Vec<Vec<u32>>,
}

impl CopyBatch {
    /// Sample the payloads for `cfg` and lay out the input sequences:
    /// S payload symbols, L blanks, the start marker, then S-1 blanks.
    pub fn generate(cfg: &CopyTaskConfig) -> Self {
        let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
        let symbol = Uniform::new(0, cfg.alphabet).expect("alphabet is nonempty");
        let blank = cfg.alphabet;
        let start = cfg.alphabet + 1;
        let s = cfg.payload_len as usize;
        let l = cfg.spacing as usize;
        let inputs = (0..cfg.batch)
            .map(|_| {
                let mut seq = Vec::with_capacity(cfg.total_len());
                for _ in 0..s {
                    seq.push(symbol.sample(&mut r));
                }
                seq.extend(std::iter::repeat_n(blank, l));
                seq.push(start);
                seq.extend(std::iter::repeat_n(blank, s - 1));
                seq
            })
            .collect();
        CopyBatch {
            alphabet: cfg.alphabet,
            payload_len: cfg.payload_len,
            spacing: cfg.spacing,
            inputs,
        }
    }

    pub fn total_len(&self) -> usize {
        (self.spacing + 2 * self.payload_len) as usize
    }

    /// Target channels for sequence `b`: S + L blanks, then the payload.
    pub fn targets(&self, b: usize) -> Vec<u32> {
        let blank = self.alphabet;
        let s = self.payload_len as usize;
        let l = self.spacing as usize;
        let mut out = Vec::with_capacity(self.total_len());
        out.extend(std::iter::repeat_n(blank, s + l));
        out.extend_from_slice(&self.inputs[b][..s]);
        out
    }

    /// Serialise as little-endian u32 words: A, S, L, batch, then the
    /// input channel indices row by row.
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let batch = u32::try_from(self.inputs.len()).expect("batch fits in u32");
        for word in [self.alphabet, self.payload_len, self.spacing, batch] {
            w.write_all(&word.to_le_bytes())?;
        }
        for row in &self.inputs {
            for &idx in row {
                w.write_all(&idx.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Inverse of [`write_to`]; validates that every channel index is
    /// in range for the recorded alphabet.
    ///
    /// [`write_to`]: CopyBatch::write_to
    pub fn read_from<R: Read>(r: &mut R) -> std::io::Result<Self> {
        let mut word = [0u8; 4];
        let mut next = |r: &mut R| -> std::io::Result<u32> {
            r.read_exact(&mut word)?;
            Ok(u32::from_le_bytes(word))
        };
        let alphabet = next(r)?;
        let payload_len = next(r)?;
        let spacing = next(r)?;
        let batch = next(r)?;
        if alphabet < 2 || payload_len < 1 || spacing < 1 || batch < 1 {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                "copy-task snapshot header is out of range",
            ));
        }
        let t = (spacing + 2 * payload_len) as usize;
        let mut inputs = Vec::with_capacity(batch as usize);
        for _ in 0..batch {
            let mut row = Vec::with_capacity(t);
            for _ in 0..t {
                let idx = next(r)?;
                if idx > alphabet + 1 {
                    return Err(std::io::Error::new(
                        std::io::ErrorKind::InvalidData,
                        "copy-task snapshot contains a channel index out of range",
                    ));
                }
                row.push(idx);
            }
            inputs.push(row);
        }
        Ok(CopyBatch {
            alphabet,
            payload_len,
            spacing,
            inputs,
        })
    }
}

/// Per-part learning-rate scaling for the copy task: the orthogonal
/// recurrence trains well with a step around seven times the one used
/// for the unconstrained input and readout maps.
pub const COPY_ORTH_LR_FACTOR: f64 = 7.0;

struct CopyForward {
    hidden: Vec<Matrix>,
    loss: f64,
    probs: Vec<Matrix>,
}

/// Shared forward pass: hidden states, per-step class probabilities
/// and the mean cross-entropy over every position of every sequence.
fn copy_forward(batch: &CopyBatch, q: &Matrix, c: &Matrix, w: &Matrix) -> CopyForward {
    let t_len = batch.total_len();
    let b_len = batch.inputs.len();
    let n = q.rows();
    let channels = c.cols();
    let scale = 1.0 / (t_len as f64 * b_len as f64);
    let targets: Vec<Vec<u32>> = (0..b_len).map(|b| batch.targets(b)).collect();

    let mut hidden = Vec::with_capacity(t_len + 1);
    hidden.push(Matrix::zeros(n, b_len));
    let mut probs = Vec::with_capacity(t_len);
    let mut loss = 0.0;
    for t in 0..t_len {
        let prev = &hidden[t];
        let mut h = q.matmul(prev);
        for b in 0..b_len {
            let ch = batch.inputs[b][t] as usize;
            for i in 0..n {
                h[(i, b)] += c[(i, ch)];
            }
        }
        let o = w.matmul(&h);
        let mut p = Matrix::zeros(channels, b_len);
        for b in 0..b_len {
            let mut max = f64::NEG_INFINITY;
            for k in 0..channels {
                max = max.max(o[(k, b)]);
            }
            let mut z = 0.0;
            for k in 0..channels {
                z += (o[(k, b)] - max).exp();
            }
            let log_z = max + z.ln();
            for k in 0..channels {
                p[(k, b)] = (o[(k, b)] - log_z).exp();
            }
            let y = targets[b][t] as usize;
            loss += scale * (log_z - o[(y, b)]);
        }
        hidden.push(h);
        probs.push(p);
    }
    CopyForward { hidden, loss, probs }
}

/// Sequence-recall benchmark: a linear recurrence h_t = Q h_{t-1} + C x_t
/// with an orthogonal transition Q must carry S symbols across L blank
/// steps and emit them after the start marker, under mean cross-entropy
/// of softmax(W h_t) at every position. The manifold is the product of
/// the rotation group (for Q) with two unconstrained factors (C and W),
/// and the gradients are exact by linearity, no autodiff involved.
///
/// Whether blank positions should be masked out of the loss is not
/// settled; the baseline formula S ln(A)/(L+2S) counts them in the
/// denominator, so they stay in.
pub fn copy_task(cfg: &CopyTaskConfig) -> Problem {
    let batch = CopyBatch::generate(cfg);
    copy_task_from_batch(cfg, batch)
}

/// Build the copy-task objective over an explicit batch, for replaying
/// a serialised snapshot.
///
/// # Panics
/// Panics if the batch sizes disagree with the config.
pub fn copy_task_from_batch(cfg: &CopyTaskConfig, batch: CopyBatch) -> Problem {
    assert_eq!(
        (batch.alphabet, batch.payload_len, batch.spacing, batch.inputs.len()),
        (cfg.alphabet, cfg.payload_len, cfg.spacing, cfg.batch),
        "shape error: the batch was generated for a different config"
    );
    let n = cfg.hidden;
    let channels = cfg.channels();
    let spec = ManifoldSpec::product(vec![
        ManifoldSpec::special_orthogonal(n),
        ManifoldSpec::euclidean(n, channels),
        ManifoldSpec::euclidean(channels, n),
    ]);

    let f_batch = batch.clone();
    let f: ValueFn = Box::new(move |p: &ManifoldPoint| {
        let parts = p.parts();
        copy_forward(&f_batch, &parts[0], &parts[1], &parts[2]).loss
    });

    let g_batch = batch;
    let grad: GradFn = Box::new(move |p: &ManifoldPoint| {
        let parts = p.parts();
        let (q, c, w) = (&parts[0], &parts[1], &parts[2]);
        let t_len = g_batch.total_len();
        let b_len = g_batch.inputs.len();
        let n = q.rows();
        let channels = c.cols();
        let scale = 1.0 / (t_len as f64 * b_len as f64);
        let targets: Vec<Vec<u32>> = (0..b_len).map(|b| g_batch.targets(b)).collect();

        let forward = copy_forward(&g_batch, q, c, w);
        let mut dq = Matrix::zeros(n, n);
        let mut dc = Matrix::zeros(n, channels);
        let mut dw = Matrix::zeros(channels, n);
        let mut g_next = Matrix::zeros(n, b_len);
        let q_t = q.transpose();
        let w_t = w.transpose();
        for t in (0..t_len).rev() {
            let mut delta = forward.probs[t].scale(scale);
            for b in 0..b_len {
                let y = targets[b][t] as usize;
                delta[(y, b)] -= scale;
            }
            dw = &dw + &delta.matmul(&forward.hidden[t + 1].transpose());
            let g_t = &w_t.matmul(&delta) + &q_t.matmul(&g_next);
            dq = &dq + &g_t.matmul(&forward.hidden[t].transpose());
            for b in 0..b_len {
                let ch = g_batch.inputs[b][t] as usize;
                for i in 0..n {
                    dc[(i, ch)] += g_t[(i, b)];
                }
            }
            g_next = g_t;
        }
        vec![dq, dc, dw]
    });

    Problem::new("copy", spec, f, grad, None)
}

/// Deterministic starting point for copy-task training: a block-planar
/// rotation for the recurrence, a small random input map and a zero
/// readout (so the initial predictions are uniform).
pub fn copy_task_init(cfg: &CopyTaskConfig) -> ManifoldPoint {
    let n = cfg.hidden;
    let channels = cfg.channels();
    let spec = ManifoldSpec::product(vec![
        ManifoldSpec::special_orthogonal(n),
        ManifoldSpec::euclidean(n, channels),
        ManifoldSpec::euclidean(channels, n),
    ]);
    let so_spec = ManifoldSpec::special_orthogonal(n);
    let so_base = ManifoldPoint::new(so_spec.clone(), vec![Matrix::identity(n)])
        .expect("the identity is a rotation");
    let angles = crate::manifolds::henaff_init(n, cfg.seed ^ 0x9E37);
    let q = triv(&so_base, &angles)
        .expect("block rotations are rotations")
        .value();
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x79B9);
    let c_scale = 1.0 / (channels as f64).sqrt();
    let c = Matrix::from_fn(n, channels, |_, _| {
        let g: f64 = StandardNormal.sample(&mut r);
        g * c_scale
    });
    let w = Matrix::zeros(channels, n);
    ManifoldPoint::new(spec, vec![q, c, w]).expect("assembled parts satisfy their constraints")
}
