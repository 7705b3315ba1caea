//! Shared test support: seeded random inputs, finite differences, and a
//! high-precision matrix-exponential oracle that is independent of the
//! library implementation.
#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use trivopt::dense::Matrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| r.sample(StandardNormal))
}

/// Random skew-symmetric matrix rescaled to the requested Frobenius norm.
pub fn random_skew(r: &mut ChaCha8Rng, n: usize, frob_norm: f64) -> Matrix {
    let g = gaussian(r, n, n);
    let s = &g - &g.transpose();
    s.scale(frob_norm / s.frob())
}

/// Random symmetric positive-definite matrix with log-uniform eigenvalues
/// in `[lo, hi]`.
pub fn random_spd(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Matrix {
    let (q, _) = gaussian(r, n, n).qr();
    let lam: Vec<f64> = (0..n)
        .map(|_| (lo.ln() + (hi.ln() - lo.ln()) * r.random::<f64>()).exp())
        .collect();
    let p = q.matmul(&Matrix::diag(&lam)).matmul(&q.transpose());
    (&p + &p.transpose()).scale(0.5)
}

/// Central difference (f(h) - f(-h)) / 2h of a scalar path through 0.
pub fn fd_scalar(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (f(h) - f(-h)) / (2.0 * h)
}

/// Double-double arithmetic (roughly 31 significant digits) used only to
/// make the exponential oracle independent of f64 round-off. Error-free
/// transformations follow the classic two-sum / FMA two-product recipes.
pub mod dd {
    #[derive(Clone, Copy, Debug)]
    pub struct DD {
        pub hi: f64,
        pub lo: f64,
    }

    /// Exact sum when |a| >= |b|.
    fn quick_two_sum(a: f64, b: f64) -> DD {
        let s = a + b;
        let e = b - (s - a);
        DD { hi: s, lo: e }
    }

    /// Exact sum of two doubles, branch free.
    fn two_sum(a: f64, b: f64) -> DD {
        let s = a + b;
        let bb = s - a;
        let e = (a - (s - bb)) + (b - bb);
        DD { hi: s, lo: e }
    }

    /// Exact product via fused multiply-add.
    fn two_prod(a: f64, b: f64) -> DD {
        let p = a * b;
        let e = f64::mul_add(a, b, -p);
        DD { hi: p, lo: e }
    }

    impl DD {
        pub fn from_f64(x: f64) -> DD {
            DD { hi: x, lo: 0.0 }
        }

        pub fn zero() -> DD {
            DD { hi: 0.0, lo: 0.0 }
        }

        pub fn to_f64(self) -> f64 {
            self.hi + self.lo
        }

        pub fn add(self, o: DD) -> DD {
            let s = two_sum(self.hi, o.hi);
            let t = two_sum(self.lo, o.lo);
            let c = s.lo + t.hi;
            let v = quick_two_sum(s.hi, c);
            let w = t.lo + v.lo;
            quick_two_sum(v.hi, w)
        }

        pub fn mul(self, o: DD) -> DD {
            let p = two_prod(self.hi, o.hi);
            let e = p.lo + (self.hi * o.lo + self.lo * o.hi);
            quick_two_sum(p.hi, e)
        }

        pub fn div_f64(self, d: f64) -> DD {
            let q1 = self.hi / d;
            let p = two_prod(q1, d);
            let s = two_sum(self.hi, -p.hi);
            let e = s.lo + self.lo - p.lo;
            let q2 = (s.hi + e) / d;
            quick_two_sum(q1, q2)
        }

        /// Multiplication by a power of two is exact componentwise.
        pub fn scale_pow2(self, f: f64) -> DD {
            DD {
                hi: self.hi * f,
                lo: self.lo * f,
            }
        }
    }

    pub fn matmul(a: &[DD], b: &[DD], n: usize) -> Vec<DD> {
        let mut c = vec![DD::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = a[i * n + k];
                for j in 0..n {
                    c[i * n + j] = c[i * n + j].add(aik.mul(b[k * n + j]));
                }
            }
        }
        c
    }
}

/// Matrix exponential oracle: scale by 2^-20, sum 60 Taylor terms by Horner
/// evaluation, then square twenty times, all in double-double arithmetic so
/// the result is trustworthy far below f64 round-off.
pub fn expm_taylor_oracle(a: &Matrix) -> Matrix {
    use dd::DD;
    assert!(a.is_square(), "oracle requires a square matrix");
    let n = a.rows();
    let f = (0.5f64).powi(20);
    let s: Vec<DD> = a
        .as_slice()
        .iter()
        .map(|&x| DD::from_f64(x * f))
        .collect();
    let mut id = vec![DD::zero(); n * n];
    for i in 0..n {
        id[i * n + i] = DD::from_f64(1.0);
    }
    let mut acc = id.clone();
    for k in (1..=60u32).rev() {
        let prod = dd::matmul(&acc, &s, n);
        acc = prod
            .iter()
            .zip(id.iter())
            .map(|(&p, &e)| e.add(p.div_f64(f64::from(k))))
            .collect();
    }
    for _ in 0..20 {
        acc = dd::matmul(&acc, &acc, n);
    }
    Matrix::from_fn(n, n, |i, j| acc[i * n + j].to_f64())
}
