//! Euclidean update rules applied to raw tangent coordinates.
//!
//! The trivialised objective is an ordinary function of a flat coordinate
//! vector, so any first-order Euclidean optimiser applies unchanged. This
//! module provides plain gradient descent, heavy-ball momentum, and Adam,
//! all operating on [`TangentCoords`] with per-part moment buffers.
//!
//! State is single-owner and every update is deterministic given the
//! state, the coordinates, and the gradient.

use crate::dense::Matrix;
use crate::manifolds::TangentCoords;

/// Update rule and its hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    /// Plain gradient descent: `raw - lr * grad`.
    Gd { lr: f64 },
    /// Heavy-ball momentum: `m <- beta * m + grad`, then `raw - lr * m`.
    Momentum { lr: f64, beta: f64 },
    /// Adam with bias-corrected first and second moments.
    Adam {
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    },
}

impl Method {
    /// The learning rate shared by every variant.
    pub fn learning_rate(&self) -> f64 {
        match *self {
            Method::Gd { lr } => lr,
            Method::Momentum { lr, .. } => lr,
            Method::Adam { lr, .. } => lr,
        }
    }
}

/// An update rule together with its moment buffers and step counter.
///
/// Buffers are allocated lazily on the first update, shaped like the raw
/// coordinates. [`OptimizerState::reset`] zeroes buffers and the counter
/// but keeps the hyperparameters.
#[derive(Clone, Debug)]
pub struct OptimizerState {
    method: Method,
    step: u64,
    first_moment: Option<TangentCoords>,
    second_moment: Option<TangentCoords>,
    part_lr_scales: Option<Vec<f64>>,
}

impl OptimizerState {
    /// Plain gradient descent.
    ///
    /// # Panics
    /// Panics unless `lr > 0`.
    pub fn gd(lr: f64) -> Self {
        assert!(lr > 0.0, "learning rate must be positive, got {lr}");
        OptimizerState {
            method: Method::Gd { lr },
            step: 0,
            first_moment: None,
            second_moment: None,
            part_lr_scales: None,
        }
    }

    /// Heavy-ball momentum.
    ///
    /// # Panics
    /// Panics unless `lr > 0` and `0 <= beta < 1`.
    pub fn momentum(lr: f64, beta: f64) -> Self {
        assert!(lr > 0.0, "learning rate must be positive, got {lr}");
        assert!(
            (0.0..1.0).contains(&beta),
            "momentum coefficient must lie in [0, 1), got {beta}"
        );
        OptimizerState {
            method: Method::Momentum { lr, beta },
            step: 0,
            first_moment: None,
            second_moment: None,
            part_lr_scales: None,
        }
    }

    /// Adam with explicit hyperparameters.
    ///
    /// # Panics
    /// Panics unless `lr > 0`, `0 <= beta1, beta2 < 1`, and `eps > 0`.
    pub fn adam(lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        assert!(lr > 0.0, "learning rate must be positive, got {lr}");
        assert!(
            (0.0..1.0).contains(&beta1),
            "first-moment decay must lie in [0, 1), got {beta1}"
        );
        assert!(
            (0.0..1.0).contains(&beta2),
            "second-moment decay must lie in [0, 1), got {beta2}"
        );
        assert!(eps > 0.0, "adam epsilon must be positive, got {eps}");
        OptimizerState {
            method: Method::Adam {
                lr,
                beta1,
                beta2,
                eps,
            },
            step: 0,
            first_moment: None,
            second_moment: None,
            part_lr_scales: None,
        }
    }

    /// Adam with the community defaults beta1 = 0.9, beta2 = 0.999,
    /// eps = 1e-8.
    pub fn adam_default(lr: f64) -> Self {
        OptimizerState::adam(lr, 0.9, 0.999, 1e-8)
    }

    /// Multiply the effective learning rate of each coordinate part by a
    /// fixed factor, one per part. Useful on product manifolds where one
    /// factor wants a faster rate, such as an orthogonal recurrence
    /// trained harder than its Euclidean read-in and read-out maps.
    ///
    /// # Panics
    /// Panics if `scales` is empty or any factor is not positive.
    pub fn with_part_lr_scales(mut self, scales: Vec<f64>) -> Self {
        assert!(
            !scales.is_empty(),
            "learning-rate scales must not be empty"
        );
        assert!(
            scales.iter().all(|&s| s > 0.0 && s.is_finite()),
            "learning-rate scales must be positive and finite, got {scales:?}"
        );
        self.part_lr_scales = Some(scales);
        self
    }

    pub fn method(&self) -> &Method {
        &self.method
    }

    /// Number of updates applied since construction or the last reset.
    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// Zero the moment buffers and the step counter, keeping the
    /// hyperparameters. After a reset the next update is identical to a
    /// fresh optimiser's first update.
    pub fn reset(&mut self) {
        self.step = 0;
        self.first_moment = None;
        self.second_moment = None;
    }

    /// The learning-rate factor for one coordinate part, 1 when no
    /// scales were configured.
    fn part_scale(&self, idx: usize) -> f64 {
        self.part_lr_scales.as_ref().map_or(1.0, |s| s[idx])
    }

    /// `raw - lr * scale_p * direction` applied part by part.
    fn scaled_step(&self, raw: &TangentCoords, direction: &TangentCoords, lr: f64) -> TangentCoords {
        if self.part_lr_scales.is_none() {
            let mut out = raw.clone();
            out.add_scaled(direction, -lr);
            return out;
        }
        let parts = raw
            .parts()
            .iter()
            .zip(direction.parts())
            .enumerate()
            .map(|(idx, (rp, dp))| rp - &dp.scale(lr * self.part_scale(idx)))
            .collect();
        TangentCoords::from_parts(raw.spec(), parts)
    }

    /// Apply one update, returning the new raw coordinates.
    ///
    /// # Panics
    /// Panics if `raw` and `grad` live on different manifold specs, or if
    /// configured learning-rate scales do not match the part count.
    pub fn update(&mut self, raw: &TangentCoords, grad: &TangentCoords) -> TangentCoords {
        assert_eq!(
            raw.spec(),
            grad.spec(),
            "shape error: coordinates and gradient must share a manifold spec"
        );
        if let Some(scales) = &self.part_lr_scales {
            assert_eq!(
                scales.len(),
                raw.parts().len(),
                "shape error: {} learning-rate scales for {} coordinate parts",
                scales.len(),
                raw.parts().len()
            );
        }
        self.step += 1;
        match self.method.clone() {
            Method::Gd { lr } => self.scaled_step(raw, grad, lr),
            Method::Momentum { lr, beta } => {
                let m = self
                    .first_moment
                    .get_or_insert_with(|| TangentCoords::zeros(raw.spec()));
                m.scale_in_place(beta);
                m.add_scaled(grad, 1.0);
                let m = self.first_moment.as_ref().unwrap();
                self.scaled_step(raw, m, lr)
            }
            Method::Adam {
                lr,
                beta1,
                beta2,
                eps,
            } => {
                let squared = TangentCoords::from_parts(
                    raw.spec(),
                    grad.parts().iter().map(|p| p.map(|x| x * x)).collect(),
                );
                let m = self
                    .first_moment
                    .get_or_insert_with(|| TangentCoords::zeros(raw.spec()));
                m.scale_in_place(beta1);
                m.add_scaled(grad, 1.0 - beta1);
                let v = self
                    .second_moment
                    .get_or_insert_with(|| TangentCoords::zeros(raw.spec()));
                v.scale_in_place(beta2);
                v.add_scaled(&squared, 1.0 - beta2);

                let t = i32::try_from(self.step).unwrap_or(i32::MAX);
                let correction1 = 1.0 - beta1.powi(t);
                let correction2 = 1.0 - beta2.powi(t);
                let m = self.first_moment.as_ref().unwrap();
                let v = self.second_moment.as_ref().unwrap();
                let parts: Vec<Matrix> = raw
                    .parts()
                    .iter()
                    .zip(m.parts().iter().zip(v.parts()))
                    .enumerate()
                    .map(|(idx, (rp, (mp, vp)))| {
                        let step = lr * self.part_scale(idx);
                        Matrix::from_fn(rp.rows(), rp.cols(), |i, j| {
                            let m_hat = mp[(i, j)] / correction1;
                            let v_hat = vp[(i, j)] / correction2;
                            rp[(i, j)] - step * m_hat / (v_hat.sqrt() + eps)
                        })
                    })
                    .collect();
                TangentCoords::from_parts(raw.spec(), parts)
            }
        }
    }
}
