//! Muon-style optimizer: momentum plus Newton-Schulz orthogonalization of the
//! matrix update, with an RMS-matched variant for latent tensors and an AdamW
//! baseline for comparisons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{rms, Tensor};

/// Quintic iteration coefficients tuned for a steep slope at zero; they
/// inflate small singular values fast but leave them in a wide band around 1.
pub const NS_AGGRESSIVE_COEFFS: (f64, f64, f64) = (3.4445, -4.7750, 2.0315);

/// Convergent quintic (15x − 10x³ + 3x⁵)/8: fixed point 1 with zero
/// derivative, so a few passes collapse the band left by the aggressive
/// steps onto the orthogonal factor.
pub const NS_POLISH_COEFFS: (f64, f64, f64) = (15.0 / 8.0, -10.0 / 8.0, 3.0 / 8.0);

/// Polishing passes appended after the aggressive steps.
pub const NS_POLISH_STEPS: usize = 3;

/// Update scale that keeps the orthogonalized step's RMS roughly equal to
/// the learning rate independent of matrix shape.
pub const MUON_SHAPE_SCALE: f64 = 0.2;

/// RMS floor so a zero latent cannot freeze optimization.
pub const RMS_FLOOR: f64 = 1e-3;

fn ns_pass(x: &Tensor, coeffs: (f64, f64, f64)) -> Result<Tensor> {
    let (a, b, c) = coeffs;
    let gram = x.matmul(&x.transpose()?)?;
    let gram_sq = gram.matmul(&gram)?;
    let mix = gram.scale(b).add(&gram_sq.scale(c))?;
    x.scale(a).add(&mix.matmul(x)?)
}

/// Approximates the nearest semi-orthogonal factor U·Vᵀ of `g`.
///
/// The input is normalized by its Frobenius norm, run through `steps`
/// aggressive quintic iterations and a fixed number of convergent polishing
/// iterations, transposing first when there are more rows than columns so
/// the Gram products stay small.
pub fn newton_schulz_orthogonalize(g: &Tensor, steps: usize) -> Result<Tensor> {
    if g.rank() != 2 {
        return Err(Error::InvalidArgument(format!(
            "newton_schulz_orthogonalize: expected rank-2, got {:?}",
            g.shape()
        )));
    }
    let norm = g.frobenius_norm()?;
    if norm == 0.0 {
        return Err(Error::DegenerateGradient);
    }

    let tall = g.rows() > g.cols();
    let mut x = if tall { g.transpose()?.scale(1.0 / norm) } else { g.scale(1.0 / norm) };
    for _ in 0..steps {
        x = ns_pass(&x, NS_AGGRESSIVE_COEFFS)?;
    }
    for _ in 0..NS_POLISH_STEPS {
        x = ns_pass(&x, NS_POLISH_COEFFS)?;
    }
    if tall {
        x = x.transpose()?;
    }
    Ok(x)
}

/// Momentum buffer and hyperparameters for the Muon update.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MuonState {
    momentum: Tensor,
    momentum_coeff: f64,
    step_count: u64,
    ns_steps: usize,
}

impl MuonState {
    /// `momentum_coeff` must lie in [0, 1).
    pub fn new(param_shape: &[usize], momentum_coeff: f64, ns_steps: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&momentum_coeff) {
            return Err(Error::InvalidArgument(format!(
                "momentum_coeff {momentum_coeff} outside [0, 1)"
            )));
        }
        if ns_steps == 0 {
            return Err(Error::InvalidArgument("ns_steps must be positive".into()));
        }
        Ok(Self {
            momentum: Tensor::zeros(param_shape),
            momentum_coeff,
            step_count: 0,
            ns_steps,
        })
    }

    pub fn momentum(&self) -> &Tensor {
        &self.momentum
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    fn advance_momentum(&mut self, grad: &Tensor) -> Result<()> {
        if !self.momentum.same_shape(grad) {
            return Err(Error::ShapeMismatch {
                expected: self.momentum.shape().to_vec(),
                got: grad.shape().to_vec(),
            });
        }
        self.momentum = self.momentum.scale(self.momentum_coeff).add(grad)?;
        Ok(())
    }

    /// One Muon step on a matrix parameter:
    /// momentum ← β·momentum + grad, then
    /// param − lr · 0.2·sqrt(max_dim) · NS(momentum).
    pub fn step(&mut self, param: &Tensor, grad: &Tensor, lr: f64) -> Result<Tensor> {
        if lr <= 0.0 {
            return Err(Error::InvalidArgument(format!("non-positive lr {lr}")));
        }
        if param.rank() != 2 {
            return Err(Error::InvalidArgument(
                "muon step requires a rank-2 parameter; use AdamW for vectors and scalars".into(),
            ));
        }
        if !param.same_shape(grad) {
            return Err(Error::ShapeMismatch {
                expected: param.shape().to_vec(),
                got: grad.shape().to_vec(),
            });
        }
        self.advance_momentum(grad)?;
        self.step_count += 1;
        if self.momentum.is_all_zero() {
            return Ok(param.clone());
        }
        let ortho = newton_schulz_orthogonalize(&self.momentum, self.ns_steps)?;
        let max_dim = param.rows().max(param.cols()) as f64;
        let delta = ortho.scale(lr * MUON_SHAPE_SCALE * max_dim.sqrt());
        param.sub(&delta)
    }

    /// Muon step for the latent: the orthogonalized update is rescaled so
    /// rms(update) = lr · max(rms(z), RMS_FLOOR).
    pub fn latent_step(&mut self, z: &Tensor, grad: &Tensor, lr: f64) -> Result<Tensor> {
        if lr <= 0.0 {
            return Err(Error::InvalidArgument(format!("non-positive lr {lr}")));
        }
        if z.rank() != 2 {
            return Err(Error::InvalidArgument(
                "latent step requires a rank-2 latent".into(),
            ));
        }
        if !z.same_shape(grad) {
            return Err(Error::ShapeMismatch {
                expected: z.shape().to_vec(),
                got: grad.shape().to_vec(),
            });
        }
        self.advance_momentum(grad)?;
        self.step_count += 1;
        if self.momentum.is_all_zero() {
            return Ok(z.clone());
        }
        let ortho = newton_schulz_orthogonalize(&self.momentum, self.ns_steps)?;
        let target = lr * rms(z)?.max(RMS_FLOOR);
        let delta = ortho.scale(target / rms(&ortho)?);
        z.sub(&delta)
    }
}

/// First/second-moment state for decoupled-weight-decay Adam.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdamWState {
    first_moment: Tensor,
    second_moment: Tensor,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    weight_decay: f64,
    step_count: u64,
}

impl AdamWState {
    pub fn new(
        param_shape: &[usize],
        beta1: f64,
        beta2: f64,
        epsilon: f64,
        weight_decay: f64,
    ) -> Result<Self> {
        for (name, b) in [("beta1", beta1), ("beta2", beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidArgument(format!("{name} {b} outside [0, 1)")));
            }
        }
        if epsilon <= 0.0 {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        if weight_decay < 0.0 {
            return Err(Error::InvalidArgument("weight_decay must be >= 0".into()));
        }
        Ok(Self {
            first_moment: Tensor::zeros(param_shape),
            second_moment: Tensor::zeros(param_shape),
            beta1,
            beta2,
            epsilon,
            weight_decay,
            step_count: 0,
        })
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Textbook AdamW: bias-corrected moments plus decoupled weight decay.
    pub fn step(&mut self, param: &Tensor, grad: &Tensor, lr: f64) -> Result<Tensor> {
        if lr <= 0.0 {
            return Err(Error::InvalidArgument(format!("non-positive lr {lr}")));
        }
        if !param.same_shape(grad) || !self.first_moment.same_shape(grad) {
            return Err(Error::ShapeMismatch {
                expected: param.shape().to_vec(),
                got: grad.shape().to_vec(),
            });
        }
        self.step_count += 1;
        let t = self.step_count as i32;
        self.first_moment = self
            .first_moment
            .scale(self.beta1)
            .add(&grad.scale(1.0 - self.beta1))?;
        self.second_moment = self
            .second_moment
            .scale(self.beta2)
            .add(&grad.hadamard(grad)?.scale(1.0 - self.beta2))?;

        let bias1 = 1.0 - self.beta1.powi(t);
        let bias2 = 1.0 - self.beta2.powi(t);
        let mut out = param.clone();
        for i in 0..out.len() {
            let m_hat = self.first_moment.data()[i] / bias1;
            let v_hat = self.second_moment.data()[i] / bias2;
            let adam = lr * m_hat / (v_hat.sqrt() + self.epsilon);
            let decay = lr * self.weight_decay * param.data()[i];
            out.data_mut()[i] = param.data()[i] - adam - decay;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_fixed_point() {
        let i4 = Tensor::identity(4);
        let out = newton_schulz_orthogonalize(&i4, 5).unwrap();
        let err = out.sub(&i4).unwrap().max_abs();
        assert!(err < 1e-6, "err={err}");
    }

    #[test]
    fn diagonal_flattens_to_identity() {
        let g = Tensor::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.5]]).unwrap();
        let out = newton_schulz_orthogonalize(&g, 5).unwrap();
        let err = out.sub(&Tensor::identity(2)).unwrap().frobenius_norm().unwrap();
        assert!(err < 0.05, "err={err}");
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let z = Tensor::zeros(&[3, 3]);
        assert!(matches!(
            newton_schulz_orthogonalize(&z, 5),
            Err(Error::DegenerateGradient)
        ));
    }

    #[test]
    fn tall_matrix_orthogonalizes() {
        let mut rng = crate::rng::SeededRng::new(7);
        let g = rng.draw_normal(&[8, 4]);
        let o = newton_schulz_orthogonalize(&g, 5).unwrap();
        assert_eq!(o.shape(), &[8, 4]);
        let gram = o.transpose().unwrap().matmul(&o).unwrap();
        let err = gram.sub(&Tensor::identity(4)).unwrap().frobenius_norm().unwrap();
        assert!(err <= 0.05 * 2.0, "err={err}");
    }

    #[test]
    fn scale_invariance_after_normalization() {
        let mut rng = crate::rng::SeededRng::new(11);
        let g = rng.draw_normal(&[5, 5]);
        let a = newton_schulz_orthogonalize(&g, 5).unwrap();
        let b = newton_schulz_orthogonalize(&g.scale(37.5), 5).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-6);
    }

    #[test]
    fn muon_null_step_keeps_param() {
        let param = Tensor::filled(&[3, 3], 1.5);
        let grad = Tensor::zeros(&[3, 3]);
        let mut state = MuonState::new(&[3, 3], 0.95, 5).unwrap();
        let next = state.step(&param, &grad, 0.1).unwrap();
        assert_eq!(next, param);
        assert_eq!(state.step_count(), 1);
    }

    #[test]
    fn muon_orthogonal_momentum_gives_scaled_step() {
        // Rotation matrix is orthogonal: NS should return it unchanged, so
        // the delta is exactly lr·0.2·sqrt(max_dim)·Q.
        let (c, s) = (0.6, 0.8);
        let q = Tensor::from_rows(&[vec![c, -s], vec![s, c]]).unwrap();
        let param = Tensor::zeros(&[2, 2]);
        let mut state = MuonState::new(&[2, 2], 0.0, 5).unwrap();
        let next = state.step(&param, &q, 1.0).unwrap();
        let expected = q.scale(-(0.2 * 2.0_f64.sqrt()));
        assert!(next.sub(&expected).unwrap().max_abs() < 1e-4);
    }

    #[test]
    fn muon_momentum_recurrence() {
        let grad = Tensor::filled(&[2, 2], 0.5);
        let param = Tensor::zeros(&[2, 2]);
        let mut state = MuonState::new(&[2, 2], 0.95, 5).unwrap();
        state.step(&param, &grad, 0.1).unwrap();
        state.step(&param, &grad, 0.1).unwrap();
        let expected = grad.scale(1.0 + 0.95);
        assert!(state.momentum().sub(&expected).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn latent_step_rms_contract() {
        let mut rng = crate::rng::SeededRng::new(3);
        let raw = rng.draw_normal(&[4, 4]);
        let z = raw.scale(2.0 / rms(&raw).unwrap());
        let grad = rng.draw_normal(&[4, 4]);
        let mut state = MuonState::new(&[4, 4], 0.0, 5).unwrap();
        let next = state.latent_step(&z, &grad, 0.001).unwrap();
        let delta = z.sub(&next).unwrap();
        assert!((rms(&delta).unwrap() - 0.002).abs() < 1e-9);
    }

    #[test]
    fn latent_step_zero_grad_is_identity() {
        let z = Tensor::filled(&[4, 4], 0.25);
        let mut state = MuonState::new(&[4, 4], 0.95, 5).unwrap();
        let next = state.latent_step(&z, &Tensor::zeros(&[4, 4]), 0.01).unwrap();
        assert_eq!(next, z);
    }

    #[test]
    fn latent_step_floor_engages_at_zero() {
        let z = Tensor::zeros(&[4, 4]);
        let mut rng = crate::rng::SeededRng::new(9);
        let grad = rng.draw_normal(&[4, 4]);
        let mut state = MuonState::new(&[4, 4], 0.0, 5).unwrap();
        let next = state.latent_step(&z, &grad, 0.01).unwrap();
        let delta = z.sub(&next).unwrap();
        assert!((rms(&delta).unwrap() - 0.01 * RMS_FLOOR).abs() < 1e-12);
    }

    #[test]
    fn adamw_zero_grad_zero_decay_is_identity() {
        let param = Tensor::filled(&[2, 2], 3.0);
        let mut state = AdamWState::new(&[2, 2], 0.9, 0.999, 1e-8, 0.0).unwrap();
        let next = state.step(&param, &Tensor::zeros(&[2, 2]), 0.1).unwrap();
        assert_eq!(next, param);
    }

    #[test]
    fn adamw_first_step_magnitude() {
        let param = Tensor::filled(&[1, 1], 0.0);
        let grad = Tensor::filled(&[1, 1], 1.0);
        let mut state = AdamWState::new(&[1, 1], 0.9, 0.999, 1e-8, 0.0).unwrap();
        let next = state.step(&param, &grad, 0.1).unwrap();
        // Bias-corrected first step: lr·g/(|g|+ε·scale) ≈ lr.
        assert!((next.data()[0] + 0.1).abs() < 1e-8, "got {}", next.data()[0]);
    }

    #[test]
    fn adamw_decoupled_decay() {
        let param = Tensor::filled(&[1, 1], 1.0);
        let grad = Tensor::zeros(&[1, 1]);
        let mut state = AdamWState::new(&[1, 1], 0.9, 0.999, 1e-8, 0.1).unwrap();
        let next = state.step(&param, &grad, 0.1).unwrap();
        assert!((next.data()[0] - 0.99).abs() < 1e-15);
    }

    #[test]
    fn muon_grad_direction_when_orthogonal_and_no_momentum() {
        // With zero momentum history and an orthogonal gradient, the step
        // direction equals the gradient direction exactly.
        let (c, s) = (3.0 / 5.0, 4.0 / 5.0);
        let q = Tensor::from_rows(&[vec![c, s], vec![-s, c]]).unwrap();
        let param = Tensor::filled(&[2, 2], 1.0);
        let mut state = MuonState::new(&[2, 2], 0.0, 5).unwrap();
        let next = state.step(&param, &q, 0.5).unwrap();
        let delta = param.sub(&next).unwrap();
        // delta ∝ q
        let ratio = delta.data()[0] / q.data()[0];
        for i in 0..4 {
            assert!((delta.data()[i] - ratio * q.data()[i]).abs() < 1e-6);
        }
    }
}
