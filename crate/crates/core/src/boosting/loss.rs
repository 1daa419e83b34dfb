use serde::{Deserialize, Serialize};

use crate::num::{sum, Real};

use super::BoostError;

/// Leaf values of log-loss trees are clamped to `[-LEAF_STEP_CLAMP, LEAF_STEP_CLAMP]`.
pub const LEAF_STEP_CLAMP: f64 = 4.0;
/// Probabilities are clamped to `[PROBA_EPS, 1 - PROBA_EPS]`.
pub const PROBA_EPS: f64 = 1e-12;
const NEWTON_DENOM_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    SquaredError,
    LogLoss,
}

pub fn sigmoid<F: Real>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

impl Loss {
    /// Pointwise loss whose negative derivative in `raw` is
    /// [`negative_gradient`]: `(y - f)^2 / 2` and the Bernoulli deviance
    /// `ln(1 + e^f) - y f`.
    pub fn value<F: Real>(self, y: F, raw: F) -> F {
        match self {
            Loss::SquaredError => (y - raw) * (y - raw) * F::half(),
            Loss::LogLoss => {
                // softplus, stable for large |raw|
                let softplus = raw.max(F::zero()) + (-raw.abs()).exp().ln_1p();
                softplus - y * raw
            }
        }
    }
}

/// Constant model minimizing the training loss.
pub fn init_constant<F: Real>(targets: &[F], loss: Loss) -> Result<F, BoostError> {
    if targets.is_empty() {
        return Err(BoostError::InvalidParams("cannot fit a constant to zero rows".into()));
    }
    let mean = sum(targets.iter().copied()) / F::from_count(targets.len());
    match loss {
        Loss::SquaredError => Ok(mean),
        Loss::LogLoss => {
            if mean <= F::zero() || mean >= F::one() {
                return Err(BoostError::DegenerateTarget(mean.as_f64()));
            }
            Ok((mean / (F::one() - mean)).ln())
        }
    }
}

/// `y - f` for squared error and `y - sigmoid(f)` for log-loss.
pub fn negative_gradient<F: Real>(loss: Loss, targets: &[F], raw: &[F]) -> Vec<F> {
    assert_eq!(targets.len(), raw.len());
    match loss {
        Loss::SquaredError => targets.iter().zip(raw).map(|(&y, &f)| y - f).collect(),
        Loss::LogLoss => targets.iter().zip(raw).map(|(&y, &f)| y - sigmoid(f)).collect(),
    }
}

/// Per-leaf step: exact mean residual for squared error, one Newton step for
/// log-loss (clamped).
pub fn leaf_step<F: Real>(loss: Loss, targets: &[F], raw: &[F]) -> F {
    assert!(!targets.is_empty() && targets.len() == raw.len());
    match loss {
        Loss::SquaredError => {
            sum(targets.iter().zip(raw).map(|(&y, &f)| y - f)) / F::from_count(targets.len())
        }
        Loss::LogLoss => {
            let (num, den) = targets.iter().zip(raw).fold((F::zero(), F::zero()), |(n, d), (&y, &f)| {
                let p = sigmoid(f);
                (n + (y - p), d + p * (F::one() - p))
            });
            let clamp = F::from_f64(LEAF_STEP_CLAMP);
            (num / den.max(F::from_f64(NEWTON_DENOM_FLOOR))).max(-clamp).min(clamp)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_examples() {
        assert_eq!(init_constant(&[1.0, 2.0, 3.0], Loss::SquaredError).unwrap(), 2.0);
        assert_eq!(init_constant(&[0.0, 1.0], Loss::LogLoss).unwrap(), 0.0);
        assert!(matches!(init_constant(&[0.0, 0.0], Loss::LogLoss), Err(BoostError::DegenerateTarget(_))));
    }

    #[test]
    fn log_loss_init_minimizes_total_loss() {
        let y = [1.0, 1.0, 1.0, 0.0];
        let f0 = init_constant(&y, Loss::LogLoss).unwrap();
        // brute-force scan over constants
        let total = |c: f64| y.iter().map(|&t| Loss::LogLoss.value(t, c)).sum::<f64>();
        let best = (-40000..40000)
            .map(|k| k as f64 * 1e-4)
            .min_by(|a, b| total(*a).partial_cmp(&total(*b)).unwrap())
            .unwrap();
        assert!((f0 - best).abs() < 1e-4);
        assert!((f0 - 3f64.ln()).abs() < 1e-12);
        assert!((f0 - 1.0986).abs() < 1e-4);
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(negative_gradient(Loss::SquaredError, &[1.0, 0.0], &[0.0, 0.0]), vec![1.0, 0.0]);
        assert_eq!(negative_gradient(Loss::SquaredError, &[1.0, 0.0], &[0.0, 1.0]), vec![1.0, -1.0]);
        assert_eq!(negative_gradient(Loss::LogLoss, &[1.0], &[0.0]), vec![0.5]);
    }

    #[test]
    fn step_examples() {
        assert_eq!(leaf_step(Loss::SquaredError, &[2.0, 4.0], &[0.0, 0.0]), 3.0);
        assert_eq!(leaf_step(Loss::LogLoss, &[1.0; 4], &[0.0; 4]), 2.0);
        // pure leaf far out in the tail saturates at the clamp
        assert_eq!(leaf_step(Loss::LogLoss, &[1.0; 3], &[-30.0; 3]), 4.0);
    }

    #[test]
    fn extreme_scores_are_finite() {
        assert_eq!(sigmoid(-800.0f64), 0.0);
        assert_eq!(sigmoid(800.0f64), 1.0);
        assert!(Loss::LogLoss.value(1.0f64, -800.0).is_finite());
        assert!((Loss::LogLoss.value(1.0f64, 0.0) - 2f64.ln()).abs() < 1e-15);
    }
}
