// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};

/// `(1/M) * sum (target - pred)^2`.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::Shape(format!(
            "mse over {} predictions and {} targets",
            pred.len(),
            target.len()
        )));
    }
    let sum: f64 = pred.iter().zip(target).map(|(p, t)| (t - p) * (t - p)).sum();
    Ok(sum / pred.len() as f64)
}

/// Cosine of the angle between `pred` and `target`.
///
/// Fails with [`Error::UndefinedSimilarity`] when either norm is below `1e-12`.
pub fn cosine_similarity(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(Error::Shape(format!(
            "cosine over {} predictions and {} targets",
            pred.len(),
            target.len()
        )));
    }
    let dot: f64 = pred.iter().zip(target).map(|(p, t)| p * t).sum();
    let np = pred.iter().map(|p| p * p).sum::<f64>().sqrt();
    let nt = target.iter().map(|t| t * t).sum::<f64>().sqrt();
    let smallest = np.min(nt);
    if smallest < 1e-12 {
        return Err(Error::UndefinedSimilarity { norm: smallest });
    }
    Ok((dot / (np * nt)).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mse_examples() {
        assert_eq!(mse_loss(&[0.3, -0.2], &[0.3, -0.2]).unwrap(), 0.0);
        assert_eq!(mse_loss(&[0.0, 2.0], &[1.0, 2.0]).unwrap(), 0.5);
        assert!(mse_loss(&[0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn cosine_examples() {
        let v = [0.3, -0.7, 0.2];
        assert!((cosine_similarity(&v, &v).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        assert!((cosine_similarity(&neg, &v).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(
            cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::UndefinedSimilarity { .. })
        ));
    }

    proptest! {
        #[test]
        fn loss_is_nonnegative(v in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..20)) {
            let (p, t): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            prop_assert!(mse_loss(&p, &t).unwrap() >= 0.0);
        }

        #[test]
        fn cosine_is_bounded(v in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..20)) {
            let (p, t): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            if let Ok(c) = cosine_similarity(&p, &t) {
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&c));
            }
        }
    }
}
