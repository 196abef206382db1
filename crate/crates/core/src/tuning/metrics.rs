use crate::error::{Error, Result};

fn check_pair(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::validation(format!(
            "{} observations but {} predictions",
            y.len(),
            yhat.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::validation("metrics need at least one observation"));
    }
    if y.iter().chain(yhat).any(|v| !v.is_finite()) {
        return Err(Error::validation("metrics need finite values"));
    }
    Ok(())
}

/// Coefficient of determination `1 − SS_res / SS_tot`, with `SS_tot`
/// taken about the mean of `y`. Undefined (an error) for constant `y`.
pub fn r_squared(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::validation("R² is undefined for a constant target"));
    }
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmsleOutcome {
    pub value: f64,
    /// Negative predictions that were raised to 0.
    pub clamped: usize,
}

/// Root mean squared log error, `sqrt(mean((ln(1+ŷ) − ln(1+y))²))`.
/// Observations must be non-negative; negative predictions are clamped
/// to 0 and counted.
pub fn rmsle_detailed(y: &[f64], yhat: &[f64]) -> Result<RmsleOutcome> {
    check_pair(y, yhat)?;
    if let Some(v) = y.iter().find(|v| **v < 0.0) {
        return Err(Error::validation(format!(
            "RMSLE needs non-negative observations, found {v}"
        )));
    }
    let mut clamped = 0;
    let mut sum = 0.0;
    for (&a, &p) in y.iter().zip(yhat) {
        let p = if p < 0.0 {
            clamped += 1;
            0.0
        } else {
            p
        };
        sum += (p.ln_1p() - a.ln_1p()).powi(2);
    }
    Ok(RmsleOutcome {
        value: (sum / y.len() as f64).sqrt(),
        clamped,
    })
}

pub fn rmsle(y: &[f64], yhat: &[f64]) -> Result<f64> {
    let out = rmsle_detailed(y, yhat)?;
    if out.clamped > 0 {
        log::debug!("RMSLE clamped {} negative prediction(s) to 0", out.clamped);
    }
    Ok(out.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit() {
        let y = [1.0, 5.0, 2.0];
        assert_eq!(r_squared(&y, &y).unwrap(), 1.0);
        assert_eq!(rmsle(&y, &y).unwrap(), 0.0);
    }

    #[test]
    fn null_model_r2_is_zero() {
        let y = [1.0, 2.0, 3.0, 6.0];
        assert_eq!(r_squared(&y, &[3.0; 4]).unwrap(), 0.0);
    }

    #[test]
    fn hand_r2() {
        // SS_res = 1, SS_tot = 2
        assert_eq!(r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap(), 0.5);
    }

    #[test]
    fn closed_form_rmsle() {
        let v = rmsle(&[0.0], &[std::f64::consts::E - 1.0]).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rmsle_permutation_invariant() {
        let y = [3.0, 0.0, 10.0, 7.5];
        let p = [2.0, 1.0, 12.0, 7.0];
        let a = rmsle(&y, &p).unwrap();
        let b = rmsle(&[10.0, 7.5, 3.0, 0.0], &[12.0, 7.0, 2.0, 1.0]).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn negative_predictions_clamped() {
        let out = rmsle_detailed(&[0.0, 1.0], &[-5.0, 1.0]).unwrap();
        assert_eq!(out.clamped, 1);
        assert_eq!(out.value, 0.0);
    }

    #[test]
    fn errors() {
        assert!(r_squared(&[2.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(r_squared(&[1.0], &[1.0, 2.0]).is_err());
        assert!(rmsle(&[1.0], &[1.0, 2.0]).is_err());
        assert!(rmsle(&[-1.0], &[1.0]).is_err());
        assert!(rmsle(&[], &[]).is_err());
    }
}
