use crate::error::{Error, Result};

/// Floor on `|y|` in the MAPE denominator, in seconds.
pub const MAPE_EPSILON: f64 = 1e-9;

fn check(y_true: &[f64], y_pred: &[f64]) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::DegenerateInput("metrics need at least one value".into()));
    }
    Ok(())
}

/// Coefficient of determination. `None` when the true values have zero
/// variance, where the ratio is undefined.
pub fn r2(y_true: &[f64], y_pred: &[f64]) -> Result<Option<f64>> {
    check(y_true, y_pred)?;
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Ok(None);
    }
    let ss_res: f64 = y_true.iter().zip(y_pred).map(|(y, p)| (y - p).powi(2)).sum();
    Ok(Some(1.0 - ss_res / ss_tot))
}

/// Mean absolute error, in the units of `y`.
pub fn mae(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check(y_true, y_pred)?;
    let sum: f64 = y_true.iter().zip(y_pred).map(|(y, p)| (y - p).abs()).sum();
    Ok(sum / y_true.len() as f64)
}

/// Mean absolute percentage error, in percent.
pub fn mape(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check(y_true, y_pred)?;
    let sum: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(y, p)| (y - p).abs() / y.abs().max(MAPE_EPSILON))
        .sum();
    Ok(100.0 * sum / y_true.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities() {
        let y = [1.0, 2.0, 4.0, 8.0];
        assert_eq!(r2(&y, &y).unwrap(), Some(1.0));
        assert_eq!(mae(&y, &y).unwrap(), 0.0);
        assert_eq!(mape(&y, &y).unwrap(), 0.0);
        let mean = [3.75; 4];
        assert_eq!(r2(&y, &mean).unwrap(), Some(0.0));
    }

    #[test]
    fn hand_values() {
        assert_eq!(mae(&[10.0], &[9.0]).unwrap(), 1.0);
        assert_eq!(mape(&[10.0], &[9.0]).unwrap(), 10.0);
        assert_eq!(r2(&[10.0], &[9.0]).unwrap(), None);
        assert_eq!(mape(&[0.0], &[1e-9]).unwrap(), 100.0);
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(mae(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { left: 1, right: 2 })));
        assert!(r2(&[], &[]).is_err());
    }
}
