use nalgebra::{DMatrix, DVector};

use super::{SpectralError, SpectralResult};
use crate::operators::OperatorResult;

#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub matrix: DMatrix<f64>,
    pub base: DVector<f64>,
    pub step: f64,
}

/// Central differences, one column per coordinate:
/// `J[:, i] = (f(θ + h e_i) − f(θ − h e_i)) / 2h`, where `2h` is taken as the
/// representable difference of the two perturbed coordinates.
pub fn numerical_jacobian<F>(f: F, theta: &DVector<f64>, h: f64) -> SpectralResult<Jacobian>
where
    F: Fn(&DVector<f64>) -> OperatorResult<DVector<f64>>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(SpectralError::InvalidParameter(format!("step {h} must be positive")));
    }
    let n = theta.len();
    let mut columns = Vec::with_capacity(n);
    let mut rows = None;
    for i in 0..n {
        let mut plus = theta.clone();
        plus[i] += h;
        let mut minus = theta.clone();
        minus[i] -= h;
        let span = plus[i] - minus[i];
        let col = (f(&plus)? - f(&minus)?) / span;
        if col.iter().any(|v| !v.is_finite()) {
            return Err(SpectralError::NonFinite { coordinate: i });
        }
        match rows {
            None => rows = Some(col.len()),
            Some(r) if r != col.len() => {
                return Err(SpectralError::Dimension {
                    expected: r,
                    found: col.len(),
                })
            }
            _ => {}
        }
        columns.push(col);
    }
    let matrix = if columns.is_empty() {
        DMatrix::zeros(f(theta)?.len(), 0)
    } else {
        DMatrix::from_columns(&columns)
    };
    Ok(Jacobian {
        matrix,
        base: theta.clone(),
        step: h,
    })
}

/// Largest entrywise change between the Jacobians at steps `h` and `h/2`.
pub fn jacobian_step_sweep<F>(f: F, theta: &DVector<f64>, h: f64) -> SpectralResult<f64>
where
    F: Fn(&DVector<f64>) -> OperatorResult<DVector<f64>>,
{
    let coarse = numerical_jacobian(&f, theta, h)?;
    let fine = numerical_jacobian(&f, theta, h / 2.0)?;
    Ok((coarse.matrix - fine.matrix).amax())
}
