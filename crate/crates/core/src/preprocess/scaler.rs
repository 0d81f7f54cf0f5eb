use alloc::string::{String, ToString};
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Per-column standardization `(x - mean) / std` and its inverse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    names: Vec<String>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

/// Fits column means and population standard deviations.
///
/// Columns whose spread is zero (up to round-off relative to their mean) get
/// `std = 1`, so they transform to `x - mean`, and a warning is logged.
pub fn fit_scaler(data: &Matrix, names: &[&str]) -> Result<Scaler> {
    if data.rows() < 2 || data.cols() == 0 {
        return Err(Error::invalid(alloc::format!(
            "scaler needs at least 2 rows and 1 column, got {}x{}",
            data.rows(),
            data.cols()
        )));
    }
    if !names.is_empty() && names.len() != data.cols() {
        return Err(Error::invalid("feature name count does not match columns"));
    }
    if !data.is_finite() {
        return Err(Error::NonFiniteInput("scaler input".into()));
    }
    let n = data.rows() as f64;
    let mut means = Vec::with_capacity(data.cols());
    let mut stds = Vec::with_capacity(data.cols());
    for j in 0..data.cols() {
        let mean = (0..data.rows()).map(|i| data.get(i, j)).sum::<f64>() / n;
        let var = (0..data.rows())
            .map(|i| {
                let d = data.get(i, j) - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        let mut std = libm::sqrt(var);
        if std <= 1e-12 * mean.abs().max(1.0) {
            log::warn!(
                "column {} is constant (mean {}); using std = 1",
                names.get(j).copied().unwrap_or("?"),
                mean
            );
            std = 1.0;
        }
        means.push(mean);
        stds.push(std);
    }
    let names = if names.is_empty() {
        (0..data.cols()).map(|j| alloc::format!("x{j}")).collect()
    } else {
        names.iter().map(|s| s.to_string()).collect()
    };
    Ok(Scaler { names, means, stds })
}

impl Scaler {
    /// Builds a scaler from explicit statistics; every std must be positive.
    pub fn from_parts(names: Vec<String>, means: Vec<f64>, stds: Vec<f64>) -> Result<Self> {
        if names.len() != means.len() || means.len() != stds.len() || means.is_empty() {
            return Err(Error::invalid("scaler parts must be equally long and non-empty"));
        }
        if stds.iter().any(|s| !(s.is_finite() && *s > 0.0)) || means.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("scaler means must be finite and stds positive"));
        }
        Ok(Scaler { names, means, stds })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn transform(&self, data: &Matrix) -> Result<Matrix> {
        let mut out = data.clone();
        self.check(data)?;
        for i in 0..out.rows() {
            self.transform_row(out.row_mut(i));
        }
        Ok(out)
    }

    pub fn inverse_transform(&self, data: &Matrix) -> Result<Matrix> {
        let mut out = data.clone();
        self.check(data)?;
        for i in 0..out.rows() {
            self.inverse_row(out.row_mut(i));
        }
        Ok(out)
    }

    /// In-place transform of one row; the row length must equal `len()`.
    pub fn transform_row(&self, row: &mut [f64]) {
        debug_assert_eq!(row.len(), self.len());
        for ((x, m), s) in row.iter_mut().zip(&self.means).zip(&self.stds) {
            *x = (*x - m) / s;
        }
    }

    pub fn inverse_row(&self, row: &mut [f64]) {
        debug_assert_eq!(row.len(), self.len());
        for ((x, m), s) in row.iter_mut().zip(&self.means).zip(&self.stds) {
            *x = *x * s + m;
        }
    }

    fn check(&self, data: &Matrix) -> Result<()> {
        if data.cols() != self.len() {
            return Err(Error::invalid(alloc::format!(
                "scaler has {} columns, matrix has {}",
                self.len(),
                data.cols()
            )));
        }
        Ok(())
    }
}
