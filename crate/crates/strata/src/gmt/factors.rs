//! Area and coarea factors of a linear map.
//!
//! For a `d x m` Jacobian `J` of a parametrization (tall or square, `d >= m`)
//! the area factor is `sqrt(det(J^T J))`: the volume scaling the map applies
//! to `m`-dimensional patches. For a `d x k` matrix of a projection-like map
//! (wide or square, `d <= k`) the coarea factor is `sqrt(det(J J^T))`.
//! The two are exchanged by transposition.

use crate::error::{Error, Result};
use crate::gmt::Matrix;

/// `sqrt(det(J^T J))` for a matrix with at least as many rows as columns.
///
/// A `d x 0` matrix yields 1, which is what makes 0-dimensional charts
/// carry unit mass.
pub fn area_factor(j: &Matrix) -> Result<f64> {
    if j.rows() < j.cols() {
        return Err(Error::contract(format!(
            "area factor needs rows >= cols, got {}x{}",
            j.rows(),
            j.cols()
        )));
    }
    let g = j.gram_t().det()?;
    // Tiny negatives are roundoff from the Gram accumulation.
    Ok(if g <= 0.0 { 0.0 } else { g.sqrt() })
}

/// `sqrt(det(J J^T))` for a matrix with at most as many rows as columns.
pub fn coarea_factor(j: &Matrix) -> Result<f64> {
    if j.rows() > j.cols() {
        return Err(Error::contract(format!(
            "coarea factor needs rows <= cols, got {}x{}",
            j.rows(),
            j.cols()
        )));
    }
    area_factor(&j.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_unit_area_factor() {
        assert_eq!(area_factor(&Matrix::identity(2)).unwrap(), 1.0);
    }

    #[test]
    fn single_column_gives_euclidean_norm() {
        let col = Matrix::column(&[3.0, 4.0]).unwrap();
        assert!((area_factor(&col).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn tangent_pair_gives_cross_product_norm() {
        // Two tangent columns in R^3: the factor is the parallelogram area.
        let j = Matrix::from_rows(3, 2, vec![1.0, 0.0, 0.0, 1.0, 2.0, -1.0]).unwrap();
        let (ax, ay, az) = (1.0, 0.0, 2.0);
        let (bx, by, bz) = (0.0, 1.0, -1.0);
        let cross = [
            ay * bz - az * by,
            az * bx - ax * bz,
            ax * by - ay * bx,
        ];
        let norm = cross.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((area_factor(&j).unwrap() - norm).abs() < 1e-12);
    }

    #[test]
    fn row_vector_coarea_is_norm() {
        let row = Matrix::row(&[3.0, 4.0]).unwrap();
        assert!((coarea_factor(&row).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn transpose_duality() {
        let j = Matrix::from_rows(3, 2, vec![0.3, -1.2, 2.0, 0.7, 1.1, 0.4]).unwrap();
        let a = area_factor(&j).unwrap();
        let c = coarea_factor(&j.transpose()).unwrap();
        assert!((a - c).abs() < 1e-14);
    }

    #[test]
    fn wide_matrix_rejected_by_area_factor() {
        let j = Matrix::row(&[1.0, 2.0]).unwrap();
        assert!(area_factor(&j).is_err());
    }

    #[test]
    fn zero_column_count_gives_one() {
        let j = Matrix::from_rows(3, 0, vec![]).unwrap();
        assert_eq!(area_factor(&j).unwrap(), 1.0);
    }
}
