//! Datasets: ordered samples with the adjacency helpers used by the
//! stability probes (two datasets are adjacent when they differ in exactly
//! one position).

use crate::error::{Error, Result};
use crate::geometry::Vector;

pub type DataPoint = Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<DataPoint>,
}

impl Dataset {
    /// A dataset is nonempty and dimensionally consistent by construction.
    pub fn new(points: Vec<DataPoint>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyDataset)?;
        let dim = first.len();
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // nonempty by construction
    }

    pub fn data_dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn point(&self, index: usize) -> &DataPoint {
        &self.points[index]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DataPoint> {
        self.points.iter()
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    /// Adjacent copy with position `index` replaced.
    pub fn replaced(&self, index: usize, x: DataPoint) -> Result<Self> {
        if index >= self.points.len() {
            return Err(Error::InvalidParameter(format!(
                "replace index {index} out of bounds for dataset of size {}",
                self.points.len()
            )));
        }
        if x.len() != self.data_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.data_dim(),
                actual: x.len(),
            });
        }
        let mut points = self.points.clone();
        points[index] = x;
        Ok(Self { points })
    }

    /// Contiguous block `[start, start + len)`, cloned out for phase-wise
    /// consumption.
    pub fn block(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.points.len() || len == 0 {
            return Err(Error::InvalidParameter(format!(
                "block [{start}, {}) out of bounds for dataset of size {}",
                start + len,
                self.points.len()
            )));
        }
        Ok(Self {
            points: self.points[start..start + len].to_vec(),
        })
    }

    pub fn mean(&self) -> DataPoint {
        let mut acc = Vector::zeros(self.data_dim());
        for p in &self.points {
            acc += p;
        }
        acc / self.points.len() as f64
    }

    /// Indices at which the two datasets differ; stability probes assert
    /// this has length exactly one.
    pub fn differing_indices(&self, other: &Self) -> Vec<usize> {
        self.points
            .iter()
            .zip(other.points.iter())
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| i)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(Dataset::new(vec![]), Err(Error::EmptyDataset)));
    }

    #[test]
    fn inconsistent_dims_rejected() {
        assert!(Dataset::new(vec![v(&[1.0]), v(&[1.0, 2.0])]).is_err());
    }

    #[test]
    fn replaced_differs_in_exactly_one_index() {
        let s = Dataset::new(vec![v(&[1.0]), v(&[2.0]), v(&[3.0])]).unwrap();
        let s2 = s.replaced(1, v(&[9.0])).unwrap();
        assert_eq!(s.differing_indices(&s2), vec![1]);
    }

    #[test]
    fn block_and_mean() {
        let s = Dataset::new(vec![v(&[1.0]), v(&[3.0]), v(&[5.0]), v(&[7.0])]).unwrap();
        let b = s.block(1, 2).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.mean(), v(&[4.0]));
        assert!(s.block(3, 2).is_err());
    }
}
