use crate::error::{Error, Result};

/// Labelled feature rows stored row-major in one flat buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: Vec<f64>,
    pub dim: usize,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl Dataset {
    pub fn new(features: Vec<f64>, dim: usize, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if dim == 0 || features.len() != dim * labels.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * labels.len(),
                actual: features.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::InvalidLabel { label, classes });
        }
        Ok(Dataset {
            features,
            dim,
            labels,
            classes,
        })
    }

    pub fn empty(dim: usize, classes: usize) -> Self {
        Dataset {
            features: Vec::new(),
            dim,
            labels: Vec::new(),
            classes,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.dim)
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            features,
            dim: self.dim,
            labels,
            classes: self.classes,
        }
    }

    pub fn extend(&mut self, other: &Dataset) -> Result<()> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        self.features.extend_from_slice(&other.features);
        self.labels.extend_from_slice(&other.labels);
        self.classes = self.classes.max(other.classes);
        Ok(())
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Dataset>) -> Result<Dataset> {
        let mut iter = parts.into_iter();
        let mut out = iter.next().cloned().ok_or(Error::EmptyDataset)?;
        for d in iter {
            out.extend(d)?;
        }
        Ok(out)
    }

    pub fn label_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Dataset::new(vec![0.0; 4], 2, vec![0, 1], 2).is_ok());
        assert!(matches!(
            Dataset::new(vec![0.0; 3], 2, vec![0, 1], 2),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            Dataset::new(vec![0.0; 4], 2, vec![0, 2], 2),
            Err(Error::InvalidLabel { label: 2, classes: 2 })
        ));
    }

    #[test]
    fn subset_and_concat() {
        let d = Dataset::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 2, vec![0, 1, 0], 2).unwrap();
        let s = d.subset(&[2, 0]);
        assert_eq!(s.features, vec![5.0, 6.0, 1.0, 2.0]);
        assert_eq!(s.labels, vec![0, 0]);
        let c = Dataset::concat([&d, &s]).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c.label_counts(), vec![4, 1]);
    }
}
