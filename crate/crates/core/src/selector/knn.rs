use serde::{Deserialize, Serialize};

use super::{check_dim, Label, SelectorError, Standardizer, TrainingSet};

/// k nearest neighbours under Euclidean distance on standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub standardizer: Standardizer,
    pub vectors: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

pub fn train_knn(data: &TrainingSet, k: usize) -> Result<KnnModel, SelectorError> {
    data.require_classes(1)?;
    if k == 0 || k > data.len() {
        return Err(SelectorError::InvalidParams(format!(
            "k = {k} must be in 1..={}",
            data.len()
        )));
    }
    let standardizer = Standardizer::fit(&data.vectors);
    Ok(KnnModel {
        k,
        vectors: data.vectors.iter().map(|v| standardizer.apply(v)).collect(),
        labels: data.labels.clone(),
        standardizer,
    })
}

impl KnnModel {
    pub fn dim(&self) -> usize {
        self.standardizer.mean.len()
    }

    /// Share of SQL_CORRECT among the `k` nearest points; equal distances
    /// keep training order.
    pub fn score(&self, v: &[f64]) -> Result<f64, SelectorError> {
        check_dim(self.dim(), v)?;
        let z = self.standardizer.apply(v);
        let mut dist: Vec<(f64, usize)> = self
            .vectors
            .iter()
            .enumerate()
            .map(|(i, w)| (w.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let sql = dist[..self.k]
            .iter()
            .filter(|(_, i)| self.labels[*i] == Label::SqlCorrect)
            .count();
        Ok(sql as f64 / self.k as f64)
    }

    pub fn predict(&self, v: &[f64]) -> Result<(Label, f64), SelectorError> {
        let s = self.score(v)?;
        Ok((Label::from_score(s), s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set() -> TrainingSet {
        TrainingSet::new(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 5.0], vec![6.0, 5.0]],
            vec![Label::SqlCorrect, Label::SqlCorrect, Label::E2eCorrect, Label::E2eCorrect],
            (0..4).map(|i| i.to_string()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn one_nn_memorizes() {
        let s = set();
        let m = train_knn(&s, 1).unwrap();
        for (v, l) in s.vectors.iter().zip(&s.labels) {
            assert_eq!(m.predict(v).unwrap().0, *l);
        }
    }

    #[test]
    fn even_split_goes_to_sql() {
        let m = train_knn(&set(), 4).unwrap();
        assert_eq!(m.predict(&[5.0, 5.0]).unwrap(), (Label::SqlCorrect, 0.5));
    }

    #[test]
    fn k_bounds() {
        assert!(matches!(train_knn(&set(), 5), Err(SelectorError::InvalidParams(_))));
        assert!(matches!(train_knn(&set(), 0), Err(SelectorError::InvalidParams(_))));
    }
}
