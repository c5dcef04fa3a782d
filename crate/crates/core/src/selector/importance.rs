use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{SelectorError, SelectorModel, TrainingSet};

/// Mean accuracy drop when one feature column is shuffled, per feature.
pub fn permutation_importance(
    model: &SelectorModel,
    data: &TrainingSet,
    n_repeats: usize,
    seed: u64,
) -> Result<Vec<f64>, SelectorError> {
    let base = model.accuracy(data)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(data.dim());
    for j in 0..data.dim() {
        let mut drop = 0.0;
        for _ in 0..n_repeats.max(1) {
            let mut column: Vec<f64> = data.vectors.iter().map(|v| v[j]).collect();
            column.shuffle(&mut rng);
            let mut shuffled = data.clone();
            for (v, x) in shuffled.vectors.iter_mut().zip(column) {
                v[j] = x;
            }
            drop += base - model.accuracy(&shuffled)?;
        }
        out.push(drop / n_repeats.max(1) as f64);
    }
    Ok(out)
}

/// Feature indices by decreasing importance; ties keep index order.
pub fn rank_features(importance: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..importance.len()).collect();
    idx.sort_by(|&a, &b| importance[b].total_cmp(&importance[a]).then(a.cmp(&b)));
    idx
}
