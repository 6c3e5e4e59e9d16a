//! Graph quality and recommendation recall.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{Dataset, FoldSplit};
use crate::error::{Error, Result};
use crate::knn::KnnGraph;
use crate::similarity::jaccard;
use crate::{ItemId, UserId};

/// Sum of exact Jaccard over every edge, divided by `k * n`.
///
/// Edges are judged by exact similarity whatever oracle built the graph.
/// Short neighborhoods still count `k` in the divisor.
pub fn avg_sim(g: &KnnGraph, ds: &Dataset) -> Result<f64> {
    if g.edge_count() == 0 || g.k() == 0 {
        return Err(Error::EmptyGraph);
    }
    let total: f64 = g
        .users()
        .par_iter()
        .zip(g.rows().par_iter())
        .map(|(&u, row)| {
            row.iter()
                .map(|n| jaccard(ds.profile(u), ds.profile(n.id)))
                .sum::<f64>()
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum();
    Ok(total / (g.k() as f64 * ds.n_users() as f64))
}

/// `avg_sim(g) / avg_sim(exact)`.
pub fn quality(g: &KnnGraph, exact: &KnnGraph, ds: &Dataset) -> Result<f64> {
    let reference = avg_sim(exact, ds)?;
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    let approx = match avg_sim(g, ds) {
        Ok(v) => v,
        Err(Error::EmptyGraph) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(approx / reference)
}

/// Items outside `u`'s profile ranked by the summed similarity of the
/// neighbors holding them, best `n_rec` first (ties by item id).
pub fn recommend(
    g: &KnnGraph,
    ds: &Dataset,
    u: UserId,
    n_rec: usize,
) -> Result<Vec<(ItemId, f64)>> {
    let row = g.neighbors(u).ok_or(Error::UnknownUser {
        id: u,
        n_users: g.n_rows(),
    })?;
    let own = ds.profile(u);
    let mut scores: HashMap<ItemId, f64> = HashMap::new();
    for nb in row {
        for &item in ds.profile(nb.id) {
            if own.binary_search(&item).is_err() {
                *scores.entry(item).or_insert(0.0) += nb.sim;
            }
        }
    }
    let mut ranked: Vec<(ItemId, f64)> = scores.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(n_rec);
    Ok(ranked)
}

/// How recall is averaged within a fold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RecallAveraging {
    /// Mean of per-user recall over users with a non-empty test set.
    #[default]
    Macro,
    /// Total hits over total held-out items.
    Micro,
}

/// Recall of `n_rec` recommendations against one fold's held-out items.
/// `None` when every test set is empty.
pub fn fold_recall(
    g: &KnnGraph,
    fold: &FoldSplit,
    n_rec: usize,
    averaging: RecallAveraging,
) -> Result<Option<f64>> {
    let per_user: Vec<(usize, usize)> = (0..fold.test.len())
        .into_par_iter()
        .filter(|&u| !fold.test[u].is_empty())
        .map(|u| {
            let test = &fold.test[u];
            let recs = recommend(g, &fold.train, u as UserId, n_rec)?;
            let hits = recs
                .iter()
                .filter(|(i, _)| test.binary_search(i).is_ok())
                .count();
            Ok((hits, test.len()))
        })
        .collect::<Result<Vec<_>>>()?;
    if per_user.is_empty() {
        return Ok(None);
    }
    Ok(Some(match averaging {
        RecallAveraging::Macro => {
            per_user
                .iter()
                .map(|&(h, t)| h as f64 / t as f64)
                .sum::<f64>()
                / per_user.len() as f64
        }
        RecallAveraging::Micro => {
            let hits: usize = per_user.iter().map(|p| p.0).sum();
            let total: usize = per_user.iter().map(|p| p.1).sum();
            hits as f64 / total as f64
        }
    }))
}

/// Mean recall over folds; `graphs[i]` must be built on `folds[i].train`.
/// Folds without any held-out item are left out of the mean.
pub fn recall_at_n(
    graphs: &[KnnGraph],
    folds: &[FoldSplit],
    n_rec: usize,
    averaging: RecallAveraging,
) -> Result<f64> {
    if graphs.len() != folds.len() {
        return Err(Error::InvalidParameter(format!(
            "{} graphs for {} folds",
            graphs.len(),
            folds.len()
        )));
    }
    let mut values = Vec::new();
    for (g, fold) in graphs.iter().zip(folds) {
        if let Some(r) = fold_recall(g, fold, n_rec, averaging)? {
            values.push(r);
        }
    }
    if values.is_empty() {
        return Err(Error::EmptyTestSets);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knn::Neighbor;

    fn graph(k: usize, rows: Vec<Vec<(u32, f64)>>) -> KnnGraph {
        KnnGraph::full(
            k,
            rows.into_iter()
                .map(|r| r.into_iter().map(|(id, s)| Neighbor::new(id, s)).collect())
                .collect(),
        )
    }

    #[test]
    fn identical_profiles_average_one() {
        let ds = Dataset::from_profiles(vec![vec![0, 1]; 3], 2).unwrap();
        let g = graph(
            2,
            vec![
                vec![(1, 1.0), (2, 1.0)],
                vec![(0, 1.0), (2, 1.0)],
                vec![(0, 1.0), (1, 1.0)],
            ],
        );
        assert_eq!(avg_sim(&g, &ds).unwrap(), 1.0);
        assert_eq!(quality(&g, &g, &ds).unwrap(), 1.0);
    }

    #[test]
    fn empty_rows_still_count_in_divisor() {
        let ds = Dataset::from_profiles(vec![vec![0, 1]; 4], 2).unwrap();
        let full = graph(
            1,
            vec![
                vec![(1, 1.0)],
                vec![(0, 1.0)],
                vec![(3, 1.0)],
                vec![(2, 1.0)],
            ],
        );
        let half = graph(1, vec![vec![(1, 1.0)], vec![(0, 1.0)], vec![], vec![]]);
        assert_eq!(
            avg_sim(&half, &ds).unwrap(),
            avg_sim(&full, &ds).unwrap() / 2.0
        );
    }

    #[test]
    fn disjoint_edges_have_zero_quality() {
        let ds = Dataset::from_profiles(vec![vec![0], vec![1], vec![0]], 2).unwrap();
        let bad = graph(1, vec![vec![(1, 0.0)], vec![(2, 0.0)], vec![(1, 0.0)]]);
        let exact = graph(1, vec![vec![(2, 1.0)], vec![(0, 0.0)], vec![(0, 1.0)]]);
        assert_eq!(quality(&bad, &exact, &ds).unwrap(), 0.0);
        assert!(matches!(
            avg_sim(&graph(1, vec![vec![], vec![], vec![]]), &ds),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn recommend_scores_unowned_items() {
        let ds = Dataset::from_profiles(vec![vec![0, 1], vec![0, 1], vec![0, 1, 2]], 3).unwrap();
        let owned = graph(1, vec![vec![(1, 1.0)], vec![], vec![]]);
        assert!(recommend(&owned, &ds, 0, 5).unwrap().is_empty());
        let one = graph(1, vec![vec![(2, 0.66)], vec![], vec![]]);
        let items: Vec<_> = recommend(&one, &ds, 0, 5)
            .unwrap()
            .into_iter()
            .map(|p| p.0)
            .collect();
        assert_eq!(items, vec![2]);
    }

    #[test]
    fn recall_extremes() {
        let train = Dataset::from_profiles(vec![vec![0], vec![0, 1, 2]], 3).unwrap();
        let fold = FoldSplit {
            fold_index: 0,
            fold_count: 2,
            train,
            test: vec![vec![1, 2], vec![]],
        };
        let g = graph(1, vec![vec![(1, 0.5)], vec![(0, 0.5)]]);
        let folds = [fold];
        let graphs = [g];
        assert_eq!(
            recall_at_n(&graphs, &folds, 10, RecallAveraging::Macro).unwrap(),
            1.0
        );
        assert_eq!(
            recall_at_n(&graphs, &folds, 0, RecallAveraging::Macro).unwrap(),
            0.0
        );
        assert_eq!(
            recall_at_n(&graphs, &folds, 1, RecallAveraging::Micro).unwrap(),
            0.5
        );
    }
}
