//! Folding partial per-cluster graphs into one graph over all users.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::knn::{KnnGraph, Neighbor, Neighborhood};
use crate::UserId;

/// Per-user top-k over every candidate appearing in any partial graph.
///
/// Similarities are taken from the partials; the oracle is never called.
/// Candidates repeated across partials count once. The result does not
/// depend on the order of `partials`.
pub fn merge_partials<'a, I>(partials: I, n_users: usize, k: usize) -> Result<KnnGraph>
where
    I: IntoIterator<Item = &'a KnnGraph>,
{
    let check = |id: UserId| {
        if (id as usize) < n_users {
            Ok(())
        } else {
            Err(Error::UnknownUser { id, n_users })
        }
    };
    let mut candidates: Vec<Vec<Neighbor>> = vec![Vec::new(); n_users];
    for g in partials {
        for (u, row) in g.iter() {
            check(u)?;
            for nb in row {
                check(nb.id)?;
            }
            candidates[u as usize].extend_from_slice(row);
        }
    }
    // Users are disjoint across rows, so each row is reduced independently.
    let rows = candidates
        .into_par_iter()
        .map(|mut cands| {
            cands.sort_unstable_by(|a, b| a.id.cmp(&b.id).then(b.sim.total_cmp(&a.sim)));
            cands.dedup_by_key(|n| n.id);
            let mut h = Neighborhood::new(k);
            for c in cands {
                h.insert(c);
            }
            h.into_vec()
        })
        .collect();
    Ok(KnnGraph::full(k, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(k: usize, users: Vec<u32>, rows: Vec<Vec<(u32, f64)>>) -> KnnGraph {
        let rows = rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|(id, sim)| Neighbor::new(id, sim))
                    .collect()
            })
            .collect();
        KnnGraph::from_rows(k, users, rows).unwrap()
    }

    #[test]
    fn single_partial_is_identity() {
        let p = g(
            2,
            vec![0, 1, 2],
            vec![vec![(1, 0.5), (2, 0.25)], vec![(0, 0.5)], vec![(0, 0.25)]],
        );
        let m = merge_partials([&p], 3, 2).unwrap();
        assert_eq!(m.rows(), p.rows());
    }

    #[test]
    fn repeated_candidate_appears_once() {
        let a = g(3, vec![0, 1], vec![vec![(1, 0.5)], vec![(0, 0.5)]]);
        let m = merge_partials([&a, &a], 2, 3).unwrap();
        assert_eq!(m.neighbors(0).unwrap(), &[Neighbor::new(1, 0.5)]);
    }

    #[test]
    fn keeps_k_best_across_partials() {
        let a = g(
            2,
            vec![0, 1, 2],
            vec![vec![(1, 0.1), (2, 0.3)], vec![], vec![]],
        );
        let b = g(2, vec![0, 3], vec![vec![(3, 0.2)], vec![]]);
        let m = merge_partials([&a, &b], 4, 2).unwrap();
        let ids: Vec<_> = m.neighbors(0).unwrap().iter().map(|n| n.id).collect();
        assert_eq!(ids, vec![2, 3]);
        assert!(m.neighbors(3).unwrap().is_empty());
    }

    #[test]
    fn unknown_user_rejected() {
        let a = g(1, vec![0, 5], vec![vec![(5, 0.1)], vec![]]);
        assert!(matches!(
            merge_partials([&a], 3, 1),
            Err(Error::UnknownUser { id: 5, .. })
        ));
    }
}
