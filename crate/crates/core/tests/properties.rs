use std::collections::BTreeSet;

use proptest::collection::{btree_set, vec};
use proptest::prelude::*;

use c2knn::baselines::run_bruteforce;
use c2knn::clustering::{build_clusters, split_recursive, ClusteringConfig};
use c2knn::dataset::make_folds;
use c2knn::hashing::{frh, frh_above, ExclusionChain, ItemHashes};
use c2knn::merge::merge_partials;
use c2knn::metrics::{fold_recall, quality, RecallAveraging};
use c2knn::pipeline::{build_c2, C2Params};
use c2knn::similarity::{gf_encode, gf_jaccard, jaccard};
use c2knn::{Cluster, Dataset, ItemId, KnnGraph, Neighbor, OracleMode, UserId};

fn profile(max_item: ItemId, max_len: usize) -> impl Strategy<Value = Vec<ItemId>> {
    btree_set(0..max_item, 1..=max_len).prop_map(|s| s.into_iter().collect())
}

fn dataset(
    users: std::ops::RangeInclusive<usize>,
    items: ItemId,
) -> impl Strategy<Value = Dataset> {
    vec(profile(items, 12), users)
        .prop_map(move |ps| Dataset::from_profiles(ps, items as usize).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jaccard_is_symmetric_and_bounded(p in profile(60, 30), q in profile(60, 30)) {
        let j = jaccard(&p, &q);
        prop_assert_eq!(j, jaccard(&q, &p));
        prop_assert!((0.0..=1.0).contains(&j));
        prop_assert_eq!(jaccard(&p, &p), 1.0);
    }

    #[test]
    fn goldfinger_is_symmetric_and_bounded(p in profile(500, 40), q in profile(500, 40), seed in any::<u64>()) {
        let a = gf_encode(&p, 256, seed).unwrap();
        let b = gf_encode(&q, 256, seed).unwrap();
        let j = gf_jaccard(&a, &b).unwrap();
        prop_assert_eq!(j, gf_jaccard(&b, &a).unwrap());
        prop_assert!((0.0..=1.0).contains(&j));
        prop_assert_eq!(gf_jaccard(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn frh_is_the_least_value_above_the_bound(
        values in vec(1u32..=16, 20),
        p in profile(20, 10),
        bound in 0u32..=16,
    ) {
        let hashes = ItemHashes::from_values(16, values.clone()).unwrap();
        let want = p.iter().map(|&i| values[i as usize]).filter(|&v| v > bound).min();
        prop_assert_eq!(frh_above(&p, &hashes, bound), want);
        if bound < 16 {
            // A larger bound never lowers the hash.
            let next = frh_above(&p, &hashes, bound + 1);
            prop_assert!(next.is_none() || want.is_some_and(|w| next.unwrap() >= w));
        }
        let chain = if bound == 0 { ExclusionChain::new() } else { ExclusionChain::new().extended(bound) };
        prop_assert_eq!(frh(&p, &hashes, &chain), want);
    }

    #[test]
    fn splitting_preserves_members(
        values in vec(1u32..=8, 30),
        ps in vec(profile(30, 6), 2..120),
        max_size in 1usize..20,
    ) {
        let n = ps.len();
        // Item 0 holds the least value, so every user starts in bucket 1.
        let mut values = values;
        values[0] = 1;
        let hashes = ItemHashes::from_values(8, values).unwrap();
        let ps = ps.into_iter().map(|mut p| {
            if p[0] != 0 {
                p.insert(0, 0);
            }
            p
        });
        let ds = Dataset::from_profiles(ps.collect(), 30).unwrap();
        let root = Cluster {
            func: 0,
            chain: ExclusionChain::new(),
            bucket: 1,
            members: (0..n as UserId).collect(),
            terminal: false,
        };
        let leaves = split_recursive(root, &ds, &hashes, max_size);
        let mut members: Vec<UserId> = leaves.iter().flat_map(|c| c.members.clone()).collect();
        members.sort_unstable();
        prop_assert_eq!(members, (0..n as UserId).collect::<Vec<_>>());
        for c in &leaves {
            prop_assert!(c.terminal == (c.len() > max_size));
            prop_assert!(!c.members.is_empty());
        }
    }

    #[test]
    fn every_function_covers_every_user(ds in dataset(2..=60, 40), t in 1usize..4, b in 1u32..20, cap in 1usize..30) {
        let cfg = ClusteringConfig::new(t, b, cap, 7).unwrap();
        let leaves = build_clusters(&ds, &cfg);
        for func in 0..t {
            let mut seen: Vec<UserId> = leaves
                .iter()
                .filter(|c| c.func == func)
                .flat_map(|c| c.members.clone())
                .collect();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..ds.n_users() as UserId).collect::<Vec<_>>());
        }
    }

    #[test]
    fn merge_ignores_partial_order(
        rows in vec(vec((0u32..30, 0u8..5), 0..6), 2..30),
        cut in 1usize..29,
        k in 1usize..6,
    ) {
        let n = rows.len();
        let sim = |u: u32, v: u32| f64::from((u + v) % 5) / 4.0;
        let to_rows = |lo: usize, hi: usize| -> KnnGraph {
            let users: Vec<UserId> = (lo as UserId..hi as UserId).collect();
            let rs = users
                .iter()
                .map(|&u| {
                    let mut ids: BTreeSet<UserId> =
                        rows[u as usize].iter().map(|&(v, _)| v % n as u32).filter(|&v| v != u).collect();
                    while ids.len() > k {
                        ids.pop_last();
                    }
                    let mut row: Vec<Neighbor> = ids.into_iter().map(|v| Neighbor::new(v, sim(u, v))).collect();
                    row.sort_by(Neighbor::rank_cmp);
                    row
                })
                .collect();
            KnnGraph::from_rows(k, users, rs).unwrap()
        };
        let cut = cut.min(n - 1);
        let parts = [to_rows(0, cut), to_rows(cut, n), to_rows(0, n)];
        let forward = merge_partials(&parts, n, k).unwrap();
        let backward = merge_partials(parts.iter().rev(), n, k).unwrap();
        prop_assert_eq!(&forward, &backward);
        forward.check_invariants().unwrap();
    }

    #[test]
    fn quality_never_exceeds_one(ds in dataset(12..=80, 50), k in 1usize..6, seed in 0u64..100) {
        let exact = run_bruteforce(&ds, OracleMode::ExactJaccard, k, 0).unwrap().graph;
        let params = C2Params {
            k,
            b: 16,
            t: 3,
            max_cluster: 20,
            seed,
            ..C2Params::default()
        };
        let run = build_c2(&ds, &params).unwrap();
        let q = quality(&run.graph, &exact, &ds).unwrap();
        prop_assert!(q <= 1.0 + 1e-12, "quality {}", q);
        prop_assert!(q >= 0.0);
    }

    #[test]
    fn folds_partition_each_profile(ds in dataset(1..=30, 40), folds in 2usize..6, seed in any::<u64>()) {
        let splits = make_folds(&ds, folds, seed).unwrap();
        for u in 0..ds.n_users() {
            let profile = ds.profile(u as UserId);
            let mut held: Vec<ItemId> = splits.iter().flat_map(|f| f.test[u].clone()).collect();
            held.sort_unstable();
            if profile.len() < folds {
                prop_assert!(held.is_empty());
                continue;
            }
            prop_assert_eq!(&held[..], profile);
            for f in &splits {
                let mut joined: Vec<ItemId> = f.train.profile(u as UserId).iter().chain(&f.test[u]).copied().collect();
                joined.sort_unstable();
                prop_assert_eq!(&joined[..], profile);
            }
        }
    }

    #[test]
    fn recall_grows_with_list_length(ds in dataset(10..=50, 30), k in 1usize..6, n_rec in 1usize..10) {
        let splits = make_folds(&ds, 2, 3).unwrap();
        let fold = &splits[0];
        let g = run_bruteforce(&fold.train, OracleMode::ExactJaccard, k, 0).unwrap().graph;
        for averaging in [RecallAveraging::Macro, RecallAveraging::Micro] {
            let short = fold_recall(&g, fold, n_rec, averaging).unwrap();
            let long = fold_recall(&g, fold, n_rec + 5, averaging).unwrap();
            if let (Some(s), Some(l)) = (short, long) {
                prop_assert!(l + 1e-12 >= s);
            }
        }
    }
}
