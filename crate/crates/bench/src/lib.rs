//! Fixtures shared by the benchmarks.

use c2knn::synthetic::{rating_corpus, RatingCorpusConfig};
use c2knn::Dataset;

/// Binarized synthetic rating corpus with `users` users.
pub fn corpus(users: usize, seed: u64) -> Dataset {
    let cfg = RatingCorpusConfig {
        users,
        seed,
        ..RatingCorpusConfig::default()
    };
    let records = rating_corpus(&cfg).expect("valid corpus config");
    c2knn::dataset::binarize_and_filter(&records, 3.0, 20).expect("corpus has positive ratings")
}
