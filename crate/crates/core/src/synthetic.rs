//! Seeded synthetic datasets: planted user groups and a rating generator
//! with the rough shape of a movie-rating corpus.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Zipf};

use crate::dataset::{Dataset, RatingRecord};
use crate::error::{Error, Result};
use crate::ItemId;

/// Users drawn around `groups` disjoint item pools plus shared noise.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    pub users: usize,
    pub groups: usize,
    pub items_per_group: usize,
    pub profile_size: usize,
    pub noise_items: usize,
    /// Share of each profile drawn from the noise pool.
    pub noise_fraction: f64,
    pub seed: u64,
}

/// User `u` belongs to group `u % groups` and takes most of its items from
/// that group's pool. Item ids: group `g` owns
/// `g * items_per_group .. (g + 1) * items_per_group`; noise items follow.
pub fn planted(cfg: &PlantedConfig) -> Result<Dataset> {
    let own = ((1.0 - cfg.noise_fraction) * cfg.profile_size as f64).round() as usize;
    let noise = cfg.profile_size - own;
    if cfg.groups == 0 || cfg.users == 0 || cfg.profile_size == 0 {
        return Err(Error::InvalidParameter(
            "users, groups and profile size must be positive".into(),
        ));
    }
    if own > cfg.items_per_group
        || noise > cfg.noise_items
        || !(0.0..=1.0).contains(&cfg.noise_fraction)
    {
        return Err(Error::InvalidParameter(
            "profile does not fit in the item pools".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise_base = cfg.groups * cfg.items_per_group;
    let profiles = (0..cfg.users)
        .map(|u| {
            let base = (u % cfg.groups) * cfg.items_per_group;
            let mut p: Vec<ItemId> = sample(&mut rng, cfg.items_per_group, own)
                .into_iter()
                .map(|i| (base + i) as ItemId)
                .collect();
            p.extend(
                sample(&mut rng, cfg.noise_items, noise)
                    .into_iter()
                    .map(|i| (noise_base + i) as ItemId),
            );
            p
        })
        .collect();
    Dataset::from_profiles(profiles, noise_base + cfg.noise_items)
}

/// Profiles of independent uniform size over a uniform item universe.
pub fn uniform(
    users: usize,
    items: usize,
    min_size: usize,
    max_size: usize,
    seed: u64,
) -> Result<Dataset> {
    if min_size == 0 || min_size > max_size || max_size > items {
        return Err(Error::InvalidParameter(
            "need 1 <= min_size <= max_size <= items".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profiles = (0..users)
        .map(|_| {
            let size = rng.random_range(min_size..=max_size);
            sample(&mut rng, items, size)
                .into_iter()
                .map(|i| i as ItemId)
                .collect()
        })
        .collect();
    Dataset::from_profiles(profiles, items)
}

/// Rating corpus with genre-based tastes and long-tailed popularity.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingCorpusConfig {
    pub users: usize,
    pub items: usize,
    pub genres: usize,
    /// Median raw ratings per user.
    pub median_ratings: f64,
    pub min_ratings: usize,
    pub max_ratings: usize,
    /// Chance that a rating targets one of the user's favorite genres.
    pub taste_strength: f64,
    pub seed: u64,
}

impl Default for RatingCorpusConfig {
    /// Roughly the size of a million-rating movie corpus.
    fn default() -> Self {
        RatingCorpusConfig {
            users: 6040,
            items: 3700,
            genres: 18,
            median_ratings: 96.0,
            min_ratings: 20,
            max_ratings: 1800,
            taste_strength: 0.7,
            seed: 0,
        }
    }
}

/// Generates raw 1-5 ratings in file order (user by user).
///
/// Each user has two favorite genres; ratings pick items by Zipf
/// popularity either within a favorite genre or across the catalogue, and
/// favorite-genre items are rated higher.
pub fn rating_corpus(cfg: &RatingCorpusConfig) -> Result<Vec<RatingRecord>> {
    if cfg.users == 0 || cfg.genres == 0 || cfg.items < cfg.genres || cfg.min_ratings == 0 {
        return Err(Error::InvalidParameter(
            "corpus needs users, genres and items >= genres".into(),
        ));
    }
    if cfg.max_ratings > cfg.items || cfg.min_ratings > cfg.max_ratings {
        return Err(Error::InvalidParameter(
            "need min_ratings <= max_ratings <= items".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bad = |e: rand_distr::ZipfError| Error::InvalidParameter(e.to_string());
    // Item i belongs to genre i % genres; popularity rank within the
    // catalogue is the item id.
    let per_genre = cfg.items / cfg.genres;
    let global = Zipf::new(cfg.items as f64, 0.9).map_err(bad)?;
    let in_genre = Zipf::new(per_genre as f64, 0.8).map_err(bad)?;
    let sizes = LogNormal::new(cfg.median_ratings.ln(), 0.9)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let quality: Vec<f64> = (0..cfg.items)
        .map(|_| rng.random_range(-0.8..0.8))
        .collect();

    let mut out = Vec::new();
    let mut seen = vec![false; cfg.items];
    for u in 0..cfg.users {
        let fav = [
            rng.random_range(0..cfg.genres),
            rng.random_range(0..cfg.genres),
        ];
        let bias: f64 = rng.random_range(-0.6..0.6);
        let n = (sizes.sample(&mut rng).round() as usize).clamp(cfg.min_ratings, cfg.max_ratings);
        let mut picked = Vec::with_capacity(n);
        while picked.len() < n {
            let item = if rng.random_bool(cfg.taste_strength) {
                let g = fav[rng.random_range(0..2)];
                (in_genre.sample(&mut rng) as usize - 1) * cfg.genres + g
            } else {
                global.sample(&mut rng) as usize - 1
            };
            if item < cfg.items && !seen[item] {
                seen[item] = true;
                picked.push(item);
            }
        }
        for &item in &picked {
            seen[item] = false;
            let liked = if fav.contains(&(item % cfg.genres)) {
                0.8
            } else {
                -0.3
            };
            let noise: f64 = rng.random_range(-1.2..1.2);
            let rating = (3.2 + quality[item] + bias + liked + noise)
                .round()
                .clamp(1.0, 5.0);
            out.push(RatingRecord {
                user: (u + 1).to_string(),
                item: (item + 1).to_string(),
                rating,
                timestamp: None,
            });
        }
    }
    Ok(out)
}
