//! Rating-file ingestion, binarization and cross-validation folds.
//!
//! Ratings are read as `user,item,rating[,timestamp]` lines (comma, tab or
//! the MovieLens `::` separator), filtered on raw per-user activity, then
//! binarized into sorted duplicate-free item sets.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hashing::derive_seed;
use crate::{ItemId, UserId};

const SNAPSHOT_MAGIC: &str = "c2knn-dataset";
const SNAPSHOT_VERSION: u32 = 1;
const FOLD_NAMESPACE: u64 = 0xF01D_5EED;

#[derive(Debug, Clone, PartialEq)]
pub struct RatingRecord {
    pub user: String,
    pub item: String,
    pub rating: f64,
    pub timestamp: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputFormat {
    Csv,
    Tsv,
    #[default]
    Auto,
}

impl std::str::FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(InputFormat::Csv),
            "tsv" => Ok(InputFormat::Tsv),
            "auto" => Ok(InputFormat::Auto),
            other => Err(Error::InvalidParameter(format!(
                "unknown input format {other:?} (expected csv, tsv or auto)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Delimiter {
    Comma,
    Tab,
    DoubleColon,
    Whitespace,
}

impl Delimiter {
    fn detect(line: &str) -> Self {
        if line.contains("::") {
            Delimiter::DoubleColon
        } else if line.contains('\t') {
            Delimiter::Tab
        } else if line.contains(',') {
            Delimiter::Comma
        } else {
            Delimiter::Whitespace
        }
    }

    fn split(self, line: &str) -> Vec<&str> {
        match self {
            Delimiter::Comma => line.split(',').collect(),
            Delimiter::Tab => line.split('\t').collect(),
            Delimiter::DoubleColon => line.split("::").collect(),
            Delimiter::Whitespace => line.split_whitespace().collect(),
        }
    }
}

/// Reads a ratings file. See [`parse_ratings`].
pub fn load_ratings(path: impl AsRef<Path>, format: InputFormat) -> Result<Vec<RatingRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_ratings(BufReader::new(file), format).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Parses `user,item,rating[,timestamp]` records in input order.
///
/// The delimiter is forced by `Csv`/`Tsv`; `Auto` looks at the first
/// non-blank line and recognises `::`, tab, comma, then whitespace. A
/// single leading header line is skipped when its third column is not
/// numeric. Blank lines are ignored.
pub fn parse_ratings(reader: impl BufRead, format: InputFormat) -> Result<Vec<RatingRecord>> {
    let mut delimiter = match format {
        InputFormat::Csv => Some(Delimiter::Comma),
        InputFormat::Tsv => Some(Delimiter::Tab),
        InputFormat::Auto => None,
    };
    let mut records = Vec::new();
    let mut first_content_line = true;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io("<input>", e))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let delim = *delimiter.get_or_insert_with(|| Delimiter::detect(line));
        let fields: Vec<&str> = delim.split(line).into_iter().map(str::trim).collect();

        if first_content_line {
            first_content_line = false;
            if fields.len() >= 3 && fields[2].parse::<f64>().is_err() {
                continue;
            }
        }
        records.push(parse_fields(&fields, line_no)?);
    }

    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(records)
}

fn parse_fields(fields: &[&str], line: usize) -> Result<RatingRecord> {
    let parse_err = |message: String| Error::Parse { line, message };
    if fields.len() < 3 {
        return Err(parse_err(format!(
            "expected at least 3 columns, found {}",
            fields.len()
        )));
    }
    let (user, item) = (fields[0], fields[1]);
    if user.is_empty() || item.is_empty() {
        return Err(parse_err("empty user or item token".into()));
    }
    let rating: f64 = fields[2]
        .parse()
        .map_err(|_| parse_err(format!("rating {:?} is not a number", fields[2])))?;
    if !rating.is_finite() {
        return Err(parse_err(format!("rating {:?} is not finite", fields[2])));
    }
    let timestamp = match fields.get(3) {
        Some(ts) if !ts.is_empty() => Some(
            ts.parse::<i64>()
                .map_err(|_| parse_err(format!("timestamp {ts:?} is not an integer")))?,
        ),
        _ => None,
    };
    Ok(RatingRecord {
        user: user.to_string(),
        item: item.to_string(),
        rating,
        timestamp,
    })
}

/// Bijective external <-> internal id maps, shared between a dataset and
/// the training sets derived from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdSpace {
    users: Vec<String>,
    items: Vec<String>,
    user_index: HashMap<String, UserId>,
    item_index: HashMap<String, ItemId>,
}

impl IdSpace {
    fn new(users: Vec<String>, items: Vec<String>) -> Result<Self> {
        let user_index = index_of(&users, "user id")?;
        let item_index = index_of(&items, "item id")?;
        Ok(IdSpace {
            users,
            items,
            user_index,
            item_index,
        })
    }

    fn numeric(n_users: usize, n_items: usize) -> Self {
        let users = (0..n_users).map(|u| u.to_string()).collect();
        let items = (0..n_items).map(|i| i.to_string()).collect();
        IdSpace::new(users, items).expect("numeric ids are unique")
    }
}

fn index_of(ids: &[String], what: &'static str) -> Result<HashMap<String, u32>> {
    let mut map = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if map.insert(id.clone(), i as u32).is_some() {
            return Err(Error::format(what, format!("duplicate external id {id:?}")));
        }
    }
    Ok(map)
}

/// Users with their binarized item profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    profiles: Vec<Vec<ItemId>>,
    ids: Arc<IdSpace>,
    dropped_users: usize,
}

impl Dataset {
    /// Builds a dataset with numeric external ids (`"0"`, `"1"`, ...).
    ///
    /// Profiles are sorted and deduplicated; every item must be below
    /// `n_items` and every profile non-empty.
    pub fn from_profiles(profiles: Vec<Vec<ItemId>>, n_items: usize) -> Result<Self> {
        let ids = Arc::new(IdSpace::numeric(profiles.len(), n_items));
        Self::with_ids(profiles, ids, 0)
    }

    fn with_ids(mut profiles: Vec<Vec<ItemId>>, ids: Arc<IdSpace>, dropped: usize) -> Result<Self> {
        if profiles.is_empty() {
            return Err(Error::NoUsers);
        }
        if profiles.len() != ids.users.len() {
            return Err(Error::format(
                "dataset",
                format!(
                    "{} profiles for {} user ids",
                    profiles.len(),
                    ids.users.len()
                ),
            ));
        }
        let n_items = ids.items.len();
        for (u, p) in profiles.iter_mut().enumerate() {
            p.sort_unstable();
            p.dedup();
            if p.is_empty() {
                return Err(Error::format(
                    "dataset",
                    format!("user {u} has an empty profile"),
                ));
            }
            if let Some(&last) = p.last() {
                if last as usize >= n_items {
                    return Err(Error::format(
                        "dataset",
                        format!("user {u} references item {last} >= {n_items}"),
                    ));
                }
            }
        }
        Ok(Dataset {
            profiles,
            ids,
            dropped_users: dropped,
        })
    }

    pub fn n_users(&self) -> usize {
        self.profiles.len()
    }

    pub fn n_items(&self) -> usize {
        self.ids.items.len()
    }

    /// Total number of (user, item) pairs.
    pub fn n_ratings(&self) -> usize {
        self.profiles.iter().map(Vec::len).sum()
    }

    pub fn profile(&self, user: UserId) -> &[ItemId] {
        &self.profiles[user as usize]
    }

    pub fn profiles(&self) -> &[Vec<ItemId>] {
        &self.profiles
    }

    /// Users dropped by filtering (low activity or empty after binarization).
    pub fn dropped_users(&self) -> usize {
        self.dropped_users
    }

    pub fn user_external(&self, user: UserId) -> &str {
        &self.ids.users[user as usize]
    }

    pub fn item_external(&self, item: ItemId) -> &str {
        &self.ids.items[item as usize]
    }

    pub fn user_internal(&self, external: &str) -> Option<UserId> {
        self.ids.user_index.get(external).copied()
    }

    pub fn item_internal(&self, external: &str) -> Option<ItemId> {
        self.ids.item_index.get(external).copied()
    }

    /// Same users and id space, new profiles. Used for training folds.
    fn derive(&self, profiles: Vec<Vec<ItemId>>) -> Result<Self> {
        Self::with_ids(profiles, Arc::clone(&self.ids), self.dropped_users)
    }

    /// Writes the canonical text snapshot.
    ///
    /// ```text
    /// c2knn-dataset 1
    /// users <n> items <m> ratings <r> dropped <d>
    /// <m lines: external item id, in internal id order>
    /// <n lines: external user id TAB space-separated internal item ids>
    /// ```
    pub fn write_snapshot(&self, mut w: impl Write) -> Result<()> {
        let io = |e| Error::io("<snapshot>", e);
        writeln!(w, "{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}").map_err(io)?;
        writeln!(
            w,
            "users {} items {} ratings {} dropped {}",
            self.n_users(),
            self.n_items(),
            self.n_ratings(),
            self.dropped_users
        )
        .map_err(io)?;
        for item in &self.ids.items {
            check_token(item)?;
            writeln!(w, "{item}").map_err(io)?;
        }
        for (u, profile) in self.profiles.iter().enumerate() {
            let user = &self.ids.users[u];
            check_token(user)?;
            write!(w, "{user}\t").map_err(io)?;
            for (j, item) in profile.iter().enumerate() {
                if j > 0 {
                    w.write_all(b" ").map_err(io)?;
                }
                write!(w, "{item}").map_err(io)?;
            }
            w.write_all(b"\n").map_err(io)?;
        }
        Ok(())
    }

    pub fn read_snapshot(r: impl BufRead) -> Result<Self> {
        let bad = |m: String| Error::format("dataset snapshot", m);
        let mut lines = r.lines();
        let mut next = |what: &str| -> Result<String> {
            match lines.next() {
                Some(Ok(l)) => Ok(l),
                Some(Err(e)) => Err(Error::io("<snapshot>", e)),
                None => Err(bad(format!("truncated before {what}"))),
            }
        };

        let header = next("header")?;
        let mut it = header.split_whitespace();
        if it.next() != Some(SNAPSHOT_MAGIC) {
            return Err(bad("missing magic".into()));
        }
        let version: u32 = it
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("missing version".into()))?;
        if version != SNAPSHOT_VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }

        let counts = next("counts")?;
        let fields: Vec<&str> = counts.split_whitespace().collect();
        let field = |name: &str| -> Result<usize> {
            fields
                .iter()
                .position(|f| *f == name)
                .and_then(|i| fields.get(i + 1))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad(format!("missing {name} count")))
        };
        let (n_users, n_items, dropped) = (field("users")?, field("items")?, field("dropped")?);

        let mut items = Vec::with_capacity(n_items);
        for _ in 0..n_items {
            items.push(next("item ids")?);
        }
        let mut users = Vec::with_capacity(n_users);
        let mut profiles = Vec::with_capacity(n_users);
        for _ in 0..n_users {
            let line = next("user profiles")?;
            let (user, rest) = line
                .split_once('\t')
                .ok_or_else(|| bad(format!("profile line without tab: {line:?}")))?;
            let profile = rest
                .split_whitespace()
                .map(|t| {
                    t.parse::<ItemId>()
                        .map_err(|_| bad(format!("bad item id {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            users.push(user.to_string());
            profiles.push(profile);
        }
        let ids = Arc::new(IdSpace::new(users, items)?);
        Self::with_ids(profiles, ids, dropped)
    }

    pub fn save_snapshot(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_snapshot(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_snapshot(BufReader::new(file))
    }

    /// Hex SHA-256 of the canonical snapshot bytes.
    pub fn fingerprint(&self) -> String {
        let mut buf = Vec::new();
        // Ids were validated when the dataset was built.
        let _ = self.write_snapshot(&mut buf);
        let digest = Sha256::digest(&buf);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn check_token(id: &str) -> Result<()> {
    if id.is_empty() || id.contains(['\t', '\n', '\r']) {
        return Err(Error::format(
            "dataset snapshot",
            format!("external id {id:?} cannot be written"),
        ));
    }
    Ok(())
}

/// Returns true when the file starts with the snapshot magic.
pub fn is_snapshot(path: impl AsRef<Path>) -> Result<bool> {
    let path = path.as_ref();
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut head = [0u8; SNAPSHOT_MAGIC.len()];
    match file.read_exact(&mut head) {
        Ok(()) => Ok(head == SNAPSHOT_MAGIC.as_bytes()),
        Err(_) => Ok(false),
    }
}

/// Keeps users with at least `min_profile` raw ratings, then keeps only
/// ratings strictly above `positive_threshold`.
///
/// Users and items get internal ids in order of first appearance; items
/// with no surviving positive rating are not part of the id space. Users
/// left with an empty profile are dropped.
pub fn binarize_and_filter(
    records: &[RatingRecord],
    positive_threshold: f64,
    min_profile: usize,
) -> Result<Dataset> {
    if min_profile == 0 {
        return Err(Error::InvalidParameter(
            "min_profile must be at least 1".into(),
        ));
    }
    if !positive_threshold.is_finite() {
        return Err(Error::InvalidParameter(
            "positive threshold must be finite".into(),
        ));
    }

    let mut raw_counts: HashMap<&str, usize> = HashMap::new();
    let mut user_order: Vec<&str> = Vec::new();
    for r in records {
        let c = raw_counts.entry(r.user.as_str()).or_insert_with(|| {
            user_order.push(r.user.as_str());
            0
        });
        *c += 1;
    }

    let mut item_ids: Vec<String> = Vec::new();
    let mut item_index: HashMap<&str, ItemId> = HashMap::new();
    let mut positives: HashMap<&str, Vec<ItemId>> = HashMap::new();
    for r in records {
        if raw_counts[r.user.as_str()] < min_profile || r.rating <= positive_threshold {
            continue;
        }
        let next_id = item_index.len() as ItemId;
        let item = *item_index.entry(r.item.as_str()).or_insert_with(|| {
            item_ids.push(r.item.clone());
            next_id
        });
        positives.entry(r.user.as_str()).or_default().push(item);
    }

    let mut users = Vec::new();
    let mut profiles = Vec::new();
    for user in &user_order {
        if let Some(p) = positives.remove(user) {
            users.push(user.to_string());
            profiles.push(p);
        }
    }
    if profiles.is_empty() {
        return Err(Error::NoUsers);
    }
    let dropped = user_order.len() - users.len();
    let ids = Arc::new(IdSpace::new(users, item_ids)?);
    Dataset::with_ids(profiles, ids, dropped)
}

/// One cross-validation fold: the training dataset and per-user held-out items.
#[derive(Debug, Clone)]
pub struct FoldSplit {
    pub fold_index: usize,
    pub fold_count: usize,
    pub train: Dataset,
    pub test: Vec<Vec<ItemId>>,
}

/// Splits every profile uniformly at random into `fold_count` parts; fold
/// `i` holds out part `i`. Profiles smaller than `fold_count` stay entirely
/// in training for every fold.
pub fn make_folds(ds: &Dataset, fold_count: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if fold_count < 2 {
        return Err(Error::InvalidParameter(format!(
            "fold count must be at least 2, got {fold_count}"
        )));
    }

    // parts[u][j] = items of user u assigned to part j
    let parts: Vec<Vec<Vec<ItemId>>> = ds
        .profiles
        .iter()
        .enumerate()
        .map(|(u, profile)| {
            if profile.len() < fold_count {
                return Vec::new();
            }
            let mut shuffled = profile.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, FOLD_NAMESPACE, u as u64));
            shuffled.shuffle(&mut rng);
            let mut user_parts = vec![Vec::new(); fold_count];
            for (j, item) in shuffled.into_iter().enumerate() {
                user_parts[j % fold_count].push(item);
            }
            for p in &mut user_parts {
                p.sort_unstable();
            }
            user_parts
        })
        .collect();

    (0..fold_count)
        .map(|f| {
            let mut train = Vec::with_capacity(ds.n_users());
            let mut test = Vec::with_capacity(ds.n_users());
            for (u, profile) in ds.profiles.iter().enumerate() {
                if parts[u].is_empty() {
                    train.push(profile.clone());
                    test.push(Vec::new());
                } else {
                    let held = &parts[u][f];
                    train.push(
                        profile
                            .iter()
                            .copied()
                            .filter(|i| held.binary_search(i).is_err())
                            .collect(),
                    );
                    test.push(held.clone());
                }
            }
            Ok(FoldSplit {
                fold_index: f,
                fold_count,
                train: ds.derive(train)?,
                test,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(user: &str, item: &str, rating: f64) -> RatingRecord {
        RatingRecord {
            user: user.into(),
            item: item.into(),
            rating,
            timestamp: None,
        }
    }

    #[test]
    fn parses_movielens_csv_line() {
        let recs = parse_ratings("1,31,2.5,1260759144\n".as_bytes(), InputFormat::Auto).unwrap();
        assert_eq!(
            recs,
            vec![RatingRecord {
                user: "1".into(),
                item: "31".into(),
                rating: 2.5,
                timestamp: Some(1260759144),
            }]
        );
    }

    #[test]
    fn detects_double_colon_and_tab() {
        let a = parse_ratings("1::1193::5::978300760\n".as_bytes(), InputFormat::Auto).unwrap();
        assert_eq!(a[0].item, "1193");
        assert_eq!(a[0].rating, 5.0);
        let b = parse_ratings("7\t9\t4\n".as_bytes(), InputFormat::Auto).unwrap();
        assert_eq!((b[0].user.as_str(), b[0].item.as_str()), ("7", "9"));
    }

    #[test]
    fn skips_header_line() {
        let text = "userId,movieId,rating,timestamp\n1,2,4.0,5\n";
        let recs = parse_ratings(text.as_bytes(), InputFormat::Csv).unwrap();
        assert_eq!(recs.len(), 1);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            parse_ratings("".as_bytes(), InputFormat::Auto),
            Err(Error::EmptyInput)
        ));
        assert!(matches!(
            parse_ratings("\n\n".as_bytes(), InputFormat::Auto),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn non_numeric_rating_reports_line() {
        let text = "1,2,4\n1,3,abc\n";
        match parse_ratings(text.as_bytes(), InputFormat::Csv) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn all_negative_ratings_leave_no_users() {
        let recs: Vec<_> = (0..30).map(|i| rec("u", &i.to_string(), 1.0)).collect();
        assert!(matches!(
            binarize_and_filter(&recs, 3.0, 1),
            Err(Error::NoUsers)
        ));
    }

    #[test]
    fn single_active_user_keeps_all_positive_items() {
        let recs: Vec<_> = (0..25).map(|i| rec("u", &i.to_string(), 5.0)).collect();
        let ds = binarize_and_filter(&recs, 3.0, 20).unwrap();
        assert_eq!(ds.n_users(), 1);
        assert_eq!(ds.profile(0).len(), 25);
    }

    #[test]
    fn activity_filter_counts_raw_ratings() {
        // "a" has 3 raw ratings but only one positive; min_profile counts all 3.
        let recs = vec![
            rec("a", "x", 5.0),
            rec("a", "y", 1.0),
            rec("a", "z", 2.0),
            rec("b", "x", 5.0),
            rec("c", "y", 1.0),
            rec("c", "x", 1.0),
            rec("c", "z", 1.0),
        ];
        let ds = binarize_and_filter(&recs, 3.0, 3).unwrap();
        assert_eq!(ds.n_users(), 1);
        assert_eq!(ds.user_external(0), "a");
        // only "x" was rated positively by a surviving user
        assert_eq!(ds.n_items(), 1);
        // b is too inactive, c has no positive rating
        assert_eq!(ds.dropped_users(), 2);
    }

    #[test]
    fn ids_follow_first_appearance() {
        let recs = vec![
            rec("u2", "i9", 4.0),
            rec("u1", "i3", 4.0),
            rec("u2", "i3", 5.0),
        ];
        let ds = binarize_and_filter(&recs, 3.0, 1).unwrap();
        assert_eq!(ds.user_internal("u2"), Some(0));
        assert_eq!(ds.user_internal("u1"), Some(1));
        assert_eq!(ds.item_internal("i9"), Some(0));
        assert_eq!(ds.item_internal("i3"), Some(1));
        assert_eq!(ds.profile(0), &[0, 1]);
    }

    #[test]
    fn duplicate_ratings_collapse() {
        let recs = vec![rec("u", "i", 4.0), rec("u", "i", 5.0)];
        let ds = binarize_and_filter(&recs, 3.0, 1).unwrap();
        assert_eq!(ds.profile(0), &[0]);
    }

    #[test]
    fn five_folds_over_five_items_hold_out_one_each() {
        let ds = Dataset::from_profiles(vec![vec![0, 1, 2, 3, 4]], 5).unwrap();
        let folds = make_folds(&ds, 5, 11).unwrap();
        let mut union: Vec<ItemId> = Vec::new();
        for f in &folds {
            assert_eq!(f.test[0].len(), 1);
            assert_eq!(f.train.profile(0).len(), 4);
            union.extend(&f.test[0]);
        }
        union.sort_unstable();
        assert_eq!(union, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn small_profiles_stay_in_training() {
        let ds = Dataset::from_profiles(vec![vec![0, 1, 2], vec![0, 1, 2, 3, 4, 5]], 6).unwrap();
        for f in make_folds(&ds, 5, 3).unwrap() {
            assert_eq!(f.train.profile(0), &[0, 1, 2]);
            assert!(f.test[0].is_empty());
        }
    }

    #[test]
    fn folds_are_deterministic() {
        let ds = Dataset::from_profiles(vec![(0..40).collect(), (5..30).collect()], 40).unwrap();
        let a = make_folds(&ds, 5, 99).unwrap();
        let b = make_folds(&ds, 5, 99).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.test, y.test);
            assert_eq!(x.train, y.train);
        }
    }

    #[test]
    fn fold_count_below_two_rejected() {
        let ds = Dataset::from_profiles(vec![vec![0]], 1).unwrap();
        assert!(make_folds(&ds, 1, 0).is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let recs = vec![
            rec("alice", "m1", 4.0),
            rec("bob", "m2", 5.0),
            rec("bob", "m1", 4.5),
        ];
        let ds = binarize_and_filter(&recs, 3.0, 1).unwrap();
        let mut buf = Vec::new();
        ds.write_snapshot(&mut buf).unwrap();
        let back = Dataset::read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.fingerprint(), ds.fingerprint());
    }

    #[test]
    fn rejects_out_of_range_items() {
        assert!(Dataset::from_profiles(vec![vec![3]], 3).is_err());
        assert!(Dataset::from_profiles(vec![vec![]], 3).is_err());
    }
}
