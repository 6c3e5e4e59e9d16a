//! Graph file formats.
//!
//! Text: one line per user, `user<TAB>nbr:sim,nbr:sim,...` with external
//! ids and six-decimal similarities, users in internal id order.
//!
//! Binary, little-endian: magic `C2KG`, `u32` version, `u32` k, `u32` row
//! count, then per row `u32` user, `u32` length and `length` pairs of
//! `u32` neighbor and `f64` similarity, all with internal ids.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::knn::{KnnGraph, Neighbor};

const MAGIC: &[u8; 4] = b"C2KG";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Text,
    Binary,
}

impl GraphFormat {
    /// Binary for `.bin`/`.c2kg` extensions, text otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin" | "c2kg") => GraphFormat::Binary,
            _ => GraphFormat::Text,
        }
    }
}

pub fn write_graph_text(g: &KnnGraph, ds: &Dataset, mut w: impl Write) -> std::io::Result<()> {
    for (u, row) in g.iter() {
        write!(w, "{}\t", ds.user_external(u))?;
        for (i, n) in row.iter().enumerate() {
            if i > 0 {
                w.write_all(b",")?;
            }
            write!(w, "{}:{:.6}", ds.user_external(n.id), n.sim)?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Parses the text format back into a graph over all of `ds`'s users.
/// Similarities carry the six-decimal rounding of the file.
pub fn read_graph_text(r: impl BufRead, ds: &Dataset, k: usize) -> Result<KnnGraph> {
    let mut rows: Vec<Option<Vec<Neighbor>>> = vec![None; ds.n_users()];
    let lookup = |tok: &str, line: usize| {
        ds.user_internal(tok).ok_or_else(|| Error::Parse {
            line,
            message: format!("unknown user {tok:?}"),
        })
    };
    for (idx, line) in r.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io("<graph>", e))?;
        if line.is_empty() {
            continue;
        }
        let (user, rest) = line.split_once('\t').ok_or(Error::Parse {
            line: lineno,
            message: "missing tab".into(),
        })?;
        let u = lookup(user, lineno)?;
        let mut row = Vec::new();
        for entry in rest.split(',').filter(|s| !s.is_empty()) {
            let (v, sim) = entry.rsplit_once(':').ok_or(Error::Parse {
                line: lineno,
                message: format!("bad entry {entry:?}"),
            })?;
            let sim: f64 = sim.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("bad similarity {sim:?}"),
            })?;
            row.push(Neighbor::new(lookup(v, lineno)?, sim));
        }
        if row.len() > k {
            return Err(Error::Parse {
                line: lineno,
                message: format!("{} neighbors exceed k={k}", row.len()),
            });
        }
        if rows[u as usize].replace(row).is_some() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("user {user:?} listed twice"),
            });
        }
    }
    Ok(KnnGraph::full(
        k,
        rows.into_iter().map(Option::unwrap_or_default).collect(),
    ))
}

pub fn write_graph_binary(g: &KnnGraph, mut w: impl Write) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(g.k() as u32).to_le_bytes())?;
    w.write_all(&(g.n_rows() as u32).to_le_bytes())?;
    for (u, row) in g.iter() {
        w.write_all(&u.to_le_bytes())?;
        w.write_all(&(row.len() as u32).to_le_bytes())?;
        for n in row {
            w.write_all(&n.id.to_le_bytes())?;
            w.write_all(&n.sim.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)
        .map_err(|_| Error::format("binary graph", "truncated"))?;
    Ok(b)
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    read_array(r).map(u32::from_le_bytes)
}

pub fn read_graph_binary(mut r: impl Read) -> Result<KnnGraph> {
    let bad = |m: String| Error::format("binary graph", m);
    if &read_array::<4>(&mut r)? != MAGIC {
        return Err(bad("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let k = read_u32(&mut r)? as usize;
    let n = read_u32(&mut r)? as usize;
    let mut users = Vec::with_capacity(n.min(1 << 20));
    let mut rows = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        users.push(read_u32(&mut r)?);
        let len = read_u32(&mut r)? as usize;
        if len > k {
            return Err(bad("row longer than k".into()));
        }
        let mut row = Vec::with_capacity(len);
        for _ in 0..len {
            let id = read_u32(&mut r)?;
            row.push(Neighbor::new(id, f64::from_le_bytes(read_array(&mut r)?)));
        }
        rows.push(row);
    }
    KnnGraph::from_rows(k, users, rows)
}

/// Writes `g` to `path` in the format implied by its extension.
pub fn save_graph(g: &KnnGraph, ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    match GraphFormat::from_path(path) {
        GraphFormat::Text => write_graph_text(g, ds, &mut w),
        GraphFormat::Binary => write_graph_binary(g, &mut w),
    }
    .and_then(|_| w.flush())
    .map_err(|e| Error::io(path, e))
}

pub fn load_graph(ds: &Dataset, k: usize, path: impl AsRef<Path>) -> Result<KnnGraph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match GraphFormat::from_path(path) {
        GraphFormat::Text => read_graph_text(BufReader::new(file), ds, k),
        GraphFormat::Binary => read_graph_binary(BufReader::new(file)),
    }
}
