//! JSON mesh files.
//!
//! ```json
//! { "dim": 2, "ambient_dim": 3,
//!   "vertices": [[1.0000000000000000e0, ...], ...],
//!   "simplices": { "0": [[0], [1], ...], "1": [[0, 2], ...], "2": [...] },
//!   "orientations": { "0": [1, ...], "1": [...], "2": [1, -1, ...] } }
//! ```
//!
//! Coordinates are written with 17 significant digits, which round-trips f64.

use super::SimplicialComplex;
use crate::error::{Error, Result};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SimplexEntry {
    Bare(usize),
    Tuple(Vec<usize>),
}

/// Deserialized mesh file before validation.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshFile {
    dim: usize,
    ambient_dim: usize,
    vertices: Vec<Vec<f64>>,
    simplices: BTreeMap<String, Vec<SimplexEntry>>,
    orientations: BTreeMap<String, Vec<i8>>,
}

fn fmt_f64(out: &mut String, x: f64) {
    write!(out, "{x:.16e}").unwrap();
}

impl SimplicialComplex {
    pub fn to_json_string(&self) -> String {
        let mut s = String::new();
        write!(s, "{{\"dim\":{},\"ambient_dim\":{},\"vertices\":[", self.dim(), self.ambient_dim()).unwrap();
        for i in 0..self.vertex_count() {
            if i > 0 {
                s.push(',');
            }
            s.push('[');
            for (j, &x) in self.vertex(i).iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                fmt_f64(&mut s, x);
            }
            s.push(']');
        }
        s.push_str("],\"simplices\":{");
        for k in 0..=self.dim() {
            if k > 0 {
                s.push(',');
            }
            write!(s, "\"{k}\":[").unwrap();
            for i in 0..self.count(k) {
                if i > 0 {
                    s.push(',');
                }
                let tuple: Vec<String> = self.simplex(k, i).iter().map(|v| v.to_string()).collect();
                write!(s, "[{}]", tuple.join(",")).unwrap();
            }
            s.push(']');
        }
        s.push_str("},\"orientations\":{");
        for k in 0..=self.dim() {
            if k > 0 {
                s.push(',');
            }
            let signs: Vec<String> = self.orientations(k).iter().map(|o| o.to_string()).collect();
            write!(s, "\"{k}\":[{}]", signs.join(",")).unwrap();
        }
        s.push_str("}}\n");
        s
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: MeshFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        file.into_complex()
    }
}

impl MeshFile {
    pub fn into_complex(self) -> Result<SimplicialComplex> {
        let MeshFile { dim, ambient_dim, vertices, mut simplices, mut orientations } = self;
        let mut flat = Vec::with_capacity(vertices.len() * ambient_dim);
        for (i, v) in vertices.iter().enumerate() {
            if v.len() != ambient_dim {
                return Err(Error::validation(
                    "vertex-coordinates",
                    format!("vertices[{i}] has {} coordinates, expected {ambient_dim}", v.len()),
                ));
            }
            flat.extend_from_slice(v);
        }
        let mut lists = Vec::with_capacity(dim + 1);
        let mut signs = Vec::with_capacity(dim + 1);
        for k in 0..=dim {
            let key = k.to_string();
            let list = simplices
                .remove(&key)
                .ok_or_else(|| Error::validation("simplex-lists", format!("missing field simplices.\"{k}\"")))?;
            let list: Vec<Vec<usize>> = list
                .into_iter()
                .map(|e| match e {
                    SimplexEntry::Bare(v) => vec![v],
                    SimplexEntry::Tuple(t) => t,
                })
                .collect();
            lists.push(list);
            signs.push(
                orientations
                    .remove(&key)
                    .ok_or_else(|| Error::validation("simplex-lists", format!("missing field orientations.\"{k}\"")))?,
            );
        }
        if let Some(extra) = simplices.keys().chain(orientations.keys()).next() {
            return Err(Error::validation("simplex-lists", format!("unexpected degree key \"{extra}\"")));
        }
        SimplicialComplex::from_parts(dim, ambient_dim, flat, lists, signs)
    }
}

pub fn save_mesh(c: &SimplicialComplex, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, c.to_json_string()).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<SimplicialComplex> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    SimplicialComplex::from_json_str(&text)
}
