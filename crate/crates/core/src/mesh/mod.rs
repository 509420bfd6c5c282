//! Oriented simplicial complexes of S², S³ and S³×[0,1].
//!
//! Every k-simplex is stored as a strictly increasing vertex tuple; the lists
//! are kept in lexicographic order so lookups are binary searches and the
//! layout is canonical. Each simplex carries an orientation sign relative to
//! its sorted tuple. Generated complexes give lower-dimensional simplices the
//! sign +1 and top simplices their geometric orientation, but loaded files may
//! use any signs and the boundary operator honours them.

mod generate;
mod io;

pub use generate::{gen_product_interval, gen_product_interval_with_cap, gen_sphere, gen_sphere_with_cap};
pub use io::{load_mesh, save_mesh, MeshFile};

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use sha2::{Digest, Sha256};
use std::sync::OnceLock;

/// Default cap on the number of top simplices a generator may produce.
pub const DEFAULT_SIMPLEX_CAP: usize = 2_000_000;

const UNIT_TOL: f64 = 1e-12;

/// What the complex discretizes; inferred from `(dim, ambient_dim)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComplexKind {
    /// Unit sphere S^dim in R^(dim+1), dim ∈ {2, 3}.
    Sphere,
    /// S³ × [0,1] embedded as (sphere point, t) in R⁵.
    Product,
}

#[derive(Clone, Debug)]
pub struct SimplicialComplex {
    dim: usize,
    ambient_dim: usize,
    kind: ComplexKind,
    vertices: Vec<f64>,
    simplices: Vec<Vec<usize>>,
    orientations: Vec<Vec<i8>>,
    /// faces[k][s*(k+1) + i] is the (k-1)-simplex obtained by dropping vertex i.
    faces: Vec<Vec<usize>>,
    level: Option<usize>,
    checksum: String,
    /// subfaces[k]: for each top simplex, the indices of its k-faces in local subset order.
    subfaces: Vec<OnceLock<Vec<usize>>>,
}

impl PartialEq for SimplicialComplex {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.ambient_dim == other.ambient_dim
            && self.vertices.len() == other.vertices.len()
            && self
                .vertices
                .iter()
                .zip(&other.vertices)
                .all(|(a, b)| a.to_bits() == b.to_bits())
            && self.simplices == other.simplices
            && self.orientations == other.orientations
    }
}

/// One boundary component of a product complex, as a complex of S³.
#[derive(Clone, Debug)]
pub struct Slice {
    pub t: f64,
    pub complex: SimplicialComplex,
    /// Slice vertex index → product vertex index (increasing).
    pub vertex_map: Vec<usize>,
}

fn infer_kind(dim: usize, ambient_dim: usize) -> Result<ComplexKind> {
    match (dim, ambient_dim) {
        (2, 3) | (3, 4) => Ok(ComplexKind::Sphere),
        (4, 5) => Ok(ComplexKind::Product),
        _ => Err(Error::validation(
            "dimensions",
            format!("unsupported (dim, ambient_dim) = ({dim}, {ambient_dim}); expected (2,3), (3,4) or (4,5)"),
        )),
    }
}

/// Sign of a permutation that sorts `tuple`, together with the sorted tuple.
fn sort_with_parity(tuple: &[usize]) -> (Vec<usize>, i8) {
    let mut v = tuple.to_vec();
    let mut sign = 1i8;
    // insertion sort, counting transpositions
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    (v, sign)
}

pub(crate) fn determinant(cols: &[Vec<f64>]) -> f64 {
    let n = cols.len();
    let m = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
    m.determinant()
}

impl SimplicialComplex {
    /// Builds a complex from oriented top simplices; every face is enumerated.
    ///
    /// The orientation of each top simplex is the one given by its tuple order.
    pub fn from_oriented_top(
        dim: usize,
        ambient_dim: usize,
        vertices: Vec<f64>,
        tops: &[Vec<usize>],
        level: Option<usize>,
    ) -> Result<Self> {
        let nv = vertices.len() / ambient_dim;
        let mut simplices: Vec<Vec<Vec<usize>>> = vec![Vec::new(); dim + 1];
        let mut top_sorted = Vec::with_capacity(tops.len());
        for t in tops {
            if t.len() != dim + 1 {
                return Err(Error::validation(
                    "simplex-size",
                    format!("top simplex {t:?} does not have {} vertices", dim + 1),
                ));
            }
            if let Some(&bad) = t.iter().find(|&&v| v >= nv) {
                return Err(Error::validation(
                    "index-range",
                    format!("top simplex {t:?} references vertex {bad}, but there are only {nv} vertices"),
                ));
            }
            let (s, sign) = sort_with_parity(t);
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::validation("distinct-vertices", format!("top simplex {t:?} repeats a vertex")));
            }
            top_sorted.push((s, sign));
        }
        top_sorted.sort();
        for w in top_sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::validation("unique-simplices", format!("duplicate top simplex {:?}", w[0].0)));
            }
        }
        // enumerate faces of every dimension
        let mut current: Vec<Vec<usize>> = top_sorted.iter().map(|(s, _)| s.clone()).collect();
        simplices[dim] = current.clone();
        for k in (0..dim).rev() {
            let mut next: Vec<Vec<usize>> = Vec::with_capacity(current.len() * (k + 2));
            for s in &current {
                for skip in 0..s.len() {
                    let mut f = s.clone();
                    f.remove(skip);
                    next.push(f);
                }
            }
            next.sort_unstable();
            next.dedup();
            simplices[k] = next.clone();
            current = next;
        }
        // all vertices must be used, so the 0-simplices are exactly 0..nv
        if simplices[0].len() != nv {
            return Err(Error::validation(
                "vertex-list",
                format!("{} vertices given but only {} used by simplices", nv, simplices[0].len()),
            ));
        }
        let mut orientations: Vec<Vec<i8>> = simplices.iter().map(|l| vec![1i8; l.len()]).collect();
        orientations[dim] = top_sorted.iter().map(|(_, s)| *s).collect();
        let flat: Vec<Vec<usize>> = simplices.into_iter().map(|l| l.into_iter().flatten().collect()).collect();
        Self::assemble(dim, ambient_dim, vertices, flat, orientations, level)
    }

    /// Builds and fully validates a complex from raw lists (as read from a file).
    ///
    /// Simplex lists may come in any order; they are canonicalized, with
    /// orientation signs carried along.
    pub fn from_parts(
        dim: usize,
        ambient_dim: usize,
        vertices: Vec<f64>,
        simplices: Vec<Vec<Vec<usize>>>,
        orientations: Vec<Vec<i8>>,
    ) -> Result<Self> {
        infer_kind(dim, ambient_dim)?;
        if vertices.len() % ambient_dim != 0 {
            return Err(Error::validation("vertex-coordinates", "coordinate count is not a multiple of ambient_dim"));
        }
        let nv = vertices.len() / ambient_dim;
        if simplices.len() != dim + 1 || orientations.len() != dim + 1 {
            return Err(Error::validation(
                "simplex-lists",
                format!("expected simplex and orientation lists for degrees 0..={dim}"),
            ));
        }
        let mut flat = Vec::with_capacity(dim + 1);
        let mut orients = Vec::with_capacity(dim + 1);
        for (k, (list, signs)) in simplices.into_iter().zip(orientations).enumerate() {
            if list.len() != signs.len() {
                return Err(Error::validation(
                    "orientation-count",
                    format!("degree {k}: {} simplices but {} orientation signs", list.len(), signs.len()),
                ));
            }
            let mut pairs = Vec::with_capacity(list.len());
            for (s, o) in list.into_iter().zip(signs) {
                if s.len() != k + 1 {
                    return Err(Error::validation("simplex-size", format!("{k}-simplex {s:?} has {} vertices", s.len())));
                }
                if let Some(&bad) = s.iter().find(|&&v| v >= nv) {
                    return Err(Error::validation(
                        "index-range",
                        format!("{k}-simplex {s:?} references vertex {bad}, but there are only {nv} vertices"),
                    ));
                }
                if o != 1 && o != -1 {
                    return Err(Error::validation("orientation-sign", format!("{k}-simplex {s:?} has sign {o}")));
                }
                let (sorted, parity) = sort_with_parity(&s);
                if sorted.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::validation("distinct-vertices", format!("{k}-simplex {s:?} repeats a vertex")));
                }
                pairs.push((sorted, o * parity));
            }
            pairs.sort();
            if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::validation("unique-simplices", format!("duplicate {k}-simplex {:?}", w[0].0)));
            }
            orients.push(pairs.iter().map(|p| p.1).collect::<Vec<_>>());
            flat.push(pairs.into_iter().flat_map(|p| p.0).collect::<Vec<_>>());
        }
        if flat[0].len() != nv || flat[0].iter().enumerate().any(|(i, &v)| i != v) {
            return Err(Error::validation("vertex-list", "0-simplices must be exactly [0], [1], ..., [n-1]"));
        }
        Self::assemble(dim, ambient_dim, vertices, flat, orients, None)
    }

    fn assemble(
        dim: usize,
        ambient_dim: usize,
        vertices: Vec<f64>,
        simplices: Vec<Vec<usize>>,
        orientations: Vec<Vec<i8>>,
        level: Option<usize>,
    ) -> Result<Self> {
        let kind = infer_kind(dim, ambient_dim)?;
        let mut c = SimplicialComplex {
            dim,
            ambient_dim,
            kind,
            vertices,
            simplices,
            orientations,
            faces: vec![Vec::new(); dim + 1],
            level,
            checksum: String::new(),
            subfaces: (0..=dim).map(|_| OnceLock::new()).collect(),
        };
        for k in 1..=dim {
            let n = c.count(k);
            let mut faces = Vec::with_capacity(n * (k + 1));
            for s in 0..n {
                let tuple = c.simplex(k, s).to_vec();
                for skip in 0..=k {
                    let mut f = tuple.clone();
                    f.remove(skip);
                    match c.find(k - 1, &f) {
                        Some(i) => faces.push(i),
                        None => {
                            return Err(Error::validation(
                                "face-closure",
                                format!("face {f:?} of {k}-simplex {tuple:?} is missing"),
                            ))
                        }
                    }
                }
            }
            c.faces[k] = faces;
        }
        c.validate()?;
        c.checksum = c.compute_checksum();
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        let dim = self.dim;
        // chain complex: ∂_{k-1} ∘ ∂_k = 0, in integers
        for k in 2..=dim {
            let mut acc: std::collections::BTreeMap<usize, i64> = Default::default();
            for s in 0..self.count(k) {
                acc.clear();
                for (f, sf) in self.boundary(k, s) {
                    for (g, sg) in self.boundary(k - 1, f) {
                        *acc.entry(g).or_insert(0) += (sf * sg) as i64;
                    }
                }
                if let Some((g, v)) = acc.iter().find(|(_, v)| **v != 0) {
                    return Err(Error::validation(
                        "chain-complex",
                        format!(
                            "boundary of boundary of {k}-simplex {:?} has coefficient {v} on {:?}",
                            self.simplex(k, s),
                            self.simplex(k - 2, *g)
                        ),
                    ));
                }
            }
        }
        // purity: every lower simplex lies in some higher one
        for k in 0..dim {
            let mut used = vec![false; self.count(k)];
            for s in 0..self.count(k + 1) {
                for &f in self.face_indices(k + 1, s) {
                    used[f] = true;
                }
            }
            if let Some(i) = used.iter().position(|u| !u) {
                return Err(Error::validation(
                    "pure-complex",
                    format!("{k}-simplex {:?} is not a face of any {}-simplex", self.simplex(k, i), k + 1),
                ));
            }
        }
        // manifold and orientation compatibility on codimension-one faces
        let nf = self.count(dim - 1);
        let mut incidence = vec![0i32; nf];
        let mut signed = vec![0i32; nf];
        for s in 0..self.count(dim) {
            for (f, sign) in self.boundary(dim, s) {
                incidence[f] += 1;
                signed[f] += sign as i32;
            }
        }
        for f in 0..nf {
            let n = incidence[f];
            let closed = self.kind == ComplexKind::Sphere;
            if n > 2 || n == 0 || (closed && n != 2) {
                return Err(Error::validation(
                    "manifold",
                    format!(
                        "({})-face {:?} belongs to {n} top simplices",
                        dim - 1,
                        self.simplex(dim - 1, f)
                    ),
                ));
            }
            if n == 2 && signed[f] != 0 {
                return Err(Error::validation(
                    "orientation-compatibility",
                    format!(
                        "adjacent top simplices induce the same orientation on shared face {:?}",
                        self.simplex(dim - 1, f)
                    ),
                ));
            }
        }
        // geometry
        for i in 0..self.vertex_count() {
            let v = self.vertex(i);
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::validation("finite-coordinates", format!("vertex {i} has non-finite coordinates")));
            }
            let spatial = match self.kind {
                ComplexKind::Sphere => v,
                ComplexKind::Product => {
                    let t = v[self.ambient_dim - 1];
                    if !(-UNIT_TOL..=1.0 + UNIT_TOL).contains(&t) {
                        return Err(Error::validation("time-range", format!("vertex {i} has t = {t}")));
                    }
                    &v[..self.ambient_dim - 1]
                }
            };
            let r = spatial.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (r - 1.0).abs() > UNIT_TOL {
                return Err(Error::validation("unit-sphere", format!("vertex {i} has |v| = {r:.15}")));
            }
        }
        if self.kind == ComplexKind::Product {
            for f in 0..nf {
                if incidence[f] == 1 {
                    let ts: Vec<f64> = self.simplex(dim - 1, f).iter().map(|&v| self.time_of(v)).collect();
                    let at = |t: f64| ts.iter().all(|x| (x - t).abs() <= UNIT_TOL);
                    if !(at(0.0) || at(1.0)) {
                        return Err(Error::validation(
                            "product-boundary",
                            format!("boundary face {:?} is not in the t=0 or t=1 slice", self.simplex(dim - 1, f)),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn compute_checksum(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.dim as u64).to_le_bytes());
        h.update((self.ambient_dim as u64).to_le_bytes());
        for x in &self.vertices {
            h.update(x.to_le_bytes());
        }
        for (list, signs) in self.simplices.iter().zip(&self.orientations) {
            h.update((list.len() as u64).to_le_bytes());
            for &v in list {
                h.update((v as u64).to_le_bytes());
            }
            for &s in signs {
                h.update([s as u8]);
            }
        }
        hex::encode(h.finalize())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn kind(&self) -> ComplexKind {
        self.kind
    }

    /// Subdivision level for generated sphere meshes (and the base level of products).
    pub fn level(&self) -> Option<usize> {
        self.level
    }

    /// SHA-256 of the canonical binary layout; identifies the complex in cochain files.
    pub fn checksum(&self) -> &str {
        &self.checksum
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len() / self.ambient_dim
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.vertices[i * self.ambient_dim..(i + 1) * self.ambient_dim]
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices[k].len() / (k + 1)
    }

    pub fn counts(&self) -> Vec<usize> {
        (0..=self.dim).map(|k| self.count(k)).collect()
    }

    /// Sorted vertex tuple of the `s`-th k-simplex.
    pub fn simplex(&self, k: usize, s: usize) -> &[usize] {
        &self.simplices[k][s * (k + 1)..(s + 1) * (k + 1)]
    }

    pub fn orientation(&self, k: usize, s: usize) -> i8 {
        self.orientations[k][s]
    }

    pub(crate) fn orientations(&self, k: usize) -> &[i8] {
        &self.orientations[k]
    }

    /// Indices of the faces of a k-simplex; entry i omits vertex i.
    pub fn face_indices(&self, k: usize, s: usize) -> &[usize] {
        &self.faces[k][s * (k + 1)..(s + 1) * (k + 1)]
    }

    /// Signed boundary of an oriented k-simplex as (face index, ±1) pairs.
    pub fn boundary(&self, k: usize, s: usize) -> impl Iterator<Item = (usize, i8)> + '_ {
        let os = self.orientations[k][s];
        self.face_indices(k, s).iter().enumerate().map(move |(i, &f)| {
            let alt = if i % 2 == 0 { 1 } else { -1 };
            (f, alt * os * self.orientations[k - 1][f])
        })
    }

    /// For every top simplex, the indices of its k-faces, listed in the order
    /// of increasing local vertex subsets (C(dim+1, k+1) entries per simplex).
    pub fn top_subfaces(&self, k: usize) -> &[usize] {
        self.subfaces[k].get_or_init(|| {
            let n = self.dim;
            let masks = crate::forms::exterior::subset_masks(n + 1, k + 1);
            let mut out = Vec::with_capacity(self.count(n) * masks.len());
            let mut tuple = Vec::with_capacity(k + 1);
            for s in 0..self.count(n) {
                let verts = self.simplex(n, s);
                for &m in masks {
                    tuple.clear();
                    tuple.extend(crate::forms::exterior::mask_indices(m).map(|i| verts[i]));
                    out.push(self.find(k, &tuple).expect("face closure was validated"));
                }
            }
            out
        })
    }

    /// Binary search for a sorted vertex tuple among the k-simplices.
    pub fn find(&self, k: usize, tuple: &[usize]) -> Option<usize> {
        let n = self.count(k);
        let (mut lo, mut hi) = (0usize, n);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.simplex(k, mid).cmp(tuple) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.dim)
            .map(|k| if k % 2 == 0 { self.count(k) as i64 } else { -(self.count(k) as i64) })
            .sum()
    }

    pub fn is_closed(&self) -> bool {
        self.kind == ComplexKind::Sphere
    }

    fn time_of(&self, v: usize) -> f64 {
        self.vertex(v)[self.ambient_dim - 1]
    }

    /// Edge vectors `P_i - P_0` (columns) of a k-simplex in ambient coordinates.
    pub fn edge_matrix(&self, k: usize, s: usize) -> DMatrix<f64> {
        let verts = self.simplex(k, s);
        let p0 = self.vertex(verts[0]);
        DMatrix::from_fn(self.ambient_dim, k, |i, j| self.vertex(verts[j + 1])[i] - p0[i])
    }

    /// Unsigned k-volume of a flat simplex.
    pub fn volume(&self, k: usize, s: usize) -> f64 {
        if k == 0 {
            return 1.0;
        }
        let e = self.edge_matrix(k, s);
        let g = e.transpose() * &e;
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        g.determinant().max(0.0).sqrt() / fact
    }

    pub fn volumes(&self, k: usize) -> Vec<f64> {
        (0..self.count(k)).map(|s| self.volume(k, s)).collect()
    }

    pub fn max_edge_length(&self) -> f64 {
        (0..self.count(1)).map(|e| self.volume(1, e)).fold(0.0, f64::max)
    }

    /// Point of the smooth manifold carried by the ambient point `x`:
    /// radial projection for spheres, (x/|x|, t) for products.
    pub fn carrier_point(&self, x: &[f64]) -> Vec<f64> {
        let m = self.spatial_dim();
        let r = x[..m].iter().map(|a| a * a).sum::<f64>().sqrt();
        let mut p: Vec<f64> = x.iter().map(|a| a / r).collect();
        if self.kind == ComplexKind::Product {
            p[m] = x[m];
        }
        p
    }

    /// Jacobian of [`Self::carrier_point`] at `x` (ambient × ambient).
    pub fn carrier_jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let m = self.spatial_dim();
        let r = x[..m].iter().map(|a| a * a).sum::<f64>().sqrt();
        let mut j = DMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for a in 0..m {
            for b in 0..m {
                let delta = if a == b { 1.0 } else { 0.0 };
                j[(a, b)] = (delta - x[a] * x[b] / (r * r)) / r;
            }
        }
        if self.kind == ComplexKind::Product {
            j[(m, m)] = 1.0;
        }
        j
    }

    fn spatial_dim(&self) -> usize {
        match self.kind {
            ComplexKind::Sphere => self.ambient_dim,
            ComplexKind::Product => self.ambient_dim - 1,
        }
    }

    /// Codimension-one faces lying on exactly one top simplex.
    pub fn boundary_faces(&self) -> Vec<usize> {
        let mut incidence = vec![0u8; self.count(self.dim - 1)];
        for s in 0..self.count(self.dim) {
            for &f in self.face_indices(self.dim, s) {
                incidence[f] += 1;
            }
        }
        incidence.iter().enumerate().filter(|(_, &n)| n == 1).map(|(f, _)| f).collect()
    }

    /// The t = 0 and t = 1 boundary components of a product complex, each as
    /// an oriented complex of S³ with the sphere's standard orientation.
    pub fn boundary_slices(&self) -> Result<(Slice, Slice)> {
        if self.kind != ComplexKind::Product {
            return Err(Error::DomainMismatch {
                detail: "boundary slices exist only for product complexes".into(),
            });
        }
        let faces = self.boundary_faces();
        let build = |t: f64| -> Result<Slice> {
            let mine: Vec<&[usize]> = faces
                .iter()
                .map(|&f| self.simplex(self.dim - 1, f))
                .filter(|s| s.iter().all(|&v| (self.time_of(v) - t).abs() <= UNIT_TOL))
                .collect();
            let mut verts: Vec<usize> = mine.iter().flat_map(|s| s.iter().copied()).collect();
            verts.sort_unstable();
            verts.dedup();
            let m = self.ambient_dim - 1;
            let coords: Vec<f64> = verts.iter().flat_map(|&v| self.vertex(v)[..m].to_vec()).collect();
            let local = |v: usize| verts.binary_search(&v).expect("slice vertex");
            let tops: Vec<Vec<usize>> = mine
                .iter()
                .map(|s| {
                    let mut tup: Vec<usize> = s.iter().map(|&v| local(v)).collect();
                    orient_on_sphere(&coords, m, &mut tup);
                    tup
                })
                .collect();
            let complex = SimplicialComplex::from_oriented_top(m - 1, m, coords, &tops, self.level)?;
            Ok(Slice { t, complex, vertex_map: verts })
        };
        Ok((build(0.0)?, build(1.0)?))
    }
}

/// Reorders a top simplex of a sphere mesh so that det[v_0, ..., v_d] > 0,
/// i.e. outward normal first.
pub(crate) fn orient_on_sphere(coords: &[f64], ambient: usize, tuple: &mut [usize]) {
    let cols: Vec<Vec<f64>> = tuple.iter().map(|&v| coords[v * ambient..(v + 1) * ambient].to_vec()).collect();
    if determinant(&cols) < 0.0 {
        tuple.swap(0, 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_of_sorting() {
        assert_eq!(sort_with_parity(&[0, 1, 2]), (vec![0, 1, 2], 1));
        assert_eq!(sort_with_parity(&[1, 0, 2]), (vec![0, 1, 2], -1));
        assert_eq!(sort_with_parity(&[2, 0, 1]), (vec![0, 1, 2], 1));
    }

    #[test]
    fn carrier_jacobian_matches_differences() {
        let c = gen_sphere(3, 0).unwrap();
        let x = [0.3, -0.2, 0.5, 0.4];
        let j = c.carrier_jacobian(&x);
        let h = 1e-6;
        for b in 0..4 {
            let mut xp = x;
            let mut xm = x;
            xp[b] += h;
            xm[b] -= h;
            let (p, m) = (c.carrier_point(&xp), c.carrier_point(&xm));
            for a in 0..4 {
                assert!(((p[a] - m[a]) / (2.0 * h) - j[(a, b)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn boundary_signs_of_a_triangle() {
        let c = gen_sphere(2, 0).unwrap();
        let s = 0;
        let b: Vec<(usize, i8)> = c.boundary(2, s).collect();
        assert_eq!(b.len(), 3);
        let o = c.orientation(2, s);
        assert_eq!(b[0].1, o);
        assert_eq!(b[1].1, -o);
        assert_eq!(b[2].1, o);
    }
}
