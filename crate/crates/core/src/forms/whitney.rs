//! Whitney interpolation on a single n-simplex.
//!
//! Forms on a simplex with vertices P_0..P_n are expressed in the basis dual
//! to the edge vectors E_i = P_i − P_0. In that basis dλ_i = e^{i−1} for
//! i ≥ 1 and dλ_0 = −Σ e^i, so the Whitney forms do not depend on geometry.
//! The metric enters only through [`SimplexGeometry`].

use super::exterior::{mask_indices, subset_masks, AltForm};
use crate::error::{Error, Result};
use crate::mesh::SimplicialComplex;
use nalgebra::DMatrix;
use std::sync::OnceLock;

/// Whitney basis forms of degree k on the n-simplex, for every local k-face.
pub struct WhitneyTable {
    pub n: usize,
    pub k: usize,
    /// Local faces as bitmasks over vertices 0..=n, in the order used by
    /// [`SimplicialComplex::top_subfaces`].
    pub faces: Vec<u32>,
    /// For face I: W_I(λ) = Σ_m λ_m · terms[I][m].
    pub terms: Vec<Vec<AltForm>>,
}

fn d_lambda(n: usize, m: usize) -> AltForm {
    let mut c = vec![0.0; n];
    if m == 0 {
        c.iter_mut().for_each(|x| *x = -1.0);
    } else {
        c[m - 1] = 1.0;
    }
    AltForm::from_coeffs(n, 1, c)
}

impl WhitneyTable {
    fn build(n: usize, k: usize) -> Self {
        let faces = subset_masks(n + 1, k + 1).to_vec();
        let kfact: f64 = (1..=k).map(|i| i as f64).product();
        let mut terms = Vec::with_capacity(faces.len());
        for &mask in &faces {
            let verts: Vec<usize> = mask_indices(mask).collect();
            let mut per_vertex = vec![AltForm::zero(n, k); n + 1];
            for (j, &m) in verts.iter().enumerate() {
                let mut w = AltForm::from_coeffs(n, 0, vec![1.0]);
                for (l, &v) in verts.iter().enumerate() {
                    if l != j {
                        w = w.wedge(&d_lambda(n, v));
                    }
                }
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                per_vertex[m].add_scaled(sign * kfact, &w);
            }
            terms.push(per_vertex);
        }
        WhitneyTable { n, k, faces, terms }
    }

    /// Cached table for the n-simplex, n ≤ 4.
    pub fn get(n: usize, k: usize) -> &'static WhitneyTable {
        static TABLES: OnceLock<Vec<Vec<WhitneyTable>>> = OnceLock::new();
        let all = TABLES.get_or_init(|| (0..=4).map(|n| (0..=n).map(|k| WhitneyTable::build(n, k)).collect()).collect());
        &all[n][k]
    }

    /// Coefficients A_m of the affine form Σ_I v_I W_I = Σ_m λ_m A_m.
    pub fn vertex_forms(&self, local_values: &[f64]) -> Vec<AltForm> {
        let mut out = vec![AltForm::zero(self.n, self.k); self.n + 1];
        for (terms, &v) in self.terms.iter().zip(local_values) {
            if v == 0.0 {
                continue;
            }
            for (acc, t) in out.iter_mut().zip(terms) {
                acc.add_scaled(v, t);
            }
        }
        out
    }
}

/// Evaluates the affine form Σ_m λ_m A_m.
pub fn at_barycentric(vertex_forms: &[AltForm], lambda: &[f64]) -> AltForm {
    let mut out = vertex_forms[0].clone().scaled(lambda[0]);
    for (a, &l) in vertex_forms.iter().zip(lambda).skip(1) {
        out.add_scaled(l, a);
    }
    out
}

/// Metric data of a flat simplex.
#[derive(Clone, Debug)]
pub struct SimplexGeometry {
    /// Edge vectors as columns (ambient × n).
    pub edges: DMatrix<f64>,
    /// R⁻¹ where E = QR, so edge-basis forms become orthonormal-basis forms
    /// by pulling back through R⁻¹.
    pub r_inv: DMatrix<f64>,
    /// Unsigned n-volume.
    pub volume: f64,
}

impl SimplexGeometry {
    pub fn new(c: &SimplicialComplex, k: usize, s: usize) -> Result<Self> {
        let edges = c.edge_matrix(k, s);
        let g = edges.transpose() * &edges;
        let chol = nalgebra::Cholesky::new(g).ok_or_else(|| {
            Error::validation("nondegenerate-simplex", format!("{k}-simplex {:?} is degenerate", c.simplex(k, s)))
        })?;
        let r = chol.l().transpose();
        let det_r: f64 = r.diagonal().iter().product();
        let r_inv = r.try_inverse().expect("triangular factor of a positive definite matrix");
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        Ok(SimplexGeometry { edges, r_inv, volume: det_r / fact })
    }

    /// Edge-basis form → orthonormal tangent-frame form.
    pub fn to_orthonormal(&self, f: &AltForm) -> AltForm {
        f.pullback(&self.r_inv)
    }

    /// Orthonormal tangent frame Q = E R⁻¹ (ambient × n), positively oriented
    /// relative to the sorted vertex order.
    pub fn frame(&self) -> DMatrix<f64> {
        &self.edges * &self.r_inv
    }

    /// Ambient point at barycentric coordinates λ given the first vertex.
    pub fn point(&self, p0: &[f64], lambda: &[f64]) -> Vec<f64> {
        let mut x = p0.to_vec();
        for (j, &l) in lambda.iter().enumerate().skip(1) {
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += l * self.edges[(i, j - 1)];
            }
        }
        x
    }
}

/// A form on the tangent space of a simplex in an orthonormal frame.
#[derive(Clone, Debug)]
pub struct TangentForm {
    /// Orthonormal frame vectors as columns, in ambient coordinates.
    pub frame: DMatrix<f64>,
    pub form: AltForm,
}

impl TangentForm {
    /// Value on ambient tangent vectors (projected onto the frame).
    pub fn apply_ambient(&self, vectors: &[&[f64]]) -> f64 {
        let coords: Vec<Vec<f64>> = vectors
            .iter()
            .map(|v| {
                (0..self.frame.ncols())
                    .map(|j| (0..self.frame.nrows()).map(|i| self.frame[(i, j)] * v[i]).sum())
                    .collect()
            })
            .collect();
        let refs: Vec<&[f64]> = coords.iter().map(|v| v.as_slice()).collect();
        self.form.apply(&refs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_whitney_form_is_constant() {
        for n in 1..=4 {
            let t = WhitneyTable::get(n, n);
            let fact: f64 = (1..=n).map(|i| i as f64).product();
            let a = t.vertex_forms(&[1.0]);
            let w = at_barycentric(&a, &vec![1.0 / (n + 1) as f64; n + 1]);
            assert!((w.top() - fact).abs() < 1e-12);
            for m in 0..=n {
                assert!((a[m].top() - fact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn whitney_zero_forms_are_barycentrics() {
        let t = WhitneyTable::get(3, 0);
        let a = t.vertex_forms(&[1.0, 2.0, 3.0, 4.0]);
        let w = at_barycentric(&a, &[0.1, 0.2, 0.3, 0.4]);
        assert!((w.coeffs()[0] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn edge_duality_on_a_triangle() {
        // W_{ij} integrated along edge j-i has value 1, others 0
        let t = WhitneyTable::get(2, 1);
        let vertices = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        for (f, &mask) in t.faces.iter().enumerate() {
            let mut vals = vec![0.0; 3];
            vals[f] = 1.0;
            let a = t.vertex_forms(&vals);
            for &other in &t.faces {
                let ends: Vec<usize> = mask_indices(other).collect();
                let (i, j) = (ends[0], ends[1]);
                // midpoint rule is exact: the form is affine along the edge
                let mut lam = vec![0.0; 3];
                lam[i] = 0.5;
                lam[j] = 0.5;
                let w = at_barycentric(&a, &lam);
                let dir = [vertices[j][0] - vertices[i][0], vertices[j][1] - vertices[i][1]];
                let got = w.apply(&[&dir]);
                let want = if other == mask { 1.0 } else { 0.0 };
                assert!((got - want).abs() < 1e-14, "face {mask:b} on edge {other:b}: {got}");
            }
        }
    }
}
