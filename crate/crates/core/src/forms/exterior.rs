//! Alternating k-forms on R^n in the basis dx^I, I increasing.
//!
//! Coefficients are stored for increasing multi-indices in lexicographic
//! order. Evaluation uses the determinant convention
//! (dx^1 ∧ dx^2)(u, v) = u_1 v_2 − u_2 v_1.

use nalgebra::DMatrix;
use std::sync::OnceLock;

/// Largest dimension with precomputed index tables.
pub const MAX_DIM: usize = 6;

struct Tables {
    /// subsets[n][k]: increasing k-subsets of 0..n as bitmasks, lexicographic.
    subsets: Vec<Vec<Vec<u32>>>,
    /// position[n][mask]: index of the subset within subsets[n][popcount].
    position: Vec<Vec<usize>>,
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let mut subsets = Vec::new();
        let mut position = Vec::new();
        for n in 0..=MAX_DIM {
            let mut by_k: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n + 1];
            for mask in 0u32..(1 << n) {
                let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                by_k[idx.len()].push(idx);
            }
            let mut masks = Vec::new();
            let mut pos = vec![usize::MAX; 1 << n];
            for list in by_k.iter_mut() {
                list.sort();
                let m: Vec<u32> = list.iter().map(|s| s.iter().map(|i| 1u32 << i).sum()).collect();
                for (p, &mk) in m.iter().enumerate() {
                    pos[mk as usize] = p;
                }
                masks.push(m);
            }
            subsets.push(masks);
            position.push(pos);
        }
        Tables { subsets, position }
    })
}

/// Increasing k-subsets of 0..n as bitmasks, in coefficient order.
pub fn subset_masks(n: usize, k: usize) -> &'static [u32] {
    &tables().subsets[n][k]
}

pub fn subset_position(n: usize, mask: u32) -> usize {
    tables().position[n][mask as usize]
}

pub fn mask_indices(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask & (1 << i) != 0)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Sign of the shuffle placing `a` before `b` (disjoint masks).
fn shuffle_sign(a: u32, b: u32) -> f64 {
    let mut inversions = 0u32;
    for i in mask_indices(a) {
        inversions += (b & ((1u32 << i) - 1)).count_ones();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Determinant of a small k×k matrix given row-major, by elimination with partial pivoting.
pub fn small_det(m: &mut [f64], k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        _ => {
            let mut det = 1.0;
            for c in 0..k {
                let p = (c..k)
                    .max_by(|&a, &b| m[a * k + c].abs().partial_cmp(&m[b * k + c].abs()).unwrap())
                    .unwrap();
                if m[p * k + c] == 0.0 {
                    return 0.0;
                }
                if p != c {
                    for j in 0..k {
                        m.swap(p * k + j, c * k + j);
                    }
                    det = -det;
                }
                let piv = m[c * k + c];
                det *= piv;
                for r in c + 1..k {
                    let f = m[r * k + c] / piv;
                    for j in c..k {
                        m[r * k + j] -= f * m[c * k + j];
                    }
                }
            }
            det
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AltForm {
    dim: usize,
    degree: usize,
    coeffs: Vec<f64>,
}

impl AltForm {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(dim <= MAX_DIM && degree <= dim, "form of degree {degree} on R^{dim}");
        AltForm { dim, degree, coeffs: vec![0.0; binomial(dim, degree)] }
    }

    pub fn from_coeffs(dim: usize, degree: usize, coeffs: Vec<f64>) -> Self {
        assert!(dim <= MAX_DIM && degree <= dim);
        assert_eq!(coeffs.len(), binomial(dim, degree), "coefficient count");
        AltForm { dim, degree, coeffs }
    }

    pub fn scalar(v: f64) -> Self {
        AltForm { dim: 0, degree: 0, coeffs: vec![v] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    /// Coefficient of dx^I for the increasing index list I.
    pub fn coefficient(&self, indices: &[usize]) -> f64 {
        let mask: u32 = indices.iter().map(|i| 1u32 << i).sum();
        self.coeffs[subset_position(self.dim, mask)]
    }

    /// Coefficient of the top-degree form dx^0 ∧ … ∧ dx^{n-1}.
    pub fn top(&self) -> f64 {
        debug_assert_eq!(self.degree, self.dim);
        self.coeffs[0]
    }

    pub fn scale(&mut self, t: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= t);
    }

    pub fn scaled(mut self, t: f64) -> Self {
        self.scale(t);
        self
    }

    pub fn add_scaled(&mut self, t: f64, other: &AltForm) {
        debug_assert_eq!((self.dim, self.degree), (other.dim, other.degree));
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += t * b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// ω(v_1, …, v_k).
    pub fn apply(&self, vectors: &[&[f64]]) -> f64 {
        assert_eq!(vectors.len(), self.degree);
        let k = self.degree;
        let mut buf = [0.0; MAX_DIM * MAX_DIM];
        let mut total = 0.0;
        for (&mask, &a) in subset_masks(self.dim, k).iter().zip(&self.coeffs) {
            if a == 0.0 {
                continue;
            }
            for (r, i) in mask_indices(mask).enumerate() {
                for (c, v) in vectors.iter().enumerate() {
                    buf[r * k + c] = v[i];
                }
            }
            total += a * small_det(&mut buf[..k * k], k);
        }
        total
    }

    /// Pullback A*ω under a linear map A: R^m → R^dim (A is dim × m):
    /// (A*ω)(u_1, …, u_k) = ω(A u_1, …, A u_k).
    pub fn pullback(&self, a: &DMatrix<f64>) -> AltForm {
        assert_eq!(a.nrows(), self.dim, "pullback matrix rows");
        let m = a.ncols();
        let k = self.degree;
        let mut out = AltForm::zero(m, k);
        if k == 0 {
            out.coeffs[0] = self.coeffs[0];
            return out;
        }
        let mut buf = [0.0; MAX_DIM * MAX_DIM];
        for (jpos, &jmask) in subset_masks(m, k).iter().enumerate() {
            let mut acc = 0.0;
            for (&imask, &coef) in subset_masks(self.dim, k).iter().zip(&self.coeffs) {
                if coef == 0.0 {
                    continue;
                }
                for (r, i) in mask_indices(imask).enumerate() {
                    for (c, j) in mask_indices(jmask).enumerate() {
                        buf[r * k + c] = a[(i, j)];
                    }
                }
                acc += coef * small_det(&mut buf[..k * k], k);
            }
            out.coeffs[jpos] = acc;
        }
        out
    }

    pub fn wedge(&self, other: &AltForm) -> AltForm {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = AltForm::zero(n, self.degree + other.degree);
        if self.degree + other.degree > n {
            return out;
        }
        for (&a, &x) in subset_masks(n, self.degree).iter().zip(&self.coeffs) {
            if x == 0.0 {
                continue;
            }
            for (&b, &y) in subset_masks(n, other.degree).iter().zip(&other.coeffs) {
                if a & b != 0 || y == 0.0 {
                    continue;
                }
                out.coeffs[subset_position(n, a | b)] += shuffle_sign(a, b) * x * y;
            }
        }
        out
    }

    /// Top coefficient of self ∧ other when the degrees add up to the dimension.
    pub fn wedge_top(&self, other: &AltForm) -> f64 {
        let n = self.dim;
        debug_assert_eq!(self.degree + other.degree, n);
        let full = (1u32 << n) - 1;
        let mut acc = 0.0;
        for (&a, &x) in subset_masks(n, self.degree).iter().zip(&self.coeffs) {
            let b = full & !a;
            acc += shuffle_sign(a, b) * x * other.coeffs[subset_position(n, b)];
        }
        acc
    }

    /// Hodge star for the standard (orthonormal) metric and orientation.
    pub fn hodge_star(&self) -> AltForm {
        let n = self.dim;
        let full = (1u32 << n) - 1;
        let mut out = AltForm::zero(n, n - self.degree);
        for (&a, &x) in subset_masks(n, self.degree).iter().zip(&self.coeffs) {
            let b = full & !a;
            out.coeffs[subset_position(n, b)] = shuffle_sign(a, b) * x;
        }
        out
    }

    /// Full antisymmetric coefficient array T[i_1, …, i_k] (row-major, dim^k entries)
    /// with ω(v_1..v_k) = Σ T[i] v_1[i_1]⋯v_k[i_k].
    pub fn to_full(&self) -> Vec<f64> {
        let (n, k) = (self.dim, self.degree);
        let size = n.pow(k as u32);
        let mut out = vec![0.0; size];
        if k == 0 {
            out[0] = self.coeffs[0];
            return out;
        }
        let mut idx = vec![0usize; k];
        for flat in 0..size {
            let mut rem = flat;
            for slot in (0..k).rev() {
                idx[slot] = rem % n;
                rem /= n;
            }
            let mask: u32 = idx.iter().map(|i| 1u32 << i).fold(0, |m, b| m | b);
            if mask.count_ones() as usize != k {
                continue;
            }
            // sign of the permutation sorting idx
            let mut inv = 0;
            for a in 0..k {
                for b in a + 1..k {
                    if idx[a] > idx[b] {
                        inv += 1;
                    }
                }
            }
            let s = if inv % 2 == 0 { 1.0 } else { -1.0 };
            out[flat] = s * self.coeffs[subset_position(n, mask)];
        }
        out
    }

    /// Euclidean norm of the coefficient vector (the pointwise mass-norm in orthonormal coordinates).
    pub fn euclidean_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Comass: sup of ω(e_1, …, e_k) over orthonormal k-frames, assuming the
    /// coordinates are orthonormal.
    ///
    /// Exact in every case that occurs for n ≤ 5: degrees 0, 1, n−1 and n
    /// reduce to absolute values or Euclidean norms, degree 2 is the largest
    /// singular value of the antisymmetric coefficient matrix, and degree
    /// n−2 is handled through the Hodge star. Other cases fall back to the
    /// mass norm, which is an upper bound.
    pub fn comass(&self) -> f64 {
        let (n, k) = (self.dim, self.degree);
        if k == 0 || k == n {
            return self.coeffs[0].abs();
        }
        if k == 1 || k + 1 == n {
            return self.euclidean_norm();
        }
        if k == 2 {
            let mut m = DMatrix::zeros(n, n);
            for (&mask, &c) in subset_masks(n, 2).iter().zip(&self.coeffs) {
                let mut it = mask_indices(mask);
                let (i, j) = (it.next().unwrap(), it.next().unwrap());
                m[(i, j)] = c;
                m[(j, i)] = -c;
            }
            return m.singular_values().max();
        }
        if k + 2 == n {
            return self.hodge_star().comass();
        }
        self.euclidean_norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_convention() {
        let w = AltForm::from_coeffs(3, 2, vec![1.0, 0.0, 0.0]); // dx0 ∧ dx1
        assert_eq!(w.apply(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]), 1.0);
        assert_eq!(w.apply(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0]]), -1.0);
    }

    #[test]
    fn wedge_of_covectors() {
        let dx = AltForm::from_coeffs(3, 1, vec![1.0, 0.0, 0.0]);
        let dy = AltForm::from_coeffs(3, 1, vec![0.0, 1.0, 0.0]);
        let dz = AltForm::from_coeffs(3, 1, vec![0.0, 0.0, 1.0]);
        assert_eq!(dx.wedge(&dy).coefficient(&[0, 1]), 1.0);
        assert_eq!(dy.wedge(&dx).coefficient(&[0, 1]), -1.0);
        let vol = dz.wedge(&dx).wedge(&dy);
        assert_eq!(vol.top(), 1.0);
        assert_eq!(dz.wedge_top(&dx.wedge(&dy)), 1.0);
        assert!(dx.wedge(&dx).is_zero());
    }

    #[test]
    fn hodge_star_is_an_isometry_up_to_sign() {
        let w = AltForm::from_coeffs(4, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let ss = w.hodge_star().hodge_star();
        for (a, b) in ss.coeffs().iter().zip(w.coeffs()) {
            assert!((a - b).abs() < 1e-15); // ** = (-1)^{k(n-k)} = +1
        }
    }

    #[test]
    fn pullback_by_identity_and_scaling() {
        let w = AltForm::from_coeffs(3, 2, vec![0.3, -1.0, 2.0]);
        let id = DMatrix::identity(3, 3);
        assert_eq!(w.pullback(&id), w);
        let twice = DMatrix::identity(3, 3) * 2.0;
        let p = w.pullback(&twice);
        for (a, b) in p.coeffs().iter().zip(w.coeffs()) {
            assert!((a - 4.0 * b).abs() < 1e-15);
        }
    }

    #[test]
    fn comass_of_decomposable_and_sum() {
        // e1∧e2 + e3∧e4 has comass 1 (mass norm √2)
        let w = AltForm::from_coeffs(4, 2, vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((w.comass() - 1.0).abs() < 1e-12);
        assert!((w.euclidean_norm() - 2f64.sqrt()).abs() < 1e-12);
        let v = AltForm::from_coeffs(3, 1, vec![3.0, 4.0, 0.0]);
        assert!((v.comass() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn full_tensor_is_antisymmetric() {
        let w = AltForm::from_coeffs(3, 2, vec![0.3, -1.0, 2.0]);
        let t = w.to_full();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(t[i * 3 + j], -t[j * 3 + i]);
            }
        }
        assert_eq!(t[1], 0.3);
        assert_eq!(t[3 + 2], 2.0);
    }

    #[test]
    fn big_determinant() {
        let mut m = vec![
            2.0, 0.0, 0.0, 0.0, 1.0, //
            0.0, 3.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, 1.0,
        ];
        assert!((small_det(&mut m, 5) - 6.0).abs() < 1e-14);
    }
}
