use nalgebra::DMatrix;
use serde::Serialize;
use std::fmt;

/// Domain or codomain of a map, embedded in Euclidean space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Space {
    /// Unit sphere S^d ⊂ R^(d+1).
    Sphere(usize),
    /// Closed unit ball B^d ⊂ R^d.
    Ball(usize),
    Euclidean(usize),
    /// X × [0,1], points written (x, t).
    Product(Box<Space>),
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Sphere(d) => write!(f, "S^{d}"),
            Space::Ball(d) => write!(f, "B^{d}"),
            Space::Euclidean(d) => write!(f, "R^{d}"),
            Space::Product(b) => write!(f, "{b}×[0,1]"),
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Space {
    pub fn product(base: Space) -> Space {
        Space::Product(Box::new(base))
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Space::Sphere(d) => d + 1,
            Space::Ball(d) | Space::Euclidean(d) => *d,
            Space::Product(b) => b.ambient_dim() + 1,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Space::Sphere(d) | Space::Ball(d) | Space::Euclidean(d) => *d,
            Space::Product(b) => b.dim() + 1,
        }
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        if p.len() != self.ambient_dim() || p.iter().any(|x| !x.is_finite()) {
            return false;
        }
        match self {
            Space::Sphere(_) => (norm(p) - 1.0).abs() <= tol,
            Space::Ball(_) => norm(p) <= 1.0 + tol,
            Space::Euclidean(_) => true,
            Space::Product(b) => {
                let t = p[p.len() - 1];
                (-tol..=1.0 + tol).contains(&t) && b.contains(&p[..p.len() - 1], tol)
            }
        }
    }

    /// Whether every point of `self` lies in `other` (as carriers in the same R^D).
    pub fn is_subset_of(&self, other: &Space) -> bool {
        if self == other {
            return true;
        }
        match (self, other) {
            (a, Space::Euclidean(n)) => a.ambient_dim() == *n && !matches!(a, Space::Product(_)),
            (Space::Sphere(d), Space::Ball(n)) => d + 1 == *n,
            (Space::Product(a), Space::Product(b)) => a.is_subset_of(b),
            _ => false,
        }
    }

    /// Orthonormal tangent frame at p (ambient × dim).
    ///
    /// On spheres the standard basis vectors are orthogonalized against the
    /// position vector, taking the most aligned coordinate axis as the one to
    /// drop (ties go to the lower index); the last vector is flipped if needed
    /// so that det[p, frame] > 0. Product frames list the base frame, then ∂t.
    pub fn tangent_frame(&self, p: &[f64]) -> DMatrix<f64> {
        match self {
            Space::Ball(d) | Space::Euclidean(d) => DMatrix::identity(*d, *d),
            Space::Sphere(d) => sphere_frame(p, *d),
            Space::Product(b) => {
                let m = b.ambient_dim();
                let base = b.tangent_frame(&p[..m]);
                let mut f = DMatrix::zeros(m + 1, base.ncols() + 1);
                f.view_mut((0, 0), (m, base.ncols())).copy_from(&base);
                f[(m, base.ncols())] = 1.0;
                f
            }
        }
    }
}

fn sphere_frame(p: &[f64], d: usize) -> DMatrix<f64> {
    let amb = d + 1;
    let r = norm(p);
    let n: Vec<f64> = p.iter().map(|x| x / r).collect();
    let drop = (0..amb)
        .fold(0, |best, i| if n[i].abs() > n[best].abs() { i } else { best });
    let mut basis: Vec<Vec<f64>> = vec![n.clone()];
    for i in (0..amb).filter(|&i| i != drop) {
        let mut v = vec![0.0; amb];
        v[i] = 1.0;
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let l = norm(&v);
        v.iter_mut().for_each(|x| *x /= l);
        basis.push(v);
    }
    let mut full = DMatrix::from_fn(amb, amb, |i, j| basis[j][i]);
    if full.determinant() < 0.0 {
        for i in 0..amb {
            full[(i, amb - 1)] = -full[(i, amb - 1)];
        }
    }
    full.columns(1, d).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_frames_are_orthonormal_and_positive() {
        for p in [[1.0, 0.0, 0.0, 0.0], [0.5, -0.5, 0.5, 0.5], [0.0, 0.6, 0.0, -0.8]] {
            let f = Space::Sphere(3).tangent_frame(&p);
            let g = f.transpose() * &f;
            assert!((g - DMatrix::<f64>::identity(3, 3)).norm() < 1e-14);
            for j in 0..3 {
                let dot: f64 = (0..4).map(|i| f[(i, j)] * p[i]).sum();
                assert!(dot.abs() < 1e-14);
            }
            let mut m = DMatrix::zeros(4, 4);
            m.column_mut(0).copy_from_slice(&p);
            m.columns_mut(1, 3).copy_from(&f);
            assert!(m.determinant() > 0.0);
        }
    }

    #[test]
    fn subsets() {
        assert!(Space::Sphere(2).is_subset_of(&Space::Euclidean(3)));
        assert!(Space::Sphere(2).is_subset_of(&Space::Ball(3)));
        assert!(!Space::Sphere(3).is_subset_of(&Space::Sphere(2)));
        assert!(Space::Ball(3).is_subset_of(&Space::Euclidean(3)));
    }
}
