//! Quadrature rules on simplices in barycentric coordinates.
//!
//! Weights are normalized to sum to 1, so a rule computes the average of a
//! function over the simplex; multiply by the volume to integrate.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexRule {
    dim: usize,
    order: usize,
    /// Barycentric coordinates, dim+1 per point.
    points: Vec<f64>,
    weights: Vec<f64>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// All compositions of `total` into `parts` nonnegative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in (0..=total).rev() {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl SimplexRule {
    /// A rule exact for polynomials of degree `order` (at least) on the n-simplex.
    ///
    /// Order 0 or 1 is the centroid rule, order 2 the symmetric (n+1)-point
    /// rule, higher orders use Grundmann–Möller rules.
    pub fn new(n: usize, order: usize) -> Result<Self> {
        if n > 5 {
            return Err(Error::parameter("dim", format!("quadrature on {n}-simplices is not supported")));
        }
        if order > 15 {
            return Err(Error::parameter("order", format!("quadrature order {order} exceeds the supported maximum 15")));
        }
        Ok(match order {
            0 | 1 => Self::centroid(n),
            2 => Self::symmetric2(n),
            _ => Self::grundmann_moller(n, (order - 1).div_ceil(2)),
        })
    }

    pub fn centroid(n: usize) -> Self {
        SimplexRule {
            dim: n,
            order: 1,
            points: vec![1.0 / (n + 1) as f64; n + 1],
            weights: vec![1.0],
        }
    }

    /// Degree-2 rule with the n+1 points a·e_i + b·(1 − e_i).
    pub fn symmetric2(n: usize) -> Self {
        if n == 0 {
            return Self::centroid(0);
        }
        let nf = n as f64;
        let b = (nf + 2.0 - (nf + 2.0).sqrt()) / ((nf + 1.0) * (nf + 2.0));
        let a = 1.0 - nf * b;
        let mut points = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..=n {
            for j in 0..=n {
                points.push(if i == j { a } else { b });
            }
        }
        SimplexRule { dim: n, order: 2, points, weights: vec![1.0 / (nf + 1.0); n + 1] }
    }

    /// Grundmann–Möller rule of degree 2s+1.
    pub fn grundmann_moller(n: usize, s: usize) -> Self {
        let d = 2 * s + 1;
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for i in 0..=s {
            let denom = (d + n - 2 * i) as f64;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            // weight relative to the simplex volume 1/n!
            let w = sign * 2f64.powi(-2 * s as i32) * denom.powi(d as i32) * factorial(n)
                / (factorial(i) * factorial(d + n - i));
            for beta in compositions(s - i, n + 1) {
                points.extend(beta.iter().map(|&b| (2 * b + 1) as f64 / denom));
                weights.push(w);
            }
        }
        SimplexRule { dim: n, order: d, points, weights }
    }

    /// Applies this rule on each piece of the Freudenthal subdivision of the
    /// simplex into m^n congruent pieces.
    pub fn composite(&self, m: usize) -> Self {
        let n = self.dim;
        if m <= 1 || n == 0 {
            return self.clone();
        }
        let scale = 1.0 / (m.pow(n as u32) as f64);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for piece in freudenthal_pieces(n, m) {
            // piece: n+1 vertices in y-coordinates (scaled by 1/m)
            for (q, &w) in self.weights.iter().enumerate() {
                let lam = &self.points[q * (n + 1)..(q + 1) * (n + 1)];
                let mut y = vec![0.0; n];
                for (v, &l) in piece.iter().zip(lam) {
                    for i in 0..n {
                        y[i] += l * v[i] as f64 / m as f64;
                    }
                }
                points.push(1.0 - y[0]);
                for i in 0..n {
                    let next = if i + 1 < n { y[i + 1] } else { 0.0 };
                    points.push(y[i] - next);
                }
                weights.push(w * scale);
            }
        }
        SimplexRule { dim: n, order: self.order, points, weights }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Polynomial degree integrated exactly.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, q: usize) -> &[f64] {
        &self.points[q * (self.dim + 1)..(q + 1) * (self.dim + 1)]
    }

    /// Iterator over (barycentric point, weight).
    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        (0..self.len()).map(move |q| (self.point(q), self.weights[q]))
    }
}

/// Kuhn simplices of the grid {m ≥ y_1 ≥ … ≥ y_n ≥ 0}, as integer vertex lists.
fn freudenthal_pieces(n: usize, m: usize) -> Vec<Vec<Vec<usize>>> {
    let perms = permutations(n);
    let mut out = Vec::new();
    let mut base = vec![0usize; n];
    loop {
        for p in &perms {
            let mut verts = vec![base.clone()];
            let mut cur = base.clone();
            for &axis in p {
                cur[axis] += 1;
                verts.push(cur.clone());
            }
            let inside = verts
                .iter()
                .all(|v| v[0] <= m && v.windows(2).all(|w| w[0] >= w[1]));
            if inside {
                out.push(verts);
            }
        }
        // next base point in {0..m-1}^n
        let mut i = 0;
        while i < n {
            base[i] += 1;
            if base[i] < m {
                break;
            }
            base[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Average of λ^α over the simplex: n! α! / (n + |α|)!.
    fn monomial_mean(n: usize, alpha: &[usize]) -> f64 {
        let total: usize = alpha.iter().sum();
        factorial(n) * alpha.iter().map(|&a| factorial(a)).product::<f64>() / factorial(n + total)
    }

    fn apply(rule: &SimplexRule, alpha: &[usize]) -> f64 {
        rule.iter()
            .map(|(p, w)| w * p.iter().zip(alpha).map(|(x, &a)| x.powi(a as i32)).product::<f64>())
            .sum()
    }

    fn check_exact(rule: &SimplexRule, degree: usize) {
        let n = rule.dim();
        for total in 0..=degree {
            for alpha in compositions(total, n + 1) {
                let got = apply(rule, &alpha);
                let want = monomial_mean(n, &alpha);
                assert!((got - want).abs() < 1e-13, "n={n} α={alpha:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn weights_sum_to_one_and_points_are_barycentric() {
        for n in 0..=4 {
            for order in 0..=7 {
                let r = SimplexRule::new(n, order).unwrap();
                assert!((r.weights().iter().sum::<f64>() - 1.0).abs() < 1e-13);
                for (p, _) in r.iter() {
                    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-14);
                    assert!(p.iter().all(|&x| x >= -1e-15));
                }
            }
        }
    }

    #[test]
    fn stated_degree_is_exact() {
        for n in 1..=4 {
            for order in 1..=7 {
                let r = SimplexRule::new(n, order).unwrap();
                assert!(r.order() >= order);
                check_exact(&r, order);
            }
        }
    }

    #[test]
    fn symmetric_rule_has_n_plus_one_points() {
        assert_eq!(SimplexRule::new(2, 2).unwrap().len(), 3);
        assert_eq!(SimplexRule::new(3, 2).unwrap().len(), 4);
        assert_eq!(SimplexRule::new(4, 2).unwrap().len(), 5);
    }

    #[test]
    fn composite_rule_counts_and_exactness() {
        for n in 1..=4 {
            for m in 1..=3 {
                assert_eq!(freudenthal_pieces(n, m).len(), m.pow(n as u32));
                let r = SimplexRule::new(n, 2).unwrap().composite(m);
                check_exact(&r, 2);
            }
        }
    }

    #[test]
    fn composite_converges_on_a_non_polynomial() {
        // mean of exp(λ_0) on the triangle: 2(e − 2)
        let exact = 2.0 * (std::f64::consts::E - 2.0);
        let err = |m| {
            let r = SimplexRule::new(2, 2).unwrap().composite(m);
            (r.iter().map(|(p, w)| w * p[0].exp()).sum::<f64>() - exact).abs()
        };
        assert!(err(4) < err(2) / 4.0);
    }
}
