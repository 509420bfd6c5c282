use super::{determinant, orient_on_sphere, ComplexKind, SimplicialComplex, DEFAULT_SIMPLEX_CAP};
use crate::error::{Error, Result};
use std::collections::HashMap;

/// Sphere mesh S^d, d ∈ {2, 3}: boundary of the (d+1)-cross-polytope refined
/// `level` times by edge-midpoint subdivision with radial projection.
pub fn gen_sphere(d: usize, level: usize) -> Result<SimplicialComplex> {
    gen_sphere_with_cap(d, level, DEFAULT_SIMPLEX_CAP)
}

pub fn gen_sphere_with_cap(d: usize, level: usize, cap: usize) -> Result<SimplicialComplex> {
    if d != 2 && d != 3 {
        return Err(Error::parameter("d", format!("sphere dimension must be 2 or 3, got {d}")));
    }
    let seed_count = 1usize << (d + 1);
    let per_level = 1usize << d;
    let requested = (0..level).try_fold(seed_count, |acc, _| acc.checked_mul(per_level));
    match requested {
        Some(n) if n <= cap => {}
        _ => {
            return Err(Error::Resource {
                what: format!("gen_sphere({d}, {level})"),
                requested: requested.unwrap_or(usize::MAX),
                cap,
            })
        }
    }
    let amb = d + 1;
    // cross-polytope: vertex 2i is +e_i, 2i+1 is -e_i
    let mut coords = vec![0.0; 2 * amb * amb];
    for i in 0..amb {
        coords[(2 * i) * amb + i] = 1.0;
        coords[(2 * i + 1) * amb + i] = -1.0;
    }
    let mut tops: Vec<Vec<usize>> = (0..seed_count)
        .map(|mask| (0..amb).map(|i| 2 * i + ((mask >> i) & 1)).collect())
        .collect();
    for _ in 0..level {
        let (c, t) = subdivide(d, coords, &tops);
        coords = c;
        tops = t;
    }
    for t in &mut tops {
        orient_on_sphere(&coords, amb, t);
    }
    SimplicialComplex::from_oriented_top(d, amb, coords, &tops, Some(level))
}

fn normalize(v: &mut [f64]) {
    let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= r);
}

fn subdivide(d: usize, mut coords: Vec<f64>, tops: &[Vec<usize>]) -> (Vec<f64>, Vec<Vec<usize>>) {
    let amb = d + 1;
    let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, coords: &mut Vec<f64>| -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&m) = mids.get(&key) {
            return m;
        }
        let mut p: Vec<f64> = (0..amb).map(|i| coords[a * amb + i] + coords[b * amb + i]).collect();
        normalize(&mut p);
        let idx = coords.len() / amb;
        coords.extend_from_slice(&p);
        mids.insert(key, idx);
        idx
    };
    let mut out = Vec::with_capacity(tops.len() << d);
    for t in tops {
        if d == 2 {
            let (a, b, c) = (t[0], t[1], t[2]);
            let ab = midpoint(a, b, &mut coords);
            let bc = midpoint(b, c, &mut coords);
            let ac = midpoint(a, c, &mut coords);
            out.extend([vec![a, ab, ac], vec![b, bc, ab], vec![c, ac, bc], vec![ab, bc, ac]]);
        } else {
            let (a, b, c, e) = (t[0], t[1], t[2], t[3]);
            let ab = midpoint(a, b, &mut coords);
            let ac = midpoint(a, c, &mut coords);
            let ae = midpoint(a, e, &mut coords);
            let bc = midpoint(b, c, &mut coords);
            let be = midpoint(b, e, &mut coords);
            let ce = midpoint(c, e, &mut coords);
            out.extend([vec![a, ab, ac, ae], vec![b, ab, bc, be], vec![c, ac, bc, ce], vec![e, ae, be, ce]]);
            // inner octahedron split along its shortest diagonal; the remaining
            // four midpoints form a cycle around it
            let diagonals = [(ab, ce, [ac, ae, be, bc]), (ac, be, [ab, ae, ce, bc]), (ae, bc, [ab, ac, ce, be])];
            let len = |p: usize, q: usize| -> f64 {
                (0..amb).map(|i| (coords[p * amb + i] - coords[q * amb + i]).powi(2)).sum::<f64>()
            };
            let (x, y, ring) = diagonals
                .iter()
                .copied()
                .min_by(|u, v| len(u.0, u.1).partial_cmp(&len(v.0, v.1)).unwrap())
                .unwrap();
            for i in 0..4 {
                out.push(vec![x, y, ring[i], ring[(i + 1) % 4]]);
            }
        }
    }
    (coords, out)
}

/// Product complex base × [0,1] with `steps` uniform time steps.
///
/// Each prism σ × [t_j, t_{j+1}] over a base tetrahedron with sorted vertices
/// v_0 < v_1 < v_2 < v_3 is split into the four staircase simplices
/// (v_0^j, …, v_i^j, v_i^{j+1}, …, v_3^{j+1}); the global vertex order makes
/// shared prism faces match. Vertex (v, t_j) has index j·n + v.
pub fn gen_product_interval(base: &SimplicialComplex, steps: usize) -> Result<SimplicialComplex> {
    gen_product_interval_with_cap(base, steps, DEFAULT_SIMPLEX_CAP)
}

pub fn gen_product_interval_with_cap(
    base: &SimplicialComplex,
    steps: usize,
    cap: usize,
) -> Result<SimplicialComplex> {
    if base.kind() != ComplexKind::Sphere || base.dim() != 3 {
        return Err(Error::DomainMismatch {
            detail: "product base must be a mesh of S³".into(),
        });
    }
    if steps == 0 {
        return Err(Error::parameter("steps", "need at least one time step"));
    }
    let ntet = base.count(3);
    let requested = 4usize.saturating_mul(ntet).saturating_mul(steps);
    if requested > cap {
        return Err(Error::Resource {
            what: format!("gen_product_interval({ntet} tetrahedra, {steps} steps)"),
            requested,
            cap,
        });
    }
    let nv = base.vertex_count();
    let amb = 5;
    let mut coords = Vec::with_capacity((steps + 1) * nv * amb);
    for j in 0..=steps {
        let t = j as f64 / steps as f64;
        for v in 0..nv {
            coords.extend_from_slice(base.vertex(v));
            coords.push(t);
        }
    }
    let mut tops = Vec::with_capacity(requested);
    for j in 0..steps {
        for s in 0..ntet {
            let tet = base.simplex(3, s);
            for i in 0..4 {
                let mut simplex: Vec<usize> = Vec::with_capacity(5);
                simplex.extend(tet[..=i].iter().map(|&v| j * nv + v));
                simplex.extend(tet[i..].iter().map(|&v| (j + 1) * nv + v));
                orient_in_product(&coords, &mut simplex);
                tops.push(simplex);
            }
        }
    }
    SimplicialComplex::from_oriented_top(4, amb, coords, &tops, base.level())
}

/// Orients a 4-simplex of S³×I by the frame (∂_t, positive frame of S³),
/// which makes the induced boundary orientation +S³ at t = 1 and −S³ at t = 0.
fn orient_in_product(coords: &[f64], simplex: &mut [usize]) {
    let p = |v: usize| &coords[v * 5..v * 5 + 5];
    let mut n = vec![0.0; 5];
    for &v in simplex.iter() {
        for i in 0..4 {
            n[i] += p(v)[i];
        }
    }
    normalize(&mut n[..4]);
    let p0 = p(simplex[0]).to_vec();
    let mut cols = vec![n];
    for &v in &simplex[1..] {
        cols.push(p(v).iter().zip(&p0).map(|(a, b)| a - b).collect());
    }
    // det[N, ∂t, e1, e2, e3] = -1 for a positive frame, so positive simplices
    // have det[N, E1..E4] < 0
    if determinant(&cols) > 0.0 {
        simplex.swap(0, 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_polytope_counts() {
        let s2 = gen_sphere(2, 0).unwrap();
        assert_eq!(s2.counts(), vec![6, 12, 8]);
        assert_eq!(s2.euler_characteristic(), 2);
        let s3 = gen_sphere(3, 0).unwrap();
        assert_eq!(s3.counts(), vec![8, 24, 32, 16]);
        assert_eq!(s3.euler_characteristic(), 0);
    }

    #[test]
    fn triangle_count_grows_by_four() {
        for level in 0..4 {
            let c = gen_sphere(2, level).unwrap();
            assert_eq!(c.count(2), 8 * 4usize.pow(level as u32));
            assert_eq!(c.euler_characteristic(), 2);
        }
    }

    #[test]
    fn cap_is_enforced() {
        match gen_sphere_with_cap(3, 3, 1000) {
            Err(Error::Resource { cap, requested, .. }) => {
                assert_eq!(cap, 1000);
                assert_eq!(requested, 16 * 512);
            }
            other => panic!("expected resource error, got {other:?}"),
        }
        let base = gen_sphere(3, 1).unwrap();
        assert!(matches!(gen_product_interval_with_cap(&base, 4, 100), Err(Error::Resource { .. })));
    }

    #[test]
    fn bad_dimension_is_rejected() {
        assert!(gen_sphere(4, 0).is_err());
    }

    #[test]
    fn product_counts() {
        let base = gen_sphere(3, 1).unwrap();
        let p = gen_product_interval(&base, 3).unwrap();
        assert_eq!(p.count(4), 4 * base.count(3) * 3);
        assert_eq!(p.vertex_count(), 4 * base.vertex_count());
        assert_eq!(p.euler_characteristic(), 0);
    }
}
