//! Low-discrepancy points on spheres, balls, cubes and products.

use crate::maps::Space;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::TAU;

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

/// Number of unit-cube coordinates needed to parametrize a space.
pub fn parameter_count(space: &Space) -> usize {
    space.dim()
}

/// Halton points in [0,1)^dim with a random (Cranley–Patterson) shift.
pub fn shifted_halton(count: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    assert!(dim <= PRIMES.len());
    let shift: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
    (1..=count as u64)
        .map(|i| (0..dim).map(|j| (radical_inverse(i, PRIMES[j]) + shift[j]).fract()).collect())
        .collect()
}

fn sphere_point(d: usize, u: &[f64]) -> Vec<f64> {
    match d {
        1 => vec![(TAU * u[0]).cos(), (TAU * u[0]).sin()],
        2 => {
            let z = 1.0 - 2.0 * u[0];
            let rho = (1.0 - z * z).max(0.0).sqrt();
            vec![rho * (TAU * u[1]).cos(), rho * (TAU * u[1]).sin(), z]
        }
        3 => {
            let (a, b) = ((1.0 - u[0]).sqrt(), u[0].sqrt());
            vec![a * (TAU * u[1]).sin(), a * (TAU * u[1]).cos(), b * (TAU * u[2]).sin(), b * (TAU * u[2]).cos()]
        }
        _ => panic!("sphere sampling implemented for S¹, S², S³"),
    }
}

/// Maps unit-cube parameters to a point of the space, uniformly with respect to volume.
pub fn map_to_space(space: &Space, u: &[f64]) -> Vec<f64> {
    match space {
        Space::Sphere(d) => sphere_point(*d, u),
        Space::Ball(d) => {
            let radius = u[0].powf(1.0 / *d as f64);
            let dir = sphere_point(d - 1, &u[1..]);
            dir.into_iter().map(|v| radius * v).collect()
        }
        // the cube [−1, 1]^d
        Space::Euclidean(_) => u.iter().map(|v| 2.0 * v - 1.0).collect(),
        Space::Product(b) => {
            let mut p = map_to_space(b, &u[..u.len() - 1]);
            p.push(u[u.len() - 1]);
            p
        }
    }
}

/// Moves an ambient point back into the space.
pub fn project_to_space(space: &Space, x: &mut [f64]) {
    match space {
        Space::Sphere(_) => {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= r);
        }
        Space::Ball(_) => {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r > 1.0 {
                x.iter_mut().for_each(|v| *v /= r);
            }
        }
        Space::Euclidean(_) => x.iter_mut().for_each(|v| *v = v.clamp(-1.0, 1.0)),
        Space::Product(b) => {
            let n = x.len();
            project_to_space(b, &mut x[..n - 1]);
            x[n - 1] = x[n - 1].clamp(0.0, 1.0);
        }
    }
}

pub fn base_points(space: &Space, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    shifted_halton(count, parameter_count(space), rng)
        .iter()
        .map(|u| map_to_space(space, u))
        .collect()
}

/// Gaussian perturbations of `center` with standard deviation `sigma`, projected into the space.
pub fn jitter(space: &Space, center: &[f64], sigma: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let mut x: Vec<f64> = center
                .iter()
                .map(|c| {
                    let g: f64 = StandardNormal.sample(rng);
                    c + sigma * g
                })
                .collect();
            project_to_space(space, &mut x);
            x
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn points_lie_in_their_spaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for space in [
            Space::Sphere(2),
            Space::Sphere(3),
            Space::Ball(3),
            Space::Ball(4),
            Space::Euclidean(3),
            Space::product(Space::Sphere(3)),
        ] {
            for p in base_points(&space, 500, &mut rng) {
                assert!(space.contains(&p, 1e-12), "{space}: {p:?}");
            }
        }
    }

    #[test]
    fn sphere_sampling_is_uniform_in_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = base_points(&Space::Sphere(3), 20000, &mut rng);
        for i in 0..4 {
            let m: f64 = pts.iter().map(|p| p[i] * p[i]).sum::<f64>() / pts.len() as f64;
            assert!((m - 0.25).abs() < 2e-3);
        }
    }

    #[test]
    fn halton_first_points() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(1, 3) - 1.0 / 3.0).abs() < 1e-15);
    }
}
