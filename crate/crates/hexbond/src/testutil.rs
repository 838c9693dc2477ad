//! Shared helpers for unit tests.

use nalgebra::{Matrix3, SMatrix, Vector3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::mesh::CORNER_SIGNS;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unit cube corners at ±1 following the corner convention.
pub fn reference_hex() -> SMatrix<f64, 8, 3> {
    let mut x = SMatrix::<f64, 8, 3>::zeros();
    for (k, s) in CORNER_SIGNS.iter().enumerate() {
        for d in 0..3 {
            x[(k, d)] = s[d] as f64;
        }
    }
    x
}

/// Axis-aligned box element.
pub fn box_hex(lo: Vector3<f64>, hi: Vector3<f64>) -> SMatrix<f64, 8, 3> {
    let mut x = SMatrix::<f64, 8, 3>::zeros();
    for (k, s) in CORNER_SIGNS.iter().enumerate() {
        for d in 0..3 {
            x[(k, d)] = if s[d] > 0 { hi[d] } else { lo[d] };
        }
    }
    x
}

/// Randomly perturbed (still positively oriented) trilinear hex.
pub fn random_hex(rng: &mut ChaCha8Rng, perturbation: f64) -> SMatrix<f64, 8, 3> {
    let mut x = reference_hex();
    for k in 0..8 {
        for d in 0..3 {
            x[(k, d)] += rng.gen_range(-perturbation..perturbation);
        }
    }
    x
}

/// Random parallelepiped: affine image of the reference cube.
pub fn random_parallelepiped(rng: &mut ChaCha8Rng) -> SMatrix<f64, 8, 3> {
    let a = random_affine(rng, 0.3);
    let mut x = reference_hex();
    for k in 0..8 {
        let p = Vector3::new(x[(k, 0)], x[(k, 1)], x[(k, 2)]);
        let q = a * p;
        for d in 0..3 {
            x[(k, d)] = q[d];
        }
    }
    x
}

/// Identity plus a random perturbation, redrawn until well-conditioned.
pub fn random_affine(rng: &mut ChaCha8Rng, scale: f64) -> Matrix3<f64> {
    loop {
        let mut a = Matrix3::identity();
        for i in 0..3 {
            for j in 0..3 {
                a[(i, j)] += rng.gen_range(-scale..scale);
            }
        }
        if a.determinant() > 0.2 {
            return a;
        }
    }
}
