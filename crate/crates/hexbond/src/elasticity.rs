//! Trilinear hexahedral element kernels: shape functions, isoparametric
//! Jacobians, strain-displacement and constitutive matrices, and the
//! uncoupled element stiffness.
//!
//! Voigt ordering is (σ₁..σ₆) = (σ₁₁, σ₂₂, σ₃₃, σ₁₂, σ₂₃, σ₁₃) with
//! engineering shear strains, so the shear diagonal of the constitutive
//! matrix is G.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

use crate::mesh::CORNER_SIGNS;
use crate::{num, Error, Real, Result};

/// Isotropic linear-elastic material.
#[derive(Debug, Clone, Copy)]
pub struct Material<T: Real> {
    pub youngs_modulus: T,
    pub poisson_ratio: T,
}

impl<T: Real> Material<T> {
    pub fn new(youngs_modulus: T, poisson_ratio: T) -> Result<Self> {
        if youngs_modulus <= T::zero() {
            return Err(Error::Material("Young's modulus must be positive".into()));
        }
        if poisson_ratio <= num::<T>(-1.0) || poisson_ratio >= num::<T>(0.5) {
            return Err(Error::Material(
                "Poisson ratio must lie in (-1, 0.5)".into(),
            ));
        }
        Ok(Self {
            youngs_modulus,
            poisson_ratio,
        })
    }
}

/// Shape function values and reference-space gradients at one point.
#[derive(Debug, Clone)]
pub struct ShapeEval<T: Real> {
    pub values: SVector<T, 8>,
    /// Row k holds ∂N_k/∂(ξ, η, μ).
    pub gradients: SMatrix<T, 8, 3>,
}

/// Trilinear shape functions N_k = ⅛(1+s_ξ ξ)(1+s_η η)(1+s_μ μ) and their
/// exact reference gradients.
pub fn shape_eval<T: Real>(r: &Vector3<T>) -> ShapeEval<T> {
    let eighth = num::<T>(0.125);
    let mut values = SVector::<T, 8>::zeros();
    let mut gradients = SMatrix::<T, 8, 3>::zeros();
    for (k, s) in CORNER_SIGNS.iter().enumerate() {
        let sx = num::<T>(s[0] as f64);
        let sy = num::<T>(s[1] as f64);
        let sz = num::<T>(s[2] as f64);
        let fx = T::one() + sx * r[0];
        let fy = T::one() + sy * r[1];
        let fz = T::one() + sz * r[2];
        values[k] = eighth * fx * fy * fz;
        gradients[(k, 0)] = eighth * sx * fy * fz;
        gradients[(k, 1)] = eighth * sy * fx * fz;
        gradients[(k, 2)] = eighth * sz * fx * fy;
    }
    ShapeEval { values, gradients }
}

/// Jacobian J_ij = ∂x_i/∂ξ_j of the trilinear map, with its determinant.
pub fn jacobian<T: Real>(
    elem_coords: &SMatrix<T, 8, 3>,
    r: &Vector3<T>,
) -> Result<(Matrix3<T>, T)> {
    let ev = shape_eval(r);
    // (gradients^T * X) has rows dx/dξ_a; transpose to ∂x_i/∂ξ_j
    let jac: Matrix3<T> = (ev.gradients.transpose() * elem_coords).transpose();
    let det = jac.determinant();
    // volume scale from the coordinate spread
    let mut scale = T::zero();
    for d in 0..3 {
        let mut lo = elem_coords[(0, d)];
        let mut hi = lo;
        for k in 1..8 {
            let v = elem_coords[(k, d)];
            if v < lo {
                lo = v;
            }
            if v > hi {
                hi = v;
            }
        }
        let spread = hi - lo;
        scale = if spread > scale { spread } else { scale };
    }
    let vol_scale = scale * scale * scale;
    if det.abs() < num::<T>(1e-14) * (vol_scale + T::one()) {
        return Err(Error::SingularMap(det.to_subset().unwrap_or(0.0)));
    }
    Ok((jac, det))
}

/// 6×24 strain-displacement matrix at a reference point.
pub fn b_matrix<T: Real>(
    elem_coords: &SMatrix<T, 8, 3>,
    r: &Vector3<T>,
) -> Result<SMatrix<T, 6, 24>> {
    let ev = shape_eval(r);
    let (jac, _) = jacobian(elem_coords, r)?;
    let inv_t = jac
        .try_inverse()
        .ok_or(Error::SingularMap(0.0))?
        .transpose();
    let mut b = SMatrix::<T, 6, 24>::zeros();
    for k in 0..8 {
        let gref = Vector3::new(ev.gradients[(k, 0)], ev.gradients[(k, 1)], ev.gradients[(k, 2)]);
        let g = inv_t * gref; // physical gradient ∇N_k
        let (gx, gy, gz) = (g[0], g[1], g[2]);
        let c = 3 * k;
        b[(0, c)] = gx;
        b[(1, c + 1)] = gy;
        b[(2, c + 2)] = gz;
        b[(3, c)] = gy;
        b[(3, c + 1)] = gx;
        b[(4, c + 1)] = gz;
        b[(4, c + 2)] = gy;
        b[(5, c)] = gz;
        b[(5, c + 2)] = gx;
    }
    Ok(b)
}

/// Isotropic Hooke matrix in Voigt form.
pub fn d_matrix<T: Real>(m: &Material<T>) -> Result<SMatrix<T, 6, 6>> {
    let e = m.youngs_modulus;
    let nu = m.poisson_ratio;
    let half = num::<T>(0.5);
    if (half - nu).abs() < num::<T>(1e-15) {
        return Err(Error::Material("incompressible material (nu = 0.5)".into()));
    }
    let lambda = e * nu / ((T::one() + nu) * (T::one() - num::<T>(2.0) * nu));
    let g = e / (num::<T>(2.0) * (T::one() + nu));
    let mut d = SMatrix::<T, 6, 6>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            d[(i, j)] = lambda;
        }
        d[(i, i)] = lambda + num::<T>(2.0) * g;
        d[(i + 3, i + 3)] = g;
    }
    Ok(d)
}

/// 1D 2-point Gauss-Legendre abscissae (weights are 1).
pub fn gauss2<T: Real>() -> [T; 2] {
    let g = num::<T>(1.0 / 3.0f64.sqrt());
    [-g, g]
}

/// Element stiffness by 2×2×2 Gauss quadrature of BᵀDB det(J).
pub fn element_stiffness<T: Real>(
    elem_coords: &SMatrix<T, 8, 3>,
    m: &Material<T>,
) -> Result<SMatrix<T, 24, 24>> {
    let d = d_matrix(m)?;
    let pts = gauss2::<T>();
    let mut k = SMatrix::<T, 24, 24>::zeros();
    for &gx in &pts {
        for &gy in &pts {
            for &gz in &pts {
                let r = Vector3::new(gx, gy, gz);
                let (_, det) = jacobian(elem_coords, &r)?;
                let b = b_matrix(elem_coords, &r)?;
                k += b.transpose() * d * b * det;
            }
        }
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{box_hex, random_affine, random_hex, random_parallelepiped, reference_hex, rng};
    use rand::Rng;

    #[test]
    fn shape_values_and_gradients_at_center() {
        let ev = shape_eval(&Vector3::<f64>::zeros());
        for k in 0..8 {
            assert!((ev.values[k] - 0.125).abs() < 1e-15);
            for d in 0..3 {
                let expect = 0.125 * CORNER_SIGNS[k][d] as f64;
                assert!((ev.gradients[(k, d)] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn shape_values_are_kronecker_at_corners() {
        for (c, s) in CORNER_SIGNS.iter().enumerate() {
            let r = Vector3::new(s[0] as f64, s[1] as f64, s[2] as f64);
            let ev = shape_eval(&r);
            for k in 0..8 {
                let expect = if k == c { 1.0 } else { 0.0 };
                assert!((ev.values[k] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn partition_of_unity_at_random_points() {
        let mut rng = rng(0x501);
        for _ in 0..1000 {
            let r = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let ev = shape_eval::<f64>(&r);
            assert!((ev.values.sum() - 1.0).abs() < 1e-14);
            for d in 0..3 {
                assert!(ev.gradients.column(d).sum().abs() < 1e-14);
            }
        }
    }

    #[test]
    fn reference_hex_map_is_identity() {
        let x = reference_hex();
        let mut rng = rng(0x502);
        for _ in 0..100 {
            let r = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let ev = shape_eval(&r);
            let mapped = (ev.values.transpose() * x).transpose();
            assert!((mapped - r).norm() < 1e-14);
        }
    }

    #[test]
    fn jacobian_of_axis_aligned_box() {
        let h = 0.3;
        let x = box_hex(Vector3::zeros(), Vector3::new(h, 2.0 * h, 3.0 * h));
        let (j, det) = jacobian(&x, &Vector3::zeros()).unwrap();
        let expect = Matrix3::from_diagonal(&Vector3::new(0.5 * h, h, 1.5 * h));
        assert!((j - expect).norm() < 1e-15);
        assert!((det - 0.75 * h * h * h).abs() < 1e-15);
    }

    #[test]
    fn jacobian_constant_on_parallelepipeds() {
        let mut rng = rng(0x503);
        for _ in 0..20 {
            let x = random_parallelepiped(&mut rng);
            let (j0, det0) = jacobian(&x, &Vector3::zeros()).unwrap();
            for _ in 0..5 {
                let r = Vector3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                let (j, det) = jacobian(&x, &r).unwrap();
                assert!((j - j0).norm() <= 1e-13 * j0.norm());
                assert!((det - det0).abs() <= 1e-13 * det0.abs());
            }
        }
    }

    #[test]
    fn flat_element_is_singular() {
        let mut x = reference_hex();
        for k in 0..8 {
            x[(k, 2)] = 0.0;
        }
        assert!(matches!(
            jacobian(&x, &Vector3::zeros()),
            Err(crate::Error::SingularMap(_))
        ));
    }

    #[test]
    fn b_matrix_reproduces_linear_strain_fields() {
        let mut rng = rng(0x504);
        for _ in 0..50 {
            let x = random_hex(&mut rng, 0.25);
            let g = random_affine(&mut rng, 0.5) - Matrix3::identity();
            // nodal displacements of the linear field u = G x
            let mut u = SMatrix::<f64, 24, 1>::zeros();
            for k in 0..8 {
                let p = Vector3::new(x[(k, 0)], x[(k, 1)], x[(k, 2)]);
                let up = g * p;
                for d in 0..3 {
                    u[3 * k + d] = up[d];
                }
            }
            let expect = SVector::<f64, 6>::from_column_slice(&[
                g[(0, 0)],
                g[(1, 1)],
                g[(2, 2)],
                g[(0, 1)] + g[(1, 0)],
                g[(1, 2)] + g[(2, 1)],
                g[(0, 2)] + g[(2, 0)],
            ]);
            let r = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let strain = b_matrix(&x, &r).unwrap() * u;
            assert!((strain - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn b_matrix_annihilates_translations() {
        let mut rng = rng(0x505);
        let x = random_hex(&mut rng, 0.3);
        let mut u = SMatrix::<f64, 24, 1>::zeros();
        for k in 0..8 {
            u[3 * k] = 0.7;
            u[3 * k + 1] = -1.3;
            u[3 * k + 2] = 4.2;
        }
        let strain = b_matrix(&x, &Vector3::new(0.2, -0.4, 0.9)).unwrap() * u;
        assert!(strain.norm() < 1e-13);
    }

    #[test]
    fn material_validation() {
        assert!(Material::new(1.0, 0.3).is_ok());
        assert!(Material::new(0.0, 0.3).is_err());
        assert!(Material::new(-2.0, 0.3).is_err());
        assert!(Material::new(1.0, 0.5).is_err());
        assert!(Material::new(1.0, -1.0).is_err());
    }

    #[test]
    fn d_matrix_hand_values() {
        // E = 1, ν = 0: D = diag(1, 1, 1, 0.5, 0.5, 0.5)
        let d0 = d_matrix(&Material::<f64>::new(1.0, 0.0).unwrap()).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expect = match (i, j) {
                    _ if i != j => 0.0,
                    _ if i < 3 => 1.0,
                    _ => 0.5,
                };
                assert!((d0[(i, j)] - expect).abs() < 1e-15);
            }
        }
        // E = 1, ν = 0.25: λ = 0.4, G = 0.4
        let d = d_matrix(&Material::<f64>::new(1.0, 0.25).unwrap()).unwrap();
        for i in 0..3 {
            assert!((d[(i, i)] - 1.2).abs() < 1e-15);
            assert!((d[(i, (i + 1) % 3)] - 0.4).abs() < 1e-15);
            assert!((d[(i + 3, i + 3)] - 0.4).abs() < 1e-15);
        }
    }

    #[test]
    fn d_matrix_is_positive_definite() {
        let d = d_matrix(&Material::new(2.0, 0.45).unwrap()).unwrap();
        let eig = nalgebra::SymmetricEigen::new(d);
        for ev in eig.eigenvalues.iter() {
            assert!(*ev > 0.0);
        }
    }

    #[test]
    fn stiffness_is_symmetric() {
        let mut rng = rng(0x506);
        let m = Material::new(3.0, 0.3).unwrap();
        for _ in 0..10 {
            let x = random_hex(&mut rng, 0.25);
            let k = element_stiffness(&x, &m).unwrap();
            assert!((k - k.transpose()).amax() <= 1e-13 * k.amax());
        }
    }

    #[test]
    fn stiffness_annihilates_rigid_body_modes() {
        let mut rng = rng(0x507);
        let m = Material::new(1.0, 0.3).unwrap();
        for _ in 0..10 {
            let x = random_hex(&mut rng, 0.25);
            let k = element_stiffness(&x, &m).unwrap();
            // 3 translations + 3 linearized rotations u = W x, W skew
            let mut modes: Vec<SMatrix<f64, 24, 1>> = Vec::new();
            for d in 0..3 {
                let mut u = SMatrix::<f64, 24, 1>::zeros();
                for n in 0..8 {
                    u[3 * n + d] = 1.0;
                }
                modes.push(u);
            }
            for (a, b) in [(0, 1), (1, 2), (0, 2)] {
                let mut u = SMatrix::<f64, 24, 1>::zeros();
                for n in 0..8 {
                    u[3 * n + a] = -x[(n, b)];
                    u[3 * n + b] = x[(n, a)];
                }
                modes.push(u);
            }
            for u in &modes {
                let f = k * u;
                assert!(f.amax() <= 1e-12 * k.amax() * u.amax());
            }
        }
    }

    /// 1D 5-point Gauss-Legendre rule.
    fn gauss5() -> [(f64, f64); 5] {
        let a = (5.0 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
        let b = (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
        let w0 = 128.0 / 225.0;
        let wa = (322.0 + 13.0 * 70.0f64.sqrt()) / 900.0;
        let wb = (322.0 - 13.0 * 70.0f64.sqrt()) / 900.0;
        [(-b, wb), (-a, wa), (0.0, w0), (a, wa), (b, wb)]
    }

    /// Brute-force stiffness by 5×5×5 quadrature, independent of the
    /// production 2×2×2 loop.
    fn stiffness_oracle(x: &SMatrix<f64, 8, 3>, m: &Material<f64>) -> SMatrix<f64, 24, 24> {
        let d = d_matrix(m).unwrap();
        let mut k = SMatrix::<f64, 24, 24>::zeros();
        for (gx, wx) in gauss5() {
            for (gy, wy) in gauss5() {
                for (gz, wz) in gauss5() {
                    let r = Vector3::new(gx, gy, gz);
                    let (_, det) = jacobian(x, &r).unwrap();
                    let b = b_matrix(x, &r).unwrap();
                    k += b.transpose() * d * b * (det * wx * wy * wz);
                }
            }
        }
        k
    }

    #[test]
    fn stiffness_matches_high_order_quadrature_on_parallelepipeds() {
        let mut rng = rng(0x508);
        let m = Material::new(2.0, 0.3).unwrap();
        for _ in 0..10 {
            let x = random_parallelepiped(&mut rng);
            let k = element_stiffness(&x, &m).unwrap();
            let k5 = stiffness_oracle(&x, &m);
            assert!((k - k5).amax() <= 1e-12 * k5.amax());
        }
    }
}
