//! Surface quadrature on slave faces, traction operators, and the four
//! per-pair coupling blocks of the augmented interface formulation.
//!
//! Both traction operators use one common unit normal per pair, oriented
//! from the master side toward the slave side; with that orientation the
//! mean traction λ = ½(t^s + t^m) balances the interface equilibrium of a
//! constant-stress state exactly (the patch test).

use nalgebra::{SMatrix, Vector3};

use crate::elasticity::{b_matrix, d_matrix, gauss2, shape_eval, Material};
use crate::mesh::{embed_face_point, fit_plane_face, InterfacePair, Mesh, FACE_TANGENTS};
use crate::projection::{clamp_ref_coords, inverse_map_newton, oriented_normal, DEFAULT_MAX_ITER};
use crate::{num, Error, Real, Result};

/// How the interface constraint is enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingMode {
    /// Mean-traction multiplier plus penalty (the full formulation).
    Augmented,
    /// Penalty term only; the traction terms are zeroed.
    PenaltyOnly,
}

impl CouplingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CouplingMode::Augmented => "augmented",
            CouplingMode::PenaltyOnly => "penalty_only",
        }
    }
}

/// One quadrature point on a slave face, with its image in the master
/// element's reference space and the surface Jacobian.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceGaussPoint<T: Real> {
    pub face_coords: [T; 2],
    pub weight: T,
    pub slave_ref: Vector3<T>,
    pub master_ref: Vector3<T>,
    pub surf_jac: T,
}

/// The four 24×24 matrices K_ss, K_sm, K_ms, K_mm for one pair.
#[derive(Debug, Clone)]
pub struct CouplingBlocks<T: Real> {
    pub k_ss: SMatrix<T, 24, 24>,
    pub k_sm: SMatrix<T, 24, 24>,
    pub k_ms: SMatrix<T, 24, 24>,
    pub k_mm: SMatrix<T, 24, 24>,
}

/// 3×6 normal pattern mapping a Voigt stress to the traction σ·n.
pub fn normal_matrix<T: Real>(n: &Vector3<T>) -> SMatrix<T, 3, 6> {
    let z = T::zero();
    SMatrix::<T, 3, 6>::from_row_slice(&[
        n[0], z, z, n[1], z, n[2], //
        z, n[1], z, n[0], n[2], z, //
        z, z, n[2], z, n[1], n[0],
    ])
}

/// 3×24 shape matrix: u(r) = 𝒩(r)·u_elem.
pub fn shape_matrix<T: Real>(r: &Vector3<T>) -> SMatrix<T, 3, 24> {
    let ev = shape_eval(r);
    let mut m = SMatrix::<T, 3, 24>::zeros();
    for k in 0..8 {
        for d in 0..3 {
            m[(d, 3 * k + d)] = ev.values[k];
        }
    }
    m
}

/// Traction operator ℱ = NormalMatrix(n) · D · B at a reference point.
pub fn traction_operator<T: Real>(
    elem_coords: &SMatrix<T, 8, 3>,
    r: &Vector3<T>,
    n: &Vector3<T>,
    d: &SMatrix<T, 6, 6>,
) -> Result<SMatrix<T, 3, 24>> {
    Ok(normal_matrix(n) * d * b_matrix(elem_coords, r)?)
}

/// Places the 2×2 Gauss points on the slave face, maps each to physical
/// space, and projects it into the master element.
pub fn surface_quadrature<T: Real>(
    pair: &InterfacePair,
    mesh: &Mesh<T>,
    tol: T,
) -> Result<Vec<SurfaceGaussPoint<T>>> {
    let slave_coords = mesh.elem_coords(pair.slave_elem);
    let master_coords = mesh.elem_coords(pair.master_elem);
    let pts = gauss2::<T>();
    let [t0, t1] = FACE_TANGENTS[pair.slave_face];
    let mut out = Vec::with_capacity(4);
    for &a in &pts {
        for &b in &pts {
            let slave_ref = embed_face_point(pair.slave_face, a, b);
            let ev = shape_eval(&slave_ref);
            let jac = ev.gradients.transpose() * slave_coords;
            let ta = jac.row(t0).transpose();
            let tb = jac.row(t1).transpose();
            let surf_jac = ta.cross(&tb).norm();
            let x_s = (ev.values.transpose() * slave_coords).transpose();
            let proj = inverse_map_newton(&master_coords, &x_s, tol, DEFAULT_MAX_ITER)?;
            if !proj.converged {
                return Err(Error::Interface(format!(
                    "projection of Gauss point ({:?}, {:?}) on slave element {} did not converge",
                    a, b, pair.slave_elem
                )));
            }
            let master_ref = clamp_ref_coords(&proj.ref_coords).ok_or_else(|| {
                Error::Interface(format!(
                    "Gauss point ({:?}, {:?}) of slave element {} projects outside master element {}",
                    a, b, pair.slave_elem, pair.master_elem
                ))
            })?;
            out.push(SurfaceGaussPoint {
                face_coords: [a, b],
                weight: T::one(),
                slave_ref,
                master_ref,
                surf_jac,
            });
        }
    }
    Ok(out)
}

/// Common unit normal of a pair: the slave-face plane normal, oriented
/// from the master element toward the slave element.
pub fn pair_common_normal<T: Real>(pair: &InterfacePair, mesh: &Mesh<T>) -> Result<Vector3<T>> {
    let plane = fit_plane_face(mesh, pair.slave_elem, pair.slave_face)?;
    let from = mesh.element_centroid(pair.master_elem);
    let to = mesh.element_centroid(pair.slave_elem);
    oriented_normal(&plane, &from, &to)
}

/// Accumulates the four coupling blocks of one pair over its Gauss points.
pub fn pair_coupling_blocks<T: Real>(
    pair: &InterfacePair,
    mesh: &Mesh<T>,
    material: &Material<T>,
    penalty: T,
    mode: CouplingMode,
    tol: T,
) -> Result<CouplingBlocks<T>> {
    let gps = surface_quadrature(pair, mesh, tol)?;
    let slave_coords = mesh.elem_coords(pair.slave_elem);
    let master_coords = mesh.elem_coords(pair.master_elem);
    let d = d_matrix(material)?;
    let n = pair_common_normal(pair, mesh)?;
    let half = num::<T>(0.5);
    let mut k_ss = SMatrix::<T, 24, 24>::zeros();
    let mut k_sm = SMatrix::<T, 24, 24>::zeros();
    let mut k_ms = SMatrix::<T, 24, 24>::zeros();
    let mut k_mm = SMatrix::<T, 24, 24>::zeros();
    for gp in &gps {
        let n_s = shape_matrix(&gp.slave_ref);
        let n_m = shape_matrix(&gp.master_ref);
        let scale = gp.weight * gp.surf_jac;
        if mode == CouplingMode::Augmented {
            let f_s = traction_operator(&slave_coords, &gp.slave_ref, &n, &d)?;
            let f_m = traction_operator(&master_coords, &gp.master_ref, &n, &d)?;
            k_ss += (f_s.transpose() * n_s * half + n_s.transpose() * f_s * half) * scale;
            k_sm += (n_s.transpose() * f_m * half - f_s.transpose() * n_m * half) * scale;
            k_ms += (f_m.transpose() * n_s * half - n_m.transpose() * f_s * half) * scale;
            k_mm += (-f_m.transpose() * n_m * half - n_m.transpose() * f_m * half) * scale;
        }
        k_ss += n_s.transpose() * n_s * (penalty * scale);
        k_sm -= n_s.transpose() * n_m * (penalty * scale);
        k_ms -= n_m.transpose() * n_s * (penalty * scale);
        k_mm += n_m.transpose() * n_m * (penalty * scale);
    }
    Ok(CouplingBlocks {
        k_ss,
        k_sm,
        k_ms,
        k_mm,
    })
}

/// Penetration g = 𝒩_s·U_s − 𝒩_m·U_m at one Gauss point.
pub fn evaluate_penetration<T: Real>(
    gp: &SurfaceGaussPoint<T>,
    u_s_elem: &SMatrix<T, 24, 1>,
    u_m_elem: &SMatrix<T, 24, 1>,
) -> Vector3<T> {
    shape_matrix(&gp.slave_ref) * u_s_elem - shape_matrix(&gp.master_ref) * u_m_elem
}
