//! Plane fitting for quadrilateral faces and the Newton solve of the
//! orthogonality system that locates a slave-surface point inside the
//! master element's reference space.

use nalgebra::{Matrix3, SMatrix, SymmetricEigen, Vector3};

use crate::elasticity::shape_eval;
use crate::mesh::CORNER_SIGNS;
use crate::{num, Error, Real, Result};

/// Default Newton tolerance.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default Newton iteration cap.
pub const DEFAULT_MAX_ITER: usize = 25;
/// Reference coordinates within 1 + REF_CLAMP of the element are clamped;
/// larger excursions mean the pairing is geometrically inconsistent.
pub const REF_CLAMP: f64 = 1e-6;

/// Plane n·x = d with unit normal n.
#[derive(Debug, Clone, Copy)]
pub struct PlaneEquation<T: Real> {
    pub unit_normal: Vector3<T>,
    pub offset: T,
}

#[derive(Debug, Clone, Copy)]
pub struct ProjectionResult<T: Real> {
    /// Master-element reference coordinates (ξ_m, η_m, μ_m).
    pub ref_coords: Vector3<T>,
    pub iterations: usize,
    pub converged: bool,
    /// max |f_i| at the final iterate.
    pub residual: T,
}

/// Least-squares plane through 4 points: the unit normal is the direction
/// of least singular value of the centered point matrix.
pub fn fit_plane<T: Real>(points: &[Vector3<T>; 4]) -> Result<PlaneEquation<T>> {
    let quarter = num::<T>(0.25);
    let centroid = (points[0] + points[1] + points[2] + points[3]) * quarter;
    let mut cov = Matrix3::<T>::zeros();
    for p in points {
        let d = p - centroid;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    // order eigenvalues ascending
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let largest = eig.eigenvalues[order[2]];
    let second = eig.eigenvalues[order[1]];
    if largest <= T::zero() || second <= num::<T>(1e-12) * largest {
        return Err(Error::Geometry(
            "degenerate face: points are collinear or coincident".into(),
        ));
    }
    let n: Vector3<T> = eig.eigenvectors.column(order[0]).into_owned().normalize();
    Ok(PlaneEquation {
        unit_normal: n,
        offset: n.dot(&centroid),
    })
}

/// Fixes the plane-normal sign so it points from `from_point` toward
/// `to_point`.
pub fn oriented_normal<T: Real>(
    plane: &PlaneEquation<T>,
    from_point: &Vector3<T>,
    to_point: &Vector3<T>,
) -> Result<Vector3<T>> {
    let dir = to_point - from_point;
    let s = plane.unit_normal.dot(&dir);
    if s.abs() <= num::<T>(1e-12) * dir.norm() {
        return Err(Error::Geometry(
            "orientation test degenerate: side points lie in the plane".into(),
        ));
    }
    if s > T::zero() {
        Ok(plane.unit_normal)
    } else {
        Ok(-plane.unit_normal)
    }
}

/// Mixed second derivatives ∂²N_k/∂ξ_i∂ξ_j (the diagonal is zero for
/// trilinear shapes).
fn shape_second_deriv<T: Real>(r: &Vector3<T>, k: usize, i: usize, j: usize) -> T {
    if i == j {
        return T::zero();
    }
    let s = CORNER_SIGNS[k];
    let o = 3 - i - j; // the remaining axis
    let si = num::<T>(s[i] as f64);
    let sj = num::<T>(s[j] as f64);
    let so = num::<T>(s[o] as f64);
    num::<T>(0.125) * si * sj * (T::one() + so * r[o])
}

/// Newton solve of the orthogonality system: finds (ξ_m, η_m, μ_m) such
/// that the tangent vectors at the iterate are orthogonal to
/// χ = x_s − Σ N_k X_k. Initial guess is the element center.
///
/// Stops when ‖Δ‖ < tol·‖r_k‖, with an absolute branch ‖Δ‖ < tol whenever
/// ‖r_k‖ < 1 (the relative rule is ill-defined at the initial guess).
pub fn inverse_map_newton<T: Real>(
    master_coords: &SMatrix<T, 8, 3>,
    x_s: &Vector3<T>,
    tol: T,
    max_iter: usize,
) -> Result<ProjectionResult<T>> {
    let mut diam2 = T::zero();
    for i in 0..8 {
        for j in (i + 1)..8 {
            let mut d2 = T::zero();
            for d in 0..3 {
                let dd = master_coords[(i, d)] - master_coords[(j, d)];
                d2 += dd * dd;
            }
            if d2 > diam2 {
                diam2 = d2;
            }
        }
    }
    let f_scale = diam2 + T::one();

    let mut r = Vector3::<T>::zeros();
    let mut iterations = 0usize;
    let mut converged = false;
    let mut residual;
    loop {
        let ev = shape_eval(&r);
        // tangent vectors e_a = Σ_k ∂N_k/∂ξ_a X_k
        let tangents: SMatrix<T, 3, 3> = ev.gradients.transpose() * master_coords;
        let x_at = (ev.values.transpose() * master_coords).transpose();
        let chi = x_s - x_at;
        let mut f = Vector3::<T>::zeros();
        for a in 0..3 {
            f[a] = tangents.row(a).transpose().dot(&chi);
        }
        residual = f[0].abs().max(f[1].abs()).max(f[2].abs());
        if residual < tol * f_scale {
            converged = true;
            break;
        }
        if iterations >= max_iter {
            break;
        }
        // ∂f_i/∂ξ_j = (Σ_k ∂²N_k/∂ξ_i∂ξ_j X_k)·χ − e_i·e_j
        let mut h = Matrix3::<T>::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let mut second = T::zero();
                for k in 0..8 {
                    let d2 = shape_second_deriv(&r, k, i, j);
                    let xk = Vector3::new(
                        master_coords[(k, 0)],
                        master_coords[(k, 1)],
                        master_coords[(k, 2)],
                    );
                    second += d2 * xk.dot(&chi);
                }
                h[(i, j)] = second - tangents.row(i).transpose().dot(&tangents.row(j).transpose());
            }
        }
        let delta = h
            .lu()
            .solve(&f)
            .ok_or_else(|| Error::Geometry("singular Newton matrix in inverse mapping".into()))?;
        let prev_norm = r.norm();
        r -= delta;
        iterations += 1;
        let thresh = if prev_norm < T::one() {
            tol
        } else {
            tol * prev_norm
        };
        if delta.norm() < thresh {
            converged = true;
            // residual at the accepted iterate
            let ev = shape_eval(&r);
            let tangents: SMatrix<T, 3, 3> = ev.gradients.transpose() * master_coords;
            let x_at = (ev.values.transpose() * master_coords).transpose();
            let chi = x_s - x_at;
            residual = T::zero();
            for a in 0..3 {
                let fa = tangents.row(a).transpose().dot(&chi);
                if fa.abs() > residual {
                    residual = fa.abs();
                }
            }
            break;
        }
    }
    Ok(ProjectionResult {
        ref_coords: r,
        iterations,
        converged,
        residual,
    })
}

/// Clamps converged reference coordinates to [−1, 1] when they lie within
/// the tolerance band; returns None for larger excursions.
pub fn clamp_ref_coords<T: Real>(r: &Vector3<T>) -> Option<Vector3<T>> {
    let band = T::one() + num::<T>(REF_CLAMP);
    let mut out = *r;
    for d in 0..3 {
        if out[d].abs() > band {
            return None;
        }
        if out[d] > T::one() {
            out[d] = T::one();
        } else if out[d] < -T::one() {
            out[d] = -T::one();
        }
    }
    Some(out)
}
