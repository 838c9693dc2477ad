//! Global assembly of the partitioned system, boundary conditions, the
//! linear solve, and post-processing of stresses and interface
//! diagnostics.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SMatrix, SVector, Vector3};

use crate::elasticity::{b_matrix, d_matrix, element_stiffness, gauss2, Material};
use crate::interface::{
    evaluate_penetration, pair_common_normal, shape_matrix, surface_quadrature,
    traction_operator, CouplingMode,
};
use crate::mesh::{embed_face_point, HexElement, InterfaceSpec, Mesh, FACE_TANGENTS};
use crate::{num, Error, Real, Result};

/// Partition label of a node in the rearranged system U = (U_r, U_s, U_m).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofLabel {
    Remaining,
    Slave,
    Master,
}

#[derive(Debug, Clone)]
pub struct DofMap {
    /// Label per node; the three DOFs of a node share its label.
    pub node_labels: Vec<DofLabel>,
}

impl DofMap {
    pub fn ndof(&self) -> usize {
        3 * self.node_labels.len()
    }

    pub fn count(&self, label: DofLabel) -> usize {
        self.node_labels.iter().filter(|&&l| l == label).count()
    }
}

/// Labels every node of a slave element `s`, every node of a master
/// element not already `s` as `m`, all others `r`.
pub fn build_dof_map<T: Real>(mesh: &Mesh<T>, interface: &InterfaceSpec) -> DofMap {
    let mut labels = vec![DofLabel::Remaining; mesh.nodes.len()];
    for pair in &interface.pairs {
        for &n in &mesh.elements[pair.slave_elem].nodes {
            labels[n] = DofLabel::Slave;
        }
    }
    for pair in &interface.pairs {
        for &n in &mesh.elements[pair.master_elem].nodes {
            if labels[n] != DofLabel::Slave {
                labels[n] = DofLabel::Master;
            }
        }
    }
    DofMap {
        node_labels: labels,
    }
}

/// Constant traction applied to one element face.
#[derive(Debug, Clone, Copy)]
pub struct NeumannFace<T: Real> {
    pub elem: usize,
    pub face: usize,
    pub traction: Vector3<T>,
}

#[derive(Debug, Clone, Default)]
pub struct BoundaryConditions<T: Real> {
    /// (global DOF, prescribed displacement)
    pub dirichlet: Vec<(usize, T)>,
    pub neumann: Vec<NeumannFace<T>>,
}

impl<T: Real> BoundaryConditions<T> {
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeMap::new();
        for &(dof, _) in &self.dirichlet {
            if seen.insert(dof, ()).is_some() {
                return Err(Error::BoundaryCondition(format!(
                    "DOF {dof} prescribed twice"
                )));
            }
        }
        Ok(())
    }
}

/// Symmetric sparse stiffness in row-map form, with the load vector.
#[derive(Debug, Clone)]
pub struct GlobalSystem<T: Real> {
    pub rows: Vec<BTreeMap<usize, T>>,
    pub load: DVector<T>,
    pub dof_map: DofMap,
}

impl<T: Real> GlobalSystem<T> {
    pub fn ndof(&self) -> usize {
        self.rows.len()
    }

    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let e = self.rows[i].entry(j).or_insert_with(T::zero);
        *e += v;
    }

    pub fn matvec(&self, x: &DVector<T>) -> DVector<T> {
        let mut y = DVector::zeros(self.ndof());
        for (i, row) in self.rows.iter().enumerate() {
            let mut s = T::zero();
            for (&j, &v) in row {
                s += v * x[j];
            }
            y[i] = s;
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let n = self.ndof();
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, &v) in row {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// max |K_ij − K_ji| relative to the largest entry magnitude.
    pub fn symmetry_defect(&self) -> T {
        let mut max_entry = T::zero();
        let mut defect = T::zero();
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, &v) in row {
                if v.abs() > max_entry {
                    max_entry = v.abs();
                }
                let vt = self.rows[j].get(&i).copied().unwrap_or_else(T::zero);
                let d = (v - vt).abs();
                if d > defect {
                    defect = d;
                }
            }
        }
        if max_entry > T::zero() {
            defect / max_entry
        } else {
            defect
        }
    }
}

pub fn elem_dofs(e: &HexElement) -> [usize; 24] {
    let mut dofs = [0usize; 24];
    for k in 0..8 {
        for d in 0..3 {
            dofs[3 * k + d] = 3 * e.nodes[k] + d;
        }
    }
    dofs
}

pub fn elem_displacements<T: Real>(u: &DVector<T>, e: &HexElement) -> SMatrix<T, 24, 1> {
    let dofs = elem_dofs(e);
    SMatrix::<T, 24, 1>::from_fn(|i, _| u[dofs[i]])
}

/// Scatters every element stiffness plus each pair's coupling blocks into
/// the global matrix, and integrates Neumann tractions into the load.
pub fn assemble_global<T: Real>(
    mesh: &Mesh<T>,
    material: &Material<T>,
    interface: &InterfaceSpec,
    penalty: T,
    mode: CouplingMode,
    neumann: &[NeumannFace<T>],
    tol: T,
) -> Result<GlobalSystem<T>> {
    let dof_map = build_dof_map(mesh, interface);
    let n = dof_map.ndof();
    let mut sys = GlobalSystem {
        rows: vec![BTreeMap::new(); n],
        load: DVector::zeros(n),
        dof_map,
    };
    for e in &mesh.elements {
        let k = element_stiffness(&mesh.elem_coords(e.id), material)?;
        let dofs = elem_dofs(e);
        for (a, &i) in dofs.iter().enumerate() {
            for (b, &j) in dofs.iter().enumerate() {
                sys.add(i, j, k[(a, b)]);
            }
        }
    }
    for pair in &interface.pairs {
        let blocks =
            crate::interface::pair_coupling_blocks(pair, mesh, material, penalty, mode, tol)?;
        let sd = elem_dofs(&mesh.elements[pair.slave_elem]);
        let md = elem_dofs(&mesh.elements[pair.master_elem]);
        for a in 0..24 {
            for b in 0..24 {
                sys.add(sd[a], sd[b], blocks.k_ss[(a, b)]);
                sys.add(sd[a], md[b], blocks.k_sm[(a, b)]);
                sys.add(md[a], sd[b], blocks.k_ms[(a, b)]);
                sys.add(md[a], md[b], blocks.k_mm[(a, b)]);
            }
        }
    }
    // Neumann: 2×2 surface quadrature of 𝒩ᵀ t̄ J
    for nf in neumann {
        let e = &mesh.elements[nf.elem];
        let coords = mesh.elem_coords(nf.elem);
        let [t0, t1] = FACE_TANGENTS[nf.face];
        let pts = gauss2::<T>();
        let dofs = elem_dofs(e);
        for &a in &pts {
            for &b in &pts {
                let r = embed_face_point(nf.face, a, b);
                let ev = crate::elasticity::shape_eval(&r);
                let jac = ev.gradients.transpose() * coords;
                let ta = jac.row(t0).transpose();
                let tb = jac.row(t1).transpose();
                let surf_jac = ta.cross(&tb).norm();
                let fe = shape_matrix(&r).transpose() * nf.traction * surf_jac;
                for (i, &dof) in dofs.iter().enumerate() {
                    sys.load[dof] += fe[i];
                }
            }
        }
    }
    Ok(sys)
}

/// Symmetric elimination of prescribed DOFs: columns move to the load,
/// rows/columns become identity rows scaled to the diagonal magnitude.
pub fn apply_dirichlet<T: Real>(
    sys: &mut GlobalSystem<T>,
    dirichlet: &[(usize, T)],
) -> Result<()> {
    let n = sys.ndof();
    let mut prescribed = BTreeMap::new();
    for &(dof, v) in dirichlet {
        if dof >= n {
            return Err(Error::BoundaryCondition(format!("DOF {dof} out of range")));
        }
        if prescribed.insert(dof, v).is_some() {
            return Err(Error::BoundaryCondition(format!(
                "DOF {dof} prescribed twice"
            )));
        }
    }
    let mut diag_scale = T::zero();
    for i in 0..n {
        diag_scale += sys.rows[i].get(&i).copied().unwrap_or_else(T::zero).abs();
    }
    diag_scale /= num::<T>(n as f64);
    if diag_scale <= T::zero() {
        diag_scale = T::one();
    }
    for (&j, &v) in &prescribed {
        let row = std::mem::take(&mut sys.rows[j]);
        for (&i, &kij) in &row {
            if i == j {
                continue;
            }
            sys.rows[i].remove(&j);
            if !prescribed.contains_key(&i) {
                sys.load[i] -= kij * v;
            }
        }
        let mut new_row = BTreeMap::new();
        new_row.insert(j, diag_scale);
        sys.rows[j] = new_row;
        sys.load[j] = diag_scale * v;
    }
    Ok(())
}

/// Gauss-point Voigt stresses of one element.
#[derive(Debug, Clone)]
pub struct ElementStresses<T: Real> {
    pub elem: usize,
    pub gauss_stresses: Vec<SVector<T, 6>>,
}

pub fn recover_stresses<T: Real>(
    mesh: &Mesh<T>,
    material: &Material<T>,
    u: &DVector<T>,
) -> Result<Vec<ElementStresses<T>>> {
    let d = d_matrix(material)?;
    let pts = gauss2::<T>();
    let mut out = Vec::with_capacity(mesh.elements.len());
    for e in &mesh.elements {
        let coords = mesh.elem_coords(e.id);
        let ue = elem_displacements(u, e);
        let mut gauss_stresses = Vec::with_capacity(8);
        for &gx in &pts {
            for &gy in &pts {
                for &gz in &pts {
                    let r = Vector3::new(gx, gy, gz);
                    let b = b_matrix(&coords, &r)?;
                    gauss_stresses.push(d * b * ue);
                }
            }
        }
        out.push(ElementStresses {
            elem: e.id,
            gauss_stresses,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SolveReport<T: Real> {
    pub u: DVector<T>,
    pub max_penetration: T,
    pub interface_traction_gap: T,
    pub residual_norm: T,
    pub relative_residual: T,
    pub residual_warning: bool,
    pub energy: T,
    pub ndof: usize,
    pub n_pairs: usize,
    pub n_slave_nodes: usize,
    pub n_master_nodes: usize,
    pub mode: CouplingMode,
    pub penalty: T,
}

impl<T: Real> SolveReport<T> {
    pub fn max_displacement(&self) -> T {
        let mut m = T::zero();
        for v in self.u.iter() {
            if v.abs() > m {
                m = v.abs();
            }
        }
        m
    }

    /// Key-value text block.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "ndof = {}", self.ndof);
        let _ = writeln!(s, "pairs = {}", self.n_pairs);
        let _ = writeln!(s, "slave_nodes = {}", self.n_slave_nodes);
        let _ = writeln!(s, "master_nodes = {}", self.n_master_nodes);
        let _ = writeln!(s, "mode = {}", self.mode.as_str());
        let _ = writeln!(s, "epsilon = {:?}", self.penalty);
        let _ = writeln!(s, "factorization = dense_lu");
        let _ = writeln!(s, "residual_norm = {:?}", self.residual_norm);
        let _ = writeln!(s, "relative_residual = {:?}", self.relative_residual);
        let _ = writeln!(s, "residual_warning = {}", self.residual_warning);
        let _ = writeln!(s, "energy = {:?}", self.energy);
        let _ = writeln!(s, "max_displacement = {:?}", self.max_displacement());
        let _ = writeln!(s, "max_penetration = {:?}", self.max_penetration);
        let _ = writeln!(
            s,
            "interface_traction_gap = {:?}",
            self.interface_traction_gap
        );
        s
    }
}

/// Direct solve of the constrained system. The residual is recomputed
/// from the sparse matrix, never trusted from the factorization.
pub fn solve_system<T: Real>(sys: &GlobalSystem<T>) -> Result<(DVector<T>, T, T)> {
    let dense = sys.to_dense();
    let lu = dense.lu();
    let u = lu.solve(&sys.load).ok_or_else(|| {
        Error::Solver(
            "factorization breakdown: system is singular \
             (check constraints, or use a larger penalty)"
                .into(),
        )
    })?;
    let r = sys.matvec(&u) - &sys.load;
    let rnorm = r.norm();
    let pnorm = sys.load.norm();
    let rel = if pnorm > T::zero() { rnorm / pnorm } else { rnorm };
    Ok((u, rnorm, rel))
}

/// Assembles, constrains, solves, and recomputes the interface
/// diagnostics from the solution.
pub fn run_analysis<T: Real>(
    mesh: &Mesh<T>,
    material: &Material<T>,
    interface: &InterfaceSpec,
    penalty: T,
    mode: CouplingMode,
    bcs: &BoundaryConditions<T>,
    tol: T,
) -> Result<SolveReport<T>> {
    bcs.validate()?;
    let mut sys = assemble_global(mesh, material, interface, penalty, mode, &bcs.neumann, tol)?;
    apply_dirichlet(&mut sys, &bcs.dirichlet)?;
    let (u, residual_norm, relative_residual) = solve_system(&sys)?;
    let residual_warning = relative_residual > num::<T>(1e-10);
    let energy = (u.dot(&sys.matvec(&u)) * num::<T>(0.5)) - u.dot(&sys.load);

    let d = d_matrix(material)?;
    let mut max_penetration = T::zero();
    let mut traction_gap = T::zero();
    for pair in &interface.pairs {
        let gps = surface_quadrature(pair, mesh, tol)?;
        let se = &mesh.elements[pair.slave_elem];
        let me = &mesh.elements[pair.master_elem];
        let u_s = elem_displacements(&u, se);
        let u_m = elem_displacements(&u, me);
        let n = pair_common_normal(pair, mesh)?;
        let sc = mesh.elem_coords(pair.slave_elem);
        let mc = mesh.elem_coords(pair.master_elem);
        for gp in &gps {
            let g = evaluate_penetration(gp, &u_s, &u_m);
            if g.norm() > max_penetration {
                max_penetration = g.norm();
            }
            let t_s = traction_operator(&sc, &gp.slave_ref, &n, &d)? * u_s;
            let t_m = traction_operator(&mc, &gp.master_ref, &n, &d)? * u_m;
            let gap = (t_s - t_m).norm();
            if gap > traction_gap {
                traction_gap = gap;
            }
        }
    }
    Ok(SolveReport {
        u,
        max_penetration,
        interface_traction_gap: traction_gap,
        residual_norm,
        relative_residual,
        residual_warning,
        energy,
        ndof: sys.ndof(),
        n_pairs: interface.pairs.len(),
        n_slave_nodes: sys.dof_map.count(DofLabel::Slave),
        n_master_nodes: sys.dof_map.count(DofLabel::Master),
        mode,
        penalty,
    })
}

/// Default penalty ε = α·E/h_s with h_s the smallest slave-element
/// diameter; α defaults to 10.
pub fn penalty_from_alpha<T: Real>(
    mesh: &Mesh<T>,
    material: &Material<T>,
    interface: &InterfaceSpec,
    alpha: T,
) -> T {
    let mut h = T::zero();
    let mut any = false;
    for pair in &interface.pairs {
        let d = mesh.element_diameter(pair.slave_elem);
        if !any || d < h {
            h = d;
            any = true;
        }
    }
    if !any {
        h = T::one();
    }
    alpha * material.youngs_modulus / h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_block_mesh, build_two_region_mesh, detect_interface, RegionTag};
    use nalgebra::Matrix3;

    fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    fn patch_mesh() -> (Mesh<f64>, InterfaceSpec) {
        let mesh = build_two_region_mesh(
            [2, 2, 1],
            [1, 1, 1],
            (v(0.0, 0.0, 0.0), v(1.0, 1.0, 1.0)),
            (v(0.0, 0.0, 1.0), v(1.0, 1.0, 2.0)),
            2,
        )
        .unwrap();
        let interface = detect_interface(&mesh, 2, 1.0).unwrap();
        (mesh, interface)
    }

    fn stacked_one_to_one() -> (Mesh<f64>, InterfaceSpec) {
        let mesh = build_two_region_mesh(
            [1, 1, 1],
            [1, 1, 1],
            (v(0.0, 0.0, 0.0), v(1.0, 1.0, 1.0)),
            (v(0.0, 0.0, 1.0), v(1.0, 1.0, 2.0)),
            2,
        )
        .unwrap();
        let interface = detect_interface(&mesh, 2, 1.0).unwrap();
        (mesh, interface)
    }

    #[test]
    fn dof_map_partitions_the_patch_mesh() {
        let (mesh, interface) = patch_mesh();
        let map = build_dof_map(&mesh, &interface);
        // every fine element touches the interface, so all 18 fine nodes
        // are slave and the 8 coarse nodes are master
        assert_eq!(map.count(DofLabel::Slave), 18);
        assert_eq!(map.count(DofLabel::Master), 8);
        assert_eq!(map.count(DofLabel::Remaining), 0);
        assert_eq!(map.ndof(), 78);
    }

    #[test]
    fn dof_map_keeps_far_nodes_remaining() {
        let mesh = build_two_region_mesh(
            [2, 2, 2],
            [1, 1, 1],
            (v(0.0, 0.0, 0.0), v(1.0, 1.0, 1.0)),
            (v(1.0, 0.0, 0.0), v(2.0, 1.0, 1.0)),
            0,
        )
        .unwrap();
        let interface = detect_interface(&mesh, 0, 1.0).unwrap();
        let map = build_dof_map(&mesh, &interface);
        // slave elements are the 4 fine elements touching x = 1: their
        // nodes span the two node layers i ∈ {1, 2} of the 3×3×3 grid
        assert_eq!(map.count(DofLabel::Slave), 18);
        assert_eq!(map.count(DofLabel::Master), 8);
        assert_eq!(map.count(DofLabel::Remaining), 9);
    }

    #[test]
    fn dof_map_without_interface_is_all_remaining() {
        let mesh = build_block_mesh(
            [2, 1, 1],
            v(0.0, 0.0, 0.0),
            v(2.0, 1.0, 1.0),
            RegionTag::Untagged,
        )
        .unwrap();
        let map = build_dof_map(&mesh, &InterfaceSpec::default());
        assert_eq!(map.count(DofLabel::Remaining), mesh.nodes.len());
    }

    #[test]
    fn assembly_without_interface_is_the_element_sum() {
        let mesh = build_block_mesh(
            [2, 1, 1],
            v(0.0, 0.0, 0.0),
            v(2.0, 1.0, 1.0),
            RegionTag::Untagged,
        )
        .unwrap();
        let mat = Material::new(2.0, 0.3).unwrap();
        let sys = assemble_global(
            &mesh,
            &mat,
            &InterfaceSpec::default(),
            0.0,
            CouplingMode::Augmented,
            &[],
            1e-12,
        )
        .unwrap();
        let mut dense = DMatrix::<f64>::zeros(sys.ndof(), sys.ndof());
        for e in &mesh.elements {
            let k = element_stiffness(&mesh.elem_coords(e.id), &mat).unwrap();
            let dofs = elem_dofs(e);
            for a in 0..24 {
                for b in 0..24 {
                    dense[(dofs[a], dofs[b])] += k[(a, b)];
                }
            }
        }
        let scale = dense.amax();
        assert!((sys.to_dense() - dense).amax() <= 1e-13 * scale);
    }

    #[test]
    fn assembly_scatters_the_coupling_blocks() {
        let (mesh, interface) = stacked_one_to_one();
        let mat = Material::new(1.0, 0.3).unwrap();
        let eps = 12.5;
        let with = assemble_global(
            &mesh,
            &mat,
            &interface,
            eps,
            CouplingMode::Augmented,
            &[],
            1e-12,
        )
        .unwrap();
        let without = assemble_global(
            &mesh,
            &mat,
            &InterfaceSpec::default(),
            eps,
            CouplingMode::Augmented,
            &[],
            1e-12,
        )
        .unwrap();
        let diff = with.to_dense() - without.to_dense();
        let pair = &interface.pairs[0];
        let blocks = crate::interface::pair_coupling_blocks(
            pair,
            &mesh,
            &mat,
            eps,
            CouplingMode::Augmented,
            1e-12,
        )
        .unwrap();
        let sd = elem_dofs(&mesh.elements[pair.slave_elem]);
        let md = elem_dofs(&mesh.elements[pair.master_elem]);
        let mut expect = DMatrix::<f64>::zeros(with.ndof(), with.ndof());
        for a in 0..24 {
            for b in 0..24 {
                expect[(sd[a], sd[b])] += blocks.k_ss[(a, b)];
                expect[(sd[a], md[b])] += blocks.k_sm[(a, b)];
                expect[(md[a], sd[b])] += blocks.k_ms[(a, b)];
                expect[(md[a], md[b])] += blocks.k_mm[(a, b)];
            }
        }
        let scale = expect.amax();
        assert!((diff - expect).amax() <= 1e-13 * scale);
    }

    #[test]
    fn assembled_patch_system_is_symmetric() {
        let (mesh, interface) = patch_mesh();
        let mat = Material::new(1.0, 0.3).unwrap();
        let eps = penalty_from_alpha(&mesh, &mat, &interface, 10.0);
        let sys = assemble_global(
            &mesh,
            &mat,
            &interface,
            eps,
            CouplingMode::Augmented,
            &[],
            1e-12,
        )
        .unwrap();
        assert!(sys.symmetry_defect() <= 1e-12);
    }

    #[test]
    fn neumann_load_of_a_constant_traction_sums_to_force_times_area() {
        let mesh = build_block_mesh(
            [2, 2, 1],
            v(0.0, 0.0, 0.0),
            v(1.0, 1.0, 1.0),
            RegionTag::Untagged,
        )
        .unwrap();
        let mat = Material::new(1.0, 0.3).unwrap();
        let traction = v(0.0, 0.5, -2.0);
        let neumann: Vec<NeumannFace<f64>> = (0..4)
            .map(|e| NeumannFace {
                elem: e,
                face: 5,
                traction,
            })
            .collect();
        let sys = assemble_global(
            &mesh,
            &mat,
            &InterfaceSpec::default(),
            0.0,
            CouplingMode::Augmented,
            &neumann,
            1e-12,
        )
        .unwrap();
        let mut total = Vector3::zeros();
        for n in 0..mesh.nodes.len() {
            for d in 0..3 {
                total[d] += sys.load[3 * n + d];
            }
        }
        assert!((total - traction).norm() < 1e-13); // area = 1
    }

    #[test]
    fn dirichlet_elimination_enforces_prescribed_values() {
        let mesh = build_block_mesh(
            [1, 1, 1],
            v(0.0, 0.0, 0.0),
            v(1.0, 1.0, 1.0),
            RegionTag::Untagged,
        )
        .unwrap();
        let mat = Material::new(1.0, 0.3).unwrap();
        let mut sys = assemble_global(
            &mesh,
            &mat,
            &InterfaceSpec::default(),
            0.0,
            CouplingMode::Augmented,
            &[],
            1e-12,
        )
        .unwrap();
        // pin every DOF to a distinct value
        let dirichlet: Vec<(usize, f64)> =
            (0..sys.ndof()).map(|i| (i, 0.01 * i as f64)).collect();
        apply_dirichlet(&mut sys, &dirichlet).unwrap();
        let (u, _, rel) = solve_system(&sys).unwrap();
        assert!(rel < 1e-12);
        for (dof, val) in dirichlet {
            assert!((u[dof] - val).abs() < 1e-12);
        }
    }

    #[test]
    fn dirichlet_rejects_duplicates_and_out_of_range() {
        let (mesh, interface) = stacked_one_to_one();
        let mat = Material::new(1.0, 0.3).unwrap();
        let mut sys = assemble_global(
            &mesh,
            &mat,
            &interface,
            1.0,
            CouplingMode::Augmented,
            &[],
            1e-12,
        )
        .unwrap();
        assert!(apply_dirichlet(&mut sys, &[(0, 0.0), (0, 1.0)]).is_err());
        assert!(apply_dirichlet(&mut sys, &[(100000, 0.0)]).is_err());
    }

    #[test]
    fn prescribed_stretch_reactions_match_statics() {
        // bar [0,1]×[0,1]×[0,2] stretched by w = 0.1 on top, ν = 0:
        // exact σ_zz = E·0.1/2 = 0.05, reaction force 0.05 × area 1
        let mesh = build_block_mesh(
            [1, 1, 2],
            v(0.0, 0.0, 0.0),
            v(1.0, 1.0, 2.0),
            RegionTag::Untagged,
        )
        .unwrap();
        let mat = Material::new(1.0, 0.0).unwrap();
        let sys0 = assemble_global(
            &mesh,
            &mat,
            &InterfaceSpec::default(),
            0.0,
            CouplingMode::Augmented,
            &[],
            1e-12,
        )
        .unwrap();
        let tau = mesh.tau_geo();
        let mut dirichlet = Vec::new();
        for (n, p) in mesh.nodes.iter().enumerate() {
            if p[0].abs() <= tau {
                dirichlet.push((3 * n, 0.0));
            }
            if p[1].abs() <= tau {
                dirichlet.push((3 * n + 1, 0.0));
            }
            if p[2].abs() <= tau {
                dirichlet.push((3 * n + 2, 0.0));
            }
            if (p[2] - 2.0).abs() <= tau {
                dirichlet.push((3 * n + 2, 0.1));
            }
        }
        let mut sys = sys0.clone();
        apply_dirichlet(&mut sys, &dirichlet).unwrap();
        let (u, _, _) = solve_system(&sys).unwrap();
        // exact solution is linear: u = (0, 0, 0.05 z)
        for (n, p) in mesh.nodes.iter().enumerate() {
            assert!(u[3 * n].abs() < 1e-12);
            assert!(u[3 * n + 1].abs() < 1e-12);
            assert!((u[3 * n + 2] - 0.05 * p[2]).abs() < 1e-12);
        }
        // reactions from the unconstrained operator
        let reactions = sys0.matvec(&u);
        let mut top_force = 0.0;
        for (n, p) in mesh.nodes.iter().enumerate() {
            if (p[2] - 2.0).abs() <= tau {
                top_force += reactions[3 * n + 2];
            }
        }
        assert!((top_force - 0.05).abs() < 1e-12);
        // recovered stress is the exact uniform state
        let stresses = recover_stresses(&mesh, &mat, &u).unwrap();
        for es in stresses {
            for s in es.gauss_stresses {
                let expect = SVector::<f64, 6>::from_column_slice(&[0.0, 0.0, 0.05, 0.0, 0.0, 0.0]);
                assert!((s - expect).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn unconstrained_system_is_reported_as_singular() {
        // a floating cube under a net force has no static solution: the
        // factorization either breaks down or the recomputed residual
        // exposes the bogus solve
        let mesh = build_block_mesh(
            [1, 1, 1],
            v(0.0, 0.0, 0.0),
            v(1.0, 1.0, 1.0),
            RegionTag::Untagged,
        )
        .unwrap();
        let mat = Material::new(1.0, 0.3).unwrap();
        let neumann = [NeumannFace {
            elem: 0,
            face: 5,
            traction: v(0.0, 0.0, 1.0),
        }];
        let sys = assemble_global(
            &mesh,
            &mat,
            &InterfaceSpec::default(),
            0.0,
            CouplingMode::Augmented,
            &neumann,
            1e-12,
        )
        .unwrap();
        match solve_system(&sys) {
            Err(_) => {}
            Ok((_, _, rel)) => assert!(rel > 1e-8, "singular solve slipped through: rel = {rel}"),
        }
    }

    #[test]
    fn recovered_stress_of_zero_displacement_is_zero() {
        let (mesh, _) = patch_mesh();
        let mat = Material::new(1.0, 0.3).unwrap();
        let u = DVector::zeros(3 * mesh.nodes.len());
        for es in recover_stresses(&mesh, &mat, &u).unwrap() {
            for s in es.gauss_stresses {
                assert_eq!(s.amax(), 0.0);
            }
        }
    }

    #[test]
    fn recovered_stress_of_a_linear_field() {
        let (mesh, _) = patch_mesh();
        let mat = Material::new(1.0, 0.25).unwrap();
        let d = d_matrix(&mat).unwrap();
        let g = Matrix3::new(0.2, 0.1, 0.0, -0.1, 0.3, 0.2, 0.0, 0.1, -0.2);
        let mut u = DVector::zeros(3 * mesh.nodes.len());
        for (n, p) in mesh.nodes.iter().enumerate() {
            let up = g * p;
            for dk in 0..3 {
                u[3 * n + dk] = up[dk];
            }
        }
        let strain = SVector::<f64, 6>::from_column_slice(&[
            g[(0, 0)],
            g[(1, 1)],
            g[(2, 2)],
            g[(0, 1)] + g[(1, 0)],
            g[(1, 2)] + g[(2, 1)],
            g[(0, 2)] + g[(2, 0)],
        ]);
        let expect = d * strain;
        for es in recover_stresses(&mesh, &mat, &u).unwrap() {
            for s in es.gauss_stresses {
                assert!((s - expect).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn penalty_from_alpha_uses_the_smallest_slave_diameter() {
        let (mesh, interface) = patch_mesh();
        let mat = Material::new(2.0, 0.3).unwrap();
        let h = (0.25f64 + 0.25 + 1.0).sqrt(); // fine element diameter
        let eps = penalty_from_alpha(&mesh, &mat, &interface, 10.0);
        assert!((eps - 10.0 * 2.0 / h).abs() < 1e-12);
    }

    #[test]
    fn report_text_is_key_value() {
        let (mesh, interface) = patch_mesh();
        let mat = Material::new(1.0, 0.3).unwrap();
        let eps = penalty_from_alpha(&mesh, &mat, &interface, 10.0);
        let tau = mesh.tau_geo();
        let mut bcs = BoundaryConditions::default();
        for (n, p) in mesh.nodes.iter().enumerate() {
            for dk in 0..3 {
                if p[dk].abs() <= tau {
                    bcs.dirichlet.push((3 * n + dk, 0.0));
                }
            }
        }
        for e in &mesh.elements {
            let on_top = crate::mesh::face_nodes(e, 5)
                .iter()
                .all(|&n| (mesh.nodes[n][2] - 2.0).abs() <= tau);
            if on_top {
                bcs.neumann.push(NeumannFace {
                    elem: e.id,
                    face: 5,
                    traction: v(0.0, 0.0, 1.0),
                });
            }
        }
        let report = run_analysis(
            &mesh,
            &mat,
            &interface,
            eps,
            CouplingMode::Augmented,
            &bcs,
            1e-12,
        )
        .unwrap();
        assert!(!report.residual_warning);
        assert_eq!(report.n_pairs, 4);
        let text = report.to_text();
        for key in [
            "ndof = 78",
            "pairs = 4",
            "mode = augmented",
            "residual_warning = false",
            "max_penetration",
        ] {
            assert!(text.contains(key), "missing `{key}` in report:\n{text}");
        }
    }
}
