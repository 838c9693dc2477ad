//! Hexahedral meshes, two-region non-conforming test geometries, and
//! slave/master interface face detection.
//!
//! Node ordering of a hex follows the reference-corner sign sequence
//! (−−−),(+−−),(++−),(−+−),(−−+),(+−+),(+++),(−++), and faces are numbered
//! 0..5 = (ξ=−1, ξ=+1, η=−1, η=+1, μ=−1, μ=+1).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{SMatrix, Vector3};

use crate::elasticity::shape_eval;
use crate::projection::fit_plane;
use crate::{num, Error, Real, Result};

/// Reference-corner signs (ξ, η, μ) for the 8 nodes of a hex.
pub const CORNER_SIGNS: [[i8; 3]; 8] = [
    [-1, -1, -1],
    [1, -1, -1],
    [1, 1, -1],
    [-1, 1, -1],
    [-1, -1, 1],
    [1, -1, 1],
    [1, 1, 1],
    [-1, 1, 1],
];

/// Local corner indices of each face, counter-clockwise seen from outside.
pub const FACE_NODES: [[usize; 4]; 6] = [
    [0, 4, 7, 3], // ξ = −1
    [1, 2, 6, 5], // ξ = +1
    [0, 1, 5, 4], // η = −1
    [3, 7, 6, 2], // η = +1
    [0, 3, 2, 1], // μ = −1
    [4, 5, 6, 7], // μ = +1
];

/// Pinned reference axis and its value for each face.
pub const FACE_AXIS: [(usize, i8); 6] = [(0, -1), (0, 1), (1, -1), (1, 1), (2, -1), (2, 1)];

/// Free (tangential) reference axes of each face, in increasing order.
pub const FACE_TANGENTS: [[usize; 2]; 6] = [[1, 2], [1, 2], [0, 2], [0, 2], [0, 1], [0, 1]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionTag {
    Fine,
    Coarse,
    Untagged,
}

impl RegionTag {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionTag::Fine => "fine",
            RegionTag::Coarse => "coarse",
            RegionTag::Untagged => "untagged",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HexElement {
    pub id: usize,
    pub nodes: [usize; 8],
}

/// One slave (fine) face bound to the master (coarse) face containing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterfacePair {
    pub slave_elem: usize,
    pub slave_face: usize,
    pub master_elem: usize,
    pub master_face: usize,
}

#[derive(Debug, Clone, Default)]
pub struct InterfaceSpec {
    pub pairs: Vec<InterfacePair>,
}

#[derive(Debug, Clone)]
pub struct Mesh<T: Real> {
    /// Node coordinates; the node id is the index.
    pub nodes: Vec<Vector3<T>>,
    pub elements: Vec<HexElement>,
    pub tags: Vec<RegionTag>,
    pub node_sets: BTreeMap<String, Vec<usize>>,
}

/// Corner node ids of `face`, counter-clockwise viewed from outside.
pub fn face_nodes(elem: &HexElement, face: usize) -> [usize; 4] {
    let loc = FACE_NODES[face];
    [
        elem.nodes[loc[0]],
        elem.nodes[loc[1]],
        elem.nodes[loc[2]],
        elem.nodes[loc[3]],
    ]
}

/// Embeds a 2D face point (α, β) into element reference coordinates by
/// pinning the face-normal coordinate.
pub fn embed_face_point<T: Real>(face: usize, a: T, b: T) -> Vector3<T> {
    let (axis, sign) = FACE_AXIS[face];
    let [t0, t1] = FACE_TANGENTS[face];
    let mut r = Vector3::zeros();
    r[axis] = num::<T>(sign as f64);
    r[t0] = a;
    r[t1] = b;
    r
}

impl<T: Real> Mesh<T> {
    pub fn bbox_diagonal(&self) -> T {
        let mut lo = self.nodes[0];
        let mut hi = self.nodes[0];
        for p in &self.nodes {
            for k in 0..3 {
                if p[k] < lo[k] {
                    lo[k] = p[k];
                }
                if p[k] > hi[k] {
                    hi[k] = p[k];
                }
            }
        }
        (hi - lo).norm()
    }

    /// Coincidence tolerance: 1e-9 times the bounding-box diagonal.
    pub fn tau_geo(&self) -> T {
        num::<T>(1e-9) * self.bbox_diagonal()
    }

    pub fn elem_coords(&self, elem: usize) -> SMatrix<T, 8, 3> {
        let e = &self.elements[elem];
        let mut x = SMatrix::<T, 8, 3>::zeros();
        for k in 0..8 {
            let p = self.nodes[e.nodes[k]];
            for d in 0..3 {
                x[(k, d)] = p[d];
            }
        }
        x
    }

    pub fn element_centroid(&self, elem: usize) -> Vector3<T> {
        let e = &self.elements[elem];
        let mut c = Vector3::zeros();
        for &n in &e.nodes {
            c += self.nodes[n];
        }
        c / num::<T>(8.0)
    }

    pub fn face_corner_coords(&self, elem: usize, face: usize) -> [Vector3<T>; 4] {
        let ids = face_nodes(&self.elements[elem], face);
        [
            self.nodes[ids[0]],
            self.nodes[ids[1]],
            self.nodes[ids[2]],
            self.nodes[ids[3]],
        ]
    }

    pub fn face_centroid(&self, elem: usize, face: usize) -> Vector3<T> {
        let c = self.face_corner_coords(elem, face);
        (c[0] + c[1] + c[2] + c[3]) / num::<T>(4.0)
    }

    /// Face area by 2×2 quadrature of the bilinear face map.
    pub fn face_area(&self, elem: usize, face: usize) -> T {
        let coords = self.elem_coords(elem);
        let g = num::<T>(1.0 / 3.0f64.sqrt());
        let mut area = T::zero();
        for &a in &[-g, g] {
            for &b in &[-g, g] {
                let r = embed_face_point(face, a, b);
                let ev = shape_eval(&r);
                let jac = ev.gradients.transpose() * coords; // rows = tangent vectors
                let [t0, t1] = FACE_TANGENTS[face];
                let ta = jac.row(t0).transpose();
                let tb = jac.row(t1).transpose();
                area += ta.cross(&tb).norm();
            }
        }
        area
    }

    /// Diameter (longest corner-to-corner distance) of an element.
    pub fn element_diameter(&self, elem: usize) -> T {
        let e = &self.elements[elem];
        let mut d = T::zero();
        for i in 0..8 {
            for j in (i + 1)..8 {
                let len = (self.nodes[e.nodes[i]] - self.nodes[e.nodes[j]]).norm();
                if len > d {
                    d = len;
                }
            }
        }
        d
    }

    /// Structural checks: valid node indices, positive corner Jacobians,
    /// and no coincident nodes within one region (duplicates across regions
    /// are intentional at the interface).
    pub fn validate(&self) -> Result<()> {
        if self.elements.len() != self.tags.len() {
            return Err(Error::Mesh("tags length differs from element count".into()));
        }
        for e in &self.elements {
            for &n in &e.nodes {
                if n >= self.nodes.len() {
                    return Err(Error::Mesh(format!(
                        "element {} references node {} out of range",
                        e.id, n
                    )));
                }
            }
        }
        for p in &self.nodes {
            for d in 0..3 {
                if !p[d].is_finite() {
                    return Err(Error::Mesh("non-finite node coordinate".into()));
                }
            }
        }
        // corner Jacobians
        for e in &self.elements {
            let coords = self.elem_coords(e.id);
            for signs in CORNER_SIGNS {
                let r = Vector3::new(
                    num::<T>(signs[0] as f64),
                    num::<T>(signs[1] as f64),
                    num::<T>(signs[2] as f64),
                );
                let ev = shape_eval(&r);
                let jac: SMatrix<T, 3, 3> = (ev.gradients.transpose() * coords).transpose();
                if jac.determinant() <= T::zero() {
                    return Err(Error::Mesh(format!(
                        "element {} has non-positive corner Jacobian",
                        e.id
                    )));
                }
            }
        }
        // per-region coincidence
        let tau = self.tau_geo();
        let mut node_region: Vec<Option<RegionTag>> = vec![None; self.nodes.len()];
        for e in &self.elements {
            for &n in &e.nodes {
                node_region[n] = Some(self.tags[e.id]);
            }
        }
        for i in 0..self.nodes.len() {
            for j in (i + 1)..self.nodes.len() {
                if node_region[i].is_some()
                    && node_region[i] == node_region[j]
                    && (self.nodes[i] - self.nodes[j]).norm() < tau
                {
                    return Err(Error::Mesh(format!(
                        "nodes {i} and {j} coincide within the same region"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Least-squares plane through the 4 corners of an element face.
pub fn fit_plane_face<T: Real>(
    mesh: &Mesh<T>,
    elem: usize,
    face: usize,
) -> Result<crate::projection::PlaneEquation<T>> {
    fit_plane(&mesh.face_corner_coords(elem, face))
}

fn axis_name(axis: usize) -> char {
    ['x', 'y', 'z'][axis]
}

/// Structured block of hexes on an axis-aligned box.
pub fn build_block_mesh<T: Real>(
    divisions: [usize; 3],
    lo: Vector3<T>,
    hi: Vector3<T>,
    tag: RegionTag,
) -> Result<Mesh<T>> {
    for d in 0..3 {
        if divisions[d] == 0 {
            return Err(Error::Mesh(format!("zero divisions along {}", axis_name(d))));
        }
        if hi[d] <= lo[d] {
            return Err(Error::Mesh(format!("degenerate extent along {}", axis_name(d))));
        }
    }
    let [nx, ny, nz] = divisions;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    let idx = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                let f = |v: usize, n: usize, d: usize| {
                    lo[d] + (hi[d] - lo[d]) * num::<T>(v as f64 / n as f64)
                };
                nodes.push(Vector3::new(f(i, nx, 0), f(j, ny, 1), f(k, nz, 2)));
            }
        }
    }
    let mut elements = Vec::with_capacity(nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let mut conn = [0usize; 8];
                for (c, s) in CORNER_SIGNS.iter().enumerate() {
                    conn[c] = idx(
                        i + usize::from(s[0] > 0),
                        j + usize::from(s[1] > 0),
                        k + usize::from(s[2] > 0),
                    );
                }
                elements.push(HexElement {
                    id: elements.len(),
                    nodes: conn,
                });
            }
        }
    }
    let tags = vec![tag; elements.len()];
    Ok(Mesh {
        nodes,
        elements,
        tags,
        node_sets: BTreeMap::new(),
    })
}

/// Two structured blocks abutting at a shared plane orthogonal to
/// `split_axis`. Nodes on the shared plane are kept distinct per region;
/// the coupling is purely through the interface terms.
pub fn build_two_region_mesh<T: Real>(
    fine_divisions: [usize; 3],
    coarse_divisions: [usize; 3],
    fine_box: (Vector3<T>, Vector3<T>),
    coarse_box: (Vector3<T>, Vector3<T>),
    split_axis: usize,
) -> Result<Mesh<T>> {
    let scale = (fine_box.1 - fine_box.0).norm() + (coarse_box.1 - coarse_box.0).norm();
    let tol = num::<T>(1e-12) * scale;
    // the boxes must share exactly one full face orthogonal to split_axis
    let fine_hi_meets = (fine_box.1[split_axis] - coarse_box.0[split_axis]).abs() < tol;
    let coarse_hi_meets = (coarse_box.1[split_axis] - fine_box.0[split_axis]).abs() < tol;
    if !(fine_hi_meets ^ coarse_hi_meets) {
        return Err(Error::Mesh(
            "region boxes do not share a face orthogonal to the split axis".into(),
        ));
    }
    for d in 0..3 {
        if d == split_axis {
            continue;
        }
        if (fine_box.0[d] - coarse_box.0[d]).abs() >= tol
            || (fine_box.1[d] - coarse_box.1[d]).abs() >= tol
        {
            return Err(Error::Mesh(format!(
                "tangential extents differ along {}",
                axis_name(d)
            )));
        }
        if fine_divisions[d] % coarse_divisions[d] != 0 {
            return Err(Error::Mesh(format!(
                "refinement ratio along {} is not an integer ({} fine vs {} coarse)",
                axis_name(d),
                fine_divisions[d],
                coarse_divisions[d]
            )));
        }
    }
    let fine = build_block_mesh(fine_divisions, fine_box.0, fine_box.1, RegionTag::Fine)?;
    let coarse = build_block_mesh(
        coarse_divisions,
        coarse_box.0,
        coarse_box.1,
        RegionTag::Coarse,
    )?;
    let offset = fine.nodes.len();
    let mut nodes = fine.nodes;
    nodes.extend(coarse.nodes);
    let mut elements = fine.elements;
    for e in coarse.elements {
        let mut conn = e.nodes;
        for n in &mut conn {
            *n += offset;
        }
        elements.push(HexElement {
            id: elements.len(),
            nodes: conn,
        });
    }
    let mut tags = fine.tags;
    tags.extend(coarse.tags);
    let mesh = Mesh {
        nodes,
        elements,
        tags,
        node_sets: BTreeMap::new(),
    };
    mesh.validate()?;
    Ok(mesh)
}

/// 2D point-in-convex-quad test on the plane orthogonal to `axis`.
fn centroid_in_face<T: Real>(c: &Vector3<T>, quad: &[Vector3<T>; 4], axis: usize, tol: T) -> bool {
    let (u, v) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut pos = false;
    let mut neg = false;
    for i in 0..4 {
        let a = quad[i];
        let b = quad[(i + 1) % 4];
        let cross = (b[u] - a[u]) * (c[v] - a[v]) - (b[v] - a[v]) * (c[u] - a[u]);
        if cross > tol {
            pos = true;
        }
        if cross < -tol {
            neg = true;
        }
    }
    !(pos && neg)
}

/// Finds all (slave face, master face) pairs on the hint plane. Fine-side
/// faces are slaves; each must fall inside a coarse-side face.
pub fn detect_interface<T: Real>(
    mesh: &Mesh<T>,
    axis: usize,
    coord: T,
) -> Result<InterfaceSpec> {
    let tau = mesh.tau_geo();
    let mut slave_faces = Vec::new();
    let mut master_faces = Vec::new();
    for e in &mesh.elements {
        let on_plane = |face: usize| {
            face_nodes(e, face)
                .iter()
                .all(|&n| (mesh.nodes[n][axis] - coord).abs() <= tau)
        };
        for face in 0..6 {
            if !on_plane(face) {
                continue;
            }
            match mesh.tags[e.id] {
                RegionTag::Fine => slave_faces.push((e.id, face)),
                RegionTag::Coarse => master_faces.push((e.id, face)),
                RegionTag::Untagged => {}
            }
        }
    }
    if slave_faces.is_empty() || master_faces.is_empty() {
        return Err(Error::Interface("no interface found".into()));
    }
    let mut pairs = Vec::new();
    for (se, sf) in slave_faces {
        let c = mesh.face_centroid(se, sf);
        let mut found = None;
        for &(me, mf) in &master_faces {
            let quad = mesh.face_corner_coords(me, mf);
            if centroid_in_face(&c, &quad, axis, tau) {
                found = Some((me, mf));
                break;
            }
        }
        let (me, mf) = found.ok_or_else(|| {
            Error::Interface(format!(
                "orphan slave face: element {se} face {sf} has no containing master face"
            ))
        })?;
        // slave nodes must lie on the master face's fitted plane
        let plane = fit_plane(&mesh.face_corner_coords(me, mf))?;
        for p in mesh.face_corner_coords(se, sf) {
            if (plane.unit_normal.dot(&p) - plane.offset).abs() > tau {
                return Err(Error::Interface(format!(
                    "slave face of element {se} is off the master plane of element {me}"
                )));
            }
        }
        // fine side must be the smaller face
        if mesh.face_area(se, sf) > mesh.face_area(me, mf) + tau * tau {
            return Err(Error::Interface(format!(
                "slave face of element {se} is larger than its master face (element {me})"
            )));
        }
        pairs.push(InterfacePair {
            slave_elem: se,
            slave_face: sf,
            master_elem: me,
            master_face: mf,
        });
    }
    pairs.sort_by_key(|p| (p.slave_elem, p.slave_face));
    Ok(InterfaceSpec { pairs })
}

/// Writes the line-oriented mesh text format.
pub fn write_mesh<T: Real>(mesh: &Mesh<T>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "nodes {}", mesh.nodes.len());
    for (i, p) in mesh.nodes.iter().enumerate() {
        let _ = writeln!(s, "{i} {:?} {:?} {:?}", p[0], p[1], p[2]);
    }
    let _ = writeln!(s, "elements {}", mesh.elements.len());
    for e in &mesh.elements {
        let _ = write!(s, "{} {}", e.id, mesh.tags[e.id].as_str());
        for &n in &e.nodes {
            let _ = write!(s, " {n}");
        }
        let _ = writeln!(s);
    }
    for (name, ids) in &mesh.node_sets {
        let _ = writeln!(s, "nodeset {} {}", name, ids.len());
        for id in ids {
            let _ = writeln!(s, "{id}");
        }
    }
    s
}

/// Parses the line-oriented mesh text format.
pub fn parse_mesh<T: Real>(text: &str) -> Result<Mesh<T>> {
    struct Tokens<'a> {
        toks: Vec<&'a str>,
        cursor: usize,
    }
    impl<'a> Tokens<'a> {
        fn next(&mut self, what: &str) -> Result<&'a str> {
            let tok = self
                .toks
                .get(self.cursor)
                .ok_or_else(|| Error::Mesh(format!("mesh file: missing {what}")))?;
            self.cursor += 1;
            Ok(tok)
        }
        fn has_more(&self) -> bool {
            self.cursor < self.toks.len()
        }
    }
    let mut tk = Tokens {
        toks: text.split_whitespace().collect(),
        cursor: 0,
    };
    let bad = |what: &str| Error::Mesh(format!("mesh file: {what}"));
    let expect_kw = |tok: &str, kw: &str| -> Result<()> {
        if tok != kw {
            return Err(bad(&format!("expected `{kw}`, found `{tok}`")));
        }
        Ok(())
    };
    expect_kw(tk.next("nodes keyword")?, "nodes")?;
    let n: usize = tk.next("node count")?
        .parse()
        .map_err(|_| bad("bad node count"))?;
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let id: usize = tk.next("node id")?.parse().map_err(|_| bad("bad node id"))?;
        if id != i {
            return Err(bad("node ids must be dense 0..N-1 in order"));
        }
        let mut p = Vector3::zeros();
        for d in 0..3 {
            let v: f64 = tk.next("coordinate")?
                .parse()
                .map_err(|_| bad("bad coordinate"))?;
            p[d] = num::<T>(v);
        }
        nodes.push(p);
    }
    expect_kw(tk.next("elements keyword")?, "elements")?;
    let ne: usize = tk.next("element count")?
        .parse()
        .map_err(|_| bad("bad element count"))?;
    let mut elements = Vec::with_capacity(ne);
    let mut tags = Vec::with_capacity(ne);
    for i in 0..ne {
        let id: usize = tk.next("element id")?
            .parse()
            .map_err(|_| bad("bad element id"))?;
        if id != i {
            return Err(bad("element ids must be dense 0..E-1 in order"));
        }
        let tag = match tk.next("region tag")? {
            "fine" => RegionTag::Fine,
            "coarse" => RegionTag::Coarse,
            "untagged" => RegionTag::Untagged,
            other => return Err(bad(&format!("unknown region tag `{other}`"))),
        };
        let mut conn = [0usize; 8];
        for c in &mut conn {
            *c = tk.next("connectivity")?
                .parse()
                .map_err(|_| bad("bad node index"))?;
        }
        elements.push(HexElement { id, nodes: conn });
        tags.push(tag);
    }
    let mut node_sets = BTreeMap::new();
    while tk.has_more() {
        expect_kw(tk.next("nodeset keyword")?, "nodeset")?;
        let name = tk.next("nodeset name")?.to_string();
        let count: usize = tk.next("nodeset count")?
            .parse()
            .map_err(|_| bad("bad nodeset count"))?;
        let mut ids = Vec::with_capacity(count);
        for _ in 0..count {
            ids.push(
                tk.next("nodeset id")?
                    .parse()
                    .map_err(|_| bad("bad nodeset id"))?,
            );
        }
        node_sets.insert(name, ids);
    }
    let mesh = Mesh {
        nodes,
        elements,
        tags,
        node_sets,
    };
    mesh.validate()?;
    Ok(mesh)
}
