//! Field export: legacy ASCII VTK unstructured grids and plain CSV.

use std::fmt::Write as _;

use nalgebra::{DVector, SVector};

use crate::mesh::Mesh;
use crate::solver::ElementStresses;
use crate::{num, Real, Result};

/// Cell-averaged Voigt stress per element.
pub fn cell_average_stresses<T: Real>(stresses: &[ElementStresses<T>]) -> Vec<SVector<T, 6>> {
    stresses
        .iter()
        .map(|es| {
            let mut avg = SVector::<T, 6>::zeros();
            for s in &es.gauss_stresses {
                avg += s;
            }
            avg / num::<T>(es.gauss_stresses.len() as f64)
        })
        .collect()
}

/// Legacy ASCII VTK unstructured grid with point displacements and
/// cell-averaged Voigt stresses. The hex corner ordering matches
/// VTK_HEXAHEDRON directly.
pub fn write_vtk_legacy<T: Real>(
    mesh: &Mesh<T>,
    u: &DVector<T>,
    cell_stresses: &[SVector<T, 6>],
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "hexbond solution");
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.nodes.len());
    for p in &mesh.nodes {
        let _ = writeln!(s, "{:?} {:?} {:?}", p[0], p[1], p[2]);
    }
    let ne = mesh.elements.len();
    let _ = writeln!(s, "CELLS {} {}", ne, 9 * ne);
    for e in &mesh.elements {
        let _ = write!(s, "8");
        for &n in &e.nodes {
            let _ = write!(s, " {n}");
        }
        let _ = writeln!(s);
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        let _ = writeln!(s, "12");
    }
    let _ = writeln!(s, "POINT_DATA {}", mesh.nodes.len());
    let _ = writeln!(s, "VECTORS displacement double");
    for n in 0..mesh.nodes.len() {
        let _ = writeln!(s, "{:?} {:?} {:?}", u[3 * n], u[3 * n + 1], u[3 * n + 2]);
    }
    let _ = writeln!(s, "CELL_DATA {ne}");
    let _ = writeln!(s, "FIELD stress 1");
    let _ = writeln!(s, "stress_voigt 6 {ne} double");
    for sv in cell_stresses {
        let _ = writeln!(
            s,
            "{:?} {:?} {:?} {:?} {:?} {:?}",
            sv[0], sv[1], sv[2], sv[3], sv[4], sv[5]
        );
    }
    s
}

/// CSV: one line per node with id, coordinates and displacement.
pub fn write_csv<T: Real>(mesh: &Mesh<T>, u: &DVector<T>) -> String {
    let mut s = String::from("node,x,y,z,ux,uy,uz\n");
    for (i, p) in mesh.nodes.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{:?},{:?},{:?},{:?},{:?},{:?}",
            i,
            p[0],
            p[1],
            p[2],
            u[3 * i],
            u[3 * i + 1],
            u[3 * i + 2]
        );
    }
    s
}

/// Displacement vector text format used by the case directory:
/// `displacements <N>` then `<id> <ux> <uy> <uz>` per line.
pub fn write_displacements<T: Real>(u: &DVector<T>) -> String {
    let n = u.len() / 3;
    let mut s = String::new();
    let _ = writeln!(s, "displacements {n}");
    for i in 0..n {
        let _ = writeln!(s, "{} {:?} {:?} {:?}", i, u[3 * i], u[3 * i + 1], u[3 * i + 2]);
    }
    s
}

pub fn parse_displacements(text: &str) -> Result<DVector<f64>> {
    let mut toks = text.split_whitespace();
    let bad = |m: &str| crate::Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, m.to_string()));
    if toks.next() != Some("displacements") {
        return Err(bad("expected `displacements` header"));
    }
    let n: usize = toks
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad("bad displacement count"))?;
    let mut u = DVector::zeros(3 * n);
    for i in 0..n {
        let id: usize = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("bad node id"))?;
        if id != i {
            return Err(bad("node ids must be dense and ordered"));
        }
        for d in 0..3 {
            u[3 * i + d] = toks
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| bad("bad displacement value"))?;
        }
    }
    Ok(u)
}
