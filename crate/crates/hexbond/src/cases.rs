//! Built-in verification cases: the uniaxial-tension patch test on the
//! two-region mesh, a cantilever beam with a non-conforming interface,
//! and the 1:1 conforming-consistency pair.

use nalgebra::Vector3;

use crate::config::{resolve_bcs, FixSelector, FixSpec, TractionSpec};
use crate::elasticity::Material;
use crate::interface::CouplingMode;
use crate::mesh::{build_block_mesh, build_two_region_mesh, detect_interface, InterfaceSpec, Mesh, RegionTag};
use crate::solver::{penalty_from_alpha, recover_stresses, run_analysis, SolveReport};
use crate::Result;

pub const PATCH_E: f64 = 1.0;
pub const PATCH_NU: f64 = 0.3;
pub const PATCH_SIGMA: f64 = 1.0;

/// Two stacked unit cubes split at z = 1, fine side refined `ratio`×
/// per tangential axis.
pub fn patch_mesh(ratio: usize) -> Result<Mesh<f64>> {
    build_two_region_mesh(
        [ratio, ratio, 1],
        [1, 1, 1],
        (Vector3::new(0.0, 0.0, 0.0), Vector3::new(1.0, 1.0, 1.0)),
        (Vector3::new(0.0, 0.0, 1.0), Vector3::new(1.0, 1.0, 2.0)),
        2,
    )
}

pub struct PatchOutcome {
    pub report: SolveReport<f64>,
    /// max |σ − σ_exact| over every Gauss point of every element.
    pub max_stress_deviation: f64,
    pub max_displacement: f64,
}

/// Uniaxial tension σ_zz = 1 through the non-conforming interface:
/// rollers on the three coordinate planes, traction on top.
pub fn run_patch(ratio: usize, alpha: f64, mode: CouplingMode, tol: f64) -> Result<PatchOutcome> {
    let mesh = patch_mesh(ratio)?;
    let interface = detect_interface(&mesh, 2, 1.0)?;
    let material = Material::new(PATCH_E, PATCH_NU)?;
    let penalty = penalty_from_alpha(&mesh, &material, &interface, alpha);
    let plane_fix = |axis: usize, comps: [bool; 3]| FixSpec {
        selector: FixSelector::Plane { axis, coord: 0.0 },
        comps,
        value: 0.0,
    };
    let bcs = resolve_bcs(
        &mesh,
        &[
            plane_fix(0, [true, false, false]),
            plane_fix(1, [false, true, false]),
            plane_fix(2, [false, false, true]),
        ],
        &[TractionSpec {
            axis: 2,
            coord: 2.0,
            traction: Vector3::new(0.0, 0.0, PATCH_SIGMA),
        }],
    )?;
    let report = run_analysis(&mesh, &material, &interface, penalty, mode, &bcs, tol)?;
    let stresses = recover_stresses(&mesh, &material, &report.u)?;
    let exact = [0.0, 0.0, PATCH_SIGMA, 0.0, 0.0, 0.0];
    let mut dev: f64 = 0.0;
    for es in &stresses {
        for s in &es.gauss_stresses {
            for k in 0..6 {
                dev = dev.max((s[k] - exact[k]).abs());
            }
        }
    }
    let max_displacement = report.max_displacement();
    Ok(PatchOutcome {
        report,
        max_stress_deviation: dev,
        max_displacement,
    })
}

pub const BEAM_E: f64 = 1.0;
pub const BEAM_NU: f64 = 0.3;
pub const BEAM_TIP_TRACTION: f64 = -0.01;
pub const BEAM_LENGTH: f64 = 2.0;

/// Cantilever along x: fine block x ∈ [0, 1] with `ratio`³ elements,
/// plus one coarse unit-cube element at the free end (x ∈ [1, 2]); for
/// ratio 2 that is 8 fine elements and 1 coarse element `ratio`× their
/// size.
pub fn beam_nonconforming_mesh(ratio: usize) -> Result<Mesh<f64>> {
    build_two_region_mesh(
        [ratio, ratio, ratio],
        [1, 1, 1],
        (Vector3::new(0.0, 0.0, 0.0), Vector3::new(1.0, 1.0, 1.0)),
        (Vector3::new(1.0, 0.0, 0.0), Vector3::new(2.0, 1.0, 1.0)),
        0,
    )
}

/// Uniformly fine conforming reference for the cantilever.
pub fn beam_reference_mesh(ratio: usize) -> Result<Mesh<f64>> {
    build_block_mesh(
        [2 * ratio, ratio, ratio],
        Vector3::new(0.0, 0.0, 0.0),
        Vector3::new(BEAM_LENGTH, 1.0, 1.0),
        RegionTag::Untagged,
    )
}

pub struct BeamOutcome {
    pub report: SolveReport<f64>,
    /// Mean u_z over the tip-face nodes.
    pub tip_deflection: f64,
}

fn cantilever_bcs(mesh: &Mesh<f64>, length: f64) -> Result<crate::solver::BoundaryConditions<f64>> {
    resolve_bcs(
        mesh,
        &[FixSpec {
            selector: FixSelector::Plane { axis: 0, coord: 0.0 },
            comps: [true, true, true],
            value: 0.0,
        }],
        &[TractionSpec {
            axis: 0,
            coord: length,
            traction: Vector3::new(0.0, 0.0, BEAM_TIP_TRACTION),
        }],
    )
}

pub fn tip_deflection(mesh: &Mesh<f64>, u: &nalgebra::DVector<f64>, length: f64) -> f64 {
    let tau = mesh.tau_geo();
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, p) in mesh.nodes.iter().enumerate() {
        if (p[0] - length).abs() <= tau {
            sum += u[3 * i + 2];
            count += 1;
        }
    }
    sum / count as f64
}

pub fn run_beam_nonconforming(ratio: usize, alpha: f64, tol: f64) -> Result<BeamOutcome> {
    let mesh = beam_nonconforming_mesh(ratio)?;
    let interface = detect_interface(&mesh, 0, 1.0)?;
    let material = Material::new(BEAM_E, BEAM_NU)?;
    let penalty = penalty_from_alpha(&mesh, &material, &interface, alpha);
    let bcs = cantilever_bcs(&mesh, BEAM_LENGTH)?;
    let report = run_analysis(
        &mesh,
        &material,
        &interface,
        penalty,
        CouplingMode::Augmented,
        &bcs,
        tol,
    )?;
    let tip = tip_deflection(&mesh, &report.u, BEAM_LENGTH);
    Ok(BeamOutcome {
        report,
        tip_deflection: tip,
    })
}

pub fn run_beam_reference(ratio: usize, tol: f64) -> Result<BeamOutcome> {
    let mesh = beam_reference_mesh(ratio)?;
    let interface = InterfaceSpec::default();
    let material = Material::new(BEAM_E, BEAM_NU)?;
    let bcs = cantilever_bcs(&mesh, BEAM_LENGTH)?;
    let report = run_analysis(
        &mesh,
        &material,
        &interface,
        0.0,
        CouplingMode::Augmented,
        &bcs,
        tol,
    )?;
    let tip = tip_deflection(&mesh, &report.u, BEAM_LENGTH);
    Ok(BeamOutcome {
        report,
        tip_deflection: tip,
    })
}

/// 1:1 interface cantilever (both sides 2×2×2 unit-cube blocks along x)
/// and the merged-node conforming mesh of the same geometry.
pub struct ConformingComparison {
    pub coupled: SolveReport<f64>,
    pub merged: SolveReport<f64>,
    /// ‖U_coupled − U_merged‖ / ‖U_merged‖ over coordinate-matched nodes.
    pub relative_difference: f64,
}

pub fn run_conforming_comparison(alpha: f64, tol: f64) -> Result<ConformingComparison> {
    let len = 2.0;
    let split = build_two_region_mesh(
        [2, 2, 2],
        [2, 2, 2],
        (Vector3::new(0.0, 0.0, 0.0), Vector3::new(1.0, 1.0, 1.0)),
        (Vector3::new(1.0, 0.0, 0.0), Vector3::new(2.0, 1.0, 1.0)),
        0,
    )?;
    let merged = build_block_mesh(
        [4, 2, 2],
        Vector3::new(0.0, 0.0, 0.0),
        Vector3::new(2.0, 1.0, 1.0),
        RegionTag::Untagged,
    )?;
    let material = Material::new(BEAM_E, BEAM_NU)?;

    let interface = detect_interface(&split, 0, 1.0)?;
    let penalty = penalty_from_alpha(&split, &material, &interface, alpha);
    let coupled_report = run_analysis(
        &split,
        &material,
        &interface,
        penalty,
        CouplingMode::Augmented,
        &cantilever_bcs(&split, len)?,
        tol,
    )?;
    let merged_report = run_analysis(
        &merged,
        &material,
        &InterfaceSpec::default(),
        0.0,
        CouplingMode::Augmented,
        &cantilever_bcs(&merged, len)?,
        tol,
    )?;

    // match split nodes onto merged nodes by coordinates
    let tau = merged.tau_geo();
    let mut diff2 = 0.0;
    let mut ref2 = 0.0;
    for (i, p) in split.nodes.iter().enumerate() {
        let j = merged
            .nodes
            .iter()
            .position(|q| (q - p).norm() <= tau)
            .expect("split node has a merged counterpart");
        for d in 0..3 {
            let a = coupled_report.u[3 * i + d];
            let b = merged_report.u[3 * j + d];
            diff2 += (a - b) * (a - b);
            ref2 += b * b;
        }
    }
    let relative_difference = diff2.sqrt() / ref2.sqrt();
    Ok(ConformingComparison {
        coupled: coupled_report,
        merged: merged_report,
        relative_difference,
    })
}
