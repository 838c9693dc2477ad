//! Flat key-value run configuration (`key = value` per line, `#`
//! comments) and its resolution into a ready-to-solve case.

use std::path::PathBuf;

use nalgebra::Vector3;

use crate::interface::CouplingMode;
use crate::mesh::{
    build_two_region_mesh, detect_interface, face_nodes, parse_mesh, InterfaceSpec, Mesh,
};
use crate::solver::{penalty_from_alpha, BoundaryConditions, NeumannFace};
use crate::{elasticity::Material, Error, Result};

#[derive(Debug, Clone)]
pub enum MeshSource {
    File(PathBuf),
    Generate {
        fine_div: [usize; 3],
        coarse_div: [usize; 3],
        fine_box: (Vector3<f64>, Vector3<f64>),
        coarse_box: (Vector3<f64>, Vector3<f64>),
        split_axis: usize,
    },
}

#[derive(Debug, Clone)]
pub enum FixSelector {
    Plane { axis: usize, coord: f64 },
    Set(String),
}

#[derive(Debug, Clone)]
pub struct FixSpec {
    pub selector: FixSelector,
    pub comps: [bool; 3],
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct TractionSpec {
    pub axis: usize,
    pub coord: f64,
    pub traction: Vector3<f64>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mesh: MeshSource,
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    /// ε = alpha·E/h_s unless `epsilon` overrides it.
    pub alpha: f64,
    pub epsilon: Option<f64>,
    pub mode: CouplingMode,
    pub tol: f64,
    pub interface_axis: usize,
    pub interface_coord: f64,
    pub fixes: Vec<FixSpec>,
    pub tractions: Vec<TractionSpec>,
    pub out_dir: Option<PathBuf>,
}

fn parse_axis(s: &str) -> Result<usize> {
    match s {
        "x" | "0" => Ok(0),
        "y" | "1" => Ok(1),
        "z" | "2" => Ok(2),
        other => Err(Error::Config(format!("unknown axis `{other}`"))),
    }
}

fn parse_f64(s: &str, key: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Config(format!("bad number `{s}` for key `{key}`")))
}

fn parse_usize3(s: &str, key: &str) -> Result<[usize; 3]> {
    let v: Vec<usize> = s
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Config(format!("bad `{key}`"))))
        .collect::<Result<_>>()?;
    if v.len() != 3 {
        return Err(Error::Config(format!("`{key}` needs 3 integers")));
    }
    Ok([v[0], v[1], v[2]])
}

fn parse_box(s: &str, key: &str) -> Result<(Vector3<f64>, Vector3<f64>)> {
    let v: Vec<f64> = s
        .split_whitespace()
        .map(|t| parse_f64(t, key))
        .collect::<Result<_>>()?;
    if v.len() != 6 {
        return Err(Error::Config(format!("`{key}` needs 6 numbers")));
    }
    Ok((
        Vector3::new(v[0], v[1], v[2]),
        Vector3::new(v[3], v[4], v[5]),
    ))
}

fn parse_comps(s: &str) -> Result<[bool; 3]> {
    let mut comps = [false; 3];
    for c in s.chars() {
        match c {
            'x' => comps[0] = true,
            'y' => comps[1] = true,
            'z' => comps[2] = true,
            other => return Err(Error::Config(format!("unknown DOF component `{other}`"))),
        }
    }
    Ok(comps)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            kv.push((k.trim().to_string(), v.trim().to_string()));
        }
        let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let require = |key: &str| {
            get(key).ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
        };

        let mesh = match require("mesh")? {
            "generate" => MeshSource::Generate {
                fine_div: parse_usize3(require("fine_div")?, "fine_div")?,
                coarse_div: parse_usize3(require("coarse_div")?, "coarse_div")?,
                fine_box: parse_box(require("fine_box")?, "fine_box")?,
                coarse_box: parse_box(require("coarse_box")?, "coarse_box")?,
                split_axis: parse_axis(require("split_axis")?)?,
            },
            path => MeshSource::File(PathBuf::from(path)),
        };
        let iface = require("interface")?;
        let mut it = iface.split_whitespace();
        let interface_axis = parse_axis(it.next().ok_or_else(|| {
            Error::Config("`interface` needs `<axis> <coord>`".into())
        })?)?;
        let interface_coord = parse_f64(
            it.next()
                .ok_or_else(|| Error::Config("`interface` needs `<axis> <coord>`".into()))?,
            "interface",
        )?;
        let mode = match get("mode").unwrap_or("augmented") {
            "augmented" => CouplingMode::Augmented,
            "penalty_only" => CouplingMode::PenaltyOnly,
            other => return Err(Error::Config(format!("unknown mode `{other}`"))),
        };
        let mut fixes = Vec::new();
        let mut tractions = Vec::new();
        for (k, v) in &kv {
            match k.as_str() {
                "fix" => {
                    let parts: Vec<&str> = v.split_whitespace().collect();
                    let spec = match parts.as_slice() {
                        ["plane", axis, coord, comps, value] => FixSpec {
                            selector: FixSelector::Plane {
                                axis: parse_axis(axis)?,
                                coord: parse_f64(coord, "fix")?,
                            },
                            comps: parse_comps(comps)?,
                            value: parse_f64(value, "fix")?,
                        },
                        ["set", name, comps, value] => FixSpec {
                            selector: FixSelector::Set((*name).to_string()),
                            comps: parse_comps(comps)?,
                            value: parse_f64(value, "fix")?,
                        },
                        _ => {
                            return Err(Error::Config(
                                "fix needs `plane <axis> <coord> <comps> <value>` \
                                 or `set <name> <comps> <value>`"
                                    .into(),
                            ))
                        }
                    };
                    fixes.push(spec);
                }
                "traction" => {
                    let parts: Vec<&str> = v.split_whitespace().collect();
                    if parts.len() != 5 {
                        return Err(Error::Config(
                            "traction needs `<axis> <coord> <tx> <ty> <tz>`".into(),
                        ));
                    }
                    tractions.push(TractionSpec {
                        axis: parse_axis(parts[0])?,
                        coord: parse_f64(parts[1], "traction")?,
                        traction: Vector3::new(
                            parse_f64(parts[2], "traction")?,
                            parse_f64(parts[3], "traction")?,
                            parse_f64(parts[4], "traction")?,
                        ),
                    });
                }
                _ => {}
            }
        }
        Ok(RunConfig {
            mesh,
            youngs_modulus: parse_f64(require("E")?, "E")?,
            poisson_ratio: parse_f64(require("nu")?, "nu")?,
            alpha: get("alpha").map(|s| parse_f64(s, "alpha")).transpose()?.unwrap_or(10.0),
            epsilon: get("epsilon").map(|s| parse_f64(s, "epsilon")).transpose()?,
            mode,
            tol: get("tol").map(|s| parse_f64(s, "tol")).transpose()?.unwrap_or(1e-12),
            interface_axis,
            interface_coord,
            fixes,
            tractions,
            out_dir: get("out_dir").map(PathBuf::from),
        })
    }
}

/// A configuration resolved against a concrete mesh: everything the
/// solver needs.
pub struct ResolvedCase {
    pub mesh: Mesh<f64>,
    pub interface: InterfaceSpec,
    pub material: Material<f64>,
    pub penalty: f64,
    pub mode: CouplingMode,
    pub bcs: BoundaryConditions<f64>,
    pub tol: f64,
}

pub fn resolve_case(cfg: &RunConfig) -> Result<ResolvedCase> {
    let mesh: Mesh<f64> = match &cfg.mesh {
        MeshSource::File(path) => parse_mesh(&std::fs::read_to_string(path)?)?,
        MeshSource::Generate {
            fine_div,
            coarse_div,
            fine_box,
            coarse_box,
            split_axis,
        } => build_two_region_mesh(*fine_div, *coarse_div, *fine_box, *coarse_box, *split_axis)?,
    };
    let interface = detect_interface(&mesh, cfg.interface_axis, cfg.interface_coord)?;
    let material = Material::new(cfg.youngs_modulus, cfg.poisson_ratio)?;
    let penalty = match cfg.epsilon {
        Some(eps) => eps,
        None => penalty_from_alpha(&mesh, &material, &interface, cfg.alpha),
    };
    let bcs = resolve_bcs(&mesh, &cfg.fixes, &cfg.tractions)?;
    Ok(ResolvedCase {
        mesh,
        interface,
        material,
        penalty,
        mode: cfg.mode,
        bcs,
        tol: cfg.tol,
    })
}

/// Expands plane/set selectors into concrete DOF constraints and element
/// faces.
pub fn resolve_bcs(
    mesh: &Mesh<f64>,
    fixes: &[FixSpec],
    tractions: &[TractionSpec],
) -> Result<BoundaryConditions<f64>> {
    let tau = mesh.tau_geo();
    let mut bcs = BoundaryConditions::default();
    let mut seen = std::collections::BTreeSet::new();
    for fix in fixes {
        let nodes: Vec<usize> = match &fix.selector {
            FixSelector::Plane { axis, coord } => (0..mesh.nodes.len())
                .filter(|&n| (mesh.nodes[n][*axis] - coord).abs() <= tau)
                .collect(),
            FixSelector::Set(name) => mesh
                .node_sets
                .get(name)
                .ok_or_else(|| Error::Config(format!("node set `{name}` does not exist")))?
                .clone(),
        };
        if nodes.is_empty() {
            return Err(Error::BoundaryCondition("fix selects no nodes".into()));
        }
        for n in nodes {
            for d in 0..3 {
                if fix.comps[d] && seen.insert(3 * n + d) {
                    bcs.dirichlet.push((3 * n + d, fix.value));
                }
            }
        }
    }
    for t in tractions {
        let mut any = false;
        for e in &mesh.elements {
            for face in 0..6 {
                let on_plane = face_nodes(e, face)
                    .iter()
                    .all(|&n| (mesh.nodes[n][t.axis] - t.coord).abs() <= tau);
                if on_plane {
                    bcs.neumann.push(NeumannFace {
                        elem: e.id,
                        face,
                        traction: t.traction,
                    });
                    any = true;
                }
            }
        }
        if !any {
            return Err(Error::BoundaryCondition(
                "traction selects no element faces".into(),
            ));
        }
    }
    bcs.validate()?;
    Ok(bcs)
}
