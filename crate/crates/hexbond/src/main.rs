use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;

use hexbond::cases;
use hexbond::config::{resolve_case, RunConfig};
use hexbond::export;
use hexbond::interface::CouplingMode;
use hexbond::mesh::{parse_mesh, write_mesh};
use hexbond::projection::{inverse_map_newton, DEFAULT_MAX_ITER, DEFAULT_TOL};
use hexbond::solver::{recover_stresses, run_analysis};

#[derive(Parser)]
#[command(name = "hexbond", about = "Hexahedral FEM with augmented-Lagrangian interface coupling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a case described by a key-value config file
    Run { config: PathBuf },
    /// Uniaxial-tension patch test across a penalty sweep
    PatchTest {
        /// Fine-to-coarse refinement ratio on the interface
        #[arg(long, default_value_t = 2)]
        ratio: usize,
        /// Comma-separated penalty scale factors (epsilon = alpha*E/h)
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 10.0, 100.0, 1000.0])]
        alphas: Vec<f64>,
    },
    /// Cantilever comparison against a uniformly fine conforming mesh
    Beam {
        #[arg(long, default_value_t = 2)]
        ratio: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1.0, 10.0, 100.0, 1000.0])]
        alphas: Vec<f64>,
    },
    /// Project a physical point into an element's reference coordinates
    Project {
        mesh: PathBuf,
        elem: usize,
        x: f64,
        y: f64,
        z: f64,
    },
    /// Export the artifacts of a previous `run` directory
    Export {
        case_dir: PathBuf,
        #[arg(long, value_enum)]
        format: ExportFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Vtk,
    Csv,
}

fn env_tol(default: f64) -> anyhow::Result<f64> {
    match std::env::var("HEXBOND_TOL") {
        Ok(s) => s
            .parse()
            .with_context(|| format!("HEXBOND_TOL is not a number: `{s}`")),
        Err(_) => Ok(default),
    }
}

fn cmd_run(config_path: &Path) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(config_path)
        .with_context(|| format!("reading config {}", config_path.display()))?;
    let cfg = RunConfig::parse(&text)?;
    let mut case = resolve_case(&cfg)?;
    case.tol = env_tol(case.tol)?;
    let report = run_analysis(
        &case.mesh,
        &case.material,
        &case.interface,
        case.penalty,
        case.mode,
        &case.bcs,
        case.tol,
    )?;
    print!("{}", report.to_text());
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("config.txt"), &text)?;
        std::fs::write(dir.join("mesh.txt"), write_mesh(&case.mesh))?;
        std::fs::write(dir.join("u.txt"), export::write_displacements(&report.u))?;
        std::fs::write(dir.join("report.txt"), report.to_text())?;
        println!("artifacts = {}", dir.display());
    }
    if report.residual_warning {
        bail!("solve stage: residual above threshold");
    }
    Ok(())
}

fn cmd_patch_test(ratio: usize, alphas: &[f64]) -> anyhow::Result<()> {
    if ratio < 1 {
        bail!("ratio must be >= 1");
    }
    let tol = env_tol(DEFAULT_TOL)?;
    println!(
        "{:>10} {:>14} {:>14} {:>14} {:>6}",
        "alpha", "stress_dev", "penetration", "max_disp", "pass"
    );
    let mut all_pass = true;
    for &alpha in alphas {
        let out = cases::run_patch(ratio, alpha, CouplingMode::Augmented, tol)?;
        let pass = out.max_stress_deviation <= 1e-8
            && out.report.max_penetration <= 1e-8 * out.max_displacement;
        all_pass &= pass;
        println!(
            "{:>10} {:>14.3e} {:>14.3e} {:>14.3e} {:>6}",
            alpha,
            out.max_stress_deviation,
            out.report.max_penetration,
            out.max_displacement,
            if pass { "yes" } else { "NO" }
        );
    }
    if !all_pass {
        bail!("patch test failed for at least one alpha");
    }
    Ok(())
}

fn cmd_beam(ratio: usize, alphas: &[f64]) -> anyhow::Result<()> {
    if ratio < 1 {
        bail!("ratio must be >= 1");
    }
    let tol = env_tol(DEFAULT_TOL)?;
    let reference = cases::run_beam_reference(ratio, tol)?;
    println!("reference tip deflection = {:.8e}", reference.tip_deflection);
    println!(
        "{:>10} {:>16} {:>12} {:>14}",
        "alpha", "tip_deflection", "rel_err", "penetration"
    );
    for &alpha in alphas {
        let out = cases::run_beam_nonconforming(ratio, alpha, tol)?;
        let rel = (out.tip_deflection - reference.tip_deflection).abs()
            / reference.tip_deflection.abs();
        println!(
            "{:>10} {:>16.8e} {:>12.3e} {:>14.3e}",
            alpha, out.tip_deflection, rel, out.report.max_penetration
        );
    }
    Ok(())
}

fn cmd_project(mesh_path: &Path, elem: usize, point: Vector3<f64>) -> anyhow::Result<()> {
    let mesh = parse_mesh::<f64>(&std::fs::read_to_string(mesh_path)?)?;
    if elem >= mesh.elements.len() {
        bail!("element {elem} out of range (mesh has {})", mesh.elements.len());
    }
    let tol = env_tol(DEFAULT_TOL)?;
    let coords = mesh.elem_coords(elem);
    let result = inverse_map_newton(&coords, &point, tol, DEFAULT_MAX_ITER)?;
    println!(
        "ref_coords = {:?} {:?} {:?}",
        result.ref_coords[0], result.ref_coords[1], result.ref_coords[2]
    );
    println!("iterations = {}", result.iterations);
    println!("converged = {}", result.converged);
    println!("residual = {:?}", result.residual);
    if !result.converged {
        eprintln!("iterate trace:");
        for k in 1..=result.iterations {
            let step = inverse_map_newton(&coords, &point, tol, k)?;
            eprintln!(
                "  iter {:>2}: ({:?}, {:?}, {:?})  residual {:?}",
                k, step.ref_coords[0], step.ref_coords[1], step.ref_coords[2], step.residual
            );
        }
        bail!("projection did not converge");
    }
    Ok(())
}

fn cmd_export(case_dir: &Path, format: ExportFormat) -> anyhow::Result<()> {
    let mesh = parse_mesh::<f64>(&std::fs::read_to_string(case_dir.join("mesh.txt"))?)?;
    let u = export::parse_displacements(&std::fs::read_to_string(case_dir.join("u.txt"))?)?;
    if u.len() != 3 * mesh.nodes.len() {
        bail!("displacement vector does not match the mesh");
    }
    match format {
        ExportFormat::Vtk => {
            let cfg_text = std::fs::read_to_string(case_dir.join("config.txt"))
                .context("config.txt is needed to recover stresses for VTK export")?;
            let cfg = RunConfig::parse(&cfg_text)?;
            let material =
                hexbond::elasticity::Material::new(cfg.youngs_modulus, cfg.poisson_ratio)?;
            let stresses = recover_stresses(&mesh, &material, &u)?;
            let cells = export::cell_average_stresses(&stresses);
            let path = case_dir.join("out.vtk");
            std::fs::write(&path, export::write_vtk_legacy(&mesh, &u, &cells))?;
            println!("wrote {}", path.display());
        }
        ExportFormat::Csv => {
            let path = case_dir.join("out.csv");
            std::fs::write(&path, export::write_csv(&mesh, &u))?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => cmd_run(&config),
        Command::PatchTest { ratio, alphas } => cmd_patch_test(ratio, &alphas),
        Command::Beam { ratio, alphas } => cmd_beam(ratio, &alphas),
        Command::Project { mesh, elem, x, y, z } => {
            cmd_project(&mesh, elem, Vector3::new(x, y, z))
        }
        Command::Export { case_dir, format } => cmd_export(&case_dir, format),
    }
}
