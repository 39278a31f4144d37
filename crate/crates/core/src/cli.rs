//! Command-line surface: `generate`, `synth`, `reconstruct`, `interpolate`,
//! `compare` and `export-vtk` subcommands over scenario fixtures.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::field::{rmse, TemperatureField};
use crate::interp::interpolate_field;
use crate::mesh::{generate_plate_with_hole, parse_mesh, serialize_mesh, Material, Mesh, PlateConfig};
use crate::optimize::{reconstruct, FilterSettings, ReconstructProblem};
use crate::scenario::Scenario;
use crate::sensors::synthesize_measurements;
use crate::vtk::write_vtk;

#[derive(Parser)]
#[command(
    name = "thermofield",
    about = "Temperature-field reconstruction from displacement/strain sensors",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a plate-with-hole mesh file
    Generate(GenerateArgs),
    /// Synthesize sensor measurements from the scenario's target field
    Synth(SynthArgs),
    /// Reconstruct the temperature field from measurements (adjoint method)
    Reconstruct(ReconstructArgs),
    /// Interpolate the temperature field from point samples (knn/ok/uk) or
    /// run the adjoint reconstruction (method = adjoint)
    Interpolate(InterpolateArgs),
    /// Compare fields against a reference and tabulate RMSE
    Compare(CompareArgs),
    /// Export a mesh + nodal field as legacy ASCII VTK
    ExportVtk(ExportVtkArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 60.0)]
    length: f64,
    #[arg(long, default_value_t = 30.0)]
    height: f64,
    #[arg(long, default_value_t = 10.0)]
    hole_diameter: f64,
    #[arg(long, default_value_t = 30.0)]
    hole_x: f64,
    #[arg(long, default_value_t = 15.0)]
    hole_y: f64,
    #[arg(long, default_value_t = 2.0)]
    edge: f64,
    #[arg(long, default_value_t = 0.1)]
    thickness: f64,
    #[arg(long, default_value_t = 7800.0)]
    rho: f64,
    #[arg(long, default_value_t = 2e12)]
    young: f64,
    #[arg(long, default_value_t = 0.3)]
    poisson: f64,
    #[arg(long, default_value_t = 1e-5)]
    alpha: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Gaussian noise stddev added to the readings (default: none)
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct ReconstructArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Disable the vertex-morphing/sigmoid chain and update raw nodal ΔT
    #[arg(long)]
    no_filter: bool,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Write a field snapshot CSV every k iterations (0 = off)
    #[arg(long, default_value_t = 0)]
    snapshot_every: usize,
}

#[derive(Args)]
struct InterpolateArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// knn | ok | uk | adjoint
    #[arg(long)]
    method: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    no_filter: bool,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// Reference field CSV (e.g. the target field)
    #[arg(long)]
    reference: PathBuf,
    /// Candidate field CSVs
    #[arg(long, required = true, num_args = 1..)]
    fields: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Also emit node masks for `delta_t > threshold`
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args)]
struct ExportVtkArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    field: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "thermofield")]
    title: String,
}

fn load_mesh(path: &Path) -> Result<Mesh> {
    parse_mesh(&std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?)
}

fn ensure_out_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path)?;
    Ok(())
}

fn run_reconstruction(
    scenario: &Scenario,
    out: &Path,
    no_filter: bool,
    max_iter: Option<usize>,
    threads: usize,
    snapshot_every: usize,
) -> Result<()> {
    ensure_out_dir(out)?;
    let measurements = scenario.measurements(threads)?;
    let mut optimizer = scenario.optimizer.clone();
    if let Some(m) = max_iter {
        optimizer.max_iterations = m;
    }
    let filter = FilterSettings {
        enabled: scenario.filter.enabled && !no_filter,
        ..scenario.filter.clone()
    };
    let problem = ReconstructProblem {
        mesh: &scenario.mesh,
        load_cases: &scenario.load_cases,
        measurements: &measurements,
        sensors: &scenario.sensors,
    };
    let result = reconstruct(&problem, &filter, &optimizer, threads, snapshot_every)?;
    result.field.write_csv(&out.join("field.csv"))?;
    std::fs::write(out.join("convergence.csv"), result.convergence_csv())?;
    for (iteration, snapshot) in &result.snapshots {
        snapshot.write_csv(&out.join(format!("field_iter_{iteration}.csv")))?;
    }
    println!(
        "reconstruct: converged={} iterations={} cost {:.6e} -> {:.6e} ({:.2?})",
        result.converged,
        result.iterations,
        result.initial_cost(),
        result.final_cost(),
        result.wall_time
    );
    Ok(())
}

/// Executes one CLI invocation; `args` includes the program name.
pub fn run<I>(args: I) -> Result<()>
where
    I: IntoIterator<Item = String>,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Validation(e.to_string()))?;
    match cli.command {
        Command::Generate(a) => {
            let mesh = generate_plate_with_hole(&PlateConfig {
                length: a.length,
                height: a.height,
                hole_diameter: a.hole_diameter,
                hole_center: [a.hole_x, a.hole_y],
                target_edge_size: a.edge,
                thickness: a.thickness,
                material: Material {
                    density: a.rho,
                    young: a.young,
                    poisson: a.poisson,
                    alpha: a.alpha,
                },
            })?;
            if let Some(parent) = a.out.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(&a.out, serialize_mesh(&mesh))?;
            println!(
                "generate: {} nodes, {} elements -> {}",
                mesh.node_count(),
                mesh.elements.len(),
                a.out.display()
            );
            Ok(())
        }
        Command::Synth(a) => {
            let scenario = Scenario::load(&a.scenario)?;
            let target = scenario.target.as_ref().ok_or_else(|| {
                Error::Validation("synth requires a scenario with a target spec".into())
            })?;
            ensure_out_dir(&a.out)?;
            let target_field = target.field(&scenario.mesh);
            let measurements = synthesize_measurements(
                &scenario.mesh,
                &scenario.load_cases,
                &target_field,
                &scenario.sensors,
                a.noise,
                a.seed,
                a.threads,
            )?;
            std::fs::write(a.out.join("measurements.csv"), measurements.to_csv())?;
            target_field.write_csv(&a.out.join("target_field.csv"))?;
            println!(
                "synth: {} cases x {} sensors -> {}",
                measurements.case_ids.len(),
                measurements.sensor_ids.len(),
                a.out.display()
            );
            Ok(())
        }
        Command::Reconstruct(a) => {
            let scenario = Scenario::load(&a.scenario)?;
            run_reconstruction(
                &scenario,
                &a.out,
                a.no_filter,
                a.max_iter,
                a.threads,
                a.snapshot_every,
            )
        }
        Command::Interpolate(a) => {
            let scenario = Scenario::load(&a.scenario)?;
            if a.method == "adjoint" {
                return run_reconstruction(
                    &scenario,
                    &a.out,
                    a.no_filter,
                    a.max_iter,
                    a.threads,
                    0,
                );
            }
            let target = scenario.target.as_ref().ok_or_else(|| {
                Error::Validation(
                    "interpolate requires a scenario with a target spec (temperature samples \
                     are read at the sensor locations)"
                        .into(),
                )
            })?;
            ensure_out_dir(&a.out)?;
            let samples = target.samples_at_sensors(&scenario.sensors)?;
            let method = scenario.interp_method(&a.method)?;
            let outcome = interpolate_field(&scenario.mesh, &samples, method, a.threads)?;
            for flag in &outcome.flags {
                eprintln!("warning: {flag}");
            }
            let path = a.out.join(format!("field_{}.csv", a.method));
            outcome.field.write_csv(&path)?;
            println!("interpolate: {} -> {}", a.method, path.display());
            Ok(())
        }
        Command::Compare(a) => {
            let mesh = load_mesh(&a.mesh)?;
            let reference = TemperatureField::read_csv(&a.reference)?;
            reference.check_mesh(&mesh)?;
            ensure_out_dir(&a.out)?;
            let mut table = String::from("field,rmse\n");
            let mut pretty = String::new();
            for path in &a.fields {
                let field = TemperatureField::read_csv(path)?;
                field.check_mesh(&mesh)?;
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                let value = rmse(&field, &reference)?;
                table.push_str(&format!("{name},{value}\n"));
                pretty.push_str(&format!("{name:<24} rmse = {value:.6}\n"));
                if let Some(threshold) = a.threshold {
                    let mut mask = String::from("node_id,mask\n");
                    for (i, v) in field.values.iter().enumerate() {
                        mask.push_str(&format!("{i},{}\n", u8::from(*v > threshold)));
                    }
                    std::fs::write(a.out.join(format!("mask_{name}.csv")), mask)?;
                }
            }
            std::fs::write(a.out.join("rmse.csv"), &table)?;
            std::fs::write(a.out.join("rmse.txt"), &pretty)?;
            print!("{pretty}");
            Ok(())
        }
        Command::ExportVtk(a) => {
            let mesh = load_mesh(&a.mesh)?;
            let field = TemperatureField::read_csv(&a.field)?;
            let text = write_vtk(&mesh, &field, &a.title)?;
            if let Some(parent) = a.out.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(&a.out, text)?;
            println!("export-vtk: {}", a.out.display());
            Ok(())
        }
    }
}
