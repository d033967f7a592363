//! Command-line front end: configuration ingestion, subcommand dispatch,
//! table and manifest emission.
//!
//! Subcommands: `response`, `heff-matrix`, `lamb`, `cp-surface`,
//! `dispersion`, `oracle compare` and `rerun`. Each run writes CSV tables
//! (headers name their units; model units unless stated otherwise) plus a
//! JSON [`RunManifest`](crate::manifest::RunManifest) into the output
//! directory. All reductions are ordered, so re-running from a manifest
//! reproduces the tables byte for byte.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;
use num_complex::Complex64;

use crate::discrete::{enumerate_states, DiscreteMode, DiscreteModeSet};
use crate::error::{MqedError, Result};
use crate::manifest::RunManifest;
use crate::model::{AtomModel, PhysicalConstants};
use crate::modes::{Cutoff, GeometrySpec, QuadratureSpec};
use crate::response::{alpha_dynamic, beta_ground};
use crate::shifts::{
    cp_surface_potential, dispersion_curve, fit_power_law, force_at, vacuum_shift,
    PotentialCurve,
};

#[derive(Parser)]
#[command(
    name = "mqed",
    version,
    about = "Second-order effective Hamiltonians of molecular QED: response \
             functions, vacuum shifts, Casimir-Polder and dispersion energies"
)]
struct Cli {
    /// Output directory for CSV tables and the run manifest.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate atomic response tensors over a frequency grid.
    Response(ResponseArgs),
    /// Emit the dense effective-Hamiltonian matrix over an enumerated basis.
    #[command(name = "heff-matrix")]
    HeffMatrix(HeffMatrixArgs),
    /// Regularized vacuum (Lamb-type) energy shift.
    Lamb(LambArgs),
    /// Atom-surface Casimir-Polder potential over a height grid.
    #[command(name = "cp-surface")]
    CpSurface(CpSurfaceArgs),
    /// Two-atom dispersion potential over a separation grid.
    Dispersion(DispersionArgs),
    /// Validation oracles.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
    /// Replay a previous run from its manifest.
    Rerun(RerunArgs),
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Fourth-order perturbation theory vs. the effective-Hamiltonian path.
    Compare(OracleCompareArgs),
}

#[derive(Args)]
struct ResponseArgs {
    /// Atom model configuration file.
    #[arg(long)]
    model: PathBuf,
    /// Largest frequency on the grid (model units, E/hbar).
    #[arg(long, default_value_t = 2.0)]
    omega_max: f64,
    /// Number of grid points from 0 to --omega-max inclusive.
    #[arg(long, default_value_t = 50)]
    points: usize,
    /// Response kind: the pole-free beta function or the dynamic
    /// polarizability alpha.
    #[arg(long, default_value = "beta", value_parser = ["beta", "alpha"])]
    kind: String,
    /// Phenomenological damping gamma for alpha (model units).
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
}

#[derive(Args)]
struct HeffMatrixArgs {
    /// Atom model configuration file.
    #[arg(long)]
    model: PathBuf,
    /// Discrete mode set configuration file.
    #[arg(long)]
    modes: PathBuf,
    /// Photon-number cap for the enumerated basis.
    #[arg(long, default_value_t = 2)]
    max_photons: u32,
}

#[derive(Args)]
struct QuadArgs {
    /// Radial quadrature nodes.
    #[arg(long, default_value_t = 64)]
    nodes_radial: usize,
    /// Angular quadrature nodes.
    #[arg(long, default_value_t = 16)]
    nodes_angular: usize,
    /// Exponential UV cutoff scale k_c (model units, E/(hbar c)).
    #[arg(long, default_value_t = 40.0)]
    cutoff: f64,
    /// Target relative tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

impl QuadArgs {
    fn spec(&self) -> Result<QuadratureSpec> {
        QuadratureSpec::new(
            self.nodes_radial,
            self.nodes_angular,
            Cutoff::Exponential(self.cutoff),
            self.tol,
        )
    }

    fn record(&self, manifest: &mut RunManifest) {
        manifest.set_param("nodes_radial", self.nodes_radial);
        manifest.set_param("nodes_angular", self.nodes_angular);
        manifest.set_param("cutoff", self.cutoff);
        manifest.set_param("tol", self.tol);
    }
}

#[derive(Args)]
struct LambArgs {
    /// Atom model configuration file.
    #[arg(long)]
    model: PathBuf,
    /// Field geometry.
    #[arg(long, default_value = "free", value_parser = ["free", "plane"])]
    geometry: String,
    /// Atom height above the plane (plane geometry only, model units).
    #[arg(long, default_value_t = 1.0)]
    height: f64,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args)]
struct CpSurfaceArgs {
    /// Atom model configuration file.
    #[arg(long)]
    model: PathBuf,
    /// Smallest height (model units, hbar c/E).
    #[arg(long)]
    zmin: f64,
    /// Largest height.
    #[arg(long)]
    zmax: f64,
    /// Number of log-spaced heights.
    #[arg(long, default_value_t = 16)]
    points: usize,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args)]
struct DispersionArgs {
    /// First atom model configuration file.
    #[arg(long)]
    model_a: PathBuf,
    /// Second atom model configuration file.
    #[arg(long)]
    model_b: PathBuf,
    /// Smallest separation (model units, hbar c/E).
    #[arg(long)]
    rmin: f64,
    /// Largest separation.
    #[arg(long)]
    rmax: f64,
    /// Number of log-spaced separations.
    #[arg(long, default_value_t = 16)]
    points: usize,
    /// Use the far-zone static-polarizability approximation.
    #[arg(long = "static")]
    static_limit: bool,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args)]
struct OracleCompareArgs {
    /// Scenario configuration: two atom models plus a discrete mode set.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct RerunArgs {
    /// Manifest of the run to replay.
    #[arg(long)]
    manifest: PathBuf,
}

/// Parse and dispatch an argument list; returns the process exit code
/// (0 success, 1 module error, 2 usage error).
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli, &argv) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("mqed: {err}");
            1
        }
    }
}

fn dispatch(cli: Cli, argv: &[String]) -> Result<()> {
    if let Command::Rerun(args) = &cli.command {
        return rerun(args, &cli.out, argv);
    }
    std::fs::create_dir_all(&cli.out)?;
    let start = Instant::now();
    let mut manifest = RunManifest::new(subcommand_name(&cli.command), replay_argv(argv));
    manifest.set_param("out", cli.out.display().to_string());
    match &cli.command {
        Command::Response(args) => response(args, &cli.out, &mut manifest)?,
        Command::HeffMatrix(args) => heff_matrix(args, &cli.out, &mut manifest)?,
        Command::Lamb(args) => lamb(args, &cli.out, &mut manifest)?,
        Command::CpSurface(args) => cp_surface(args, &cli.out, &mut manifest)?,
        Command::Dispersion(args) => dispersion(args, &cli.out, &mut manifest)?,
        Command::Oracle { command: OracleCommand::Compare(args) } => {
            oracle_compare(args, &cli.out, &mut manifest)?
        }
        Command::Rerun(_) => unreachable!("handled above"),
    }
    manifest.runtime_s = start.elapsed().as_secs_f64();
    manifest.write(&cli.out)
}

fn subcommand_name(command: &Command) -> &'static str {
    match command {
        Command::Response(_) => "response",
        Command::HeffMatrix(_) => "heff-matrix",
        Command::Lamb(_) => "lamb",
        Command::CpSurface(_) => "cp-surface",
        Command::Dispersion(_) => "dispersion",
        Command::Oracle { .. } => "oracle compare",
        Command::Rerun(_) => "rerun",
    }
}

/// The argument list to store for replay: everything after the program
/// name, with any `--out` setting stripped (rerun supplies its own).
fn replay_argv(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut iter = argv.iter().skip(1).peekable();
    while let Some(arg) = iter.next() {
        if arg == "--out" {
            iter.next();
            continue;
        }
        if arg.starts_with("--out=") {
            continue;
        }
        out.push(arg.clone());
    }
    out
}

fn rerun(args: &RerunArgs, out: &Path, original_argv: &[String]) -> Result<()> {
    let manifest = RunManifest::load(&args.manifest)?;
    if manifest.argv.first().map(String::as_str) == Some("rerun") {
        return Err(MqedError::Config("manifest describes a rerun; refusing to recurse".into()));
    }
    // Honor an explicit --out on the rerun invocation; otherwise replay
    // into the original run's output directory.
    let explicit_out = original_argv.iter().any(|a| a == "--out" || a.starts_with("--out="));
    let target: PathBuf = if explicit_out {
        out.to_path_buf()
    } else {
        match manifest.parameters.get("out").and_then(|v| v.as_str()) {
            Some(dir) => PathBuf::from(dir),
            None => out.to_path_buf(),
        }
    };
    let mut argv = vec!["mqed".to_string(), "--out".to_string(), target.display().to_string()];
    argv.extend(manifest.argv.iter().cloned());
    let cli = Cli::try_parse_from(&argv)
        .map_err(|e| MqedError::Config(format!("manifest argv does not parse: {e}")))?;
    dispatch(cli, &argv)
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn load_model(path: &Path, manifest: &mut RunManifest) -> Result<AtomModel> {
    manifest.record_input(path)?;
    AtomModel::from_config_file(path)
}

const COMPONENT_NAMES: [&str; 9] = ["xx", "xy", "xz", "yx", "yy", "yz", "zx", "zy", "zz"];

fn response(args: &ResponseArgs, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    if args.points < 1 {
        return Err(MqedError::InvalidArgument("need at least one grid point".into()));
    }
    let pc = PhysicalConstants::model_units();
    let model = load_model(&args.model, manifest)?;
    manifest.set_param("model", args.model.display().to_string());
    manifest.set_param("omega_max", args.omega_max);
    manifest.set_param("points", args.points);
    manifest.set_param("kind", &args.kind);
    manifest.set_param("gamma", args.gamma);

    let mut rows = Vec::with_capacity(args.points);
    for i in 0..args.points {
        let omega = if args.points == 1 {
            0.0
        } else {
            args.omega_max * i as f64 / (args.points - 1) as f64
        };
        let tensor = match args.kind.as_str() {
            "beta" => beta_ground(&model, omega, &pc),
            _ => alpha_dynamic(&model, model.ground_index(), omega, args.gamma, &pc)?,
        };
        let mut row = vec![fmt(omega), args.kind.clone()];
        for i in 0..3 {
            for j in 0..3 {
                let c: Complex64 = tensor.components[(i, j)];
                row.push(fmt(c.re));
                row.push(fmt(c.im));
            }
        }
        rows.push(row);
    }
    let mut header = String::from("omega[E/hbar],kind");
    for name in COMPONENT_NAMES {
        header.push_str(&format!(",{name}_re[mu^2/E],{name}_im[mu^2/E]"));
    }
    write_csv(&out.join("response.csv"), &header, &rows)?;
    manifest.record_output("response.csv");
    manifest.set_result("rows", rows.len());
    Ok(())
}

/// Parse the `[modes]` section of a mode-set configuration file: one row
/// per mode, `label = omega re im re im ...` with six numbers (three
/// complex Cartesian components) per coupled position.
fn parse_mode_set(text: &str, positions: usize) -> Result<DiscreteModeSet> {
    let mut modes = Vec::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].trim().to_ascii_lowercase();
            continue;
        }
        if section != "modes" {
            return Err(MqedError::Config(format!(
                "line {}: mode rows must appear under a [modes] section",
                lineno + 1
            )));
        }
        let (label, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| {
                MqedError::Config(format!("line {}: expected `label = numbers`", lineno + 1))
            })?;
        let nums: Vec<f64> = value
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| MqedError::Config(format!("line {}: bad number", lineno + 1)))?;
        if nums.len() != 1 + 6 * positions {
            return Err(MqedError::Config(format!(
                "line {}: expected omega plus {} amplitude numbers, got {}",
                lineno + 1,
                6 * positions,
                nums.len()
            )));
        }
        let omega = nums[0];
        let mut amplitudes = Vec::with_capacity(positions);
        for p in 0..positions {
            let b = 1 + 6 * p;
            amplitudes.push(Vector3::new(
                Complex64::new(nums[b], nums[b + 1]),
                Complex64::new(nums[b + 2], nums[b + 3]),
                Complex64::new(nums[b + 4], nums[b + 5]),
            ));
        }
        modes.push(DiscreteMode::new(omega, amplitudes, label));
    }
    if modes.is_empty() {
        return Err(MqedError::Config("no modes defined under [modes]".into()));
    }
    DiscreteModeSet::new(modes)
}

fn heff_matrix(args: &HeffMatrixArgs, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let pc = PhysicalConstants::model_units();
    let model = load_model(&args.model, manifest)?;
    manifest.record_input(&args.modes)?;
    let modes = parse_mode_set(&std::fs::read_to_string(&args.modes)?, 1)?;
    manifest.set_param("model", args.model.display().to_string());
    manifest.set_param("modes", args.modes.display().to_string());
    manifest.set_param("max_photons", args.max_photons);

    let basis = enumerate_states(&modes, args.max_photons, &model)?;
    let mut basis_rows = Vec::with_capacity(basis.len());
    for (i, state) in basis.iter().enumerate() {
        basis_rows.push(vec![
            i.to_string(),
            model.label(state.atom_level).to_string(),
            format!("\"{:?}\"", state.field.counts()),
            fmt(state.energy(&modes, &model, &pc)),
        ]);
    }
    write_csv(
        &out.join("heff_basis.csv"),
        "index,level,occupation[photons],energy[E]",
        &basis_rows,
    )?;
    manifest.record_output("heff_basis.csv");

    let mut rows = Vec::new();
    for (i, bra) in basis.iter().enumerate() {
        for (j, ket) in basis.iter().enumerate() {
            let element =
                crate::discrete::heff_matrix_element(bra, ket, &modes, &model, 0, &pc)?;
            if element != Complex64::new(0.0, 0.0) {
                rows.push(vec![i.to_string(), j.to_string(), fmt(element.re), fmt(element.im)]);
            }
        }
    }
    write_csv(&out.join("heff_matrix.csv"), "row,col,re[E],im[E]", &rows)?;
    manifest.record_output("heff_matrix.csv");
    manifest.set_result("basis_size", basis.len());
    manifest.set_result("nonzero_elements", rows.len());
    Ok(())
}

fn lamb(args: &LambArgs, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let pc = PhysicalConstants::model_units();
    let model = load_model(&args.model, manifest)?;
    let quad = args.quad.spec()?;
    manifest.set_param("model", args.model.display().to_string());
    manifest.set_param("geometry", &args.geometry);
    manifest.set_param("height", args.height);
    args.quad.record(manifest);

    let (geometry, position) = match args.geometry.as_str() {
        "plane" => {
            (GeometrySpec::conducting_plane(1.0), Vector3::new(0.0, 0.0, args.height))
        }
        _ => (GeometrySpec::free_space(1.0), Vector3::zeros()),
    };
    let shift = vacuum_shift(&model, &geometry, &position, &quad, &pc)?;
    write_csv(
        &out.join("lamb.csv"),
        "cutoff_kc[E/(hbar c)],energy[E],convergence[relative]",
        &[vec![fmt(args.quad.cutoff), fmt(shift.value), fmt(shift.convergence)]],
    )?;
    manifest.record_output("lamb.csv");
    manifest.set_result("energy", shift.value);
    manifest.set_result("metadata", shift.metadata.clone());
    Ok(())
}

/// Emit a potential curve as CSV with local power-law forces, and record
/// a whole-window fit in the manifest.
fn emit_curve(
    curve: &PotentialCurve,
    abscissa_header: &str,
    file: &str,
    out: &Path,
    manifest: &mut RunManifest,
) -> Result<()> {
    let header =
        format!("{abscissa_header},energy[E],force[E^2/(hbar c)],convergence[relative]");
    let mut rows = Vec::with_capacity(curve.abscissa.len());
    for i in 0..curve.abscissa.len() {
        let force = force_at(curve, i, 2)?;
        rows.push(vec![
            fmt(curve.abscissa[i]),
            fmt(curve.values[i].value),
            fmt(force),
            fmt(curve.values[i].convergence),
        ]);
    }
    write_csv(&out.join(file), &header, &rows)?;
    manifest.record_output(file);
    if curve.abscissa.len() >= 3 {
        let fit = fit_power_law(curve, 0..curve.abscissa.len())?;
        manifest.set_result("fit_exponent", fit.exponent);
        manifest.set_result("fit_amplitude", fit.amplitude);
        manifest.set_result("fit_residual", fit.residual);
    }
    Ok(())
}

fn cp_surface(args: &CpSurfaceArgs, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let pc = PhysicalConstants::model_units();
    let model = load_model(&args.model, manifest)?;
    let quad = args.quad.spec()?;
    manifest.set_param("model", args.model.display().to_string());
    manifest.set_param("zmin", args.zmin);
    manifest.set_param("zmax", args.zmax);
    manifest.set_param("points", args.points);
    args.quad.record(manifest);

    let heights = log_grid(args.zmin, args.zmax, args.points)?;
    let curve = cp_surface_potential(&model, &heights, &quad, &pc)?;
    emit_curve(&curve, "z[hbar c/E]", "cp_surface.csv", out, manifest)
}

fn dispersion(args: &DispersionArgs, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let pc = PhysicalConstants::model_units();
    let model_a = load_model(&args.model_a, manifest)?;
    let model_b = load_model(&args.model_b, manifest)?;
    let quad = args.quad.spec()?;
    manifest.set_param("model_a", args.model_a.display().to_string());
    manifest.set_param("model_b", args.model_b.display().to_string());
    manifest.set_param("rmin", args.rmin);
    manifest.set_param("rmax", args.rmax);
    manifest.set_param("points", args.points);
    manifest.set_param("static", args.static_limit);
    args.quad.record(manifest);

    let curve = dispersion_curve(
        &model_a,
        &model_b,
        args.rmin,
        args.rmax,
        args.points,
        &quad,
        args.static_limit,
        &pc,
    )?;
    emit_curve(&curve, "r[hbar c/E]", "dispersion.csv", out, manifest)
}

/// Parse an oracle scenario: an `[atoms]` section mapping `a` and `b` to
/// model configuration paths (relative to the scenario file), and a
/// two-position `[modes]` section.
fn parse_scenario(path: &Path) -> Result<(PathBuf, PathBuf, DiscreteModeSet)> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut path_a = None;
    let mut path_b = None;
    let mut mode_lines = String::from("[modes]\n");
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].trim().to_ascii_lowercase();
            continue;
        }
        match section.as_str() {
            "atoms" => {
                let (key, value) = line.split_once('=').map(|(k, v)| (k.trim(), v.trim())).ok_or_else(
                    || MqedError::Config(format!("line {}: expected `a = path`", lineno + 1)),
                )?;
                match key {
                    "a" => path_a = Some(base.join(value)),
                    "b" => path_b = Some(base.join(value)),
                    other => {
                        return Err(MqedError::Config(format!(
                            "line {}: unknown atom `{}` (expected a or b)",
                            lineno + 1,
                            other
                        )))
                    }
                }
            }
            "modes" => {
                mode_lines.push_str(line);
                mode_lines.push('\n');
            }
            other => {
                return Err(MqedError::Config(format!(
                    "line {}: unknown section `{}`",
                    lineno + 1,
                    other
                )))
            }
        }
    }
    let path_a = path_a.ok_or_else(|| MqedError::Config("missing `a` under [atoms]".into()))?;
    let path_b = path_b.ok_or_else(|| MqedError::Config("missing `b` under [atoms]".into()))?;
    let modes = parse_mode_set(&mode_lines, 2)?;
    Ok((path_a, path_b, modes))
}

fn oracle_compare(args: &OracleCompareArgs, out: &Path, manifest: &mut RunManifest) -> Result<()> {
    let pc = PhysicalConstants::model_units();
    manifest.record_input(&args.config)?;
    manifest.set_param("config", args.config.display().to_string());
    let (path_a, path_b, modes) = parse_scenario(&args.config)?;
    let model_a = load_model(&path_a, manifest)?;
    let model_b = load_model(&path_b, manifest)?;

    let report =
        crate::oracle::compare_effective_vs_fourth_order(&model_a, &model_b, &modes, &pc)?;
    let json = serde_json::json!({
        "fourth_order_cross": report.fourth_order_cross,
        "effective_second_order": report.effective_second_order,
        "relative_difference": report.relative_difference,
        "basis_size": report.basis_size,
        "runtime_s": report.runtime_s,
    });
    let mut text = serde_json::to_string_pretty(&json)?;
    text.push('\n');
    std::fs::write(out.join("oracle_compare.json"), text)?;
    manifest.record_output("oracle_compare.json");
    manifest.set_result("relative_difference", report.relative_difference);
    Ok(())
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || lo <= 0.0 || hi <= lo {
        return Err(MqedError::InvalidArgument(
            "need points >= 2 and 0 < min < max".into(),
        ));
    }
    Ok((0..points)
        .map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64))
        .collect())
}
