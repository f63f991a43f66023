//! `oam-sieve` command line: mask generation, propagation, OAM analysis,
//! astigmatic charge measurement, defocus stacks and a selection-rule check.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oam_sieve::config::RunConfig;
use oam_sieve::diffraction::{
    astigmatic_propagate, astigmatic_transform, count_dark_stripes, effective_geometry, intensity_major_axis,
    propagate_sieve, z_stack, PropagationModel,
};
use oam_sieve::field::{angular_peak_count, phase_winding, ComplexField, GridSpec};
use oam_sieve::io;
use oam_sieve::lg::{decompose, oam_spectrum, selection_table, synthesize};
use oam_sieve::mask::rasterize;
use oam_sieve::{Error, ErrorClass};

#[derive(Parser)]
#[command(name = "oam-sieve", version, about = "Chiral pinhole sieves and OAM analysis")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `outputs` in the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    /// Ignored by sequential builds.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reserved; no command uses randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the pinhole list and a rasterised mask image.
    Mask,
    /// Propagate to the observation plane; write intensity, phase and field.
    Simulate,
    /// OAM power spectrum, coefficients and ring winding report.
    Spectrum,
    /// Astigmatic transformation and dark-stripe count.
    Astig,
    /// Defocus stack with inner-ring rms radius per slice.
    Zstack,
    /// Compare the closed-form selection factor with the direct sum.
    VerifySelection {
        /// Rotation orders.
        #[arg(long, value_delimiter = ',', default_value = "2,3,5,7,11")]
        m: Vec<u32>,
        /// Largest |ℓ| tested.
        #[arg(long, default_value_t = 30)]
        ell_max: i64,
    },
}

/// Failure of a command, carrying its exit code.
struct Failure {
    exit: u8,
    code: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let exit = match e.class() {
            ErrorClass::Config => 2,
            ErrorClass::Construction => 3,
            ErrorClass::Physics => 4,
            ErrorClass::Io => 1,
        };
        Failure {
            exit,
            code: e.code().to_string(),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn load_config(global: &Global) -> std::result::Result<RunConfig, Failure> {
    let Some(path) = &global.config else {
        return Err(Error::Config("this command needs --config <path>".into()).into());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(RunConfig::from_json(&text)?)
}

fn out_dir(global: &Global, cfg: Option<&RunConfig>) -> std::result::Result<PathBuf, Failure> {
    let dir = match (&global.out, cfg) {
        (Some(d), _) => d.clone(),
        (None, Some(c)) => PathBuf::from(&c.outputs),
        (None, None) => PathBuf::from("."),
    };
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn create(dir: &Path, name: &str) -> std::result::Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_field_files(dir: &Path, stem: &str, f: &ComplexField) -> CmdResult {
    io::write_cvf1(f, create(dir, &format!("{stem}.cvf"))?)?;
    io::write_intensity_pgm(f, create(dir, &format!("{stem}_intensity.pgm"))?)?;
    io::write_phase_pgm(f, create(dir, &format!("{stem}_phase.pgm"))?)?;
    Ok(())
}

fn cmd_mask(global: &Global) -> CmdResult {
    let cfg = load_config(global)?;
    let mask = cfg.build_mask()?;
    let dir = out_dir(global, Some(&cfg))?;
    io::write_mask_csv(&mask.pinholes, create(&dir, "mask.csv")?)?;
    let r_min = mask.pinholes.iter().map(|p| p.radius).fold(f64::INFINITY, f64::min);
    let pitch = r_min / 4.0;
    let n = (2.0 * mask.outer_radius() / pitch).ceil() as usize + 8;
    let raster = rasterize(&mask, &GridSpec::new(n, n, pitch, pitch, (0.0, 0.0))?)?;
    io::write_cvf1(&raster, create(&dir, "mask.cvf")?)?;
    io::write_intensity_pgm(&raster, create(&dir, "mask.pgm")?)?;
    println!("pinholes={} symmetry_m={}", mask.len(), mask.symmetry_m);
    Ok(())
}

fn simulate(cfg: &RunConfig) -> std::result::Result<ComplexField, Failure> {
    let mask = cfg.build_mask()?;
    Ok(propagate_sieve(&mask, &cfg.optical_setup(), &cfg.obs_grid()?)?)
}

fn cmd_simulate(global: &Global) -> CmdResult {
    let cfg = load_config(global)?;
    let field = simulate(&cfg)?;
    let dir = out_dir(global, Some(&cfg))?;
    write_field_files(&dir, "field", &field)?;
    let g = effective_geometry(&cfg.optical_setup())?;
    println!("z_eff_m={:.12e} mag={:.12e} chirp_sign={}", g.z_eff, g.mag, g.chirp_sign);
    Ok(())
}

fn ring_samples(cfg: &RunConfig, radius: f64, grid: &GridSpec) -> usize {
    let configured = cfg.analysis().ring_samples;
    // Enough for a step below π/2 at |ℓ| = ell_abs_max, and about two per pixel of arc.
    let circumference = std::f64::consts::TAU * radius / grid.pitch_x.min(grid.pitch_y);
    configured.unwrap_or_else(|| (8 * (cfg.basis.ell_abs_max as usize + 1)).max(2 * circumference as usize))
}

fn cmd_spectrum(global: &Global) -> CmdResult {
    let cfg = load_config(global)?;
    let field = simulate(&cfg)?;
    let basis = cfg.basis()?;
    let coeffs = decompose(&field, &basis)?;
    let spectrum = oam_spectrum(&coeffs)?;
    let dir = out_dir(global, Some(&cfg))?;
    io::write_spectrum_csv(&spectrum, create(&dir, "spectrum.csv")?)?;
    io::write_coeffs_csv(&coeffs, create(&dir, "coefficients.csv")?)?;
    let (ell, power) = spectrum.dominant();
    println!(
        "ell_range={}..{} p_max={} w0_m={:.6e} normalization={:.12e} dominant_ell={ell} dominant_power={power:.12e}",
        basis.ell_min, basis.ell_max, basis.p_max, basis.w0, spectrum.normalization
    );
    let mut report = String::from("radius_m,winding,residual,peaks\n");
    for &r in &cfg.analysis().ring_radii_m {
        let n = ring_samples(&cfg, r, &field.grid);
        let w = phase_winding(&field, r, n)?;
        let peaks = angular_peak_count(&field, r, n)?;
        println!("ring radius_m={r:.6e} winding={} residual={:.3e} peaks={peaks}", w.winding, w.residual);
        report.push_str(&format!("{r:.16e},{},{:.16e},{peaks}\n", w.winding, w.residual));
    }
    fs::write(dir.join("rings.csv"), report)?;
    Ok(())
}

fn cmd_astig(global: &Global) -> CmdResult {
    let cfg = load_config(global)?;
    let setup = cfg.optical_setup();
    let astig = cfg.astigmatism();
    let transformed = match cfg.analysis().astig_ell {
        // Isolate one OAM component, then apply the astigmatic step about the observation plane.
        Some(ell) => {
            let field = simulate(&cfg)?;
            let coeffs = decompose(&field, &cfg.basis()?)?;
            let beam = synthesize(&coeffs.only_ell(ell), &field.grid)?;
            let base = match setup.model {
                PropagationModel::Lens { delta_f, .. } => delta_f,
                PropagationModel::FreeSpace { z } => z,
            };
            astigmatic_transform(
                &beam,
                setup.lambda,
                astig.delta_f_x - base,
                astig.delta_f_y - base,
                astig.orientation,
            )?
        }
        None => astigmatic_propagate(&cfg.build_mask()?, &setup.with_astig(astig), &cfg.obs_grid()?)?,
    };
    let dir = out_dir(global, Some(&cfg))?;
    io::write_cvf1(&transformed, create(&dir, "astig.cvf")?)?;
    io::write_intensity_pgm(&transformed, create(&dir, "astig_intensity.pgm")?)?;
    let normal = intensity_major_axis(&transformed)?;
    let stripes = count_dark_stripes(&transformed, normal)?;
    println!("stripes={stripes} stripe_normal_rad={normal:.6}");
    Ok(())
}

fn cmd_zstack(global: &Global) -> CmdResult {
    let cfg = load_config(global)?;
    let defocus = cfg
        .zstack_defocus()
        .ok_or_else(|| Error::Config("zstack needs analysis.zstack {start_m, stop_m, slices}".into()))?;
    let cutoff = cfg.analysis().ring_cutoff_m.unwrap_or(cfg.obs.window_m / 4.0);
    let mask = cfg.build_mask()?;
    let obs = cfg.obs_grid()?;
    let stack = z_stack(&mask, &cfg.optical_setup(), &defocus, &obs, cutoff)?;
    let dir = out_dir(global, Some(&cfg))?;
    for (k, f) in stack.fields.iter().enumerate() {
        io::write_cvf1(f, create(&dir, &format!("slice_{k:04}.cvf"))?)?;
    }
    io::write_zstack_manifest(&stack.delta_f, &stack.ring_rms, create(&dir, "zstack.csv")?)?;
    // y-z section: one image row per slice.
    let rows = stack.yz_slice.len();
    let yz_grid = GridSpec::new(obs.ny, rows.max(2), obs.pitch_y, 1.0, (0.0, 0.0))?;
    let mut samples: Vec<_> = stack
        .yz_slice
        .iter()
        .flat_map(|row| row.iter().map(|&v| oam_sieve::Complex64::new(v.sqrt(), 0.0)))
        .collect();
    samples.resize(yz_grid.len(), oam_sieve::Complex64::new(0.0, 0.0));
    io::write_intensity_pgm(&ComplexField::new(yz_grid, samples, 0.0)?, create(&dir, "yz.pgm")?)?;
    let w = stack.waist_index();
    println!("slices={} waist_index={w} waist_delta_f_m={:.12e}", stack.fields.len(), stack.delta_f[w]);
    Ok(())
}

fn cmd_verify_selection(global: &Global, ms: &[u32], ell_max: i64) -> CmdResult {
    if ms.is_empty() || ell_max < 0 || ms.contains(&0) {
        return Err(Error::Config("verify-selection needs positive m values and ell_max >= 0".into()).into());
    }
    let rows = selection_table(ms, -ell_max..=ell_max);
    let mut csv = String::from("m,ell,factor,sum_re,sum_im,error\n");
    let mut worst = 0.0f64;
    for r in &rows {
        csv.push_str(&format!("{},{},{},{:.16e},{:.16e},{:.3e}\n", r.m, r.ell, r.factor, r.sum.re, r.sum.im, r.error));
        worst = worst.max(r.error);
    }
    if global.out.is_some() || global.config.is_some() {
        let cfg = global.config.as_ref().map(|_| load_config(global)).transpose()?;
        let dir = out_dir(global, cfg.as_ref())?;
        fs::write(dir.join("selection.csv"), &csv)?;
    }
    print!("{csv}");
    let ok = worst < 1e-12;
    println!("rows={} max_error={worst:.3e} status={}", rows.len(), if ok { "ok" } else { "mismatch" });
    if ok {
        Ok(())
    } else {
        Err(Failure {
            exit: 5,
            code: "selection_mismatch".into(),
            message: format!("closed form and direct sum differ by {worst:.3e}"),
        })
    }
}

fn run(cli: Cli) -> CmdResult {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()).into());
        }
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let g = &cli.global;
    match &cli.command {
        Command::Mask => cmd_mask(g),
        Command::Simulate => cmd_simulate(g),
        Command::Spectrum => cmd_spectrum(g),
        Command::Astig => cmd_astig(g),
        Command::Zstack => cmd_zstack(g),
        Command::VerifySelection { m, ell_max } => cmd_verify_selection(g, m, *ell_max),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            eprintln!("error_code=usage");
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            eprintln!("error_code={}", f.code);
            ExitCode::from(f.exit)
        }
    }
}
