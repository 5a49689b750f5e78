//! Command-line surface binding the library modules into reproducible
//! runs.  Exit codes: 0 success, 2 configuration error, 3 solver
//! non-convergence (outputs still written), 4 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use unishear::config::RunConfig;
use unishear::diagnostics::{
    build_cluster_extended, cluster_coherence, delta_sparsity, verify_error_bound, Certificate,
    ProbeSpec,
};
use unishear::harness::{compare_presets, fit_decay_rate, gap_mask, records_csv, run_sweep};
use unishear::io::{
    read_coefficients, read_raw, write_coefficients, write_error_plot, write_pgm, write_raw,
    RawHeader,
};
use unishear::model::{filtered_model, make_mask, project_known, MaskSpec, WeightTable};
use unishear::recover::{inpaint_l1, inpaint_threshold_onestep, relative_error, RecoveryReport, ThresholdBands};
use unishear::transform::{build_digital_system, l1_analysis_norm, tiling_residual};
use unishear::{Error, DOMAIN_HALFWIDTH};

#[derive(Parser)]
#[command(name = "unishear", version, about = "universal shearlet frames and l1-analysis inpainting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// key=value overrides applied after the config file.
    #[arg(value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the band listing and the tiling residual.
    Describe(Common),
    /// Write the filtered line-singularity model for scale `j`.
    Model(Common),
    /// Apply the strip mask to an input image.
    Mask {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
    },
    /// Transform an image into a coefficient dump.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
    },
    /// Reconstruct an image from a coefficient dump.
    Synthesize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
    },
    /// Inpaint a corrupted image over the configured mask.
    Inpaint {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
    },
    /// One-step threshold inpainting (no iteration).
    Threshold {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
    },
    /// Cluster/coherence diagnostics and the error-bound certificate for
    /// the configured model scale.
    Diagnose(Common),
    /// Gap-vs-scale sweep; writes CSV and a summary plot.
    Sweep(Common),
    /// Run the sweep for presets alpha0.5, alpha1, wavelet and emit an
    /// aligned comparison table.
    Compare(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // single dispatch point so config loading and exit-code mapping stay
    // uniform across commands
    let result = match &cli.command {
        Command::Describe(c) => with_config(c, |cfg, _| cmd_describe(cfg)),
        Command::Model(c) => with_config(c, |cfg, out| cmd_model(cfg, out)),
        Command::Mask { common, input } => with_config(common, |cfg, out| cmd_mask(cfg, input, out)),
        Command::Analyze { common, input } => {
            with_config(common, |cfg, out| cmd_analyze(cfg, input, out))
        }
        Command::Synthesize { common, input } => {
            with_config(common, |cfg, out| cmd_synthesize(cfg, input, out))
        }
        Command::Inpaint { common, input } => {
            with_config(common, |cfg, out| cmd_inpaint(cfg, input, out))
        }
        Command::Threshold { common, input } => {
            with_config(common, |cfg, out| cmd_threshold(cfg, input, out))
        }
        Command::Diagnose(c) => with_config(c, |cfg, out| cmd_diagnose(cfg, out)),
        Command::Sweep(c) => with_config(c, |cfg, out| cmd_sweep(cfg, out)),
        Command::Compare(c) => with_config(c, |cfg, out| cmd_compare(cfg, out)),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Io(_) => 4,
                Error::NonConvergence { .. } => 3,
                Error::Config(_)
                | Error::NotAdmissible(_)
                | Error::WrongAnchor
                | Error::GridTooSmall { .. }
                | Error::BadGridSize(_)
                | Error::ScaleTooFine { .. }
                | Error::BadGap(_)
                | Error::DimensionMismatch { .. } => 2,
                _ => 1,
            })
        }
    }
}

fn with_config<F>(common: &Common, f: F) -> unishear::Result<bool>
where
    F: FnOnce(&RunConfig, &Path) -> unishear::Result<bool>,
{
    let cfg = RunConfig::load(common.config.as_deref(), &common.overrides)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let out = cfg.output_dir.clone();
    f(&cfg, &out)
}

fn header(cfg: &RunConfig, j: usize, h: f64) -> RawHeader {
    RawHeader {
        n: cfg.n,
        j,
        t: DOMAIN_HALFWIDTH,
        rho: cfg.rho,
        h,
    }
}

fn mask_of(cfg: &RunConfig) -> unishear::Result<MaskSpec> {
    match cfg.h {
        Some(h) if h == 0.0 => Ok(MaskSpec {
            h: 0.0,
            n: cfg.n,
            strip: vec![],
        }),
        Some(h) => make_mask(h, cfg.n),
        None => {
            let alpha = cfg.preset.sequence(cfg.scales).alpha_f64(cfg.j);
            gap_mask(
                cfg.gap_constant() * (-(alpha + cfg.eps_prime) * cfg.j as f64).exp2(),
                cfg.n,
            )
        }
    }
}

fn check_dims(cfg: &RunConfig, data: &[f64]) -> unishear::Result<()> {
    if data.len() != cfg.n * cfg.n {
        return Err(Error::DimensionMismatch {
            expected: cfg.n * cfg.n,
            got: data.len(),
        });
    }
    Ok(())
}

fn cmd_describe(cfg: &RunConfig) -> unishear::Result<bool> {
    let seq = cfg.preset.sequence(cfg.scales);
    let sys = build_digital_system(&seq, cfg.n, cfg.scales)?;
    println!(
        "grid N={} T={} scales J={} preset {}",
        cfg.n,
        DOMAIN_HALFWIDTH,
        cfg.scales,
        cfg.preset.label()
    );
    println!("bands: {}", sys.bands.len());
    for (b, band) in sys.bands.iter().enumerate() {
        let d = &band.desc;
        println!(
            "  [{b:3}] j={} l={} iota={:?} alpha={}/{} support={} norm={:.6e}",
            d.j,
            d.l,
            d.iota,
            d.alpha.numer(),
            d.alpha.denom(),
            band.support.len(),
            d.normalization,
        );
    }
    let res = tiling_residual(&sys);
    println!("tiling residual: {res:.3e}");
    if res > 1e-10 {
        return Err(Error::TilingFailure(res));
    }
    Ok(true)
}

fn cmd_model(cfg: &RunConfig, out: &Path) -> unishear::Result<bool> {
    let table = WeightTable::build(cfg.weight_spec(), cfg.n);
    let model = filtered_model(cfg.j, cfg.n, &table)?;
    let base = format!("model_j{}", cfg.j);
    write_raw(&out.join(format!("{base}.raw")), &header(cfg, cfg.j, 0.0), &model.image)?;
    write_pgm(&out.join(format!("{base}.pgm")), cfg.n, &model.image)?;
    println!("wrote {base}.raw and {base}.pgm in {}", out.display());
    Ok(true)
}

fn cmd_mask(cfg: &RunConfig, input: &Path, out: &Path) -> unishear::Result<bool> {
    let (h0, data) = read_raw(input)?;
    check_dims(cfg, &data)?;
    let mask = mask_of(cfg)?;
    let masked = project_known(&data, &mask);
    let path = out.join("masked.raw");
    write_raw(&path, &header(cfg, h0.j, mask.h), &masked)?;
    println!("wrote {} (strip {} rows)", path.display(), mask.strip.len());
    Ok(true)
}

fn cmd_analyze(cfg: &RunConfig, input: &Path, out: &Path) -> unishear::Result<bool> {
    let (_, data) = read_raw(input)?;
    check_dims(cfg, &data)?;
    let seq = cfg.preset.sequence(cfg.scales);
    let sys = build_digital_system(&seq, cfg.n, cfg.scales)?;
    let coeffs = sys.analyze(&data)?;
    let path = out.join("coefficients.unsh");
    write_coefficients(&path, cfg.scales, &coeffs)?;
    println!("wrote {} ({} bands)", path.display(), coeffs.bands.len());
    Ok(true)
}

fn cmd_synthesize(cfg: &RunConfig, input: &Path, out: &Path) -> unishear::Result<bool> {
    let (scales, coeffs) = read_coefficients(input)?;
    let seq = cfg.preset.sequence(scales);
    let sys = build_digital_system(&seq, coeffs.n, scales)?;
    let image = sys.synthesize(&coeffs)?;
    let path = out.join("synthesized.raw");
    write_raw(
        &path,
        &RawHeader {
            n: coeffs.n,
            j: scales,
            t: DOMAIN_HALFWIDTH,
            rho: cfg.rho,
            h: 0.0,
        },
        &image,
    )?;
    println!("wrote {}", path.display());
    Ok(true)
}

fn write_report(path: &Path, rep: &RecoveryReport) -> unishear::Result<()> {
    let text = format!(
        "objective={}\nfeasibility={}\niterations={}\nconverged={}\nwall_ms={}\n",
        rep.objective, rep.feasibility, rep.iterations, rep.converged, rep.wall_ms
    );
    std::fs::write(path, text)?;
    Ok(())
}

fn cmd_inpaint(cfg: &RunConfig, input: &Path, out: &Path) -> unishear::Result<bool> {
    let (h0, data) = read_raw(input)?;
    check_dims(cfg, &data)?;
    let mask = mask_of(cfg)?;
    let seq = cfg.preset.sequence(cfg.scales);
    let sys = build_digital_system(&seq, cfg.n, cfg.scales)?;
    let rep = inpaint_l1(&data, &mask, &sys, &cfg.solver)?;
    write_raw(&out.join("inpainted.raw"), &header(cfg, h0.j, mask.h), &rep.image)?;
    write_pgm(&out.join("inpainted.pgm"), cfg.n, &rep.image)?;
    write_report(&out.join("inpaint_report.txt"), &rep)?;
    println!(
        "objective {:.6e}, {} iterations, converged: {}",
        rep.objective, rep.iterations, rep.converged
    );
    Ok(rep.converged)
}

fn cmd_threshold(cfg: &RunConfig, input: &Path, out: &Path) -> unishear::Result<bool> {
    let (h0, data) = read_raw(input)?;
    check_dims(cfg, &data)?;
    let mask = mask_of(cfg)?;
    let seq = cfg.preset.sequence(cfg.scales);
    let sys = build_digital_system(&seq, cfg.n, cfg.scales)?;
    let rep = inpaint_threshold_onestep(&data, &mask, &sys, 0.0, ThresholdBands::All)?;
    write_raw(&out.join("thresholded.raw"), &header(cfg, h0.j, mask.h), &rep.image)?;
    write_report(&out.join("threshold_report.txt"), &rep)?;
    println!("objective {:.6e}", rep.objective);
    Ok(true)
}

fn cmd_diagnose(cfg: &RunConfig, out: &Path) -> unishear::Result<bool> {
    let seq = cfg.preset.sequence(cfg.scales);
    let sys = build_digital_system(&seq, cfg.n, cfg.scales)?;
    let table = WeightTable::build(cfg.weight_spec(), cfg.n);
    let model = filtered_model(cfg.j, cfg.n, &table)?;
    let mask = mask_of(cfg)?;
    let corrupted = project_known(&model.image, &mask);
    let rep = inpaint_l1(&corrupted, &mask, &sys, &cfg.solver)?;
    let norm0 = l1_analysis_norm(&model.image, &sys)?;
    let observed = relative_error(&rep.image, &model.image, &sys)? * norm0;

    let cluster = build_cluster_extended(cfg.j, cfg.epsilon, &sys);
    let delta = delta_sparsity(&model.image, &cluster, &sys)?;
    let coh = cluster_coherence(&cluster, &mask, &sys, &ProbeSpec::default())?;
    let cert = verify_error_bound(delta.delta, coh.mu_c, observed, 1e-4 * norm0);
    let (bound, status) = match &cert {
        Certificate::NotApplicable { .. } => (f64::NAN, "not-applicable"),
        Certificate::Holds { bound, .. } => (*bound, "holds"),
        Certificate::Violated { bound, .. } => (*bound, "violated"),
    };
    let csv = format!(
        "j,epsilon,h,delta_j,mu_c,bound,observed_error,truncation_flags\n{},{},{:.12e},{:.12e},{:.12e},{bound:.12e},{observed:.12e},{}\n",
        cfg.j,
        cfg.epsilon,
        mask.h,
        delta.delta,
        coh.mu_c,
        if delta.includes_completion { "completion" } else { "none" },
    );
    let path = out.join(format!("diagnose_j{}.csv", cfg.j));
    std::fs::write(&path, &csv)?;
    print!("{csv}");
    println!("certificate: {status}");
    Ok(rep.converged)
}

fn cmd_sweep(cfg: &RunConfig, out: &Path) -> unishear::Result<bool> {
    let sweep = cfg.sweep_config();
    let records = run_sweep(&sweep)?;
    let csv = records_csv(&records);
    std::fs::write(out.join("sweep.csv"), &csv)?;
    let series: Vec<(usize, f64)> = records
        .iter()
        .filter(|r| r.error.is_none() && r.rel_err_l1a > 0.0)
        .map(|r| (r.j, r.rel_err_l1a))
        .collect();
    write_error_plot(out.join("sweep.png").as_path(), &[(cfg.preset.label(), series)])?;
    print!("{csv}");
    match fit_decay_rate(&records) {
        Ok(fit) => println!("log2-slope {:.4} (residual {:.4})", fit.slope, fit.residual),
        Err(e) => println!("no decay fit: {e}"),
    }
    Ok(true)
}

fn cmd_compare(cfg: &RunConfig, out: &Path) -> unishear::Result<bool> {
    let mut base = cfg.sweep_config();
    base.diagnostics = false;
    let mut configs = Vec::new();
    for preset in [
        unishear::system::Preset::Alpha(0.5),
        unishear::system::Preset::Alpha(1.0),
        unishear::system::Preset::Wavelet,
    ] {
        let mut c = base.clone();
        c.preset = preset;
        configs.push(c);
    }
    let records = compare_presets(&configs)?;
    let csv = records_csv(&records);
    std::fs::write(out.join("compare.csv"), &csv)?;
    let mut series = Vec::new();
    for c in &configs {
        let label = c.preset.label();
        let curve: Vec<(usize, f64)> = records
            .iter()
            .filter(|r| r.preset == label && r.error.is_none() && r.rel_err_l1a > 0.0)
            .map(|r| (r.j, r.rel_err_l1a))
            .collect();
        series.push((label, curve));
    }
    write_error_plot(out.join("compare.png").as_path(), &series)?;
    print!("{csv}");
    Ok(true)
}
