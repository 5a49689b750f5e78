//! Acceptance gate: one test per release criterion, each printing a single
//! pass line with the measured quantities.  Run with
//! `cargo test --test acceptance -- --nocapture` to see the numbers.

use std::time::Instant;

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use unishear::diagnostics::{
    build_cluster_extended, cluster_coherence, cluster_coherence_dense, delta_sparsity,
    ProbeSpec,
};
use unishear::harness::{
    fit_decay_rate, gap_mask, records_csv, run_sweep, SweepConfig,
};
use unishear::io::{
    read_coefficients, read_pgm, read_raw, write_coefficients, write_pgm, write_raw, RawHeader,
};
use unishear::model::{filtered_model, make_mask, project_known, WeightSpec, WeightTable};
use unishear::recover::{inpaint_l1, relative_error, SolverConfig};
use unishear::atoms::bump;
use unishear::system::{
    band_weight, enumerate_bands, preset_alpha, preset_wavelet, Orientation, Preset,
};
use unishear::transform::{build_digital_system, l1_analysis_norm, tiling_residual};

fn rng_image(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// 1. Tiling identity for the three stock presets on two grid sizes.
#[test]
fn criterion_01_tiling_identity() {
    let presets = [Preset::Alpha(0.5), Preset::Alpha(1.0), Preset::Wavelet];
    let mut worst = 0.0f64;
    for preset in presets {
        for n in [128usize, 256] {
            let t0 = Instant::now();
            let seq = preset.sequence(4);
            let sys = build_digital_system(&seq, n, 4).unwrap();
            let r = tiling_residual(&sys);
            let dt = t0.elapsed();
            assert!(
                r <= 1e-10,
                "tiling residual {r:e} for {} N={n}",
                preset.label()
            );
            assert!(dt.as_secs_f64() < 5.0, "{} N={n} took {dt:?}", preset.label());
            worst = worst.max(r);
        }
    }
    println!("criterion 1 pass: tiling residual <= {worst:.2e} across 6 systems");
}

/// 2. Digital Parseval identity and perfect reconstruction on random images.
#[test]
fn criterion_02_parseval_reconstruction() {
    let t0 = Instant::now();
    let seq = preset_alpha(1.0, 4);
    let sys = build_digital_system(&seq, 128, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_energy = 0.0f64;
    let mut worst_rt = 0.0f64;
    for _ in 0..100 {
        let f = rng_image(128, &mut rng);
        let coeffs = sys.analyze(&f).unwrap();
        let energy: f64 = f.iter().map(|x| x * x).sum();
        let dev = (coeffs.energy() - energy).abs() / energy;
        worst_energy = worst_energy.max(dev);
        let back = sys.synthesize(&coeffs).unwrap();
        let num: f64 = f.iter().zip(&back).map(|(a, b)| (a - b) * (a - b)).sum();
        let rt = (num / energy).sqrt();
        worst_rt = worst_rt.max(rt);
    }
    let dt = t0.elapsed();
    assert!(worst_energy <= 1e-9, "energy identity off by {worst_energy:e}");
    assert!(worst_rt <= 1e-9, "round trip off by {worst_rt:e}");
    assert!(dt.as_secs_f64() < 30.0, "took {dt:?}");
    println!(
        "criterion 2 pass: 100 images, energy dev <= {worst_energy:.2e}, round trip <= {worst_rt:.2e}, {dt:.2?}"
    );
}

/// 3. Window axioms: scaling-function plateau/support, shear-bump partition
/// of unity, and boundary-atom continuity across the cone seam.
#[test]
fn criterion_03_window_axioms() {
    use unishear::atoms::meyer_scaling_ft;
    // plateau and support are exact, not approximate
    assert_eq!(meyer_scaling_ft(0.0), 1.0);
    assert_eq!(meyer_scaling_ft(1.0 / 16.0), 1.0);
    assert_eq!(meyer_scaling_ft(1.0 / 8.0), 0.0);
    assert_eq!(meyer_scaling_ft(0.3), 0.0);

    // squared bump partition over integer shifts at 1e5 random points
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let u: f64 = rng.gen_range(-1.0..1.0);
        let s = bump(u - 1.0).powi(2) + bump(u).powi(2) + bump(u + 1.0).powi(2);
        worst = worst.max((s - 1.0).abs());
    }
    assert!(worst <= 1e-12, "bump partition off by {worst:e}");

    // seam: boundary-atom weights from the two cone formulas coincide on
    // the diagonal exactly, and the glued window is C^1 across it (matched
    // one-sided directional derivatives)
    let seq = preset_alpha(1.0, 4);
    let bands = enumerate_bands(&seq);
    let mut worst_seam = 0.0f64;
    for j in 1..4 {
        let lm = seq.shear_bound(j);
        let bd = bands
            .iter()
            .find(|b| b.j == j && b.iota == Orientation::Boundary && b.l == lm)
            .unwrap();
        let scale = (2.0 * j as f64).exp2();
        let step = scale * 3e-9;
        for t in [0.3f64, 0.45, 0.6, 0.9] {
            let x = (t * scale).round(); // a grid point on the diagonal
            let f0 = band_weight(bd, &seq, [x, x]);
            let fh = band_weight(bd, &seq, [x + step, x - step]);
            let fv = band_weight(bd, &seq, [x - step, x + step]);
            let dh = (fh - f0) / step * scale;
            let dv = (f0 - fv) / step * scale;
            worst_seam = worst_seam.max((dh - dv).abs());
        }
    }
    assert!(worst_seam <= 1e-6, "seam mismatch {worst_seam:e}");
    println!(
        "criterion 3 pass: plateau/support exact, bump partition <= {worst:.2e} at 1e5 points, seam <= {worst_seam:.2e}"
    );
}

/// 4. Vanishing moments: directional bands carry no low-frequency weight,
/// exactly on grid points, and interior coefficient fields have zero mean.
#[test]
fn criterion_04_vanishing_moments() {
    let seq = preset_alpha(1.0, 4);
    let bands = enumerate_bands(&seq);
    for band in &bands {
        if band.is_coarse() || band.is_completion() {
            continue;
        }
        let hole = (2.0 * band.j as f64 - 4.0).exp2();
        let reach = hole.ceil() as i64;
        for m1 in -reach..=reach {
            for m2 in -reach..=reach {
                let xi = [m1 as f64, m2 as f64];
                if xi[0].abs().max(xi[1].abs()) < hole {
                    let w = band_weight(band, &seq, xi);
                    assert_eq!(w, 0.0, "band j={} l={} at {xi:?}", band.j, band.l);
                }
            }
        }
    }

    let sys = build_digital_system(&seq, 128, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = rng_image(128, &mut rng);
    let coeffs = sys.analyze(&f).unwrap();
    let mut worst = 0.0f64;
    for (band, cs) in sys.bands.iter().zip(&coeffs.bands) {
        if band.desc.is_coarse() || band.desc.is_completion() {
            continue;
        }
        let mean: Complex64 = cs.iter().sum();
        worst = worst.max(mean.norm() / cs.len() as f64);
    }
    assert!(worst <= 1e-10, "interior coefficient mean {worst:e}");
    println!("criterion 4 pass: low-frequency weights exactly 0, coefficient means <= {worst:.2e}");
}

/// 5. Solver correctness: the fast shrinkage path and the splitting solver
/// agree, both are exactly feasible, and neither exceeds the objective of
/// the uncorrupted image (which is feasible for the program they solve).
#[test]
fn criterion_05_cross_solver() {
    let t0 = Instant::now();
    let n = 32;
    let seq = preset_alpha(1.0, 2);
    let sys = build_digital_system(&seq, n, 2).unwrap();
    let table = WeightTable::build(WeightSpec::default(), n);
    let mut worst_gap = 0.0f64;
    for (j, px) in [(1usize, 1.0f64), (1, 2.0)] {
        let f = filtered_model(j, n, &table).unwrap().image;
        let mask = make_mask(px / n as f64, n).unwrap();
        let corrupted = project_known(&f, &mask);
        let truth = l1_analysis_norm(&f, &sys).unwrap();

        let fast = inpaint_l1(&corrupted, &mask, &sys, &SolverConfig::shrinkage()).unwrap();
        let exact = inpaint_l1(&corrupted, &mask, &sys, &SolverConfig::splitting()).unwrap();
        assert_eq!(fast.feasibility, 0.0);
        assert_eq!(exact.feasibility, 0.0);
        let gap = (fast.objective - exact.objective).abs() / exact.objective;
        worst_gap = worst_gap.max(gap);
        assert!(gap <= 0.01, "solver gap {gap:e} at j={j} px={px}");
        assert!(fast.objective <= truth * (1.0 + 1e-5), "fast {} vs truth {truth}", fast.objective);
        assert!(exact.objective <= truth * (1.0 + 1e-5), "exact {} vs truth {truth}", exact.objective);
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 60.0, "took {dt:?}");
    println!("criterion 5 pass: cross-solver gap <= {worst_gap:.2e}, feasibility 0, {dt:.2?}");
}

/// 6. Inpainting error bound: whenever the computed cluster coherence is
/// below 1/2, the splitting solver's recovery error obeys
/// 2 delta / (1 - 2 mu_c) plus a small solver allowance.
#[test]
fn criterion_06_error_bound_certificate() {
    let t0 = Instant::now();
    let n = 32;
    let seq = preset_alpha(1.0, 2);
    let sys = build_digital_system(&seq, n, 2).unwrap();
    let table = WeightTable::build(WeightSpec::default(), n);
    let mut applicable = 0;
    for px in [1.0f64, 2.0] {
        let j = 1;
        let f = filtered_model(j, n, &table).unwrap().image;
        let mask = make_mask(px / n as f64, n).unwrap();
        let cluster = build_cluster_extended(j, 0.3, &sys);
        let mu_c = cluster_coherence(&cluster, &mask, &sys, &ProbeSpec::default())
            .unwrap()
            .mu_c;
        if mu_c >= 0.5 {
            continue;
        }
        applicable += 1;
        let delta = delta_sparsity(&f, &cluster, &sys).unwrap().delta;
        let corrupted = project_known(&f, &mask);
        let rep = inpaint_l1(&corrupted, &mask, &sys, &SolverConfig::splitting()).unwrap();
        let norm0 = l1_analysis_norm(&f, &sys).unwrap();
        let err = relative_error(&rep.image, &f, &sys).unwrap() * norm0;
        let bound = 2.0 * delta / (1.0 - 2.0 * mu_c) + 1e-4 * norm0;
        assert!(
            err <= bound,
            "px={px}: error {err:e} above bound {bound:e} (mu_c={mu_c}, delta={delta})"
        );
    }
    assert!(applicable > 0, "no instance had mu_c < 1/2");
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 300.0, "took {dt:?}");
    println!("criterion 6 pass: bound held on {applicable} applicable instances, {dt:.2?}");
}

/// 7. Coherence oracle: the windowed computation equals the dense
/// reference, and coherence is monotone in the gap width.
#[test]
fn criterion_07_coherence_oracle() {
    let n = 32;
    let seq = preset_alpha(1.0, 2);
    let sys = build_digital_system(&seq, n, 2).unwrap();
    let cluster = build_cluster_extended(1, 0.3, &sys);
    let mask = make_mask(2.0 / n as f64, n).unwrap();
    let fast = cluster_coherence(&cluster, &mask, &sys, &ProbeSpec::default())
        .unwrap()
        .mu_c;
    let dense = cluster_coherence_dense(&cluster, &mask, &sys);
    let dev = (fast - dense).abs();
    assert!(dev <= 1e-10, "windowed {fast} vs dense {dense}");

    let mut prev = -1.0f64;
    let mut mus = Vec::new();
    for px in [1.0f64, 2.0, 3.0, 4.0, 5.0] {
        let m = make_mask(px / n as f64, n).unwrap();
        let mu = cluster_coherence(&cluster, &m, &sys, &ProbeSpec::default())
            .unwrap()
            .mu_c;
        assert!(mu >= prev - 1e-12, "mu_c dropped: {mu} after {prev}");
        prev = mu;
        mus.push(mu);
    }
    println!("criterion 7 pass: dense agreement {dev:.2e}, monotone mu_c {mus:?}");
}

/// 8. Sparsity decay: the out-of-cluster coefficient mass of the filtered
/// line models contracts from scale to scale.
#[test]
fn criterion_08_sparsity_decay() {
    let t0 = Instant::now();
    let config = SweepConfig::default_parabolic();
    let seq = config.preset.sequence(config.scales);
    let sys = build_digital_system(&seq, config.n, config.scales).unwrap();
    // Weight support 3/8 of the domain half-width: wide enough that the
    // weight's frequency profile is resolved at the coarsest scale, narrow
    // enough that the finest corona is not dominated by domain wrap-around.
    let table = WeightTable::build(WeightSpec { rho: 0.1875 }, config.n);
    // Each model is normalized to unit coefficient mass on its live scale
    // shells before measuring delta; by linearity this equals the
    // out-of-cluster fraction.  Absolute masses grow with the per-scale
    // atom count and are not comparable across scales on a fixed grid.
    let mut deltas = Vec::new();
    for j in 1..=4usize {
        let f = filtered_model(j, config.n, &table).unwrap().image;
        let cluster = build_cluster_extended(j, 0.1, &sys);
        let report = delta_sparsity(&f, &cluster, &sys).unwrap();
        deltas.push(report.delta / (report.delta + report.in_cluster_mass));
    }
    // Fixture from the first validated run (deterministic computation).
    let pinned = [0.9375163140, 0.9266091992, 0.8751238332, 0.8669686135];
    for (d, p) in deltas.iter().zip(pinned) {
        assert!(
            (d - p).abs() < 1e-9,
            "delta fixture drift: measured {deltas:?}, pinned {pinned:?}"
        );
    }
    let ratios: Vec<f64> = deltas.windows(2).map(|w| w[1] / w[0]).collect();
    for (i, r) in ratios.iter().enumerate() {
        assert!(*r < 1.0, "delta ratio {r} at j={}", i + 1);
    }
    println!(
        "criterion 8 pass: deltas {deltas:?}, ratios {ratios:?}, {:.2?}",
        t0.elapsed()
    );
}

/// 9. Asymptotic sweep: with the calibrated gap law the relative
/// l1-analysis error decreases strictly in scale with log2-slope <= -1.
/// The wavelet run under the same gap law is emitted for comparison only.
#[test]
fn criterion_09_asymptotic_sweep() {
    let t0 = Instant::now();
    let config = SweepConfig::default_parabolic();
    let records = run_sweep(&config).unwrap();
    assert_eq!(records.len(), 4);
    for r in &records {
        assert!(r.error.is_none(), "record j={} failed: {:?}", r.j, r.error);
    }
    let errs: Vec<f64> = records.iter().map(|r| r.rel_err_l1a).collect();
    let positive: Vec<&_> = records.iter().filter(|r| r.rel_err_l1a > 0.0).collect();
    for w in positive.windows(2) {
        assert!(
            w[1].rel_err_l1a < w[0].rel_err_l1a,
            "not strictly decreasing: {errs:?}"
        );
    }
    let fit = fit_decay_rate(&records).unwrap();
    assert!(fit.slope <= -1.0, "slope {} for errors {errs:?}", fit.slope);

    // reporting-only wavelet comparison under the same absolute gap law
    let mut wavelet = config.clone();
    wavelet.preset = Preset::Wavelet;
    let wrecords = run_sweep(&wavelet).unwrap();
    let werrs: Vec<f64> = wrecords.iter().map(|r| r.rel_err_l1a).collect();

    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 600.0, "took {dt:?}");
    println!(
        "criterion 9 pass: errors {errs:?}, slope {:.3}, wavelet (reported) {werrs:?}, {dt:.2?}",
        fit.slope
    );
}

/// 10. Determinism and formats: sweeps are byte-identical apart from wall
/// times, and every file format round-trips bit-exactly.
#[test]
fn criterion_10_determinism_formats() {
    let mut config = SweepConfig::default_parabolic();
    config.n = 64;
    config.j_max = 2;
    config.scales = 3;
    config.c = 4.0 / 64.0;
    config.diagnostics = true;
    let a = run_sweep(&config).unwrap();
    let b = run_sweep(&config).unwrap();
    let strip_ms = |csv: &str| -> String {
        csv.lines()
            .map(|l| l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap())
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip_ms(&records_csv(&a)), strip_ms(&records_csv(&b)));

    let dir = tempfile::tempdir().unwrap();
    let n = 64;
    let seq = preset_wavelet(3);
    let sys = build_digital_system(&seq, n, 3).unwrap();
    let table = WeightTable::build(WeightSpec::default(), n);
    let f = filtered_model(1, n, &table).unwrap().image;

    let header = RawHeader {
        n,
        j: 1,
        t: 0.5,
        rho: WeightSpec::default().rho,
        h: 0.03125,
    };
    let p = dir.path().join("f.raw");
    write_raw(&p, &header, &f).unwrap();
    let (h2, f2) = read_raw(&p).unwrap();
    assert_eq!(header.n, h2.n);
    assert!(f.iter().zip(&f2).all(|(a, b)| a.to_bits() == b.to_bits()));

    let p = dir.path().join("f.pgm");
    write_pgm(&p, n, &f).unwrap();
    let (w, h, px) = read_pgm(&p).unwrap();
    assert_eq!((w, h), (n, n));
    write_pgm(&dir.path().join("g.pgm"), n, &f).unwrap();
    let (_, _, px2) = read_pgm(&dir.path().join("g.pgm")).unwrap();
    assert_eq!(px, px2);

    let coeffs = sys.analyze(&f).unwrap();
    let p = dir.path().join("f.ucf");
    write_coefficients(&p, 3, &coeffs).unwrap();
    let (scales, c2) = read_coefficients(&p).unwrap();
    assert_eq!(scales, 3);
    for (a, b) in coeffs.bands.iter().zip(&c2.bands) {
        assert!(a
            .iter()
            .zip(b)
            .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
    }

    // a masked gap narrower than half a pixel is recorded as empty
    assert!(gap_mask(1e-9, n).unwrap().is_empty());
    println!("criterion 10 pass: sweep determinism and raw/pgm/coefficient round trips bit-exact");
}
