//! Recovery algorithms: l1-analysis inpainting via (a) a projected
//! iterative-shrinkage path with exponentially decreasing threshold and
//! (b) an operator-splitting solver for the exact constrained problem,
//! plus one-step coefficient thresholding.
//!
//! Both iterative solvers enforce the data constraint by exact projection
//! every iteration, so the known region is reproduced bit-exactly.

use crate::model::{overlay_missing, project_known, MaskSpec};
use crate::system::Orientation;
use crate::transform::{l1_analysis_norm, CoefficientSet, DigitalSystem};
use crate::{Error, Result};
use num_complex::Complex64;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Soft-shrinkage path with geometric threshold decay (fast default).
    ShrinkagePath,
    /// Operator splitting on the exact constrained program (slow, used
    /// for certificates and cross-solver oracles).
    Splitting,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub method: Method,
    pub max_iters: usize,
    /// Starting threshold; None = largest weighted coefficient of the input.
    pub lambda_max: Option<f64>,
    /// Final threshold as a fraction of lambda_max.
    pub lambda_min_ratio: f64,
    /// Geometric decay per iteration of the shrinkage path.
    pub decay: f64,
    /// Relative iterate-change convergence tolerance.
    pub tol: f64,
    /// Penalty parameter: thresholds are l1 weight / mu.  Smaller mu means
    /// harder shrinkage per pass; the shrinkage path wants it well below 1
    /// so the stationary threshold sits at the scale of the coefficients.
    pub mu: f64,
    /// Splitting primal/dual residual tolerance (relative).
    pub dual_tol: f64,
}

impl SolverConfig {
    pub fn shrinkage() -> Self {
        SolverConfig {
            method: Method::ShrinkagePath,
            max_iters: 300,
            lambda_max: None,
            lambda_min_ratio: 1e-4,
            decay: 0.9,
            tol: 1e-6,
            mu: 1.0,
            dual_tol: 1e-6,
        }
    }

    pub fn splitting() -> Self {
        SolverConfig {
            method: Method::Splitting,
            max_iters: 600,
            lambda_max: None,
            lambda_min_ratio: 1e-4,
            decay: 0.9,
            tol: 1e-8,
            mu: 1.0,
            dual_tol: 1e-7,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.max_iters > 0
            && self.lambda_min_ratio > 0.0
            && self.lambda_min_ratio <= 1.0
            && self.decay > 0.0
            && self.decay < 1.0
            && self.tol > 0.0
            && self.mu > 0.0
            && self.dual_tol > 0.0
            && self.lambda_max.map_or(true, |l| l > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::Config("invalid solver parameters".into()))
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::shrinkage()
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryReport {
    pub image: Vec<f64>,
    pub iterations: usize,
    /// Final l1-analysis objective.
    pub objective: f64,
    /// Best objective seen after each iteration; non-increasing because the
    /// reported iterate is the best feasible one so far.
    pub objective_trace: Vec<f64>,
    /// ||P_K x - P_K x0||_2 over pixels; 0 bit-exactly for the iterative
    /// solvers (constraint by projection).
    pub feasibility: f64,
    pub converged: bool,
    pub wall_ms: u128,
}


fn feasibility_residual(x: &[f64], known: &[f64], mask: &MaskSpec) -> f64 {
    project_known(x, mask)
        .iter()
        .zip(known)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Algorithm: argmin ||T x||_1 subject to P_K x = P_K x0, where `corrupted`
/// is P_K x0 (zeros on the mask).
pub fn inpaint_l1(
    corrupted: &[f64],
    mask: &MaskSpec,
    sys: &DigitalSystem,
    config: &SolverConfig,
) -> Result<RecoveryReport> {
    config.validate()?;
    let start = Instant::now();
    let known = project_known(corrupted, mask);
    if mask.is_empty() {
        let objective = l1_analysis_norm(corrupted, sys)?;
        return Ok(RecoveryReport {
            objective,
            objective_trace: vec![objective],
            image: corrupted.to_vec(),
            iterations: 0,
            feasibility: 0.0,
            converged: true,
            wall_ms: start.elapsed().as_millis(),
        });
    }
    let report = match config.method {
        Method::ShrinkagePath => shrinkage_path(&known, mask, sys, config)?,
        Method::Splitting => splitting(&known, mask, sys, config)?,
    };
    debug_assert_eq!(feasibility_residual(&report.image, &known, mask), 0.0);
    Ok(report)
}

/// Projected shrinkage path, condensed to a single coefficient-space state
/// per band: w = Tx + u, where u is the running dual correction.  Each
/// iteration soft-shrinks w with a per-band threshold that starts high
/// enough to kill every coefficient of the input and decays geometrically
/// to its stationary value; once the decay bottoms out the iteration is a
/// plain Douglas-Rachford split on the constrained program, so the fixed
/// point solves it exactly.  The dual feedback is what keeps the path from
/// drifting: the naive "reset u every iteration" variant settles on badly
/// infeasible-in-spirit fixed points when much of the signal energy lives
/// in the residual band (observed: relative error near 4 on a coarse grid
/// where the splitting solver is exact to 1e-7).
///
/// The reported image is the best-objective feasible iterate, which makes
/// the objective trace non-increasing by construction.  Bands are
/// activated lazily: a band with no mass in either the state or the
/// current iterate's spectrum costs one support scan, not two FFT passes.
fn shrinkage_path(
    known: &[f64],
    mask: &MaskSpec,
    sys: &DigitalSystem,
    config: &SolverConfig,
) -> Result<RecoveryReport> {
    let start = Instant::now();
    let len = sys.grid.len();
    let nb = sys.bands.len();
    let weights: Vec<f64> = (0..nb).map(|b| coeff_scale(sys, b)).collect();

    let spec0 = sys.spectrum(known)?;
    let lambda_max = match config.lambda_max {
        Some(l) => l,
        None => sys.max_weighted_coeff(&spec0),
    };
    if lambda_max == 0.0 {
        return Err(Error::DegenerateInput);
    }
    // Douglas-Rachford solves the program for any fixed threshold scale
    // gamma, but its speed tracks how gamma compares to the coefficient
    // magnitudes of the data.  The l1-analysis norm of the input carries
    // both its amplitude and the grid's weight normalization, so keying
    // gamma to it keeps the schedule in the fast regime across grid sizes
    // and model scales.
    let initial_obj = l1_analysis_norm(known, sys)?;
    let gamma = 10.0 * initial_obj / config.mu;
    let taus: Vec<f64> = (0..nb).map(|b| coeff_scale(sys, b) * gamma).collect();
    let act_eps = 1e-13 * lambda_max;

    // Sup bound on the weighted coefficients a spectrum puts into band b,
    // from the support alone (no FFT); used to skip all-zero bands.
    let band_mass = |spectrum: &[Complex64], b: usize| -> f64 {
        let s: f64 = sys.bands[b]
            .support
            .iter()
            .map(|&(idx, bw)| spectrum[idx as usize].norm() * bw)
            .sum();
        s * weights[b]
    };

    // Threshold multiplier: s0 zeroes every coefficient of the input on the
    // first pass, the floor of 1 is the stationary Douglas-Rachford
    // threshold; the geometric decay in between is the shrinkage path.
    let s0 = (0..nb)
        .map(|b| band_mass(&spec0, b) / (weights[b] * taus[b]))
        .fold(1.0f64, f64::max);
    let s_floor = (s0 * config.lambda_min_ratio).max(1.0);

    // w_b empty <=> the band is inactive (state identically zero); bands
    // activate lazily, and the first fused pass turns w into T(known)
    let mut w: Vec<Vec<Complex64>> = vec![Vec::new(); nb];
    let mut x = known.to_vec();
    let mut xspec = spec0;
    let mut best = x.clone();
    let mut best_obj = initial_obj;
    let mut trace = Vec::with_capacity(config.max_iters);
    let mut s = s0;
    let mut iterations = 0;
    let mut converged = false;
    let mut acc = vec![Complex64::default(); len];
    let mut buf = vec![Complex64::default(); len];
    for it in 0..config.max_iters {
        // fused per-band pass: tx from the current spectrum, dual-state
        // update, and the relaxed point v = 2 soft(w) - w for the next
        // x-update, all in one buffer round trip
        acc.iter_mut().for_each(|c| *c = Complex64::default());
        let mut obj = 0.0;
        // convergence is judged on the split state w, not on x: while a
        // band's dual is still accumulating toward its threshold, x can sit
        // on a long plateau that looks converged from the image side
        let mut dw2 = 0.0;
        let mut wn2 = 0.0;
        for b in 0..nb {
            if w[b].is_empty() {
                if band_mass(&xspec, b) <= act_eps {
                    continue;
                }
                w[b] = vec![Complex64::default(); len];
            }
            buf.iter_mut().for_each(|c| *c = Complex64::default());
            for &(idx, bw) in &sys.bands[b].support {
                buf[idx as usize] = xspec[idx as usize] * bw;
            }
            sys.inverse_band(&mut buf, b);
            let tau = s * taus[b];
            let tau2 = tau * tau;
            let mut l1 = 0.0;
            for (wc, v) in w[b].iter_mut().zip(buf.iter_mut()) {
                let t = *v;
                l1 += t.norm_sqr().sqrt();
                let c = *wc;
                let wn = if c.norm_sqr() <= tau2 {
                    t + c
                } else {
                    t + c * (tau / c.norm())
                };
                dw2 += (wn - c).norm_sqr();
                *wc = wn;
                let m2 = wn.norm_sqr();
                wn2 += m2;
                *v = if m2 <= tau2 {
                    -wn
                } else {
                    wn * (1.0 - 2.0 * tau / m2.sqrt())
                };
            }
            obj += l1 * weights[b];
            sys.scatter_band(b, &mut buf, &mut acc);
        }
        // obj belongs to the iterate the pass analyzed
        if obj < best_obj {
            best_obj = obj;
            best = x.clone();
        }
        trace.push(best_obj);
        let cand = sys.spectrum_to_image(acc.clone());
        x = overlay_missing(known, &cand, mask);
        xspec = sys.spectrum(&x)?;
        iterations = it + 1;
        let change = if wn2 > 0.0 { (dw2 / wn2).sqrt() } else { 1.0 };
        if s <= s_floor && change < config.tol {
            converged = true;
            break;
        }
        s = (s * config.decay).max(s_floor);
    }
    // the last iterate was produced after the final objective pass
    let final_obj = l1_analysis_norm(&x, sys)?;
    if final_obj < best_obj {
        best_obj = final_obj;
        best = x;
        trace.push(best_obj);
    }
    Ok(RecoveryReport {
        objective: best_obj,
        objective_trace: trace,
        feasibility: feasibility_residual(&best, known, mask),
        image: best,
        iterations,
        converged,
        wall_ms: start.elapsed().as_millis(),
    })
}

fn coeff_scale(sys: &DigitalSystem, b: usize) -> f64 {
    sys.bands[b].desc.l1_weight(sys.n())
}

fn splitting(
    known: &[f64],
    mask: &MaskSpec,
    sys: &DigitalSystem,
    config: &SolverConfig,
) -> Result<RecoveryReport> {
    let start = Instant::now();
    let nb = sys.bands.len();
    let len = sys.grid.len();
    let mut x = known.to_vec();
    let mut z = sys.analyze(&x)?;
    let mut u = CoefficientSet {
        n: sys.n(),
        bands: vec![vec![Complex64::default(); len]; nb],
    };
    let mut best = x.clone();
    let mut best_obj = l1_analysis_norm(known, sys)?;
    let mut trace = Vec::with_capacity(config.max_iters);
    let mut iterations = 0;
    let mut converged = false;
    for it in 0..config.max_iters {
        // x-update: project T*(z - u) onto the data constraint
        let v = CoefficientSet {
            n: sys.n(),
            bands: (0..nb)
                .map(|b| {
                    z.bands[b]
                        .iter()
                        .zip(&u.bands[b])
                        .map(|(zz, uu)| zz - uu)
                        .collect()
                })
                .collect(),
        };
        let tv = sys.synthesize(&v)?;
        x = overlay_missing(known, &tv, mask);
        // z-update: prox of the weighted l1 at Tx + u
        let tx = sys.analyze(&x)?;
        let mut primal = 0.0f64;
        let mut dual = 0.0f64;
        let mut znorm = 0.0f64;
        let mut obj = 0.0f64;
        for b in 0..nb {
            let weight = coeff_scale(sys, b);
            let tau = weight / config.mu;
            obj += weight * tx.bands[b].iter().map(|c| c.norm()).sum::<f64>();
            for i in 0..len {
                let w = tx.bands[b][i] + u.bands[b][i];
                let m = w.norm();
                let znew = if m <= tau {
                    Complex64::default()
                } else {
                    w * (1.0 - tau / m)
                };
                dual += (znew - z.bands[b][i]).norm_sqr();
                z.bands[b][i] = znew;
                u.bands[b][i] = w - znew;
                primal += (tx.bands[b][i] - znew).norm_sqr();
                znorm += znew.norm_sqr();
            }
        }
        if obj < best_obj {
            best_obj = obj;
            best = x.clone();
        }
        trace.push(best_obj);
        iterations = it + 1;
        let scale = znorm.sqrt().max(1e-300);
        if primal.sqrt() <= config.dual_tol * scale && dual.sqrt() <= config.dual_tol * scale {
            converged = true;
            break;
        }
    }
    Ok(RecoveryReport {
        objective: best_obj,
        objective_trace: trace,
        feasibility: feasibility_residual(&best, known, mask),
        image: best,
        iterations,
        converged,
        wall_ms: start.elapsed().as_millis(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdBands {
    All,
    /// Restrict surviving coefficients to the vertical-cone bands.
    VerticalOnly,
}

/// One-step thresholding: analyze P_K f, zero every coefficient whose
/// density-weighted modulus is below beta, synthesize.
pub fn inpaint_threshold_onestep(
    corrupted: &[f64],
    mask: &MaskSpec,
    sys: &DigitalSystem,
    beta: f64,
    bands: ThresholdBands,
) -> Result<RecoveryReport> {
    assert!(beta >= 0.0);
    let start = Instant::now();
    let known = project_known(corrupted, mask);
    let mut coeffs = sys.analyze(&known)?;
    for b in 0..sys.bands.len() {
        let keep_band = match bands {
            ThresholdBands::All => true,
            ThresholdBands::VerticalOnly => sys.bands[b].desc.iota == Orientation::Vertical,
        };
        let w = coeff_scale(sys, b);
        for c in coeffs.bands[b].iter_mut() {
            if !keep_band || c.norm() * w < beta {
                *c = Complex64::default();
            }
        }
    }
    let x = sys.synthesize(&coeffs)?;
    let objective = l1_analysis_norm(&x, sys)?;
    Ok(RecoveryReport {
        objective,
        objective_trace: vec![objective],
        feasibility: feasibility_residual(&x, &known, mask),
        image: x,
        iterations: 1,
        converged: true,
        wall_ms: start.elapsed().as_millis(),
    })
}

/// q-quantile (0..=1) of the density-weighted coefficient moduli of P_K f;
/// a data-relative helper for choosing beta.
pub fn beta_quantile(
    corrupted: &[f64],
    mask: &MaskSpec,
    sys: &DigitalSystem,
    q: f64,
) -> Result<f64> {
    let known = project_known(corrupted, mask);
    let coeffs = sys.analyze(&known)?;
    let mut mags: Vec<f64> = Vec::with_capacity(sys.grid.len() * sys.bands.len());
    for b in 0..sys.bands.len() {
        let w = coeff_scale(sys, b);
        mags.extend(coeffs.bands[b].iter().map(|c| c.norm() * w));
    }
    mags.sort_by(f64::total_cmp);
    let pos = ((mags.len() - 1) as f64 * q.clamp(0.0, 1.0)).round() as usize;
    Ok(mags[pos])
}

/// Relative error in the l1-analysis norm.
pub fn relative_error(recovered: &[f64], reference: &[f64], sys: &DigitalSystem) -> Result<f64> {
    let den = l1_analysis_norm(reference, sys)?;
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    let diff: Vec<f64> = recovered
        .iter()
        .zip(reference)
        .map(|(a, b)| a - b)
        .collect();
    Ok(l1_analysis_norm(&diff, sys)? / den)
}
