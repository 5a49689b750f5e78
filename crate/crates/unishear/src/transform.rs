//! Digital universal shearlet transform on an N x N periodic grid.
//!
//! Full-grid ("non-subsampled") translation mode with unnormalized band
//! weights: the tiling identity lowpass^2 + sum B^2 + completion^2 = 1
//! makes the digital frame exactly Parseval, so synthesis is both the
//! adjoint and the inverse of analysis.

use crate::fft::{index_of, signed, Fft2};
use crate::system::{
    band_weight, enumerate_bands, BandDescriptor, Orientation, ScalingSequence,
};
use crate::{Error, Result};
use num_complex::Complex64;
use num_rational::Rational64;
use rayon::prelude::*;

/// Deterministic parallel reduction: bands are split into this many fixed
/// chunks whose partial results are combined in chunk order, so results do
/// not depend on thread scheduling.
const REDUCE_CHUNKS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrequencyGrid {
    /// Pixels per axis; also the integer frequency count per axis.
    pub n: usize,
    /// Number of corona scales J.
    pub scales: usize,
}

impl FrequencyGrid {
    pub fn new(n: usize, scales: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 4 {
            return Err(Error::BadGridSize(n));
        }
        if scales == 0 {
            return Err(Error::GridTooSmall { j: scales, n });
        }
        // coarsest corona's outer edge 2^{2(J-1)-1} must fit inside Nyquist
        let edge = (2.0 * (scales as f64 - 1.0) - 1.0).exp2();
        if edge > n as f64 / 2.0 {
            return Err(Error::GridTooSmall { j: scales, n });
        }
        Ok(FrequencyGrid { n, scales })
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[allow(clippy::len_without_is_empty)]
    /// Signed frequency pair of a flat index.
    pub fn freq(&self, idx: usize) -> (i64, i64) {
        (signed(idx / self.n, self.n), signed(idx % self.n, self.n))
    }

    pub fn idx(&self, m1: i64, m2: i64) -> usize {
        index_of(m1, self.n) * self.n + index_of(m2, self.n)
    }
}

/// One frequency band with its sparse unnormalized weights.
#[derive(Debug, Clone)]
pub struct Band {
    pub desc: BandDescriptor,
    /// (flat frequency index, weight), weights > 0.
    pub support: Vec<(u32, f64)>,
    /// Sorted list of grid rows the support touches (for pruned FFTs).
    pub rows: Vec<usize>,
}

impl Band {
    fn from_points(desc: BandDescriptor, support: Vec<(u32, f64)>, n: usize) -> Self {
        let mut rows: Vec<usize> = support.iter().map(|&(i, _)| i as usize / n).collect();
        rows.sort_unstable();
        rows.dedup();
        Band { desc, support, rows }
    }
}

pub struct DigitalSystem {
    pub grid: FrequencyGrid,
    pub seq: ScalingSequence,
    /// Coarse band first, then enumerate_bands order, completion last.
    pub bands: Vec<Band>,
    fft: Fft2,
}

/// Tolerance above which the build refuses the system outright.
const TILING_FAIL: f64 = 1e-8;

pub fn build_digital_system(
    seq: &ScalingSequence,
    n: usize,
    scales: usize,
) -> Result<DigitalSystem> {
    assert!(
        scales <= seq.scales(),
        "sequence provides {} scales, system wants {}",
        seq.scales(),
        scales
    );
    let grid = FrequencyGrid::new(n, scales)?;
    let descs = enumerate_bands(seq);
    let mut coverage = vec![0.0f64; grid.len()];
    let mut bands = Vec::with_capacity(descs.len() + 1);
    for desc in descs {
        if desc.j >= scales && !desc.is_coarse() {
            break;
        }
        let mut support = Vec::new();
        // bounding box: corona K_j for directional bands, the lowpass
        // square for the coarse band
        let edge = if desc.is_coarse() {
            1
        } else {
            ((2.0 * desc.j as f64 - 1.0).exp2().ceil() as i64).min(n as i64 / 2)
        };
        let lo = (-edge).max(-(n as i64) / 2);
        let hi = edge.min(n as i64 / 2 - 1);
        for m1 in lo..=hi {
            for m2 in lo..=hi {
                let w = band_weight(&desc, seq, [m1 as f64, m2 as f64]);
                if w != 0.0 {
                    let idx = grid.idx(m1, m2);
                    support.push((idx as u32, w));
                    coverage[idx] += w * w;
                }
            }
        }
        support.sort_unstable_by_key(|&(i, _)| i);
        bands.push(Band::from_points(desc, support, n));
    }

    // finest-scale completion: whatever the coronas leave uncovered
    let mut comp_support = Vec::new();
    let mut worst_over = 0.0f64;
    for (idx, &c) in coverage.iter().enumerate() {
        let r = 1.0 - c;
        if r > 0.0 {
            comp_support.push((idx as u32, r.sqrt()));
        } else if -r > worst_over {
            worst_over = -r;
        }
    }
    if worst_over > TILING_FAIL {
        return Err(Error::TilingFailure(worst_over));
    }
    let comp_desc = BandDescriptor {
        j: scales,
        l: 0,
        iota: Orientation::Completion,
        alpha: Rational64::from_integer(0),
        normalization: 1.0 / n as f64,
        lattice_density: (n * n) as f64,
    };
    bands.push(Band::from_points(comp_desc, comp_support, n));

    let sys = DigitalSystem {
        grid,
        seq: seq.clone(),
        bands,
        fft: Fft2::new(n),
    };
    let residual = tiling_residual(&sys);
    if residual > TILING_FAIL {
        return Err(Error::TilingFailure(residual));
    }
    Ok(sys)
}

/// Max over grid frequencies of |sum of squared weights - 1|.
pub fn tiling_residual(sys: &DigitalSystem) -> f64 {
    let mut cover = vec![0.0f64; sys.grid.len()];
    for band in &sys.bands {
        for &(idx, w) in &band.support {
            cover[idx as usize] += w * w;
        }
    }
    cover
        .iter()
        .map(|c| (c - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Analysis coefficients: one complex N x N field per band, band order
/// matching the system.
pub struct CoefficientSet {
    pub n: usize,
    pub bands: Vec<Vec<Complex64>>,
}

impl CoefficientSet {
    pub fn energy(&self) -> f64 {
        self.bands
            .iter()
            .map(|b| b.iter().map(|c| c.norm_sqr()).sum::<f64>())
            .sum()
    }
}

impl DigitalSystem {
    pub fn n(&self) -> usize {
        self.grid.n
    }

    /// Continuum Fourier coefficients of a real image: forward DFT / N^2.
    pub fn spectrum(&self, f: &[f64]) -> Result<Vec<Complex64>> {
        if f.len() != self.grid.len() {
            return Err(Error::DimensionMismatch {
                expected: self.grid.len(),
                got: f.len(),
            });
        }
        let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fft.full(&mut buf, false);
        let scale = 1.0 / self.grid.len() as f64;
        for c in &mut buf {
            *c *= scale;
        }
        Ok(buf)
    }

    /// Full-grid coefficient field of one band from a spectrum.
    pub fn band_field(&self, spectrum: &[Complex64], b: usize) -> Vec<Complex64> {
        let band = &self.bands[b];
        let mut buf = vec![Complex64::default(); self.grid.len()];
        for &(idx, w) in &band.support {
            buf[idx as usize] = spectrum[idx as usize] * w;
        }
        self.fft.inverse_pruned(&mut buf, &band.rows);
        buf
    }

    pub fn analyze(&self, f: &[f64]) -> Result<CoefficientSet> {
        let spectrum = self.spectrum(f)?;
        let bands: Vec<Vec<Complex64>> = (0..self.bands.len())
            .into_par_iter()
            .map(|b| self.band_field(&spectrum, b))
            .collect();
        Ok(CoefficientSet {
            n: self.grid.n,
            bands,
        })
    }

    pub fn synthesize(&self, coeffs: &CoefficientSet) -> Result<Vec<f64>> {
        if coeffs.bands.len() != self.bands.len() || coeffs.n != self.grid.n {
            return Err(Error::DimensionMismatch {
                expected: self.bands.len(),
                got: coeffs.bands.len(),
            });
        }
        let acc = self.accumulate_spectrum(|b, buf| {
            buf.copy_from_slice(&coeffs.bands[b]);
        });
        Ok(self.spectrum_to_image(acc))
    }

    /// Core synthesis reduction: `fill` writes band b's coefficient field
    /// into the provided buffer; the fields are mapped back through the
    /// band weights and accumulated into one spectrum, deterministically.
    fn accumulate_spectrum<F>(&self, fill: F) -> Vec<Complex64>
    where
        F: Fn(usize, &mut [Complex64]) + Sync,
    {
        let len = self.grid.len();
        let nb = self.bands.len();
        let chunk = nb.div_ceil(REDUCE_CHUNKS);
        let partials: Vec<Vec<Complex64>> = (0..nb)
            .collect::<Vec<_>>()
            .par_chunks(chunk.max(1))
            .map(|ids| {
                let mut acc = vec![Complex64::default(); len];
                let mut buf = vec![Complex64::default(); len];
                let scale = 1.0 / len as f64;
                for &b in ids {
                    let band = &self.bands[b];
                    fill(b, &mut buf);
                    self.fft.forward_pruned(&mut buf, &band.rows);
                    for &(idx, w) in &band.support {
                        acc[idx as usize] += buf[idx as usize] * (w * scale);
                    }
                    for c in buf.iter_mut() {
                        *c = Complex64::default();
                    }
                }
                acc
            })
            .collect();
        let mut acc = vec![Complex64::default(); len];
        for p in partials {
            for (a, v) in acc.iter_mut().zip(p) {
                *a += v;
            }
        }
        acc
    }

    /// Real image of an accumulated synthesis spectrum.
    pub fn spectrum_to_image(&self, mut acc: Vec<Complex64>) -> Vec<f64> {
        self.fft.full(&mut acc, true);
        acc.iter().map(|c| c.re).collect()
    }

    /// In-place pruned inverse of a scattered band spectrum (`buf` holds
    /// spectrum * band weight on the support, zero elsewhere) into the
    /// band's full coefficient field.
    pub fn inverse_band(&self, buf: &mut [Complex64], b: usize) {
        self.fft.inverse_pruned(buf, &self.bands[b].rows);
    }

    /// Map one band's coefficient field (in `buf`, clobbered) back through
    /// the band weights and add it into the synthesis spectrum `acc`.
    /// Streaming counterpart of `synthesize` for solvers that keep
    /// per-band state and cannot afford a full `CoefficientSet`.
    pub fn scatter_band(&self, b: usize, buf: &mut [Complex64], acc: &mut [Complex64]) {
        let band = &self.bands[b];
        self.fft.forward_pruned(buf, &band.rows);
        let scale = 1.0 / self.grid.len() as f64;
        for &(idx, w) in &band.support {
            acc[idx as usize] += buf[idx as usize] * (w * scale);
        }
    }

    /// Per-band weighted l1 sums of a spectrum's coefficients; their total
    /// is the l1-analysis norm.
    pub fn band_l1_sums(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let n = self.grid.n;
        (0..self.bands.len())
            .into_par_iter()
            .map(|b| {
                let field = self.band_field(spectrum, b);
                let w = self.bands[b].desc.l1_weight(n);
                field.iter().map(|c| c.norm()).sum::<f64>() * w
            })
            .collect()
    }

    /// Largest density-weighted coefficient magnitude of a spectrum; the
    /// scale on which soft thresholds operate.
    pub fn max_weighted_coeff(&self, spectrum: &[Complex64]) -> f64 {
        let n = self.grid.n;
        (0..self.bands.len())
            .into_par_iter()
            .map(|b| {
                let field = self.band_field(spectrum, b);
                let w = self.bands[b].desc.l1_weight(n);
                field.iter().map(|c| c.norm() * w).fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Analyze, shrink every coefficient against the density-weighted
    /// threshold `lambda`, and synthesize — fused so coefficient fields are
    /// never all resident at once. `soft` selects soft vs hard shrinkage.
    pub fn shrink_synthesize(&self, spectrum: &[Complex64], lambda: f64, soft: bool) -> Vec<f64> {
        let n = self.grid.n;
        let acc = self.accumulate_spectrum(|b, buf| {
            let band = &self.bands[b];
            for &(idx, w) in &band.support {
                buf[idx as usize] = spectrum[idx as usize] * w;
            }
            self.fft.inverse_pruned(buf, &band.rows);
            let tau = lambda / band.desc.l1_weight(n);
            for c in buf.iter_mut() {
                let m = c.norm();
                if m <= tau {
                    *c = Complex64::default();
                } else if soft {
                    *c *= 1.0 - tau / m;
                }
            }
        });
        self.spectrum_to_image(acc)
    }
}

/// l1-analysis norm: weighted sum of coefficient magnitudes over all bands.
/// Full-grid coefficients are reweighted by lattice density x continuum
/// normalization / N^2 so the value approximates the lattice-sampled norm.
pub fn l1_analysis_norm(f: &[f64], sys: &DigitalSystem) -> Result<f64> {
    let spectrum = sys.spectrum(f)?;
    Ok(sys.band_l1_sums(&spectrum).iter().sum())
}

/// l2 norm under the continuum normalization (1/N^2 cell measure).
pub fn l2_norm(f: &[f64], n: usize) -> f64 {
    (f.iter().map(|x| x * x).sum::<f64>() / (n * n) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::preset_alpha;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rng_image(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn grid_guards() {
        assert!(matches!(
            FrequencyGrid::new(8, 4),
            Err(Error::GridTooSmall { .. })
        ));
        assert!(matches!(FrequencyGrid::new(24, 2), Err(Error::BadGridSize(24))));
        assert!(FrequencyGrid::new(64, 4).is_ok());
    }

    #[test]
    fn tiling_residual_small() {
        let seq = preset_alpha(1.0, 3);
        let sys = build_digital_system(&seq, 64, 3).unwrap();
        assert!(tiling_residual(&sys) <= 1e-10);
    }

    #[test]
    fn deleted_band_residual() {
        let seq = preset_alpha(1.0, 3);
        let mut sys = build_digital_system(&seq, 64, 3).unwrap();
        // deleting one interior band leaves a gap equal to its max squared weight
        let b = sys
            .bands
            .iter()
            .position(|b| b.desc.j == 2 && b.desc.iota == Orientation::Vertical && b.desc.l == 1)
            .unwrap();
        let gap = sys.bands[b]
            .support
            .iter()
            .map(|&(_, w)| w * w)
            .fold(0.0, f64::max);
        assert!(gap > 0.0);
        sys.bands.remove(b);
        assert!((tiling_residual(&sys) - gap).abs() < 1e-12);
    }

    #[test]
    fn deleted_completion_residual() {
        let seq = preset_alpha(1.0, 3);
        let mut sys = build_digital_system(&seq, 64, 3).unwrap();
        let comp = sys.bands.last().unwrap();
        assert!(comp.desc.is_completion());
        // the completion covers the Nyquist corners that the coronas miss
        let gap = comp
            .support
            .iter()
            .map(|&(_, w)| w * w)
            .fold(0.0, f64::max);
        sys.bands.pop();
        assert!((tiling_residual(&sys) - gap).abs() < 1e-12);
        // corners are fully uncovered
        assert!((gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parseval_and_roundtrip() {
        let seq = preset_alpha(1.0, 3);
        let sys = build_digital_system(&seq, 64, 3).unwrap();
        let f = rng_image(64, 7);
        let coeffs = sys.analyze(&f).unwrap();
        let energy: f64 = f.iter().map(|x| x * x).sum();
        assert!((coeffs.energy() - energy).abs() <= 1e-10 * energy);
        let back = sys.synthesize(&coeffs).unwrap();
        let maxdev = f
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(maxdev <= 1e-10);
    }

    #[test]
    fn spike_energy() {
        let seq = preset_alpha(1.0, 3);
        let sys = build_digital_system(&seq, 64, 3).unwrap();
        // unit spectral spike strictly inside corona 2
        let mut spec = vec![Complex64::default(); 64 * 64];
        spec[sys.grid.idx(6, 0)] = Complex64::new(1.0, 0.0);
        let total: f64 = (0..sys.bands.len())
            .map(|b| {
                sys.band_field(&spec, b)
                    .iter()
                    .map(|c| c.norm_sqr())
                    .sum::<f64>()
            })
            .sum();
        // Parseval with the raw inverse: each band contributes N^2 w^2
        assert!((total - (64 * 64) as f64).abs() < 1e-9 * (64 * 64) as f64);
    }

    #[test]
    fn adjointness() {
        let seq = preset_alpha(1.0, 3);
        let sys = build_digital_system(&seq, 64, 3).unwrap();
        let f = rng_image(64, 1);
        let tf = sys.analyze(&f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = CoefficientSet {
            n: 64,
            bands: (0..sys.bands.len())
                .map(|_| {
                    (0..64 * 64)
                        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect()
                })
                .collect(),
        };
        let lhs: Complex64 = tf
            .bands
            .iter()
            .zip(&c.bands)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x * y.conj())
                    .sum::<Complex64>()
            })
            .sum();
        let tc = sys.synthesize(&c).unwrap();
        // synthesize takes the real part; pair against a real image
        let rhs: f64 = f.iter().zip(&tc).map(|(x, y)| x * y).sum();
        assert!((lhs.re - rhs).abs() < 1e-9 * rhs.abs().max(1.0));
    }

    #[test]
    fn linearity() {
        let seq = preset_alpha(0.5, 3);
        let sys = build_digital_system(&seq, 64, 3).unwrap();
        let f = rng_image(64, 3);
        let g = rng_image(64, 4);
        let fg: Vec<f64> = f.iter().zip(&g).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
        let cf = sys.analyze(&f).unwrap();
        let cg = sys.analyze(&g).unwrap();
        let cfg = sys.analyze(&fg).unwrap();
        for b in 0..sys.bands.len() {
            for i in 0..64 * 64 {
                let lin = cf.bands[b][i] * 2.0 - cg.bands[b][i] * 0.5;
                assert!((cfg.bands[b][i] - lin).norm() < 1e-12 * (1.0 + lin.norm()));
            }
        }
    }

    #[test]
    fn interior_coefficient_means_vanish() {
        let seq = preset_alpha(1.0, 3);
        let sys = build_digital_system(&seq, 64, 3).unwrap();
        let f = rng_image(64, 9);
        let coeffs = sys.analyze(&f).unwrap();
        for (band, cs) in sys.bands.iter().zip(&coeffs.bands) {
            if band.desc.is_coarse() || band.desc.is_completion() {
                continue;
            }
            let mean: Complex64 = cs.iter().sum();
            assert!(mean.norm() <= 1e-10 * (64 * 64) as f64);
        }
    }

    #[test]
    fn l1_norm_basics() {
        let seq = preset_alpha(1.0, 3);
        let sys = build_digital_system(&seq, 64, 3).unwrap();
        let zero = vec![0.0; 64 * 64];
        assert_eq!(l1_analysis_norm(&zero, &sys).unwrap(), 0.0);
        let f = rng_image(64, 5);
        let n1 = l1_analysis_norm(&f, &sys).unwrap();
        let f2: Vec<f64> = f.iter().map(|x| 2.0 * x).collect();
        assert!((l1_analysis_norm(&f2, &sys).unwrap() - 2.0 * n1).abs() < 1e-9 * n1);
        // l2 <= l1-analysis under the continuum normalization
        assert!(l2_norm(&f, 64) <= n1);
    }

    #[test]
    fn shrink_synthesize_consistency() {
        // lambda = 0 must reproduce the identity
        let seq = preset_alpha(1.0, 3);
        let sys = build_digital_system(&seq, 64, 3).unwrap();
        let f = rng_image(64, 11);
        let spec = sys.spectrum(&f).unwrap();
        let out = sys.shrink_synthesize(&spec, 0.0, true);
        let maxdev = f
            .iter()
            .zip(&out)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(maxdev < 1e-10);
        // enormous lambda kills everything
        let out = sys.shrink_synthesize(&spec, 1e9, true);
        assert!(out.iter().all(|x| x.abs() < 1e-12));
    }
}
