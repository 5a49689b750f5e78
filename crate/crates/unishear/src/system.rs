//! Index bookkeeping for universal shearlet systems: scaling sequences,
//! presets, band enumeration, and pointwise atom evaluation in frequency.

use crate::atoms::{bump, corona, scaling2_ft};
use crate::{Error, Result};
use num_rational::Rational64;

/// Per-scale scaling parameters (alpha_j), stored as exact rationals.
/// Admissibility: alpha_0 = 0 and alpha_j = m/j with integer m <= 2j-1,
/// which makes the shear bound 2^{(2-alpha_j) j} a power of two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalingSequence {
    values: Vec<Rational64>,
}

impl ScalingSequence {
    pub fn scales(&self) -> usize {
        self.values.len()
    }

    pub fn alpha(&self, j: usize) -> Rational64 {
        self.values[j]
    }

    pub fn alpha_f64(&self, j: usize) -> f64 {
        *self.values[j].numer() as f64 / *self.values[j].denom() as f64
    }

    /// log2 of the shear bound: (2 - alpha_j) * j, an integer >= 0.
    pub fn shear_exponent(&self, j: usize) -> u32 {
        if j == 0 {
            return 0;
        }
        let e = (Rational64::from_integer(2) - self.values[j]) * Rational64::from_integer(j as i64);
        debug_assert!(e.is_integer() && *e.numer() >= 0);
        e.to_integer() as u32
    }

    /// Shear bound 2^{(2-alpha_j) j}; boundary atoms sit at |l| equal to it.
    pub fn shear_bound(&self, j: usize) -> i64 {
        if j == 0 {
            1
        } else {
            1i64 << self.shear_exponent(j)
        }
    }
}

pub fn validate_scaling_sequence(values: &[Rational64]) -> Result<ScalingSequence> {
    let first = values.first().ok_or(Error::WrongAnchor)?;
    if *first != Rational64::from_integer(0) {
        return Err(Error::WrongAnchor);
    }
    for (j, a) in values.iter().enumerate().skip(1) {
        let m = *a * Rational64::from_integer(j as i64);
        if !m.is_integer() || m.to_integer() > 2 * j as i64 - 1 {
            return Err(Error::NotAdmissible(j));
        }
    }
    Ok(ScalingSequence {
        values: values.to_vec(),
    })
}

/// Nearest admissible approximation of a constant alpha < 2: per scale,
/// alpha_j = m/j with m = the integer nearest alpha*j (ties toward the
/// larger value), clamped to m <= 2j-1.
pub fn preset_alpha(alpha: f64, big_j: usize) -> ScalingSequence {
    assert!(alpha < 2.0, "alpha must be < 2");
    let mut values = vec![Rational64::from_integer(0)];
    for j in 1..big_j {
        let target = alpha * j as f64;
        // round half toward the larger m
        let m = (target + 0.5).floor() as i64;
        let m = m.min(2 * j as i64 - 1);
        values.push(Rational64::new(m, j as i64));
    }
    ScalingSequence { values }
}

/// Wavelet-like preset alpha_j = 2 - 1/j: isotropic scaling 2^{alpha_j j}
/// = 2^{2j}/2 and a constant shear bound of 2 at every scale.
pub fn preset_wavelet(big_j: usize) -> ScalingSequence {
    assert!(big_j >= 1);
    let mut values = vec![Rational64::from_integer(0)];
    for j in 1..big_j {
        values.push(Rational64::new(2 * j as i64 - 1, j as i64));
    }
    ScalingSequence { values }
}

/// Named presets accepted by the CLI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    Alpha(f64),
    Wavelet,
}

impl Preset {
    pub fn sequence(&self, big_j: usize) -> ScalingSequence {
        match self {
            Preset::Alpha(a) => preset_alpha(*a, big_j),
            Preset::Wavelet => preset_wavelet(big_j),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Preset::Alpha(a) => format!("alpha{a}"),
            Preset::Wavelet => "wavelet".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Coarse,
    Horizontal,
    Vertical,
    Boundary,
    /// Finest-scale residual covering grid frequencies beyond corona J-1.
    Completion,
}

impl Orientation {
    pub fn tag(&self) -> &'static str {
        match self {
            Orientation::Coarse => "coarse",
            Orientation::Horizontal => "h",
            Orientation::Vertical => "v",
            Orientation::Boundary => "b",
            Orientation::Completion => "completion",
        }
    }
}

/// One (j, l, iota) band. The continuum normalization is kept here and NOT
/// baked into band weights, so the digital transform stays exactly Parseval
/// while continuum-coefficient diagnostics multiply it back in.
#[derive(Debug, Clone, PartialEq)]
pub struct BandDescriptor {
    /// Scale; usize::MAX never used — coarse is flagged by iota.
    pub j: usize,
    pub l: i64,
    pub iota: Orientation,
    pub alpha: Rational64,
    /// 2^{-(2+alpha_j) j / 2}, times 2^{-1/2} for boundary j >= 1;
    /// 1 for coarse; 1/N for the completion band (set at build time).
    pub normalization: f64,
    /// Translation-lattice density relative to the unit torus
    /// (number of lattice points in one period).
    pub lattice_density: f64,
}

impl BandDescriptor {
    pub fn is_coarse(&self) -> bool {
        self.iota == Orientation::Coarse
    }

    pub fn is_completion(&self) -> bool {
        self.iota == Orientation::Completion
    }

    /// Scale a full-grid coefficient magnitude to the lattice-sampled l1
    /// contribution of one pixel: density * normalization / N^2.
    pub fn l1_weight(&self, n: usize) -> f64 {
        self.lattice_density * self.normalization / (n * n) as f64
    }
}

/// Full index of a single atom (band plus translation), used by the
/// lattice-mode diagnostics.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShearletIndex {
    pub j: usize,
    pub l: i64,
    pub k: (i64, i64),
    pub iota: Orientation,
    pub alpha: Rational64,
}

fn interior_descriptor(seq: &ScalingSequence, j: usize, l: i64, iota: Orientation) -> BandDescriptor {
    let aj = seq.alpha_f64(j) * j as f64;
    BandDescriptor {
        j,
        l,
        iota,
        alpha: seq.alpha(j),
        normalization: (-(2.0 * j as f64 + aj) / 2.0).exp2(),
        lattice_density: (2.0 * j as f64 + aj).exp2(),
    }
}

fn boundary_descriptor(seq: &ScalingSequence, j: usize, l: i64) -> BandDescriptor {
    let aj = seq.alpha_f64(j) * j as f64;
    let half = if j >= 1 { 1.0 } else { 0.0 };
    BandDescriptor {
        j,
        l,
        iota: Orientation::Boundary,
        alpha: seq.alpha(j),
        normalization: (-(2.0 * j as f64 + aj) / 2.0 - half / 2.0).exp2(),
        // j >= 1 boundary atoms live on the half lattice: 4x density
        lattice_density: (2.0 * j as f64 + aj + 2.0 * half).exp2(),
    }
}

/// All bands of the system in deterministic order: coarse first, then per
/// scale j ascending: horizontal l ascending, vertical l ascending,
/// boundary -l_max then +l_max. The completion band is appended by the
/// digital transform, not here.
pub fn enumerate_bands(seq: &ScalingSequence) -> Vec<BandDescriptor> {
    let mut out = vec![BandDescriptor {
        j: 0,
        l: 0,
        iota: Orientation::Coarse,
        alpha: Rational64::from_integer(0),
        normalization: 1.0,
        lattice_density: 1.0,
    }];
    for j in 0..seq.scales() {
        let lm = seq.shear_bound(j);
        for l in -(lm - 1)..lm {
            out.push(interior_descriptor(seq, j, l, Orientation::Horizontal));
        }
        for l in -(lm - 1)..lm {
            out.push(interior_descriptor(seq, j, l, Orientation::Vertical));
        }
        out.push(boundary_descriptor(seq, j, -lm));
        out.push(boundary_descriptor(seq, j, lm));
    }
    out
}

/// Unnormalized band weight at a continuum frequency. Squared weights of
/// all bands at scale j sum to W_j^2(xi), and with the coarse band the
/// whole family tiles: Phi^2 + sum B^2 = Phi^2(2^{-2J} xi).
pub fn band_weight(band: &BandDescriptor, seq: &ScalingSequence, xi: [f64; 2]) -> f64 {
    match band.iota {
        Orientation::Coarse => scaling2_ft(xi),
        Orientation::Completion => panic!("completion weight is grid-resident only"),
        Orientation::Horizontal | Orientation::Vertical => {
            let w = corona(xi, band.j);
            if w == 0.0 {
                return 0.0;
            }
            let lm = seq.shear_bound(band.j) as f64;
            let horizontal = band.iota == Orientation::Horizontal;
            let (den, num) = if horizontal {
                (xi[0], xi[1])
            } else {
                (xi[1], xi[0])
            };
            if den == 0.0 {
                return 0.0;
            }
            let r = num / den;
            // interior atoms vanish outside their cone once |l| < l_max
            w * bump(lm * r - band.l as f64)
        }
        Orientation::Boundary => {
            let w = corona(xi, band.j);
            if w == 0.0 {
                return 0.0;
            }
            let lm = seq.shear_bound(band.j) as f64;
            // glued across the seam |xi_1| = |xi_2|: horizontal formula on
            // the horizontal cone, vertical formula on the vertical cone;
            // both coincide on the diagonals.
            let (a0, a1) = (xi[0].abs(), xi[1].abs());
            let r = if a1 <= a0 {
                if xi[0] == 0.0 {
                    return 0.0;
                }
                xi[1] / xi[0]
            } else {
                if xi[1] == 0.0 {
                    return 0.0;
                }
                xi[0] / xi[1]
            };
            w * bump(lm * r - band.l as f64)
        }
    }
}

/// Modulus of the atom's Fourier transform at translation 0:
/// normalization times the unnormalized band weight.
pub fn atom_ft(band: &BandDescriptor, seq: &ScalingSequence, xi: [f64; 2]) -> f64 {
    band.normalization * band_weight(band, seq, xi)
}

/// Text listing used by `describe`: one band per line.
pub fn band_listing(bands: &[BandDescriptor]) -> String {
    let mut s = String::from("j,l,iota,alpha_num,alpha_den,normalization\n");
    for b in bands {
        s.push_str(&format!(
            "{},{},{},{},{},{:e}\n",
            b.j,
            b.l,
            b.iota.tag(),
            b.alpha.numer(),
            b.alpha.denom(),
            b.normalization
        ));
    }
    s
}
