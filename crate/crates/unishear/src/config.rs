//! Flat key=value run configuration.  One key per line in a config file,
//! `#` comments, the same `key=value` syntax for command-line overrides;
//! unknown keys are errors so silent typos cannot skew an experiment.
//! The only environment knob is `UNISHEAR_OUT` (output directory).

use std::path::{Path, PathBuf};

use crate::harness::SweepConfig;
use crate::model::WeightSpec;
use crate::recover::{Method, SolverConfig};
use crate::system::Preset;
use crate::{Error, Result};

/// Environment variable overriding the output directory.
pub const OUT_ENV: &str = "UNISHEAR_OUT";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub preset: Preset,
    pub n: usize,
    pub scales: usize,
    /// Model/diagnostics scale index.
    pub j: usize,
    pub j_min: usize,
    pub j_max: usize,
    /// Cluster tube exponent.
    pub epsilon: f64,
    /// Gap-law exponent offset.
    pub eps_prime: f64,
    /// Gap-law constant; when unset it is calibrated so the j = 1 gap
    /// spans 8 pixels on the configured grid.
    pub c: Option<f64>,
    pub rho: f64,
    /// Explicit mask half-width for single-image commands.
    pub h: Option<f64>,
    pub solver: SolverConfig,
    pub diagnostics: bool,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: Preset::Alpha(1.0),
            n: 256,
            scales: 4,
            j: 1,
            j_min: 1,
            j_max: 3,
            epsilon: 0.1,
            eps_prime: 0.2,
            c: None,
            rho: WeightSpec::default().rho,
            h: None,
            solver: SolverConfig::shrinkage(),
            diagnostics: false,
            output_dir: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    /// Load from an optional file, then apply `key=value` overrides in
    /// order, then the output-dir environment override.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)?;
            for (ln, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                cfg.set_pair(line)
                    .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), ln + 1)))?;
            }
        }
        for pair in overrides {
            cfg.set_pair(pair)?;
        }
        if let Some(dir) = std::env::var_os(OUT_ENV) {
            cfg.output_dir = PathBuf::from(dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got `{pair}`")))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "preset" => {
                self.preset = if value == "wavelet" {
                    Preset::Wavelet
                } else if let Some(a) = value.strip_prefix("alpha") {
                    Preset::Alpha(parse(a, key)?)
                } else {
                    return Err(Error::Config(format!(
                        "preset must be `wavelet` or `alpha<value>`, got `{value}`"
                    )));
                }
            }
            "n" => self.n = parse(value, key)?,
            "scales" => self.scales = parse(value, key)?,
            "j" => self.j = parse(value, key)?,
            "j_min" => self.j_min = parse(value, key)?,
            "j_max" => self.j_max = parse(value, key)?,
            "epsilon" => self.epsilon = parse(value, key)?,
            "eps_prime" => self.eps_prime = parse(value, key)?,
            "c" => self.c = Some(parse(value, key)?),
            "rho" => self.rho = parse(value, key)?,
            "h" => self.h = Some(parse(value, key)?),
            "solver" => {
                self.solver = match value {
                    "shrinkage" => SolverConfig::shrinkage(),
                    "splitting" => SolverConfig::splitting(),
                    _ => {
                        return Err(Error::Config(format!(
                            "solver must be `shrinkage` or `splitting`, got `{value}`"
                        )))
                    }
                }
            }
            "max_iters" => self.solver.max_iters = parse(value, key)?,
            "tol" => self.solver.tol = parse(value, key)?,
            "decay" => self.solver.decay = parse(value, key)?,
            "lambda_min_ratio" => self.solver.lambda_min_ratio = parse(value, key)?,
            "mu" => self.solver.mu = parse(value, key)?,
            "dual_tol" => self.solver.dual_tol = parse(value, key)?,
            "diagnostics" => self.diagnostics = parse_bool(value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 || !self.n.is_power_of_two() {
            return Err(Error::BadGridSize(self.n));
        }
        if self.scales == 0 {
            return Err(Error::Config("scales must be >= 1".into()));
        }
        if !(self.j_min >= 1 && self.j_min <= self.j_max && self.j_max < self.scales) {
            return Err(Error::Config(format!(
                "need 1 <= j_min <= j_max < scales, got {}..={} with scales {}",
                self.j_min, self.j_max, self.scales
            )));
        }
        if self.j >= self.scales {
            return Err(Error::Config(format!(
                "j = {} out of range for scales {}",
                self.j, self.scales
            )));
        }
        if !(self.epsilon > 0.0 && self.eps_prime > 0.0 && self.rho > 0.0) {
            return Err(Error::Config("epsilon, eps_prime, rho must be positive".into()));
        }
        Ok(())
    }

    /// Gap-law constant: explicit, or calibrated so the j = 1 gap spans 8
    /// pixels on this grid under the parabolic exponent.
    pub fn gap_constant(&self) -> f64 {
        self.c
            .unwrap_or_else(|| 4.0 / self.n as f64 * (1.0 + self.eps_prime).exp2())
    }

    pub fn sweep_config(&self) -> SweepConfig {
        SweepConfig {
            preset: self.preset.clone(),
            j_min: self.j_min,
            j_max: self.j_max,
            epsilon: self.epsilon,
            eps_prime: self.eps_prime,
            c: self.gap_constant(),
            n: self.n,
            scales: self.scales,
            solver: self.solver.clone(),
            rho: self.rho,
            diagnostics: self.diagnostics,
        }
    }

    pub fn weight_spec(&self) -> WeightSpec {
        WeightSpec { rho: self.rho }
    }

    pub fn solver_is_splitting(&self) -> bool {
        matches!(self.solver.method, Method::Splitting)
    }
}

fn parse<T: std::str::FromStr>(s: &str, key: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Config(format!("cannot parse `{s}` for key `{key}`")))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("cannot parse `{s}` as a boolean"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = RunConfig::load(None, &[]).unwrap();
        assert_eq!(cfg.n, 256);
        assert_eq!(cfg.preset.label(), "alpha1");
    }

    #[test]
    fn overrides_apply_in_order() {
        let cfg = RunConfig::load(
            None,
            &["n=128".into(), "preset=wavelet".into(), "n=64".into(), "scales=3".into(), "j_max=2".into()],
        )
        .unwrap();
        assert_eq!(cfg.n, 64);
        assert_eq!(cfg.preset.label(), "wavelet");
    }

    #[test]
    fn unknown_key_is_error() {
        let err = RunConfig::load(None, &["grid=128".into()]).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn file_then_override() {
        let dir = std::env::temp_dir().join("unishear-config-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("run.cfg");
        std::fs::write(&p, "# comment\nn = 128\nepsilon = 0.15\n\nsolver = splitting\n").unwrap();
        let cfg = RunConfig::load(Some(&p), &["epsilon=0.2".into()]).unwrap();
        assert_eq!(cfg.n, 128);
        assert_eq!(cfg.epsilon, 0.2);
        assert!(cfg.solver_is_splitting());
    }

    #[test]
    fn bad_values_are_config_errors() {
        for pair in ["n=12", "solver=magic", "preset=beta1", "diagnostics=maybe", "j=9"] {
            let err = RunConfig::load(None, &[pair.to_string()]).unwrap_err();
            assert!(
                matches!(err, Error::Config(_) | Error::BadGridSize(_)),
                "{pair}: {err}"
            );
        }
    }

    #[test]
    fn default_gap_spans_8_pixels_at_512() {
        let cfg = RunConfig::load(None, &["n=512".into(), "scales=5".into(), "j_max=4".into()]).unwrap();
        let h1 = cfg.gap_constant() * (-(1.0 + cfg.eps_prime)).exp2();
        assert!((h1 * 512.0 - 4.0).abs() < 1e-12);
    }
}
