//! Experiment configuration: a flat TOML document (one experiment per file)
//! merged with command-line overrides. Flags win.

use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

/// Output format for emitted reports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Parameters of a simulation experiment. All fields optional in the file;
/// [`RawConfig::validated`] enforces presence and module
/// preconditions before any trial launches.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub n_vertices: Option<usize>,
    pub d_prime: Option<usize>,
    pub r: Option<u32>,
    pub d_c: Option<u32>,
    pub n_l: Option<usize>,
    pub guard: Option<u32>,
    pub trials: Option<u32>,
    pub base_seed: Option<u64>,
    pub parallelism: Option<usize>,
    /// Sweep mode: host degrees to sweep.
    pub d_prime_list: Option<Vec<usize>>,
    /// Decompose mode: hops to sample.
    pub hops: Option<u32>,
}

impl RawConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))
    }

    /// Field-wise merge; `overrides` (from flags) wins.
    pub fn merged(mut self, overrides: RawConfig) -> RawConfig {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if overrides.$field.is_some() { self.$field = overrides.$field; })*
            };
        }
        take!(
            n_vertices,
            d_prime,
            r,
            d_c,
            n_l,
            guard,
            trials,
            base_seed,
            parallelism,
            d_prime_list,
            hops
        );
        self
    }

    /// Resolves defaults and checks module preconditions.
    pub fn validated(self) -> Result<ExperimentConfig> {
        let n_vertices = self
            .n_vertices
            .ok_or_else(|| CliError::Config("n_vertices is required".into()))?;
        // Sweeps only use the per-row degrees, so the list's head serves as
        // the base degree when none is given.
        let d_prime = self
            .d_prime
            .or_else(|| self.d_prime_list.as_ref().and_then(|l| l.first().copied()))
            .ok_or_else(|| CliError::Config("d_prime is required".into()))?;
        let d_c = self
            .d_c
            .ok_or_else(|| CliError::Config("d_c is required".into()))?;
        let n_l = self
            .n_l
            .ok_or_else(|| CliError::Config("n_l is required".into()))?;
        let cfg = ExperimentConfig {
            n_vertices,
            d_prime,
            r: self.r.unwrap_or(3),
            d_c,
            n_l,
            guard: self.guard.unwrap_or(1),
            trials: self.trials.unwrap_or(3),
            base_seed: self.base_seed.unwrap_or(1),
            parallelism: self.parallelism,
            d_prime_list: self.d_prime_list.unwrap_or_default(),
            hops: self.hops.unwrap_or(1),
        };
        cfg.check()?;
        Ok(cfg)
    }
}

/// Fully resolved experiment parameters.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub n_vertices: usize,
    pub d_prime: usize,
    pub r: u32,
    pub d_c: u32,
    pub n_l: usize,
    pub guard: u32,
    pub trials: u32,
    pub base_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub d_prime_list: Vec<usize>,
    pub hops: u32,
}

impl ExperimentConfig {
    /// Module preconditions, checked before any trial launches.
    pub fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.trials < 1 {
            return fail("trials must be >= 1".into());
        }
        if self.d_c == 0 {
            return fail("d_c must be >= 1".into());
        }
        for &dp in std::iter::once(&self.d_prime).chain(&self.d_prime_list) {
            if dp >= self.n_vertices {
                return fail(format!(
                    "d_prime {dp} must be smaller than n_vertices {}",
                    self.n_vertices
                ));
            }
            if !(self.n_vertices * dp).is_multiple_of(2) {
                return fail(format!(
                    "n_vertices * d_prime = {} * {dp} is odd",
                    self.n_vertices
                ));
            }
        }
        let s = (self.d_c as usize).pow(2);
        if self.n_l * s > self.n_vertices {
            return fail(format!(
                "{} blocks of size {s} exceed {} vertices",
                self.n_l, self.n_vertices
            ));
        }
        if self.r < 3 {
            return fail("r must be >= 3".into());
        }
        Ok(())
    }

    pub fn with_d_prime(&self, d_prime: usize) -> ExperimentConfig {
        ExperimentConfig {
            d_prime,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flag_override() {
        let file: RawConfig =
            toml::from_str("n_vertices = 1200\nd_prime = 100\nd_c = 3\nn_l = 16\ntrials = 5\n")
                .unwrap();
        let flags = RawConfig {
            trials: Some(9),
            ..Default::default()
        };
        let cfg = file.merged(flags).validated().unwrap();
        assert_eq!(cfg.trials, 9);
        assert_eq!(cfg.n_vertices, 1200);
        assert_eq!(cfg.guard, 1);
        assert_eq!(cfg.r, 3);
    }

    #[test]
    fn rejects_unknown_keys() {
        let parsed: std::result::Result<RawConfig, _> = toml::from_str("n_verts = 5\n");
        assert!(parsed.is_err());
    }

    #[test]
    fn precondition_checks() {
        let base = RawConfig {
            n_vertices: Some(100),
            d_prime: Some(10),
            d_c: Some(3),
            n_l: Some(4),
            ..Default::default()
        };
        assert!(base.clone().validated().is_ok());

        let odd = RawConfig {
            n_vertices: Some(101),
            d_prime: Some(3),
            ..base.clone()
        };
        assert!(odd.validated().is_err());

        let packed = RawConfig {
            n_l: Some(20),
            ..base.clone()
        };
        assert!(packed.validated().is_err());

        let missing = RawConfig { d_c: None, ..base };
        assert!(missing.validated().is_err());
    }
}
