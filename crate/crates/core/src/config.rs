//! Plain-text run configuration: `key = value` lines with `#` comments.
//!
//! Unknown keys are rejected so typos fail loudly instead of silently
//! running with defaults.

use crate::error::{Error, Result};
use crate::graph::GraphParams;
use crate::pipeline::default_tile_side;
use crate::solver::{SolverConfig, WarpVariant};
use std::path::Path;

/// One run of the super-resolution pipeline. Field defaults match the
/// published operating point; `tile_side = None` selects the default for
/// the configured alpha.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: usize,
    pub lambda2: f64,
    pub lambda3: f64,
    pub beta: f64,
    pub window: usize,
    pub patch_side: usize,
    pub sigma: f64,
    pub outer_iters: usize,
    pub ppa_iters: usize,
    pub cg_tol: f64,
    pub tile_side: Option<usize>,
    pub tile_overlap: usize,
    pub variant: WarpVariant,
    pub crop_border: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: 2,
            lambda2: 0.2,
            lambda3: 0.0055,
            beta: 1.0,
            window: 13,
            patch_side: 7,
            sigma: 0.7229,
            outer_iters: 2,
            ppa_iters: 30,
            cg_tol: 1e-6,
            tile_side: None,
            tile_overlap: 0,
            variant: WarpVariant::Sq,
            crop_border: 15,
        }
    }
}

impl RunConfig {
    /// Parses `key = value` text; `#` starts a comment, blank lines are
    /// skipped, keys may not repeat.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "line {}: expected 'key = value', got '{}'",
                    lineno + 1,
                    line
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!(
                    "line {}: duplicate key '{key}'",
                    lineno + 1
                )));
            }
            cfg.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("invalid value '{value}' for key '{key}'")))
        }
        match key {
            "alpha" => self.alpha = num(key, value)?,
            "lambda2" => self.lambda2 = num(key, value)?,
            "lambda3" => self.lambda3 = num(key, value)?,
            "beta" => self.beta = num(key, value)?,
            "window" => self.window = num(key, value)?,
            "patch_side" => self.patch_side = num(key, value)?,
            "sigma" => self.sigma = num(key, value)?,
            "outer_iters" => self.outer_iters = num(key, value)?,
            "ppa_iters" => self.ppa_iters = num(key, value)?,
            "cg_tol" => self.cg_tol = num(key, value)?,
            "tile_side" => self.tile_side = Some(num(key, value)?),
            "tile_overlap" => self.tile_overlap = num(key, value)?,
            "variant" => self.variant = value.parse()?,
            "crop_border" => self.crop_border = num(key, value)?,
            other => {
                return Err(Error::Config(format!("unknown key '{other}'")));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha < 1 {
            return Err(Error::Config("alpha must be at least 1".into()));
        }
        self.solver_config().validate()?;
        self.graph_params().validate()?;
        let side = self.effective_tile_side();
        if self.tile_overlap >= side {
            return Err(Error::Config(format!(
                "tile_overlap {} must be smaller than tile_side {side}",
                self.tile_overlap
            )));
        }
        Ok(())
    }

    pub fn effective_tile_side(&self) -> usize {
        self.tile_side
            .unwrap_or_else(|| default_tile_side(self.alpha))
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            lambda2: self.lambda2,
            lambda3: self.lambda3,
            beta: self.beta,
            outer_iters: self.outer_iters,
            ppa_iters: self.ppa_iters,
            cg_tol: self.cg_tol,
            ..SolverConfig::default()
        }
    }

    pub fn graph_params(&self) -> GraphParams {
        GraphParams {
            patch_side: self.patch_side,
            sigma: self.sigma,
            window: self.window,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_text() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.effective_tile_side(), 100);
    }

    #[test]
    fn parses_keys_comments_and_whitespace() {
        let text = "\
# run setup
alpha = 3
lambda2 = 0.1   # overrides the default
variant = dr

tile_overlap = 8
";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.alpha, 3);
        assert_eq!(cfg.lambda2, 0.1);
        assert_eq!(cfg.variant, WarpVariant::Dr);
        assert_eq!(cfg.tile_overlap, 8);
        assert_eq!(cfg.effective_tile_side(), 70);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        let err = RunConfig::parse("lambda4 = 1").unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
        let err = RunConfig::parse("alpha = 2\nalpha = 3").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn rejects_malformed_lines_and_values() {
        assert!(RunConfig::parse("alpha").is_err());
        assert!(RunConfig::parse("alpha = two").is_err());
        assert!(RunConfig::parse("variant = nearest").is_err());
        // Validation failures surface on parse as well.
        assert!(RunConfig::parse("beta = 0").is_err());
        assert!(RunConfig::parse("window = 4").is_err());
        assert!(RunConfig::parse("tile_side = 10\ntile_overlap = 10").is_err());
    }
}
