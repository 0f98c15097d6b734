//! Resolved run configuration: flags > config file > defaults.

use std::fs;
use std::path::PathBuf;

use serde::Deserialize;

use politelex::corpus::Lang;

pub const DEFAULT_C_GRID: [f64; 5] = [0.01, 0.05, 0.1, 0.25, 0.5];
pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_FOLDS: usize = 5;

/// Optional JSON config file; every field may be omitted.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub lang: Option<Lang>,
    pub out: Option<PathBuf>,
    pub lexicons: Option<Vec<PathBuf>>,
    pub alpha: Option<f64>,
    pub c_grid: Option<Vec<f64>>,
    pub folds: Option<usize>,
}

/// Fully resolved configuration shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub lang: Option<Lang>,
    pub out: PathBuf,
    pub lexicons: Vec<PathBuf>,
    pub alpha: f64,
    pub c_grid: Vec<f64>,
    pub folds: usize,
    pub tol: f64,
}

pub struct Overrides {
    pub seed: Option<u64>,
    pub lang: Option<Lang>,
    pub out: Option<PathBuf>,
    pub lexicons: Vec<PathBuf>,
    pub alpha: Option<f64>,
    pub c_grid: Option<Vec<f64>>,
    pub folds: Option<usize>,
}

impl RunConfig {
    pub fn resolve(config_path: Option<&PathBuf>, flags: Overrides) -> Result<Self, String> {
        let file = match config_path {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
                serde_json::from_str::<ConfigFile>(&text)
                    .map_err(|e| format!("malformed config {}: {e}", path.display()))?
            }
            None => ConfigFile::default(),
        };

        let alpha = flags.alpha.or(file.alpha).unwrap_or(DEFAULT_ALPHA);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(format!("alpha must lie in (0, 1), got {alpha}"));
        }
        let c_grid = flags
            .c_grid
            .or(file.c_grid)
            .unwrap_or_else(|| DEFAULT_C_GRID.to_vec());
        if c_grid.iter().any(|&c| !(c > 0.0)) {
            return Err(format!("C grid values must be positive: {c_grid:?}"));
        }
        let folds = flags.folds.or(file.folds).unwrap_or(DEFAULT_FOLDS);
        if folds < 2 {
            return Err(format!("folds must be at least 2, got {folds}"));
        }
        let lexicons = if flags.lexicons.is_empty() {
            file.lexicons.unwrap_or_default()
        } else {
            flags.lexicons
        };

        Ok(RunConfig {
            seed: flags.seed.or(file.seed).unwrap_or(0),
            lang: flags.lang.or(file.lang),
            out: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from(".")),
            lexicons,
            alpha,
            c_grid,
            folds,
            tol: 1e-3,
        })
    }

    /// Header comments stamped into every output file.
    pub fn header_comments(&self, command: &str) -> Vec<String> {
        let mut lines = vec![
            format!("command: {command}"),
            format!("seed: {}", self.seed),
        ];
        if let Some(lang) = self.lang {
            lines.push(format!("lang: {lang:?}").to_lowercase());
        }
        if !self.lexicons.is_empty() {
            let names: Vec<String> = self
                .lexicons
                .iter()
                .map(|p| p.display().to_string())
                .collect();
            lines.push(format!("lexicons: {}", names.join(",")));
        }
        lines
    }
}
