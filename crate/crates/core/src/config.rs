//! Patch files and the built-in catalog.
//!
//! ```toml
//! name = "euclidean-exact"
//! dim = 2
//! domain = [[-4.0, 4.0], [-4.0, 4.0]]
//! a = ["1", "0", "0", "1"]
//! b = ["0.2", "0"]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::expr::{ExprError, ScalarExpr};
use crate::metric::ManifoldPatch;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{field}: expected {expected} entries, got {got}")]
    Arity { field: &'static str, expected: usize, got: usize },
    #[error("a{i}{j} = `{upper}` and a{j}{i} = `{lower}` differ")]
    Symmetry { i: usize, j: usize, upper: String, lower: String },
    #[error("{field}{}: {source}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Expression { field: String, line: Option<usize>, source: ExprError },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("no catalog patch named `{0}`")]
    UnknownCatalog(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchConfig {
    pub name: String,
    pub dim: usize,
    pub domain: Vec<[f64; 2]>,
    /// Row-major `dim × dim` entries.
    pub a: Vec<String>,
    pub b: Vec<String>,
}

const CATALOG: [(&str, &str); 6] = [
    ("riemannian-only", include_str!("../catalog/riemannian-only.toml")),
    ("euclidean-exact", include_str!("../catalog/euclidean-exact.toml")),
    ("exact-bump", include_str!("../catalog/exact-bump.toml")),
    ("exact-mixed", include_str!("../catalog/exact-mixed.toml")),
    ("rotational", include_str!("../catalog/rotational.toml")),
    ("conformal", include_str!("../catalog/conformal.toml")),
];

pub fn catalog_names() -> Vec<&'static str> {
    CATALOG.iter().map(|(n, _)| *n).collect()
}

pub fn catalog_source(name: &str) -> Option<&'static str> {
    CATALOG.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn catalog_patch(name: &str) -> Result<ManifoldPatch> {
    let src = catalog_source(name).ok_or_else(|| ConfigError::UnknownCatalog(name.to_string()))?;
    PatchConfig::from_toml(src)?.build_with_source(Some(src))
}

/// Every built-in patch, in catalog order.
pub fn catalog() -> Vec<ManifoldPatch> {
    catalog_names().into_iter().map(|n| catalog_patch(n).expect("built-in patches are valid")).collect()
}

/// Loads a patch file, or a catalog patch when `spec` names one and no such
/// file exists.
pub fn load_patch(spec: &str) -> Result<ManifoldPatch> {
    let (cfg, text) = read_config(spec)?;
    cfg.build_with_source(Some(&text))
}

/// Like [`load_patch`] but returns the validated config.
pub fn load_config(spec: &str) -> Result<PatchConfig> {
    let (cfg, text) = read_config(spec)?;
    cfg.build_with_source(Some(&text))?;
    Ok(cfg)
}

fn read_config(spec: &str) -> Result<(PatchConfig, String)> {
    let path = Path::new(spec);
    let text = match catalog_source(spec) {
        Some(src) if !path.exists() => src.to_string(),
        None if !path.exists() => {
            let message = format!("no such file, and not one of the catalog names {:?}", catalog_names());
            return Err(ConfigError::Io { path: spec.to_string(), message }.into());
        }
        _ => std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: spec.to_string(), message: e.to_string() })?,
    };
    Ok((PatchConfig::from_toml(&text)?, text))
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
    (line, column)
}

fn normalized(s: &str) -> String {
    s.split_whitespace().collect()
}

impl PatchConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
            ConfigError::Parse { line, column, message: e.message().to_string() }
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("patch configs serialize")
    }

    pub fn build(&self) -> Result<ManifoldPatch> {
        self.build_with_source(None)
    }

    // `source` is the original text, used to attach line numbers to
    // expression errors.
    fn build_with_source(&self, source: Option<&str>) -> Result<ManifoldPatch> {
        let n = self.dim;
        if self.domain.len() != n {
            return Err(ConfigError::Arity { field: "domain", expected: n, got: self.domain.len() }.into());
        }
        if self.a.len() != n * n {
            return Err(ConfigError::Arity { field: "a", expected: n * n, got: self.a.len() }.into());
        }
        if self.b.len() != n {
            return Err(ConfigError::Arity { field: "b", expected: n, got: self.b.len() }.into());
        }
        for i in 0..n {
            for j in i + 1..n {
                let (upper, lower) = (&self.a[i * n + j], &self.a[j * n + i]);
                if normalized(upper) != normalized(lower) {
                    return Err(ConfigError::Symmetry { i: i + 1, j: j + 1, upper: upper.clone(), lower: lower.clone() }
                        .into());
                }
            }
        }
        let parse = |field: String, src: &str| {
            ScalarExpr::parse(src, n).map_err(|e| {
                let line = source.and_then(|t| t.find(&format!("\"{src}\"")).map(|off| line_col(t, off).0));
                Error::from(ConfigError::Expression { field, line, source: e })
            })
        };
        let a = self.a.iter().enumerate().map(|(k, s)| parse(format!("a[{k}]"), s)).collect::<Result<Vec<_>>>()?;
        let b = self.b.iter().enumerate().map(|(k, s)| parse(format!("b[{k}]"), s)).collect::<Result<Vec<_>>>()?;
        ManifoldPatch::new(self.name.clone(), self.domain.clone(), a, b)
    }
}
