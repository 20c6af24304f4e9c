//! Run configuration: an optional TOML/JSON file overridden by command-line flags.

use fracdg_core::cases::{CaseName, MeshKind, MeshOptions, StudyConfig};
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Every field of `fracdg run`, all optional so that files and flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunFile {
    pub case: Option<CaseName>,
    pub mesh: Option<MeshKind>,
    pub k: Option<Vec<usize>>,
    pub levels: Option<usize>,
    pub out: Option<PathBuf>,
    pub d_ratio: Option<f64>,
    pub seed: Option<u64>,
    pub lloyd_iters: Option<usize>,
}

impl RunFile {
    /// JSON for `.json` files, TOML otherwise.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Fields set in `over` win.
    pub fn overlay(self, over: RunFile) -> RunFile {
        RunFile {
            case: over.case.or(self.case),
            mesh: over.mesh.or(self.mesh),
            k: over.k.or(self.k),
            levels: over.levels.or(self.levels),
            out: over.out.or(self.out),
            d_ratio: over.d_ratio.or(self.d_ratio),
            seed: over.seed.or(self.seed),
            lloyd_iters: over.lloyd_iters.or(self.lloyd_iters),
        }
    }

    pub fn into_study(self) -> Result<StudyConfig, String> {
        let defaults = MeshOptions::default();
        let case = self.case.ok_or("missing --case")?;
        let mesh = self.mesh.ok_or("missing --mesh")?;
        let out = self.out.ok_or("missing --out")?;
        let ks = self.k.unwrap_or_else(|| vec![1, 2, 3]);
        if ks.is_empty() || ks.contains(&0) {
            return Err("--k needs one or more degrees >= 1".into());
        }
        let levels = self.levels.unwrap_or(4);
        if levels == 0 {
            return Err("--levels must be at least 1".into());
        }
        let d_ratio = self.d_ratio.unwrap_or(defaults.d_ratio);
        if !(d_ratio > 0.0 && d_ratio < 0.5) {
            return Err(format!("--d-ratio {d_ratio} outside (0, 0.5)"));
        }
        Ok(StudyConfig {
            case,
            mesh,
            ks,
            levels,
            mesh_options: MeshOptions {
                d_ratio,
                seed: self.seed.unwrap_or(defaults.seed),
                lloyd_iters: self.lloyd_iters.unwrap_or(defaults.lloyd_iters),
            },
            out: Some(out),
        })
    }
}
