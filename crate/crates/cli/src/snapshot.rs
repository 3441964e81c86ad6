//! Cached profile constants, so only the first command pays for the solve.

use std::path::Path;

use serde::{Deserialize, Serialize};
use shmod::functionals::{compute_all, IdentityBounds, ModulationConstants, PohozaevResiduals};
use shmod::soliton::{solve_townes, ProfileMetadata, SolitonConfig, SolitonProfile};

use crate::error::CliError;
use crate::output::write_json;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    #[serde(flatten)]
    pub constants: ModulationConstants,
    pub pohozaev_residuals: PohozaevResiduals,
    pub profile: ProfileMetadata,
    pub soliton: SolitonConfig,
}

impl ConstantsReport {
    pub fn compute(cfg: &SolitonConfig) -> Result<(Self, SolitonProfile), CliError> {
        let profile = solve_townes(cfg)?;
        let constants = compute_all(&profile, &IdentityBounds::default())?;
        let report = ConstantsReport {
            constants,
            pohozaev_residuals: constants.pohozaev_residuals(),
            profile: profile.metadata(),
            soliton: *cfg,
        };
        Ok((report, profile))
    }
}

/// Snapshot for `cfg`: read from `path` when it matches, otherwise solved
/// and written there.
pub fn obtain(cfg: &SolitonConfig, path: &Path, recompute: bool) -> Result<ConstantsReport, CliError> {
    if !recompute && path.exists() {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        let cached: ConstantsReport = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("constants snapshot {}: {e}", path.display())))?;
        if cached.soliton == *cfg {
            return Ok(cached);
        }
        eprintln!("note: {} was built for another profile grid; recomputing", path.display());
    }
    let (report, _) = ConstantsReport::compute(cfg)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        crate::output::ensure_dir(dir)?;
    }
    write_json(path, &report)?;
    Ok(report)
}
