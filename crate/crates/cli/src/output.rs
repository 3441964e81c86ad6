use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use shmod::dynamics::SimulationOutcome;

use crate::error::CliError;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp: PathBuf = path.to_path_buf();
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    tmp.set_file_name(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trajectory_csv(outcome: &SimulationOutcome) -> String {
    let mut s = String::from("t,L,dL,beta,tau,first_integral_residual\n");
    for sample in &outcome.series {
        let st = &sample.state;
        let res = sample.first_integral_residual.map(sci).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{},{},{}", sci(st.t), sci(st.l), sci(st.dl), sci(st.beta), sci(st.tau), res);
    }
    s
}
