pub mod encode;
pub mod formulas;
pub mod imaging;
pub mod transfer;

use crate::config::RunConfig;
use crate::CliError;

pub(crate) fn epsilon(cfg: &RunConfig) -> Result<f64, CliError> {
    let eps: f64 = cfg.get("eps")?;
    qarray_core::source::check_epsilon(eps).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(eps)
}
