//! Flat key=value run configuration. Keys carry explicit unit suffixes to
//! keep unit errors out of config files; unknown keys are rejected.

use std::path::{Path, PathBuf};

use jja_core::{Error, Result};

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Superconducting gap, μeV.
    pub gap_uev: f64,
    /// Room-temperature excess attenuation, dB.
    pub attenuation_correction_db: f64,
    /// Ground-capacitance fit tolerance, Hz.
    pub c0_tol_hz: f64,
    /// Ground-capacitance bracket, aF.
    pub c0_bracket_lo_af: f64,
    pub c0_bracket_hi_af: f64,
    /// Zero-mode threshold for the mode solver, MHz.
    pub zero_mode_threshold_mhz: f64,
    /// Fluxonium eigenenergy convergence tolerance, kHz.
    pub fluxonium_convergence_khz: f64,
    /// Directory for file outputs; the working directory when unset.
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            gap_uev: jja_core::probe::DEFAULT_GAP_EV * 1e6,
            attenuation_correction_db: jja_core::resonator::DEFAULT_ATTENUATION_CORRECTION_DB,
            c0_tol_hz: jja_core::modes::DEFAULT_C0_TOL_HZ,
            c0_bracket_lo_af: jja_core::modes::DEFAULT_C0_BRACKET.0 * 1e18,
            c0_bracket_hi_af: jja_core::modes::DEFAULT_C0_BRACKET.1 * 1e18,
            zero_mode_threshold_mhz: 1.0,
            fluxonium_convergence_khz: 1.0,
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path)
    }

    fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!(
                    "{}:{}: expected key=value, got {raw:?}",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            let num = || -> Result<f64> {
                value.parse().map_err(|_| {
                    Error::Parse(format!(
                        "{}:{}: {key} needs a number, got {value:?}",
                        path.display(),
                        lineno + 1
                    ))
                })
            };
            match key {
                "gap_uev" => cfg.gap_uev = num()?,
                "attenuation_correction_db" => cfg.attenuation_correction_db = num()?,
                "c0_tol_hz" => cfg.c0_tol_hz = num()?,
                "c0_bracket_lo_af" => cfg.c0_bracket_lo_af = num()?,
                "c0_bracket_hi_af" => cfg.c0_bracket_hi_af = num()?,
                "zero_mode_threshold_mhz" => cfg.zero_mode_threshold_mhz = num()?,
                "fluxonium_convergence_khz" => cfg.fluxonium_convergence_khz = num()?,
                "output_dir" => cfg.output_dir = Some(PathBuf::from(value)),
                other => {
                    return Err(Error::Parse(format!(
                        "{}:{}: unknown key {other:?}",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c0_tol_hz", self.c0_tol_hz),
            ("zero_mode_threshold_mhz", self.zero_mode_threshold_mhz),
            ("c0_bracket_lo_af", self.c0_bracket_lo_af),
            ("c0_bracket_hi_af", self.c0_bracket_hi_af),
            ("fluxonium_convergence_khz", self.fluxonium_convergence_khz),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.c0_bracket_hi_af <= self.c0_bracket_lo_af {
            return Err(Error::InvalidInput(
                "c0 bracket upper bound must exceed the lower bound".into(),
            ));
        }
        Ok(())
    }

    pub fn gap_ev(&self) -> f64 {
        self.gap_uev * 1e-6
    }

    pub fn c0_bracket_farad(&self) -> (f64, f64) {
        (self.c0_bracket_lo_af * 1e-18, self.c0_bracket_hi_af * 1e-18)
    }

    pub fn zero_mode_threshold_rad_s(&self) -> f64 {
        std::f64::consts::TAU * self.zero_mode_threshold_mhz * 1e6
    }

    pub fn fluxonium_convergence_ghz(&self) -> f64 {
        self.fluxonium_convergence_khz * 1e-6
    }

    /// Resolves a relative output path against `output_dir` when set.
    pub fn resolve_out(&self, path: &Path) -> PathBuf {
        match (&self.output_dir, path.is_relative()) {
            (Some(dir), true) => dir.join(path),
            _ => path.to_path_buf(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects_unknown_keys() {
        let p = Path::new("test.conf");
        let cfg = RunConfig::parse("gap_uev = 200\n# comment\nc0_tol_hz=500\n", p).unwrap();
        assert_eq!(cfg.gap_uev, 200.0);
        assert_eq!(cfg.c0_tol_hz, 500.0);
        assert!(RunConfig::parse("bogus_key = 1\n", p).is_err());
        assert!(RunConfig::parse("c0_tol_hz = -1\n", p).is_err());
    }
}
