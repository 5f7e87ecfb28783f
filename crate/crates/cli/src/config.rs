//! Run configuration: a flat `key = value` file with `#` comments, every
//! key overridable from the command line. Unknown keys are errors so a
//! typo'd knob can never silently fall back to its default.

use std::path::{Path, PathBuf};

use skyrmion_core::channels::NoiseParams;
use skyrmion_core::states::SkyrmionSpec;
use skyrmion_core::tensor::PauliAxis;
use skyrmion_core::texture::{ModeFamily, ModeSpec, TransverseGrid};
use skyrmion_core::{Error, Result};

/// Everything a command needs: state preparation, rendering, noise,
/// counting statistics, seeding and output placement.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub l: i32,
    pub grid: usize,
    pub extent: f64,
    pub mode_family: ModeFamily,
    pub mode_scale: f64,
    pub xi0: f64,
    pub flip_axis: PauliAxis,
    pub flip_p: f64,
    pub lambda1: f64,
    pub background: f64,
    pub tomo_shots: f64,
    pub tomo_replicas: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            l: 2,
            grid: 512,
            extent: 6.0,
            mode_family: ModeFamily::LaguerreGauss,
            mode_scale: 1.0,
            xi0: 0.0,
            flip_axis: PauliAxis::Z,
            flip_p: 0.0,
            lambda1: 0.0,
            background: 0.0,
            tomo_shots: 1e5,
            tomo_replicas: 0,
            seed: 7,
            out: PathBuf::from("out"),
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("config key `{key}`: cannot parse `{value}`")))
}

fn parse_axis(key: &str, value: &str) -> Result<PauliAxis> {
    match value {
        "x" | "X" => Ok(PauliAxis::X),
        "y" | "Y" => Ok(PauliAxis::Y),
        "z" | "Z" => Ok(PauliAxis::Z),
        other => Err(Error::Parse(format!(
            "config key `{key}`: expected x, y or z, got `{other}`"
        ))),
    }
}

fn parse_family(value: &str) -> Result<ModeFamily> {
    match value {
        "laguerre-gauss" | "lg" => Ok(ModeFamily::LaguerreGauss),
        "bessel" => Ok(ModeFamily::Bessel),
        other => Err(Error::Parse(format!(
            "config key `mode_family`: expected laguerre-gauss or bessel, got `{other}`"
        ))),
    }
}

impl RunConfig {
    /// Apply one `key = value` assignment. Unknown keys are rejected.
    fn assign(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "l" => self.l = parse_value(key, value)?,
            "grid" => self.grid = parse_value(key, value)?,
            "extent" => self.extent = parse_value(key, value)?,
            "mode_family" => self.mode_family = parse_family(value)?,
            "mode_scale" => self.mode_scale = parse_value(key, value)?,
            "xi0" => self.xi0 = parse_value(key, value)?,
            "flip_axis" => self.flip_axis = parse_axis(key, value)?,
            "flip_p" => self.flip_p = parse_value(key, value)?,
            "lambda1" => self.lambda1 = parse_value(key, value)?,
            "background" => self.background = parse_value(key, value)?,
            "tomo_shots" => self.tomo_shots = parse_value(key, value)?,
            "tomo_replicas" => self.tomo_replicas = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "out" => self.out = PathBuf::from(value),
            other => {
                return Err(Error::Parse(format!("unknown config key `{other}`")));
            }
        }
        Ok(())
    }

    /// Layer a config file over the current values (defaults or earlier
    /// assignments). Later assignments of the same key win.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse(format!(
                    "{}:{}: expected `key = value`, got `{raw}`",
                    path.display(),
                    lineno + 1
                )));
            };
            self.assign(key.trim(), value.trim()).map_err(|e| {
                Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?;
        }
        Ok(())
    }

    /// Check every field against the component-level preconditions so a bad
    /// run dies here with one actionable message instead of deep in a sweep.
    pub fn validate(&self) -> Result<()> {
        SkyrmionSpec::new(self.l)?;
        TransverseGrid::new(self.grid, self.extent)?;
        ModeSpec::new(self.mode_family, 0, self.mode_scale)?;
        ModeSpec::new(self.mode_family, self.l, self.mode_scale)?;
        NoiseParams::new(self.xi0, self.flip_p, self.flip_axis, self.lambda1, self.background)?;
        if !(self.tomo_shots.is_finite() && self.tomo_shots >= 1.0) {
            return Err(Error::OutOfRange {
                name: "tomo_shots",
                value: self.tomo_shots,
                expected: "at least one photon pair per setting",
            });
        }
        Ok(())
    }

    pub fn spec(&self) -> SkyrmionSpec {
        SkyrmionSpec::new(self.l).expect("validated")
    }

    pub fn grid_spec(&self) -> TransverseGrid {
        TransverseGrid::new(self.grid, self.extent).expect("validated")
    }

    pub fn render_modes(&self) -> [ModeSpec; 2] {
        [
            ModeSpec::new(self.mode_family, 0, self.mode_scale).expect("validated"),
            ModeSpec::new(self.mode_family, self.l, self.mode_scale).expect("validated"),
        ]
    }

    pub fn noise(&self) -> NoiseParams {
        NoiseParams::new(self.xi0, self.flip_p, self.flip_axis, self.lambda1, self.background)
            .expect("validated")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_config(text: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(text.as_bytes()).unwrap();
        file
    }

    #[test]
    fn defaults_pass_validation() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn file_overrides_defaults_and_comments_are_ignored() {
        let file = write_config(
            "# rendering\nl = 3\ngrid=256   # inline comment\nextent = 4.5\n\nmode_family = bessel\nflip_axis = y\nseed = 99\nout = /tmp/somewhere\n",
        );
        let mut cfg = RunConfig::default();
        cfg.load_file(file.path()).unwrap();
        assert_eq!(cfg.l, 3);
        assert_eq!(cfg.grid, 256);
        assert_eq!(cfg.extent, 4.5);
        assert_eq!(cfg.mode_family, ModeFamily::Bessel);
        assert_eq!(cfg.flip_axis, PauliAxis::Y);
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.out, PathBuf::from("/tmp/somewhere"));
        // untouched keys keep their defaults
        assert_eq!(cfg.xi0, 0.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_keys_and_malformed_lines_fail_fast() {
        let mut cfg = RunConfig::default();
        let unknown = write_config("gird = 256\n");
        let err = cfg.load_file(unknown.path()).unwrap_err().to_string();
        assert!(err.contains("unknown config key `gird`"), "{err}");

        let malformed = write_config("l 3\n");
        assert!(cfg.load_file(malformed.path()).is_err());

        let bad_value = write_config("grid = many\n");
        assert!(cfg.load_file(bad_value.path()).is_err());

        let bad_axis = write_config("flip_axis = q\n");
        assert!(cfg.load_file(bad_axis.path()).is_err());
    }

    #[test]
    fn validation_rejects_out_of_range_physics() {
        let bad = [
            RunConfig { l: 0, ..RunConfig::default() },
            RunConfig { xi0: 1.5, ..RunConfig::default() },
            RunConfig { grid: 4, ..RunConfig::default() },
            RunConfig { tomo_shots: 0.0, ..RunConfig::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
