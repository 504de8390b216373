//! Scenario files (TOML).
//!
//! ```toml
//! [chi]
//! chi1 = 1.42662     # 1/s
//! chi2 = 217.2061    # 1/s
//! chi3 = 676.2171    # 1/s^2
//! k2 = 0.1           # s
//!
//! [model]
//! time_constants = [0.04, 0.05, 0.06]   # s
//!
//! [scenario]
//! tau = 0.1          # s
//! h = 1e-4           # s
//! horizon = 1.5      # s
//! ybar1 = 0.5        # m/s
//! ybar2 = 0.5        # rad
//! w1_step = 0.1      # fraction of ybar1
//! r_step = 0.2       # fraction of ybar2
//! ```
//!
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qp::{QuasiPoly, RationalTf};
use crate::sim::{PlantConfig, SimScenario, StepCommand};
use crate::synthesis::{ChiParams, ModelSpec, DEFAULT_LAMBDA01, DEFAULT_LAMBDA11};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub chi: ChiSection,
    pub model: ModelSection,
    pub scenario: ScenarioSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plant: Option<PlantSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiSection {
    pub chi1: f64,
    pub chi2: f64,
    pub chi3: f64,
    pub k2: f64,
}

/// Either `time_constants`, or `num` and `den` in ascending powers of `s`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_constants: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub den: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub tau: f64,
    pub h: f64,
    pub horizon: f64,
    pub ybar1: f64,
    pub ybar2: f64,
    pub w1_step: f64,
    pub r_step: f64,
    #[serde(default = "default_lambda01")]
    pub lambda01: f64,
    #[serde(default = "default_lambda11")]
    pub lambda11: f64,
    #[serde(default)]
    pub y2_offset: f64,
    /// Extra delays at which the stability verdict is reported.
    #[serde(default)]
    pub verdict_taus: Vec<f64>,
}

fn default_lambda01() -> f64 {
    DEFAULT_LAMBDA01
}

fn default_lambda11() -> f64 {
    DEFAULT_LAMBDA11
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    pub r_w: f64,
    pub b_w: f64,
    /// `a_{1,1} … a_{1,5}`
    pub a1: [f64; 5],
    /// `a_{2,1} … a_{2,6}`
    pub a2: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_csv")]
    pub csv: String,
    #[serde(default = "default_every")]
    pub record_every: usize,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_csv() -> String {
    "trajectory.csv".into()
}

fn default_every() -> usize {
    10
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            csv: default_csv(),
            record_every: default_every(),
        }
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn chi(&self) -> ChiParams<f64> {
        let c = &self.chi;
        ChiParams::new(c.chi1, c.chi2, c.chi3, c.k2)
    }

    pub fn model(&self) -> Result<ModelSpec<f64>> {
        let m = &self.model;
        match (&m.time_constants, &m.num, &m.den) {
            (Some(tcs), None, None) => Ok(ModelSpec::TimeConstants(tcs.clone())),
            (None, Some(num), Some(den)) => Ok(ModelSpec::Transfer(RationalTf::new(
                QuasiPoly::from_s_coeffs(num),
                QuasiPoly::from_s_coeffs(den),
            )?)),
            _ => Err(Error::Config(
                "[model] needs either `time_constants` or both `num` and `den`".into(),
            )),
        }
    }

    pub fn plant(&self) -> Option<PlantConfig<f64>> {
        self.plant.as_ref().map(|p| PlantConfig {
            r_w: p.r_w,
            b_w: p.b_w,
            a1: p.a1,
            a2: p.a2,
        })
    }

    pub fn to_scenario(&self) -> Result<SimScenario<f64>> {
        let s = &self.scenario;
        Ok(SimScenario {
            chi: self.chi(),
            lambda01: s.lambda01,
            lambda11: s.lambda11,
            model: self.model()?,
            tau: s.tau,
            h: s.h,
            horizon: s.horizon,
            w1: StepCommand::relative(s.ybar1, s.w1_step),
            r: StepCommand::relative(s.ybar2, s.r_step),
            y2_offset: s.y2_offset,
            plant: self.plant(),
            record_every: self.output.record_every,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[chi]
chi1 = 1.42662
chi2 = 217.2061
chi3 = 676.2171
k2 = 0.1

[model]
time_constants = [0.04, 0.05, 0.06]

[scenario]
tau = 0.1
h = 1e-4
horizon = 1.5
ybar1 = 0.5
ybar2 = 0.5
w1_step = 0.1
r_step = 0.2
"#;

    #[test]
    fn parses_reference_case() {
        let f = ScenarioFile::parse(BASE).unwrap();
        let sc = f.to_scenario().unwrap();
        let reference = SimScenario::<f64>::reference_case(0.1);
        assert_eq!(sc.chi, reference.chi);
        assert_eq!(sc.model, reference.model);
        assert_eq!(sc.r, reference.r);
        assert_eq!(sc.w1, reference.w1);
        assert_eq!(f.output, OutputSection::default());
        assert!(f.plant.is_none());
    }

    #[test]
    fn missing_key_is_named() {
        let text = BASE.replace("chi3 = 676.2171\n", "");
        let err = ScenarioFile::parse(&text).unwrap_err().to_string();
        assert!(err.contains("chi3"), "{err}");
    }

    #[test]
    fn unknown_key_rejected() {
        let text = BASE.replace("k2 = 0.1", "k2 = 0.1\nchi4 = 1.0");
        let err = ScenarioFile::parse(&text).unwrap_err().to_string();
        assert!(err.contains("chi4"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn rational_model_section() {
        let text = BASE.replace(
            "time_constants = [0.04, 0.05, 0.06]",
            "num = [1.0]\nden = [1.0, 0.15, 0.0074, 0.00012]",
        );
        let f = ScenarioFile::parse(&text).unwrap();
        let m = f.model().unwrap();
        assert_eq!(m.to_tf().unwrap().n_d(), 3);
        let both = BASE.replace(
            "time_constants = [0.04, 0.05, 0.06]",
            "time_constants = [0.1]\nnum = [1.0]",
        );
        assert!(ScenarioFile::parse(&both).unwrap().model().is_err());
    }
}
