//! JSON instance files.
//!
//! A finite instance:
//!
//! ```json
//! { "m": 3, "values": [0, 0.5, 1],
//!   "actions": [ { "cost": 0, "pmf": [1, 0, 0] }, { "cost": 0.2, "pmf": [0.5, 0.3, 0.2] } ] }
//! ```
//!
//! A CCDF instance lists the breakpoints of `F(ω|·)` for `ω = 1..m-1`:
//!
//! ```json
//! { "m": 2, "values": [0, 1], "cost_max": 0.5,
//!   "ccdf": [ [ { "cost": 0, "value": 0 }, { "cost": 0.5, "value": 0.8 }, { "cost": 1, "value": 0.8 } ] ] }
//! ```
//!
//! Unknown keys are rejected.

use std::fs;
use std::path::Path;

use contractlab_core::{
    Action, CcdfInstance, Distribution, FiniteInstance, OutcomeSpace, PiecewiseLinearFn, ValidationReport,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("reading {path}")]
    Io { path: String, source: std::io::Error },
    #[error("parsing {path}")]
    Parse { path: String, source: serde_json::Error },
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Core(#[from] contractlab_core::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionRecord {
    pub cost: f64,
    pub pmf: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Breakpoint {
    pub cost: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub m: usize,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<ActionRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ccdf: Option<Vec<Vec<Breakpoint>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LoadOptions {
    /// Prepend the null action when a finite instance lacks one.
    pub insert_null: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Finite(FiniteInstance),
    Ccdf(CcdfInstance),
}

impl Instance {
    pub fn outcomes(&self) -> &OutcomeSpace {
        match self {
            Instance::Finite(i) => i.outcomes(),
            Instance::Ccdf(i) => i.outcomes(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Finite(_) => "finite",
            Instance::Ccdf(_) => "ccdf",
        }
    }
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, FileError> {
        let path = path.as_ref();
        let shown = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|source| FileError::Io { path: shown.clone(), source })?;
        Self::from_json(&text).map_err(|source| FileError::Parse { path: shown, source })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance files always serialize")
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), FileError> {
        let path = path.as_ref();
        let mut text = self.to_json();
        text.push('\n');
        fs::write(path, text).map_err(|source| FileError::Io { path: path.display().to_string(), source })
    }

    pub fn from_finite(instance: &FiniteInstance) -> Self {
        Self {
            m: instance.m(),
            values: instance.outcomes().values().to_vec(),
            actions: Some(
                instance.actions().iter().map(|a| ActionRecord { cost: a.cost, pmf: a.dist.pmf().to_vec() }).collect(),
            ),
            ccdf: None,
            cost_max: None,
        }
    }

    pub fn from_ccdf(instance: &CcdfInstance) -> Self {
        Self {
            m: instance.m(),
            values: instance.outcomes().values().to_vec(),
            actions: None,
            ccdf: Some(
                instance
                    .ccdf_fns()
                    .iter()
                    .map(|f| f.points().map(|(cost, value)| Breakpoint { cost, value }).collect())
                    .collect(),
            ),
            cost_max: Some(instance.cost_max()),
        }
    }

    fn shape(&self) -> Result<OutcomeSpace, FileError> {
        if self.values.len() != self.m {
            return Err(FileError::Schema(format!("`m` is {} but `values` has {} entries", self.m, self.values.len())));
        }
        match (&self.actions, &self.ccdf) {
            (Some(_), Some(_)) => return Err(FileError::Schema("both `actions` and `ccdf` given".into())),
            (None, None) => return Err(FileError::Schema("one of `actions` or `ccdf` is required".into())),
            (Some(_), None) if self.cost_max.is_some() => {
                return Err(FileError::Schema("`cost_max` only applies to `ccdf` instances".into()))
            }
            _ => {}
        }
        Ok(OutcomeSpace::new(self.values.clone())?)
    }

    /// The finite instance exactly as written, for violation reports.
    pub fn finite_unchecked(&self, opts: LoadOptions) -> Result<FiniteInstance, FileError> {
        let outcomes = self.shape()?;
        let Some(actions) = &self.actions else {
            return Err(FileError::Schema("not a finite instance (no `actions`)".into()));
        };
        let actions =
            actions.iter().map(|a| Action::new(a.cost, Distribution::from_pmf_unchecked(a.pmf.clone()))).collect();
        let inst = FiniteInstance::new_unchecked(outcomes, actions);
        Ok(if opts.insert_null { inst.with_null_action() } else { inst })
    }

    pub fn validate(&self, opts: LoadOptions) -> Result<ValidationReport, FileError> {
        Ok(self.finite_unchecked(opts)?.validate())
    }

    pub fn build(&self, opts: LoadOptions) -> Result<Instance, FileError> {
        let outcomes = self.shape()?;
        if self.actions.is_some() {
            let raw = self.finite_unchecked(opts)?;
            return Ok(Instance::Finite(FiniteInstance::new(outcomes, raw.actions().to_vec())?));
        }
        let ccdf = self.ccdf.as_ref().expect("shape checked");
        let cost_max = self.cost_max.ok_or_else(|| FileError::Schema("`ccdf` instances need `cost_max`".into()))?;
        let fns = ccdf
            .iter()
            .map(|pts| PiecewiseLinearFn::new(pts.iter().map(|b| (b.cost, b.value)).collect()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Instance::Ccdf(CcdfInstance::new(outcomes, fns, cost_max)?))
    }
}

pub fn load_instance(path: impl AsRef<Path>, opts: LoadOptions) -> Result<Instance, FileError> {
    InstanceFile::read(path)?.build(opts)
}
