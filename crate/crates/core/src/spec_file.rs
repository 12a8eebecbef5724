//! The `.gpd.json` groupoid spec format.

use std::collections::BTreeMap;
use std::path::Path;

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::bundle::SubgroupBundle;
use crate::groupoid::{validate_groupoid, FiniteGroupoid, ParseError, RawArrow, RawGroupoid, ValidationReport};
use crate::haar::HaarWeights;
use crate::phase::{format_rational, parse_rational};

/// A strictly positive rational serialized as `"p/q"`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weight(pub BigRational);

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let r = parse_rational(&s).ok_or_else(|| serde::de::Error::custom(format!("{s:?} is not a rational p/q")))?;
        if !r.is_positive() {
            return Err(serde::de::Error::custom(format!("weight {s:?} is not positive")));
        }
        Ok(Weight(r))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowEntry {
    pub id: String,
    pub src: String,
    pub dst: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaarSpec {
    pub lambda: BTreeMap<String, Weight>,
    pub beta: BTreeMap<String, Weight>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<BTreeMap<String, Weight>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub units: Vec<String>,
    pub arrows: Vec<ArrowEntry>,
    pub compose: Vec<[String; 3]>,
    pub inverse: Vec<[String; 2]>,
    /// Default subgroup bundle; absent means the unit arrows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<Vec<String>>,
    /// Further named bundles.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bundles: BTreeMap<String, Vec<String>>,
    /// Absent means every weight is 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub haar: Option<HaarSpec>,
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("malformed tables: {0}")]
    Parse(#[from] ParseError),
    #[error("groupoid axioms violated: {0}")]
    Axioms(Box<ValidationReport>),
    #[error("unknown bundle {0:?}")]
    UnknownBundle(String),
}

impl SpecError {
    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            SpecError::Io { .. } => 2,
            SpecError::Schema { .. } | SpecError::Parse(_) | SpecError::UnknownBundle(_) => 3,
            SpecError::Axioms(_) => 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LoadedSpec {
    pub spec: SpecFile,
    pub groupoid: FiniteGroupoid,
    pub weights: HaarWeights,
}

impl SpecFile {
    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| SpecError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn read(path: &Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    pub fn raw(&self) -> RawGroupoid {
        RawGroupoid {
            units: self.units.clone(),
            arrows: self
                .arrows
                .iter()
                .map(|a| RawArrow { id: a.id.clone(), src: a.src.clone(), dst: a.dst.clone() })
                .collect(),
            compose: self.compose.clone(),
            inverse: self.inverse.clone(),
        }
    }

    pub fn from_groupoid(g: &FiniteGroupoid, bundle: Option<Vec<String>>, bundles: BTreeMap<String, Vec<String>>, weights: Option<&HaarWeights>) -> Self {
        let raw = g.to_raw();
        let by_unit = |w: &[BigRational]| -> BTreeMap<String, Weight> {
            g.unit_names().iter().cloned().zip(w.iter().map(|x| Weight(x.clone()))).collect()
        };
        SpecFile {
            units: raw.units,
            arrows: raw.arrows.into_iter().map(|a| ArrowEntry { id: a.id, src: a.src, dst: a.dst }).collect(),
            compose: raw.compose,
            inverse: raw.inverse,
            bundle,
            bundles,
            haar: weights.map(|w| HaarSpec {
                lambda: by_unit(&w.lambda),
                beta: by_unit(&w.beta),
                mu: w.mu.as_ref().map(|m| by_unit(m)),
            }),
        }
    }

    fn weights(&self) -> Result<HaarWeights, SpecError> {
        let Some(h) = &self.haar else { return Ok(HaarWeights::uniform(self.units.len())) };
        let pick = |name: &str, m: &BTreeMap<String, Weight>| -> Result<Vec<BigRational>, SpecError> {
            if let Some(extra) = m.keys().find(|k| !self.units.contains(k)) {
                return Err(SpecError::Schema { path: format!("haar.{name}.{extra}"), message: "unknown unit".into() });
            }
            self.units
                .iter()
                .map(|u| {
                    m.get(u).map(|w| w.0.clone()).ok_or_else(|| SpecError::Schema {
                        path: format!("haar.{name}"),
                        message: format!("no weight for unit {u:?}"),
                    })
                })
                .collect()
        };
        Ok(HaarWeights {
            lambda: pick("lambda", &h.lambda)?,
            beta: pick("beta", &h.beta)?,
            mu: h.mu.as_ref().map(|m| pick("mu", m)).transpose()?,
        })
    }

    /// Validates the tables and weights.
    pub fn load(self) -> Result<LoadedSpec, SpecError> {
        let weights = self.weights()?;
        let outcome = validate_groupoid(&self.raw())?;
        let groupoid = outcome.groupoid.ok_or_else(|| SpecError::Axioms(Box::new(outcome.report)))?;
        Ok(LoadedSpec { spec: self, groupoid, weights })
    }
}

impl LoadedSpec {
    pub fn read(path: &Path) -> Result<Self, SpecError> {
        SpecFile::read(path)?.load()
    }

    pub fn bundle_names(&self) -> Vec<String> {
        std::iter::once("bundle".to_string()).chain(self.spec.bundles.keys().cloned()).collect()
    }

    /// The default bundle for `None` or `"bundle"`, else a named one.
    pub fn bundle(&self, name: Option<&str>) -> Result<SubgroupBundle, SpecError> {
        let ids = match name {
            None | Some("bundle") => match &self.spec.bundle {
                Some(ids) => ids,
                None => return Ok(SubgroupBundle::trivial(&self.groupoid)),
            },
            Some(n) => self.spec.bundles.get(n).ok_or_else(|| SpecError::UnknownBundle(n.to_string()))?,
        };
        self.bundle_from_ids(ids)
    }

    pub fn bundle_from_ids(&self, ids: &[String]) -> Result<SubgroupBundle, SpecError> {
        SubgroupBundle::from_names(&self.groupoid, ids).map_err(|e| SpecError::Schema { path: "bundle".into(), message: e.to_string() })
    }
}
