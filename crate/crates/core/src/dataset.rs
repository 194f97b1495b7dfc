//! Labeled feature matrices.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Grade level label. Raw corpora use 1..=5; merged datasets use 1..=m.
pub type Level = u8;

pub const MIN_LEVEL: Level = 1;
pub const MAX_LEVEL: Level = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub values: Vec<f64>,
    pub available: Vec<bool>,
    pub level: Option<Level>,
    #[serde(default)]
    pub source: String,
}

impl Instance {
    pub fn new(id: impl Into<String>, values: Vec<f64>, level: Option<Level>) -> Instance {
        let available = vec![true; values.len()];
        Instance {
            id: id.into(),
            values,
            available,
            level,
            source: String::new(),
        }
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Instance {
        self.source = source.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub instances: Vec<Instance>,
    /// Set once levels have been merged; re-merging with the same mapping is a no-op.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_mapping: Option<LevelMapping>,
}

impl Dataset {
    pub fn new(feature_names: Vec<String>) -> Result<Dataset> {
        let mut seen = HashSet::new();
        if let Some(dup) = feature_names.iter().find(|n| !seen.insert(n.as_str())) {
            return Err(Error::InvalidInput(format!("duplicate feature name {dup:?}")));
        }
        Ok(Dataset {
            feature_names,
            instances: Vec::new(),
            level_mapping: None,
        })
    }

    /// Builds a dataset from extracted vectors, taking column order from the first.
    pub fn from_vectors<I>(rows: I) -> Result<Dataset>
    where
        I: IntoIterator<Item = (String, FeatureVector, Option<Level>, String)>,
    {
        let mut out: Option<Dataset> = None;
        for (id, fv, level, source) in rows {
            let ds = match &mut out {
                Some(ds) => ds,
                None => out.insert(Dataset::new(fv.names().map(str::to_string).collect())?),
            };
            let mut values = Vec::with_capacity(ds.feature_names.len());
            let mut available = Vec::with_capacity(ds.feature_names.len());
            for name in &ds.feature_names {
                let v = fv.get(name).ok_or_else(|| Error::DimensionMismatch {
                    expected: ds.feature_names.len(),
                    found: fv.len(),
                })?;
                values.push(v);
                available.push(fv.is_available(name));
            }
            ds.push(Instance {
                id,
                values,
                available,
                level,
                source,
            })?;
        }
        out.ok_or_else(|| Error::InvalidInput("no instances".into()))
    }

    pub fn push(&mut self, instance: Instance) -> Result<()> {
        let n = self.feature_names.len();
        if instance.values.len() != n || instance.available.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: instance.values.len(),
            });
        }
        if let Some(level) = instance.level {
            if level == 0 {
                return Err(Error::InvalidInput(format!("instance {}: level 0", instance.id)));
            }
        }
        if self.index_of(&instance.id).is_some() {
            return Err(Error::InvalidInput(format!("duplicate instance id {:?}", instance.id)));
        }
        self.instances.push(instance);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_names.len()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.instances.iter().position(|i| i.id == id)
    }

    pub fn remove(&mut self, id: &str) -> Option<Instance> {
        self.index_of(id).map(|i| self.instances.remove(i))
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.instances.iter().map(|i| i.values.clone()).collect()
    }

    /// Gold levels; errors if any instance is unlabeled.
    pub fn levels(&self) -> Result<Vec<Level>> {
        self.instances
            .iter()
            .map(|i| {
                i.level
                    .ok_or_else(|| Error::InvalidInput(format!("instance {} has no level", i.id)))
            })
            .collect()
    }

    pub fn labels(&self) -> BTreeSet<Level> {
        self.instances.iter().filter_map(|i| i.level).collect()
    }

    pub fn class_counts(&self) -> BTreeMap<Level, usize> {
        let mut counts = BTreeMap::new();
        for level in self.instances.iter().filter_map(|i| i.level) {
            *counts.entry(level).or_default() += 1;
        }
        counts
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
            level_mapping: self.level_mapping.clone(),
        }
    }

    /// Projects onto `names`, in the given order.
    pub fn select_features<S: AsRef<str>>(&self, names: &[S]) -> Result<Dataset> {
        let cols = self.column_indices(names)?;
        Ok(Dataset {
            feature_names: names.iter().map(|n| n.as_ref().to_string()).collect(),
            instances: self
                .instances
                .iter()
                .map(|inst| Instance {
                    values: cols.iter().map(|&c| inst.values[c]).collect(),
                    available: cols.iter().map(|&c| inst.available[c]).collect(),
                    ..inst.clone()
                })
                .collect(),
            level_mapping: self.level_mapping.clone(),
        })
    }

    pub fn column_indices<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        let missing: Vec<&str> = names
            .iter()
            .map(AsRef::as_ref)
            .filter(|n| !self.feature_names.iter().any(|f| f == n))
            .collect();
        if !missing.is_empty() {
            return Err(Error::InvalidInput(format!("unknown features: {}", missing.join(", "))));
        }
        Ok(names
            .iter()
            .map(|n| self.feature_names.iter().position(|f| f == n.as_ref()).unwrap())
            .collect())
    }

    /// True when some instances have a feature available that others lack.
    pub fn has_mixed_availability(&self) -> bool {
        let mut masks = self.instances.iter().map(|i| &i.available);
        match masks.next() {
            Some(first) => masks.any(|m| m != first),
            None => false,
        }
    }

    pub fn check_finite(&self) -> Result<()> {
        for inst in &self.instances {
            if let Some(c) = inst.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    instance: inst.id.clone(),
                    feature: self.feature_names[c].clone(),
                });
            }
        }
        Ok(())
    }
}

/// Order-preserving relabeling of levels 1..=5 onto 1..=m.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LevelMapping {
    mapping: BTreeMap<Level, Level>,
}

impl LevelMapping {
    pub fn new(mapping: BTreeMap<Level, Level>) -> Result<LevelMapping> {
        let domain: Vec<Level> = mapping.keys().copied().collect();
        if domain != (MIN_LEVEL..=MAX_LEVEL).collect::<Vec<_>>() {
            return Err(Error::InvalidConfig(format!(
                "level mapping must cover exactly {MIN_LEVEL}..={MAX_LEVEL}"
            )));
        }
        let targets: Vec<Level> = mapping.values().copied().collect();
        if targets[0] != 1 || targets.windows(2).any(|w| w[1] != w[0] && w[1] != w[0] + 1) {
            return Err(Error::InvalidConfig(
                "merged levels must be order-preserving and contiguous from 1".into(),
            ));
        }
        Ok(LevelMapping { mapping })
    }

    pub fn identity() -> LevelMapping {
        LevelMapping {
            mapping: (MIN_LEVEL..=MAX_LEVEL).map(|l| (l, l)).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().all(|(a, b)| a == b)
    }

    pub fn apply(&self, level: Level) -> Option<Level> {
        self.mapping.get(&level).copied()
    }

    pub fn merged_count(&self) -> usize {
        self.mapping.values().collect::<BTreeSet<_>>().len()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Level, Level)> + '_ {
        self.mapping.iter().map(|(a, b)| (*a, *b))
    }
}

impl FromStr for LevelMapping {
    type Err = Error;

    /// Parses `1:1,2:2,3:2,4:3,5:3`.
    fn from_str(s: &str) -> Result<LevelMapping> {
        let mut mapping = BTreeMap::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (from, to) = part
                .split_once(':')
                .ok_or_else(|| Error::InvalidConfig(format!("bad mapping entry {part:?}")))?;
            let parse = |x: &str| {
                x.trim()
                    .parse::<Level>()
                    .map_err(|_| Error::InvalidConfig(format!("bad level {x:?} in mapping")))
            };
            if mapping.insert(parse(from)?, parse(to)?).is_some() {
                return Err(Error::InvalidConfig(format!("level {from} mapped twice")));
            }
        }
        LevelMapping::new(mapping)
    }
}

impl fmt::Display for LevelMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.mapping.iter().map(|(a, b)| format!("{a}:{b}")).collect();
        f.write_str(&parts.join(","))
    }
}

impl TryFrom<String> for LevelMapping {
    type Error = Error;

    fn try_from(s: String) -> Result<LevelMapping> {
        s.parse()
    }
}

impl From<LevelMapping> for String {
    fn from(m: LevelMapping) -> String {
        m.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds() -> Dataset {
        let mut d = Dataset::new(vec!["a".into(), "b".into()]).unwrap();
        d.push(Instance::new("x", vec![1.0, 2.0], Some(1))).unwrap();
        d.push(Instance::new("y", vec![3.0, 4.0], Some(2))).unwrap();
        d
    }

    #[test]
    fn push_validates() {
        let mut d = ds();
        assert!(d.push(Instance::new("x", vec![0.0, 0.0], None)).is_err());
        assert!(d.push(Instance::new("z", vec![0.0], None)).is_err());
        assert!(Dataset::new(vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn select_reorders() {
        let d = ds().select_features(&["b", "a"]).unwrap();
        assert_eq!(d.instances[1].values, vec![4.0, 3.0]);
        assert!(ds().select_features(&["c"]).is_err());
    }

    #[test]
    fn mapping_parse_and_validate() {
        let m: LevelMapping = "1:1,2:2,3:2,4:3,5:3".parse().unwrap();
        assert_eq!(m.apply(4), Some(3));
        assert_eq!(m.merged_count(), 3);
        assert_eq!(m.to_string(), "1:1,2:2,3:2,4:3,5:3");
        assert!("1:1,2:3,3:3,4:3,5:3".parse::<LevelMapping>().is_err());
        assert!("1:2,2:2,3:2,4:3,5:3".parse::<LevelMapping>().is_err());
        assert!("1:1,2:2".parse::<LevelMapping>().is_err());
        assert!("1:1,2:1,3:2,4:2,5:1".parse::<LevelMapping>().is_err());
        assert!(LevelMapping::identity().is_identity());
    }
}
