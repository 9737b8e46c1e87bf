use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One listening-test cell: the stimuli played and the measured intelligibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub id: String,
    /// Percent words correct.
    pub intelligibility: f64,
    #[serde(rename = "clean")]
    pub clean_files: Vec<PathBuf>,
    #[serde(rename = "degraded")]
    pub degraded_files: Vec<PathBuf>,
    #[serde(default)]
    pub tags: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub name: String,
    /// Metric name -> whether this dataset was used while developing it.
    #[serde(default)]
    pub seen_by: BTreeMap<String, bool>,
    /// Cross-correlation alignment of degraded stimuli before scoring.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub align: bool,
    pub conditions: Vec<Condition>,
}

impl DatasetManifest {
    /// Parses and validates manifest JSON, resolving relative paths against
    /// `base_dir`.
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut manifest: DatasetManifest = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        for cond in &mut manifest.conditions {
            for p in cond.clean_files.iter_mut().chain(cond.degraded_files.iter_mut()) {
                if p.is_relative() {
                    *p = base_dir.join(&*p);
                }
            }
        }
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (i, c) in self.conditions.iter().enumerate() {
            if !seen.insert(c.id.as_str()) {
                return Err(Error::DuplicateConditionId(c.id.clone()));
            }
            if !(0.0..=100.0).contains(&c.intelligibility) {
                return Err(Error::IntelligibilityOutOfRange {
                    id: c.id.clone(),
                    value: c.intelligibility,
                });
            }
            if c.clean_files.is_empty() {
                return Err(Error::Schema {
                    path: format!("conditions[{i}].clean"),
                    message: "at least one file is required".into(),
                });
            }
            if c.clean_files.len() != c.degraded_files.len() {
                return Err(Error::Schema {
                    path: format!("conditions[{i}].degraded"),
                    message: format!(
                        "{} degraded files for {} clean files",
                        c.degraded_files.len(),
                        c.clean_files.len()
                    ),
                });
            }
        }
        Ok(())
    }

    /// Whether `metric` was developed on this dataset; unknown metrics count
    /// as unseen.
    pub fn seen_by(&self, metric: &str) -> bool {
        self.seen_by.get(metric).copied().unwrap_or(false)
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).at_path(path))?;
    let base = path.parent().unwrap_or(Path::new("."));
    DatasetManifest::from_json(&text, base).map_err(|e| e.at_path(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TWO: &str = r#"{
        "name": "demo",
        "seen_by": {"stoi": true},
        "conditions": [
            {"id": "ssn_-5dB", "intelligibility": 35.0, "clean": ["c1.wav"], "degraded": ["d1.wav"], "tags": ["ssn"]},
            {"id": "ssn_0dB", "intelligibility": 80.0, "clean": ["/abs/c2.wav"], "degraded": ["d2.wav"]}
        ]
    }"#;

    #[test]
    fn parses_in_file_order() {
        let m = DatasetManifest::from_json(TWO, Path::new("/data/set")).unwrap();
        assert_eq!(m.name, "demo");
        let ps: Vec<f64> = m.conditions.iter().map(|c| c.intelligibility).collect();
        assert_eq!(ps, [35.0, 80.0]);
        assert_eq!(m.conditions[0].clean_files[0], PathBuf::from("/data/set/c1.wav"));
        assert_eq!(m.conditions[1].clean_files[0], PathBuf::from("/abs/c2.wav"));
        assert!(m.seen_by("stoi"));
        assert!(!m.seen_by("siib"));
        assert!(!m.align);
    }

    #[test]
    fn out_of_range_intelligibility() {
        let text = TWO.replace("80.0", "105");
        let err = DatasetManifest::from_json(&text, Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::IntelligibilityOutOfRange { value, .. } if value == 105.0));
    }

    #[test]
    fn duplicate_ids() {
        let text = TWO.replace("ssn_-5dB", "ssn_0dB");
        let err = DatasetManifest::from_json(&text, Path::new(".")).unwrap_err();
        assert!(matches!(err, Error::DuplicateConditionId(id) if id == "ssn_0dB"));
    }

    #[test]
    fn schema_error_names_field() {
        let text = TWO.replace("\"intelligibility\": 35.0", "\"intelligibility\": \"high\"");
        match DatasetManifest::from_json(&text, Path::new(".")).unwrap_err() {
            Error::Schema { path, .. } => assert_eq!(path, "conditions[0].intelligibility"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unbalanced_file_lists() {
        let text = TWO.replace(r#""degraded": ["d2.wav"]"#, r#""degraded": []"#);
        assert!(matches!(
            DatasetManifest::from_json(&text, Path::new(".")),
            Err(Error::Schema { .. })
        ));
    }

    fn arb_condition() -> impl Strategy<Value = Condition> {
        (
            "[a-z]{1,8}",
            0.0f64..=100.0,
            prop::collection::vec("[a-z]{1,6}\\.wav", 1..4),
            prop::collection::btree_set("[a-z]{2,4}", 0..3),
        )
            .prop_map(|(id, p, files, tags)| Condition {
                id,
                intelligibility: p,
                degraded_files: files.iter().map(|f| PathBuf::from(format!("/d/{f}"))).collect(),
                clean_files: files.iter().map(|f| PathBuf::from(format!("/c/{f}"))).collect(),
                tags,
            })
    }

    proptest! {
        #[test]
        fn parse_serialize_parse_is_fixed_point(
            conds in prop::collection::vec(arb_condition(), 1..6),
            align in any::<bool>(),
        ) {
            let mut conditions = conds;
            for (i, c) in conditions.iter_mut().enumerate() {
                c.id = format!("{}_{i}", c.id);
            }
            let m = DatasetManifest { name: "p".into(), seen_by: BTreeMap::from([("siib".into(), true)]), align, conditions };
            let once = DatasetManifest::from_json(&m.to_json(), Path::new("/base")).unwrap();
            let twice = DatasetManifest::from_json(&once.to_json(), Path::new("/elsewhere")).unwrap();
            prop_assert_eq!(&once, &m);
            prop_assert_eq!(once, twice);
        }
    }
}
