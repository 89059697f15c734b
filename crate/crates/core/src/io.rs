//! The JSON instance format: `{"n": 3, "weights": [{"i": 0, "j": 1, "w": "5/1"}]}`.
//! Directed instances carry `"v"` with ordered pairs instead of `"weights"`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FhgError, Result};
use crate::game::{symmetrize, DirectedFhg, SymmetricFhg};
use crate::rational::Rational;

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct WeightEntry {
    pub i: usize,
    pub j: usize,
    pub w: Rational,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<WeightEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<WeightEntry>>,
}

/// A parsed instance file.
#[derive(Clone, Debug)]
pub enum Instance {
    Symmetric(SymmetricFhg),
    Directed(DirectedFhg),
}

impl Instance {
    /// The symmetric game, symmetrizing directed input.
    pub fn into_symmetric(self) -> SymmetricFhg {
        match self {
            Instance::Symmetric(g) => g,
            Instance::Directed(d) => symmetrize(&d),
        }
    }
}

impl InstanceFile {
    pub fn from_symmetric(g: &SymmetricFhg) -> Self {
        let weights = g
            .nonzero_pairs()
            .into_iter()
            .map(|(i, j, w)| WeightEntry { i, j, w })
            .collect();
        InstanceFile { n: g.n(), weights: Some(weights), v: None }
    }

    pub fn from_directed(g: &DirectedFhg) -> Self {
        let v = g
            .nonzero_values()
            .into_iter()
            .map(|(i, j, w)| WeightEntry { i, j, w })
            .collect();
        InstanceFile { n: g.n(), weights: None, v: Some(v) }
    }

    pub fn into_instance(self) -> Result<Instance> {
        match (self.weights, self.v) {
            (Some(_), Some(_)) => Err(FhgError::InvalidInstance(
                "both \"weights\" and \"v\" present".into(),
            )),
            (Some(ws), None) => {
                if let Some(e) = ws.iter().find(|e| e.i >= e.j) {
                    return Err(FhgError::InvalidInstance(format!(
                        "symmetric entries need i < j, got ({}, {})",
                        e.i, e.j
                    )));
                }
                let g = SymmetricFhg::from_weights(self.n, ws.into_iter().map(|e| (e.i, e.j, e.w)))?;
                Ok(Instance::Symmetric(g))
            }
            (None, Some(vs)) => {
                let g = DirectedFhg::from_values(self.n, vs.into_iter().map(|e| (e.i, e.j, e.w)))?;
                Ok(Instance::Directed(g))
            }
            (None, None) => Ok(Instance::Symmetric(SymmetricFhg::empty(self.n))),
        }
    }
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text)
        .map_err(|e| FhgError::InvalidInstance(e.to_string()))?;
    file.into_instance()
}

pub fn symmetric_to_json(g: &SymmetricFhg) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceFile::from_symmetric(g))
        .expect("instance serializes");
    s.push('\n');
    s
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn write_symmetric(path: &Path, g: &SymmetricFhg) -> Result<()> {
    std::fs::write(path, symmetric_to_json(g))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn round_trip() {
        let g = SymmetricFhg::from_weights(3, [(0, 1, ratio(5, 1)), (1, 2, ratio(-7, 3))]).unwrap();
        let text = symmetric_to_json(&g);
        assert!(text.contains("\"5/1\""));
        let back = parse_instance(&text).unwrap().into_symmetric();
        assert_eq!(back.nonzero_pairs(), g.nonzero_pairs());
    }

    #[test]
    fn directed_input_is_symmetrized() {
        let text = r#"{"n": 2, "v": [{"i": 1, "j": 0, "w": "4"}]}"#;
        let g = parse_instance(text).unwrap().into_symmetric();
        assert_eq!(g.w(0, 1), ratio(2, 1));
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_instance(r#"{"n": 2, "weights": [{"i": 1, "j": 0, "w": "1"}]}"#).is_err());
        assert!(parse_instance(r#"{"n": 2, "weights": [{"i": 0, "j": 2, "w": "1"}]}"#).is_err());
        assert!(parse_instance(r#"{"n": 2, "weights": [{"i": 0, "j": 1, "w": "1/0"}]}"#).is_err());
        assert!(parse_instance(r#"{"n": 2, "bogus": 1}"#).is_err());
    }
}
