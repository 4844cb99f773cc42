//! Tensor files: JSON documents listing curvature components with 1-based
//! indices. Omitted components are filled in by symmetry.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::curvature::{canonical_components, complete_by_symmetry, validate, CurvTensor};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// One component `R_{ijkl}`, indices in `1..=4`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentRecord {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorFile {
    pub format_version: u32,
    pub components: Vec<ComponentRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

/// The 21 independent components, 1-based.
pub fn component_records(r: &CurvTensor) -> Vec<ComponentRecord> {
    canonical_components(r)
        .into_iter()
        .map(|([i, j, k, l], value)| ComponentRecord {
            i: i + 1,
            j: j + 1,
            k: k + 1,
            l: l + 1,
            value,
        })
        .collect()
}

impl TensorFile {
    pub fn from_tensor(r: &CurvTensor, description: Option<String>) -> Self {
        TensorFile {
            format_version: FORMAT_VERSION,
            components: component_records(r),
            description,
        }
    }

    /// Completes the listed components by symmetry and validates the result.
    pub fn to_tensor(&self) -> Result<CurvTensor> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Parse {
                context: "format_version".into(),
                message: format!("unsupported version {}, expected {FORMAT_VERSION}", self.format_version),
            });
        }
        let mut entries = Vec::with_capacity(self.components.len());
        for (n, c) in self.components.iter().enumerate() {
            for (field, v) in [("i", c.i), ("j", c.j), ("k", c.k), ("l", c.l)] {
                if !(1..=4).contains(&v) {
                    return Err(Error::Parse {
                        context: format!("components[{n}].{field}"),
                        message: format!("index {v} outside 1..=4"),
                    });
                }
            }
            if !c.value.is_finite() {
                return Err(Error::Parse {
                    context: format!("components[{n}].value"),
                    message: "value is not finite".into(),
                });
            }
            entries.push(([c.i - 1, c.j - 1, c.k - 1, c.l - 1], c.value));
        }
        validate(&complete_by_symmetry(&entries)?)
    }
}

pub fn parse_tensor_file(text: &str) -> Result<TensorFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        context: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })
}

pub fn parse_tensor(text: &str) -> Result<CurvTensor> {
    parse_tensor_file(text)?.to_tensor()
}

/// Pretty JSON; floats are written in shortest round-trip form.
pub fn tensor_to_string(r: &CurvTensor, description: Option<String>) -> String {
    let mut s = serde_json::to_string_pretty(&TensorFile::from_tensor(r, description))
        .expect("tensor file serializes");
    s.push('\n');
    s
}

pub fn read_tensor(path: &Path) -> Result<CurvTensor> {
    let text = std::fs::read_to_string(path)?;
    parse_tensor(&text).map_err(|e| match e {
        Error::Parse { context, message } => Error::Parse {
            context: format!("{}: {context}", path.display()),
            message,
        },
        other => other,
    })
}

pub fn write_tensor(path: &Path, r: &CurvTensor, description: Option<String>) -> Result<()> {
    std::fs::write(path, tensor_to_string(r, description))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::random_act;
    use crate::error::Symmetry;
    use crate::fixtures::normal_form_components;

    #[test]
    fn round_trip_is_lossless() {
        for seed in 0..50 {
            let r = random_act(seed);
            let text = tensor_to_string(&r, Some("x".into()));
            let back = parse_tensor(&text).unwrap();
            // stored components are bit-identical; the rest agree to rounding
            assert_eq!(component_records(&back), component_records(&r));
            assert!(back.max_abs_diff(&r) <= 1e-15);
            assert_eq!(tensor_to_string(&back, Some("x".into())), text);
        }
    }

    #[test]
    fn partial_listing_is_completed() {
        let comps: Vec<_> = normal_form_components([1.0, 2.0, -3.0])
            .into_iter()
            .map(|([i, j, k, l], v)| format!(r#"{{"i":{},"j":{},"k":{},"l":{},"value":{v}}}"#, i + 1, j + 1, k + 1, l + 1))
            .collect();
        let text = format!(r#"{{"format_version":1,"components":[{}]}}"#, comps.join(","));
        let r = parse_tensor(&text).unwrap();
        assert_eq!(r, crate::fixtures::normal_form([1.0, 2.0, -3.0]).unwrap());
    }

    #[test]
    fn errors() {
        let bad_version = r#"{"format_version":2,"components":[]}"#;
        assert!(matches!(parse_tensor(bad_version), Err(Error::Parse { context, .. }) if context == "format_version"));
        let bad_index = r#"{"format_version":1,"components":[{"i":0,"j":1,"k":1,"l":2,"value":1}]}"#;
        assert!(matches!(parse_tensor(bad_index), Err(Error::Parse { context, .. }) if context == "components[0].i"));
        let syntax = "{\"format_version\":1,\n\"components\":[}";
        assert!(matches!(parse_tensor(syntax), Err(Error::Parse { context, .. }) if context.starts_with("line 2")));
        let conflict = r#"{"format_version":1,"components":[
            {"i":1,"j":2,"k":2,"l":1,"value":1},
            {"i":2,"j":1,"k":1,"l":2,"value":2}]}"#;
        assert!(matches!(parse_tensor(conflict), Err(Error::ConflictingComponent { .. })));
        // R₁₂₃₄ alone breaks the first Bianchi identity
        let bianchi = r#"{"format_version":1,"components":[{"i":1,"j":2,"k":3,"l":4,"value":1}]}"#;
        assert!(matches!(
            parse_tensor(bianchi),
            Err(Error::SymmetryViolation { which: Symmetry::FirstBianchi, .. })
        ));
        assert!(parse_tensor(r#"{"format_version":1,"components":[],"extra":1}"#).is_err());
    }

    #[test]
    fn zero_file() {
        let r = parse_tensor(r#"{"format_version":1,"components":[]}"#).unwrap();
        assert_eq!(r, CurvTensor::zero());
    }
}
