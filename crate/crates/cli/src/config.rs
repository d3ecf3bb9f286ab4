//! Flag and config-file merging.
//!
//! Every command's arguments are a flat struct of optional fields that is
//! both a clap argument group and a serde record with the same (kebab-case)
//! names. A `--config` JSON object supplies values; flags given on the command
//! line win. Unknown keys are rejected by name.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use npch_core::{Error, Result};

/// Overlays the flags given on the command line onto `config`, then reads the
/// merged object back as `T`.
pub fn resolve<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Path>) -> Result<T> {
    let Some(path) = config else {
        return round_trip(flags);
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut merged: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Usage(format!("config {}: {e}", path.display())))?;
    let obj = merged.as_object_mut().ok_or_else(|| {
        Error::Usage(format!("config {} must be a JSON object", path.display()))
    })?;
    let given = serde_json::to_value(flags)?;
    for (k, v) in given.as_object().expect("args serialize to objects") {
        if !v.is_null() {
            obj.insert(k.clone(), v.clone());
        }
    }
    serde_json::from_value(merged).map_err(|e| Error::Usage(format!("config {}: {e}", path.display())))
}

fn round_trip<T: Serialize + DeserializeOwned>(flags: &T) -> Result<T> {
    let v = serde_json::to_value(flags)?;
    serde_json::from_value(v).map_err(|e| Error::Usage(e.to_string()))
}

/// Value of a flag that may be given as inline JSON or as a path to a JSON
/// file.
pub fn json_arg(inline: Option<&str>, file: Option<&Path>, what: &str) -> Result<serde_json::Value> {
    match (inline, file) {
        (Some(_), Some(_)) => Err(Error::Usage(format!(
            "give either --{what} or --{what}-file, not both"
        ))),
        (Some(text), None) => serde_json::from_str(text)
            .map_err(|e| Error::Usage(format!("--{what} is not valid JSON: {e}"))),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
        }
        (None, None) => Err(Error::Usage(format!("missing --{what} or --{what}-file"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields, rename_all = "kebab-case")]
    struct Demo {
        ntheta: Option<usize>,
        #[serde(rename = "T0")]
        t0: Option<f64>,
        cauchy_tol: Option<f64>,
    }

    fn write(text: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), text).unwrap();
        f
    }

    #[test]
    fn flags_override_file() {
        let f = write(r#"{"ntheta": 64, "T0": 5}"#);
        let flags = Demo {
            ntheta: None,
            t0: Some(10.0),
            cauchy_tol: None,
        };
        let d = resolve(&flags, Some(f.path())).unwrap();
        assert_eq!(d.ntheta, Some(64));
        assert_eq!(d.t0, Some(10.0));
    }

    #[test]
    fn unknown_key_is_named() {
        let f = write(r#"{"nthета": 64}"#);
        let flags = Demo {
            ntheta: None,
            t0: None,
            cauchy_tol: None,
        };
        match resolve(&flags, Some(f.path())) {
            Err(Error::Usage(m)) => assert!(m.contains("nthета"), "{m}"),
            other => panic!("{other:?}"),
        }
    }
}
