//! Market files.
//!
//! A market file is a JSON object with `budgets`, `values`, `seller_of` and an
//! optional `boosts` matrix. Reals are written in the shortest decimal form
//! that parses back to the identical `f64`, so `load(save(s)) == s` bit for bit.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::market::MarketSpec;
use crate::matrix::Matrix;

pub fn to_json(spec: &MarketSpec) -> String {
    serde_json::to_string_pretty(spec).expect("market specs always serialize")
}

pub fn from_json(text: &str, origin: &Path) -> Result<MarketSpec> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn save(spec: &MarketSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = to_json(spec);
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load(path: impl AsRef<Path>) -> Result<MarketSpec> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_json(&text, path)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BoostFile {
    Bare(Matrix),
    Wrapped { boosts: Matrix },
}

/// Reads a boost matrix, either bare (`[[..], ..]`) or as `{"boosts": [[..]]}`.
pub fn load_boosts(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parsed: BoostFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(match parsed {
        BoostFile::Bare(m) | BoostFile::Wrapped { boosts: m } => m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_budgets_names_the_field() {
        let err = from_json(r#"{"values": [[1.0]], "seller_of": [0]}"#, Path::new("m.json"))
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("budgets"), "{msg}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn awkward_reals_survive_text() {
        let spec = MarketSpec::new(
            vec![0.1 + 0.2, 1.0 / 3.0, f64::MIN_POSITIVE],
            vec![vec![std::f64::consts::PI, 1e-300], vec![2.0_f64.sqrt(), 7.0], vec![1e300, 0.0]],
            vec![0, 1],
        );
        let back = from_json(&to_json(&spec), Path::new("x")).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn boosts_optional() {
        let spec = from_json(
            r#"{"budgets": [1], "values": [[1]], "seller_of": [0], "boosts": [[0.5]]}"#,
            Path::new("x"),
        )
        .unwrap();
        assert_eq!(spec.boosts, Some(vec![vec![0.5]]));
        assert!(!to_json(&MarketSpec::new(vec![1.0], vec![vec![1.0]], vec![0])).contains("boosts"));
    }
}
