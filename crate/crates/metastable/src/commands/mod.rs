//! One module per subcommand; each returns an [`crate::Outcome`] whose JSON
//! embeds the run manifest.

pub mod analyze;
pub mod chain;
pub mod gamma;
pub mod simulate;
pub mod tree;
pub mod verify;

use serde_json::{Map, Value};

use crate::manifest::Manifest;

/// Prepends the manifest to a command's JSON body.
pub(crate) fn with_manifest(manifest: Manifest, body: Value) -> Result<Value, crate::CliError> {
    let mut out = Map::new();
    out.insert("manifest".into(), serde_json::to_value(manifest)?);
    if let Value::Object(fields) = body {
        out.extend(fields);
    }
    Ok(Value::Object(out))
}
