//! Built-in cases and case-file lookup.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::netmodel::{parse_case, PowerSystemCase};

/// Environment variable naming a directory searched for case files.
pub const CASE_DIR_ENV: &str = "SAS_TRANSIM_CASE_DIR";

const BUILTIN: [(&str, &str); 3] = [
    ("smib.json", include_str!("../cases/smib.json")),
    ("ieee9.json", include_str!("../cases/ieee9.json")),
    ("ieee39.json", include_str!("../cases/ieee39.json")),
];

/// Names of the built-in cases.
pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|(n, _)| *n).collect()
}

/// Text of a built-in case, by file name with or without `.json`.
pub fn builtin_text(name: &str) -> Option<&'static str> {
    let file = if name.ends_with(".json") {
        name.to_string()
    } else {
        format!("{name}.json")
    };
    BUILTIN.iter().find(|(n, _)| *n == file).map(|(_, t)| *t)
}

pub fn builtin(name: &str) -> Result<PowerSystemCase> {
    let text = builtin_text(name)
        .ok_or_else(|| Error::Validation(format!("no built-in case `{name}`")))?;
    parse_case(text)
}

/// Resolves `name` as a path, then inside `$SAS_TRANSIM_CASE_DIR`, then
/// among the built-in cases.
pub fn load_case(name: &str) -> Result<PowerSystemCase> {
    let direct = Path::new(name);
    let mut candidates: Vec<PathBuf> = vec![direct.to_path_buf()];
    if let Ok(dir) = std::env::var(CASE_DIR_ENV) {
        if let Some(file) = direct.file_name() {
            candidates.push(Path::new(&dir).join(file));
        }
        candidates.push(Path::new(&dir).join(name));
    }
    for path in candidates {
        if path.is_file() {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
            return parse_case(&text);
        }
    }
    let name = direct.file_name().and_then(|f| f.to_str()).unwrap_or(name);
    match builtin_text(name) {
        Some(text) => parse_case(text),
        None => Err(Error::Validation(format!(
            "case `{name}` not found (built-in cases: {})",
            builtin_names().join(", ")
        ))),
    }
}
