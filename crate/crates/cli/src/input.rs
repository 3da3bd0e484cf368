use std::fs;
use std::path::Path;

use pimodel::model_space::{AtomicMeasure, AtomicMeasureJson, FiniteBlaschke, FiniteBlaschkeJson};
use pimodel::partial_isometry::PartialIsometryJson;
use pimodel::{CMatrix, Error, Tolerance};
use serde::de::DeserializeOwned;

/// Failure classes, mapped to exit codes 2 and 3.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotSquare { .. }
            | Error::DimensionMismatch(_)
            | Error::NotPartialIsometry { .. }
            | Error::NotOrthonormal { .. }
            | Error::UnequalIndices(..)
            | Error::WrongDefect { .. }
            | Error::NotVanishingAtZero
            | Error::PoleInsideDisk
            | Error::Invalid(_) => Failure::Input(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

fn tagged(path: &Path, e: Error) -> Failure {
    match Failure::from(e) {
        Failure::Input(m) => Failure::Input(format!("{}: {m}", path.display())),
        Failure::Numerical(m) => Failure::Numerical(format!("{}: {m}", path.display())),
    }
}

pub fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Parses JSON into `T`. Syntax errors are reported by line and column,
/// schema errors also by field path.
pub fn parse<T: DeserializeOwned>(path: &Path, text: &str) -> Outcome<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let inner = e.inner();
        let kind = match inner.classify() {
            serde_json::error::Category::Syntax | serde_json::error::Category::Eof => "parse error",
            _ => "schema error",
        };
        let at = e.path().to_string();
        let field = if at == "." {
            String::new()
        } else {
            format!(" at `{at}`")
        };
        Failure::Input(format!("{}: {kind}{field}: {inner}", path.display()))
    })?;
    de.end()
        .map_err(|e| Failure::Input(format!("{}: parse error: {e}", path.display())))?;
    Ok(value)
}

pub fn matrix(path: &Path, base: Tolerance) -> Outcome<(CMatrix, Tolerance)> {
    let json: PartialIsometryJson = parse(path, &read(path)?)?;
    let tol = json.tol.as_ref().map(|t| t.apply(base)).unwrap_or(base);
    tol.check().map_err(|e| tagged(path, e))?;
    let m = json.matrix.to_matrix().map_err(|e| tagged(path, e))?;
    Ok((m, tol))
}

pub fn partial_isometry(path: &Path, base: Tolerance) -> Outcome<pimodel::PartialIsometry> {
    let (m, tol) = matrix(path, base)?;
    pimodel::PartialIsometry::validate(m, tol).map_err(|e| tagged(path, e))
}

pub fn blaschke_text(path: &Path, text: &str) -> Outcome<FiniteBlaschke> {
    let json: FiniteBlaschkeJson = parse(path, text)?;
    json.to_blaschke().map_err(|e| tagged(path, e))
}

pub fn blaschke(path: &Path) -> Outcome<FiniteBlaschke> {
    blaschke_text(path, &read(path)?)
}

pub fn measure_text(path: &Path, text: &str) -> Outcome<AtomicMeasure> {
    let json: AtomicMeasureJson = parse(path, text)?;
    json.to_measure().map_err(|e| tagged(path, e))
}
