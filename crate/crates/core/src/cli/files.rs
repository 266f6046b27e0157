//! JSON file formats: system descriptions, control lists, density matrices and
//! the emitted reports.

use serde::{Deserialize, Serialize};

use crate::criteria::{ControllabilityReport, Tolerances};
use crate::functionals::{FunctionalFamily, ValueSet};
use crate::linalg::{ComplexMatrix, HermitianOperator};
use crate::simulator::{PiecewiseConstantControl, Segment};
use crate::system::ControlSystem;

/// Grid size used when `value_set` is given as an interval without `points`.
pub const DEFAULT_GRID_POINTS: usize = 33;

/// A validation failure tied to a JSON field path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl ToString) -> Self {
        Self {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            re: m.re_rows(),
            im: m.im_rows(),
        }
    }

    /// Checks shape `n×n` for both parts and builds the matrix.
    pub fn to_matrix(&self, n: usize, field: &str) -> Result<ComplexMatrix, FieldError> {
        for (part, rows) in [("re", &self.re), ("im", &self.im)] {
            if rows.len() != n {
                return Err(FieldError::new(
                    format!("{field}.{part}"),
                    format!("has {} rows, expected {n}", rows.len()),
                ));
            }
            for (r, row) in rows.iter().enumerate() {
                if row.len() != n {
                    return Err(FieldError::new(
                        format!("{field}.{part}[{r}]"),
                        format!("has {} entries, expected {n}", row.len()),
                    ));
                }
            }
        }
        ComplexMatrix::from_re_im(&self.re, &self.im).map_err(|e| FieldError::new(field, e))
    }

    fn to_hermitian(&self, n: usize, field: &str) -> Result<HermitianOperator, FieldError> {
        HermitianOperator::new(self.to_matrix(n, field)?).map_err(|e| FieldError::new(field, e))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionalsJson {
    Monomial {
        degree: usize,
    },
    /// `values[k][j]` is functional `k` at the `j`-th value-set point as written
    /// (interval grids are ascending).
    Sampled {
        values: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueSetJson {
    Points(Vec<f64>),
    Interval {
        min: f64,
        max: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<usize>,
    },
}

impl ValueSetJson {
    pub fn to_value_set(&self) -> Result<ValueSet, FieldError> {
        match self {
            Self::Points(p) => ValueSet::new(p.clone()),
            Self::Interval { min, max, points } => {
                ValueSet::uniform_grid(*min, *max, points.unwrap_or(DEFAULT_GRID_POINTS))
            }
        }
        .map_err(|e| FieldError::new("value_set", e))
    }
}

/// Input system description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub n: usize,
    pub h0: MatrixJson,
    pub mu: Vec<MatrixJson>,
    pub functionals: FunctionalsJson,
    pub value_set: ValueSetJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self, FieldError> {
        serde_json::from_str(text).map_err(|e| FieldError::new("<document>", e))
    }

    pub fn from_system(sys: &ControlSystem) -> Self {
        let functionals = match sys.family() {
            FunctionalFamily::Monomial { degree } => FunctionalsJson::Monomial { degree: *degree },
            FunctionalFamily::Sampled { values, .. } => FunctionalsJson::Sampled {
                values: values.clone(),
            },
        };
        Self {
            n: sys.n(),
            h0: MatrixJson::from_matrix(sys.h0().matrix()),
            mu: sys
                .mus()
                .iter()
                .map(|m| MatrixJson::from_matrix(m.matrix()))
                .collect(),
            functionals,
            value_set: ValueSetJson::Points(sys.value_set().points().to_vec()),
            tolerances: None,
        }
    }

    /// Sampled rows follow the value-set points as written; reorder them to
    /// the sorted order used by [`ValueSet`].
    fn values_in_sorted_order(&self, values: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let ValueSetJson::Points(points) = &self.value_set else {
            return values.to_vec();
        };
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
        values
            .iter()
            .map(|row| {
                if row.len() == points.len() {
                    order.iter().map(|&j| row[j]).collect()
                } else {
                    row.clone()
                }
            })
            .collect()
    }

    pub fn to_system(&self) -> Result<ControlSystem, FieldError> {
        if self.n == 0 {
            return Err(FieldError::new("n", "must be positive"));
        }
        let h0 = self.h0.to_hermitian(self.n, "h0")?;
        if self.mu.is_empty() {
            return Err(FieldError::new(
                "mu",
                "at least one coupling operator is required",
            ));
        }
        let mus = self
            .mu
            .iter()
            .enumerate()
            .map(|(k, m)| m.to_hermitian(self.n, &format!("mu[{k}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let v = self.value_set.to_value_set()?;
        let fam = match &self.functionals {
            FunctionalsJson::Monomial { degree } => FunctionalFamily::monomial(*degree),
            FunctionalsJson::Sampled { values } => {
                FunctionalFamily::sampled(&v, self.values_in_sorted_order(values))
            }
        }
        .map_err(|e| FieldError::new("functionals", e))?;
        if fam.len() != mus.len() {
            return Err(FieldError::new(
                "functionals",
                format!(
                    "{} functionals for {} coupling operators in mu",
                    fam.len(),
                    mus.len()
                ),
            ));
        }
        ControlSystem::new(h0, mus, fam, v).map_err(|e| FieldError::new("<system>", e))
    }
}

/// Parses a control file: a JSON list of `{duration, value}`.
pub fn parse_control(text: &str) -> Result<PiecewiseConstantControl, FieldError> {
    let segments: Vec<Segment> = serde_json::from_str(text).map_err(|e| FieldError::new("control", e))?;
    PiecewiseConstantControl::new(segments).map_err(|e| FieldError::new("control", e))
}

/// Machine-readable analysis report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportFile {
    pub tool: String,
    pub version: String,
    pub input: String,
    pub input_digest: String,
    pub wall_time_seconds: f64,
    pub report: ControllabilityReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub populations: Vec<f64>,
    pub norm_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub eigenvalue_drift: f64,
    pub trace_drift: f64,
}

/// Machine-readable simulation output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationFile {
    pub tool: String,
    pub version: String,
    pub input: String,
    pub input_digest: String,
    pub wall_time_seconds: f64,
    pub segments: usize,
    pub total_time: f64,
    pub propagator: MatrixJson,
    pub unitarity_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_state: Option<StateJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_density: Option<DensityJson>,
}

struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }
}

/// Serializes with every float written as a 17-significant-digit decimal.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits);
    value.serialize(&mut ser).expect("in-memory serialization");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SZ_SX: &str = r#"{
        "n": 2,
        "h0": {"re": [[1, 0], [0, -1]], "im": [[0, 0], [0, 0]]},
        "mu": [{"re": [[0, 1], [1, 0]], "im": [[0, 0], [0, 0]]}],
        "functionals": {"type": "monomial", "degree": 1},
        "value_set": [-1, 0, 1]
    }"#;

    #[test]
    fn parses_valid_system() {
        let sys = SystemFile::parse(SZ_SX).unwrap().to_system().unwrap();
        assert_eq!(sys.n(), 2);
        assert_eq!(sys.value_set().points(), &[-1.0, 0.0, 1.0]);
    }

    #[test]
    fn field_level_errors() {
        let bad = SZ_SX.replace(r#""re": [[1, 0], [0, -1]]"#, r#""re": [[1, 5], [0, -1]]"#);
        let err = SystemFile::parse(&bad).unwrap().to_system().unwrap_err();
        assert_eq!(err.field, "h0");
        assert!(err.message.contains("Hermitian"));

        let bad = SZ_SX.replace(r#"[[0, 1], [1, 0]]"#, r#"[[0, 1, 2], [1, 0]]"#);
        let err = SystemFile::parse(&bad).unwrap().to_system().unwrap_err();
        assert_eq!(err.field, "mu[0].re[0]");

        let bad = SZ_SX.replace(r#""degree": 1"#, r#""degree": 2"#);
        assert_eq!(
            SystemFile::parse(&bad).unwrap().to_system().unwrap_err().field,
            "functionals"
        );

        assert!(SystemFile::parse("{").is_err());
        assert!(SystemFile::parse(&SZ_SX.replace("\"n\"", "\"dim\"")).is_err());
    }

    #[test]
    fn interval_value_set_expands_to_grid() {
        let s = SZ_SX.replace("[-1, 0, 1]", r#"{"min": -1, "max": 1}"#);
        let sys = SystemFile::parse(&s).unwrap().to_system().unwrap();
        assert_eq!(sys.value_set().len(), DEFAULT_GRID_POINTS);
        let s = SZ_SX.replace("[-1, 0, 1]", r#"{"min": 0, "max": 2, "points": 5}"#);
        let sys = SystemFile::parse(&s).unwrap().to_system().unwrap();
        assert_eq!(sys.value_set().points(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn sampled_rows_follow_written_point_order() {
        let s = SZ_SX.replace("[-1, 0, 1]", "[1, -1, 0]").replace(
            r#"{"type": "monomial", "degree": 1}"#,
            r#"{"type": "sampled", "values": [[10, -10, 0]]}"#,
        );
        let sys = SystemFile::parse(&s).unwrap().to_system().unwrap();
        assert_eq!(sys.family().evaluate(1.0).unwrap(), vec![10.0]);
        assert_eq!(sys.family().evaluate(-1.0).unwrap(), vec![-10.0]);
    }

    #[test]
    fn control_parsing() {
        let c = parse_control(r#"[{"duration": 1.5, "value": 0.5}]"#).unwrap();
        assert_eq!(c.len(), 1);
        assert!(parse_control("[]").unwrap().is_empty());
        assert!(parse_control(r#"[{"duration": -1, "value": 0}]"#).is_err());
        assert!(parse_control(r#"{"duration": 1}"#).is_err());
    }

    #[test]
    fn seventeen_digit_floats() {
        assert_eq!(
            to_json_string(&vec![0.1, 1.0]),
            "[1.0000000000000001e-1,1.0000000000000000e0]"
        );
        assert_eq!(to_json_string(&f64::NAN), "null");
    }
}
