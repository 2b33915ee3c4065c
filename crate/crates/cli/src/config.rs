use std::fmt;
use std::str::FromStr;

use equinuc_core::algebras::build_algebra;
use equinuc_core::{
    ActionDescriptor, AlgebraDescriptor, Certificate, FieldDescriptor, GroupDescriptor, JsonMatrix, ToleranceConfig,
};
use serde::{Deserialize, Serialize};

/// A configuration problem, located by a JSON pointer into the document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub pointer: String,
    pub message: String,
}

impl ConfigError {
    pub fn at(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pointer = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "config error at {pointer}: {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Structure,
    Compatibility,
    Expectation,
    NuclearityModule,
    NuclearityComodule,
    Normalization,
    DefectSweep,
    PdFunction,
    TraceProperty,
    LambdaCalculus,
    Certificates,
}

impl Task {
    pub const ALL: [Task; 11] = [
        Task::Structure,
        Task::Compatibility,
        Task::Expectation,
        Task::NuclearityModule,
        Task::NuclearityComodule,
        Task::Normalization,
        Task::DefectSweep,
        Task::PdFunction,
        Task::TraceProperty,
        Task::LambdaCalculus,
        Task::Certificates,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Structure => "structure",
            Task::Compatibility => "compatibility",
            Task::Expectation => "expectation",
            Task::NuclearityModule => "nuclearity-module",
            Task::NuclearityComodule => "nuclearity-comodule",
            Task::Normalization => "normalization",
            Task::DefectSweep => "defect-sweep",
            Task::PdFunction => "pd-function",
            Task::TraceProperty => "trace-property",
            Task::LambdaCalculus => "lambda-calculus",
            Task::Certificates => "certificates",
        }
    }
}

impl FromStr for Task {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| ConfigError::at("/tasks", format!("unknown task `{s}`")))
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The invariant state used by `pd-function` and `trace-property`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateDescriptor {
    NormalizedTrace,
    Density {
        matrix: JsonMatrix,
    },
    /// Values on the algebra basis, as `[re, im]` pairs.
    Values {
        values: Vec<[f64; 2]>,
    },
}

/// Elements of the crossed product on which factorization errors are measured.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestSet {
    /// `b_i · s` over the algebra basis and the group.
    #[default]
    Basis,
    /// Seeded random elements.
    Random { count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub identity_tol: Option<f64>,
    pub psd_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Pass,
    Fail,
    /// Validation must refuse the certificate (unbound names, malformed trees).
    Error,
}

/// A certificate checked by the `certificates` task against the standard
/// names bound for the configured system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateCase {
    pub name: String,
    pub certificate: Certificate,
    pub expect: Expectation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub group: GroupDescriptor,
    pub algebra: AlgebraDescriptor,
    #[serde(default = "trivial_action")]
    pub action: ActionDescriptor,
    #[serde(default)]
    pub state: Option<StateDescriptor>,
    #[serde(default)]
    pub field: Option<FieldDescriptor>,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    pub seed: u64,
    /// Tuples of element labels; defaults to the singletons over the field's
    /// support.
    #[serde(default)]
    pub window: Option<Vec<Vec<String>>>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub test_set: TestSet,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub include_pre_factor: bool,
    #[serde(default)]
    pub certificates: Vec<CertificateCase>,
}

fn trivial_action() -> ActionDescriptor {
    ActionDescriptor::Trivial
}

fn default_epsilon() -> f64 {
    1e-9
}

fn default_trials() -> usize {
    100
}

impl RunConfig {
    pub fn tolerance_config(&self) -> Result<ToleranceConfig, ConfigError> {
        let defaults = ToleranceConfig::default();
        ToleranceConfig::new(
            self.tolerances.identity_tol.unwrap_or(defaults.identity_tol),
            self.tolerances.psd_tol.unwrap_or(defaults.psd_tol),
        )
        .map_err(|e| ConfigError::at("/tolerances", e.to_string()))
    }

    /// Checks that do not need the algebraic objects built.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.tasks.is_empty() {
            return Err(ConfigError::at("/tasks", "at least one task is required"));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(ConfigError::at("/epsilon", "epsilon must be a nonnegative number"));
        }
        if self.trials == 0 {
            return Err(ConfigError::at("/trials", "trials must be positive"));
        }
        if let TestSet::Random { count: 0 } = self.test_set {
            return Err(ConfigError::at("/test_set/count", "the test set must be nonempty"));
        }
        self.tolerance_config()?;
        if let ActionDescriptor::Permutation { maps } = &self.action {
            let d = build_algebra(&self.algebra)
                .map_err(|e| ConfigError::at("/algebra", e.to_string()))?
                .ambient_dim();
            for (label, perm) in maps {
                if perm.len() != d {
                    return Err(ConfigError::at(
                        "/action/maps",
                        format!(
                            "permutation for element {label} has length {}, expected {d}",
                            perm.len()
                        ),
                    ));
                }
            }
        }
        if self.tasks.contains(&Task::DefectSweep) && !matches!(self.group, GroupDescriptor::Cyclic { .. }) {
            return Err(ConfigError::at("/tasks", "defect-sweep needs a cyclic group"));
        }
        Ok(())
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let mut pointer: String = e
            .path()
            .iter()
            .filter_map(|segment| {
                use serde_path_to_error::Segment;
                match segment {
                    Segment::Seq { index } => Some(format!("/{index}")),
                    Segment::Map { key } => Some(format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
                    Segment::Enum { .. } | Segment::Unknown => None,
                }
            })
            .collect();
        let message = e.inner().to_string();
        if let Some(field) = missing_field(&message) {
            pointer.push('/');
            pointer.push_str(field);
        }
        ConfigError::at(pointer, message)
    })?;
    config.validate()?;
    Ok(config)
}

fn missing_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("missing field `")?;
    rest.split('`').next()
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{"group":{"kind":"cyclic","n":2},"algebra":{"kind":"diagonal","dim":2},
        "action":{"kind":"permutation","maps":{"1":[1,0]}},"field":{"kind":"constant"},
        "tasks":["nuclearity-module"],"seed":42,"epsilon":1e-9}"#;

    #[test]
    fn parses_the_example() {
        let config = parse_config(EXAMPLE).unwrap();
        assert_eq!(config.tasks, vec![Task::NuclearityModule]);
        assert_eq!(config.seed, 42);
        assert_eq!(config.test_set, TestSet::Basis);
    }

    #[test]
    fn missing_seed_points_at_seed() {
        let text = EXAMPLE.replace(r#""seed":42,"#, "");
        assert_eq!(parse_config(&text).unwrap_err().pointer, "/seed");
    }

    #[test]
    fn short_permutations_point_at_the_maps() {
        let text = EXAMPLE.replace("[1,0]", "[1,0,2]");
        assert_eq!(parse_config(&text).unwrap_err().pointer, "/action/maps");
    }

    #[test]
    fn unknown_tasks_are_rejected() {
        let text = EXAMPLE.replace("nuclearity-module", "nuclearity");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.pointer, "/tasks/0");
        assert!("nuclearity".parse::<Task>().is_err());
        assert_eq!("defect-sweep".parse::<Task>().unwrap(), Task::DefectSweep);
    }

    #[test]
    fn other_schema_errors_carry_paths() {
        let text = EXAMPLE.replace(r#""epsilon":1e-9"#, r#""epsilon":"small""#);
        assert_eq!(parse_config(&text).unwrap_err().pointer, "/epsilon");
        let text = EXAMPLE.replace(r#""seed":42"#, r#""seed":42,"colour":1"#);
        assert!(parse_config(&text).is_err());
        let text = EXAMPLE.replace(r#""tasks":["nuclearity-module"]"#, r#""tasks":[]"#);
        assert_eq!(parse_config(&text).unwrap_err().pointer, "/tasks");
        assert!(parse_config("{not json").is_err());
    }
}
