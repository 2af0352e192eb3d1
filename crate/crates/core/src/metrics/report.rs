use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Why an `aeff` value is not an ordinary ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AeffFlag {
    /// No priors or experience but a positive edit distance.
    Infinite,
    /// Numerator and denominator both vanish; reported as 0.
    Degenerate,
}

impl AeffFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            AeffFlag::Infinite => "aeff_infinite",
            AeffFlag::Degenerate => "aeff_degenerate",
        }
    }
}

/// Adaptation difficulty; serialized as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aeff {
    pub value: f64,
    pub flag: Option<AeffFlag>,
}

impl Aeff {
    pub fn finite(value: f64) -> Self {
        Self { value, flag: None }
    }

    pub fn infinite() -> Self {
        Self {
            value: f64::INFINITY,
            flag: Some(AeffFlag::Infinite),
        }
    }

    pub fn degenerate() -> Self {
        Self {
            value: 0.0,
            flag: Some(AeffFlag::Degenerate),
        }
    }
}

impl Serialize for Aeff {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_value(&self.value, s)
    }
}

impl<'de> Deserialize<'de> for Aeff {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let value = deserialize_value(d)?;
        Ok(if value.is_infinite() {
            Aeff::infinite()
        } else {
            Aeff::finite(value)
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NumOrInf {
    Num(f64),
    Tag(String),
}

/// A non-negative number that may be `+∞`, written as `"inf"`.
pub(crate) fn serialize_value<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

pub(crate) fn deserialize_value<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    match NumOrInf::deserialize(d)? {
        NumOrInf::Num(v) => Ok(v),
        NumOrInf::Tag(t) if t == "inf" => Ok(f64::INFINITY),
        NumOrInf::Tag(t) => Err(serde::de::Error::custom(format!(
            "expected a number or \"inf\", got {t:?}"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RedEstimators {
    pub conditional: f64,
    pub edit_script: Option<f64>,
}

/// Metrics of one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub id: String,
    pub theta: f64,
    pub omega: f64,
    pub red: f64,
    pub red_estimators: RedEstimators,
    pub pd: f64,
    pub eeff: f64,
    pub steps: Vec<f64>,
    pub aeff: Aeff,
    pub flags: Vec<String>,
}

/// The experiment output record.
///
/// `details` carries scenario-specific diagnostics (fit totals, detector
/// output, code lengths); it is omitted when empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub backend: String,
    pub config_hash: String,
    pub tasks: Vec<TaskReport>,
    #[serde(
        serialize_with = "serialize_value",
        deserialize_with = "deserialize_value"
    )]
    pub aggregate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl MetricReport {
    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
