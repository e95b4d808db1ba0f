//! Exact values, subsets, partial functions and their JSON form.

mod rational;
mod set;

pub use rational::{rat, ParseRationalError, Rational};
pub use set::{set, submasks, SetPoint};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum GroundError {
    #[error("duplicate point {0}")]
    DuplicatePoint(String),
    #[error("element index {index} out of range for ground set of size {m}")]
    IndexOutOfRange { index: usize, m: usize },
    #[error(transparent)]
    MalformedRational(#[from] ParseRationalError),
    #[error("negative value {value} at {point} is not allowed for class {class}")]
    NegativeValueForClass { point: String, value: Rational, class: &'static str },
    #[error("value {value} at {point} must be positive")]
    ValueNotPositive { point: String, value: Rational },
    #[error("set {0:?} is not strictly increasing")]
    UnsortedSet(Vec<usize>),
    #[error("point has {got} coordinates, expected {expected}")]
    WrongDimension { got: usize, expected: usize },
    #[error("table has {got} entries, expected {expected}")]
    WrongTableSize { got: usize, expected: usize },
    #[error("ground set size {0} exceeds the table limit of {MAX_TABLE_M}")]
    TableTooLarge(usize),
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("document has neither an \"m\" nor a \"dim\" key")]
    UnknownDocument,
}

/// Codomain policy of a function class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueClass {
    Subadditive,
    Xos,
    Submodular,
    Convex,
}

impl ValueClass {
    pub fn name(self) -> &'static str {
        match self {
            ValueClass::Subadditive => "subadditive",
            ValueClass::Xos => "xos",
            ValueClass::Submodular => "submodular",
            ValueClass::Convex => "convex",
        }
    }

    pub fn requires_nonnegative(self) -> bool {
        matches!(self, ValueClass::Subadditive | ValueClass::Xos)
    }
}

/// Finitely many distinct `(subset, value)` pairs over the ground set `{0..m}`.
#[derive(Clone, Debug)]
pub struct PartialSetFunction {
    m: usize,
    points: Vec<(SetPoint, Rational)>,
    index: HashMap<SetPoint, usize>,
}

impl PartialEq for PartialSetFunction {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.points == other.points
    }
}

impl Eq for PartialSetFunction {}

impl PartialSetFunction {
    pub fn new(m: usize, points: Vec<(SetPoint, Rational)>) -> Result<Self, GroundError> {
        let mut index = HashMap::with_capacity(points.len());
        for (k, (s, _)) in points.iter().enumerate() {
            if !s.within(m) {
                return Err(GroundError::IndexOutOfRange { index: s.bound() - 1, m });
            }
            if index.insert(s.clone(), k).is_some() {
                return Err(GroundError::DuplicatePoint(s.to_string()));
            }
        }
        Ok(PartialSetFunction { m, points, index })
    }

    /// Builds from `(elements, value)` literals; panics on invalid input.
    pub fn from_literal(m: usize, points: &[(&[usize], Rational)]) -> Self {
        let pts = points.iter().map(|(s, v)| (set(s), v.clone())).collect();
        PartialSetFunction::new(m, pts).expect("invalid literal partial function")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(SetPoint, Rational)] {
        &self.points
    }

    pub fn set_at(&self, i: usize) -> &SetPoint {
        &self.points[i].0
    }

    pub fn value_at(&self, i: usize) -> &Rational {
        &self.points[i].1
    }

    pub fn domain(&self) -> impl Iterator<Item = &SetPoint> {
        self.points.iter().map(|(s, _)| s)
    }

    pub fn position(&self, s: &SetPoint) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn get(&self, s: &SetPoint) -> Option<&Rational> {
        self.position(s).map(|i| &self.points[i].1)
    }

    pub fn contains(&self, s: &SetPoint) -> bool {
        self.index.contains_key(s)
    }

    /// Every value multiplied by `c`.
    pub fn scaled(&self, c: &Rational) -> Self {
        let pts = self.points.iter().map(|(s, v)| (s.clone(), v * c)).collect();
        PartialSetFunction::new(self.m, pts).expect("scaling keeps the domain valid")
    }

    /// Checks the sign policy of `class`.
    pub fn check_class(&self, class: ValueClass) -> Result<(), GroundError> {
        if class.requires_nonnegative() {
            if let Some((s, v)) = self.points.iter().find(|(_, v)| v.is_negative()) {
                return Err(GroundError::NegativeValueForClass {
                    point: s.to_string(),
                    value: v.clone(),
                    class: class.name(),
                });
            }
        }
        Ok(())
    }

    pub fn check_positive(&self) -> Result<(), GroundError> {
        match self.points.iter().find(|(_, v)| !v.is_positive()) {
            Some((s, v)) => Err(GroundError::ValueNotPositive {
                point: s.to_string(),
                value: v.clone(),
            }),
            None => Ok(()),
        }
    }
}

/// Finitely many distinct `(vector, value)` pairs in `Q^dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexPartialFunction {
    dim: usize,
    points: Vec<(Vec<Rational>, Rational)>,
}

impl ConvexPartialFunction {
    pub fn new(dim: usize, points: Vec<(Vec<Rational>, Rational)>) -> Result<Self, GroundError> {
        let mut seen = std::collections::HashSet::with_capacity(points.len());
        for (x, _) in &points {
            if x.len() != dim {
                return Err(GroundError::WrongDimension { got: x.len(), expected: dim });
            }
            if !seen.insert(x) {
                return Err(GroundError::DuplicatePoint(format_vector(x)));
            }
        }
        Ok(ConvexPartialFunction { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(Vec<Rational>, Rational)] {
        &self.points
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        ConvexPartialFunction {
            dim: self.dim,
            points: self.points.iter().map(|(x, v)| (x.clone(), v * c)).collect(),
        }
    }

    pub fn with_values(&self, values: Vec<Rational>) -> Self {
        assert_eq!(values.len(), self.points.len());
        ConvexPartialFunction {
            dim: self.dim,
            points: self.points.iter().zip(values).map(|((x, _), v)| (x.clone(), v)).collect(),
        }
    }

    pub fn check_positive(&self) -> Result<(), GroundError> {
        match self.points.iter().find(|(_, v)| !v.is_positive()) {
            Some((x, v)) => Err(GroundError::ValueNotPositive {
                point: format_vector(x),
                value: v.clone(),
            }),
            None => Ok(()),
        }
    }
}

pub fn format_vector(x: &[Rational]) -> String {
    let parts: Vec<String> = x.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Largest ground set for which complete tables are accepted.
pub const MAX_TABLE_M: usize = 20;

/// A total set function given by all `2^m` values, indexed by bitmask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullTable {
    m: usize,
    values: Vec<Rational>,
}

impl FullTable {
    pub fn new(m: usize, values: Vec<Rational>) -> Result<Self, GroundError> {
        if m > MAX_TABLE_M {
            return Err(GroundError::TableTooLarge(m));
        }
        if values.len() != 1 << m {
            return Err(GroundError::WrongTableSize { got: values.len(), expected: 1 << m });
        }
        Ok(FullTable { m, values })
    }

    pub fn from_fn(m: usize, f: impl Fn(u64) -> Rational) -> Result<Self, GroundError> {
        if m > MAX_TABLE_M {
            return Err(GroundError::TableTooLarge(m));
        }
        FullTable::new(m, (0..1u64 << m).map(f).collect())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn get(&self, mask: u64) -> &Rational {
        &self.values[mask as usize]
    }

    pub fn set(&mut self, mask: u64, v: Rational) {
        self.values[mask as usize] = v;
    }

    pub fn eval(&self, s: &SetPoint) -> &Rational {
        self.get(s.mask())
    }

    /// Every subset pinned to its table value.
    pub fn to_partial(&self) -> PartialSetFunction {
        let pts = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| (SetPoint::from_mask(k as u64), v.clone()))
            .collect();
        PartialSetFunction::new(self.m, pts).expect("table subsets are distinct")
    }

    pub fn check_class(&self, class: ValueClass) -> Result<(), GroundError> {
        if class.requires_nonnegative() {
            if let Some(k) = self.values.iter().position(|v| v.is_negative()) {
                return Err(GroundError::NegativeValueForClass {
                    point: SetPoint::from_mask(k as u64).to_string(),
                    value: self.values[k].clone(),
                    class: class.name(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct SetPointDoc {
    set: Vec<usize>,
    value: String,
}

#[derive(Serialize, Deserialize)]
struct SetFunctionDoc {
    m: usize,
    points: Vec<SetPointDoc>,
}

#[derive(Serialize, Deserialize)]
struct ConvexPointDoc {
    x: Vec<String>,
    value: String,
}

#[derive(Serialize, Deserialize)]
struct ConvexDoc {
    dim: usize,
    points: Vec<ConvexPointDoc>,
}

#[derive(Serialize, Deserialize)]
struct TableDoc {
    m: usize,
    values: Vec<String>,
}

/// Result of parsing an interchange document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartialFunction {
    Set(PartialSetFunction),
    Convex(ConvexPartialFunction),
}

fn parse_rational(s: &str) -> Result<Rational, GroundError> {
    Ok(s.parse::<Rational>()?)
}

pub(crate) fn strict_set(elems: Vec<usize>, m: usize) -> Result<SetPoint, GroundError> {
    if elems.windows(2).any(|w| w[0] >= w[1]) {
        return Err(GroundError::UnsortedSet(elems));
    }
    if let Some(&bad) = elems.iter().find(|&&e| e >= m) {
        return Err(GroundError::IndexOutOfRange { index: bad, m });
    }
    Ok(SetPoint::from_elements(elems))
}

fn set_function_from_doc(doc: SetFunctionDoc) -> Result<PartialSetFunction, GroundError> {
    let mut points = Vec::with_capacity(doc.points.len());
    for p in doc.points {
        points.push((strict_set(p.set, doc.m)?, parse_rational(&p.value)?));
    }
    PartialSetFunction::new(doc.m, points)
}

fn convex_from_doc(doc: ConvexDoc) -> Result<ConvexPartialFunction, GroundError> {
    let mut points = Vec::with_capacity(doc.points.len());
    for p in doc.points {
        let x = p.x.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>()?;
        points.push((x, parse_rational(&p.value)?));
    }
    ConvexPartialFunction::new(doc.dim, points)
}

/// Parses either document kind; set functions carry `"m"`, convex ones `"dim"`.
pub fn parse_partial_function(bytes: &[u8]) -> Result<PartialFunction, GroundError> {
    let raw: serde_json::Value = serde_json::from_slice(bytes)?;
    if raw.get("m").is_some() {
        let doc: SetFunctionDoc = serde_json::from_value(raw)?;
        Ok(PartialFunction::Set(set_function_from_doc(doc)?))
    } else if raw.get("dim").is_some() {
        let doc: ConvexDoc = serde_json::from_value(raw)?;
        Ok(PartialFunction::Convex(convex_from_doc(doc)?))
    } else {
        Err(GroundError::UnknownDocument)
    }
}

/// Parses a set-function document and applies the sign policy of `class`.
pub fn parse_set_function(bytes: &[u8], class: ValueClass) -> Result<PartialSetFunction, GroundError> {
    let doc: SetFunctionDoc = serde_json::from_slice(bytes)?;
    let h = set_function_from_doc(doc)?;
    h.check_class(class)?;
    Ok(h)
}

pub fn parse_convex_function(bytes: &[u8]) -> Result<ConvexPartialFunction, GroundError> {
    let doc: ConvexDoc = serde_json::from_slice(bytes)?;
    convex_from_doc(doc)
}

pub fn parse_full_table(bytes: &[u8]) -> Result<FullTable, GroundError> {
    let doc: TableDoc = serde_json::from_slice(bytes)?;
    if doc.m > MAX_TABLE_M {
        return Err(GroundError::TableTooLarge(doc.m));
    }
    let values = doc.values.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>()?;
    FullTable::new(doc.m, values)
}

/// Canonical JSON for the interchange types.
pub trait ToJson {
    fn to_json_value(&self) -> serde_json::Value;

    fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }
}

impl ToJson for PartialSetFunction {
    fn to_json_value(&self) -> serde_json::Value {
        let doc = SetFunctionDoc {
            m: self.m,
            points: self
                .points
                .iter()
                .map(|(s, v)| SetPointDoc { set: s.to_vec(), value: v.to_string() })
                .collect(),
        };
        serde_json::to_value(doc).expect("plain data serializes")
    }
}

impl ToJson for ConvexPartialFunction {
    fn to_json_value(&self) -> serde_json::Value {
        let doc = ConvexDoc {
            dim: self.dim,
            points: self
                .points
                .iter()
                .map(|(x, v)| ConvexPointDoc {
                    x: x.iter().map(|c| c.to_string()).collect(),
                    value: v.to_string(),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("plain data serializes")
    }
}

impl ToJson for PartialFunction {
    fn to_json_value(&self) -> serde_json::Value {
        match self {
            PartialFunction::Set(h) => h.to_json_value(),
            PartialFunction::Convex(c) => c.to_json_value(),
        }
    }
}

impl ToJson for FullTable {
    fn to_json_value(&self) -> serde_json::Value {
        let doc = TableDoc { m: self.m, values: self.values.iter().map(|v| v.to_string()).collect() };
        serde_json::to_value(doc).expect("plain data serializes")
    }
}

impl ToJson for Rational {
    fn to_json_value(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }
}
