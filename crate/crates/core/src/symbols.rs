use std::fmt;

use serde::{Serialize, Serializer};

/// Spacetime point label such as `x1` or `y`. Distinct labels are assumed non-coincident.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(String);

/// Abstract Lorentz index symbol. Names starting with `_` are reserved for canonical dummies.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Index(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Index {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn dummy(k: usize) -> Self {
        Self(format!("_{k}"))
    }

    pub fn is_dummy(&self) -> bool {
        self.0.starts_with('_')
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

impl From<&str> for Index {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl Serialize for Index {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// Renders a list of indices as `[mu,nu]`.
pub(crate) fn fmt_indices(indices: &[Index]) -> String {
    let names: Vec<&str> = indices.iter().map(Index::as_str).collect();
    format!("[{}]", names.join(","))
}
