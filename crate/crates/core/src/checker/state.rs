use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::model::{InitType, ModelResult, Program, VarId};

/// Types of all local variables at one program point.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeState {
    vars: BTreeMap<VarId, InitType>,
}

impl TypeState {
    /// Every variable in `vars` typed `Init`.
    pub fn all_init<'a>(vars: impl IntoIterator<Item = &'a VarId>) -> Self {
        Self { vars: vars.into_iter().map(|v| (v.clone(), InitType::Init)).collect() }
    }

    pub fn from_map(vars: BTreeMap<VarId, InitType>) -> Self {
        Self { vars }
    }

    /// Type of `v`; variables outside the domain hold `null` and are typed `Init`.
    pub fn get(&self, v: &VarId) -> &InitType {
        self.vars.get(v).unwrap_or(&InitType::Init)
    }

    pub fn set(&mut self, v: VarId, t: InitType) {
        self.vars.insert(v, t);
    }

    pub fn with(mut self, v: VarId, t: InitType) -> Self {
        self.set(v, t);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarId, &InitType)> {
        self.vars.iter()
    }

    pub fn domain(&self) -> BTreeSet<&VarId> {
        self.vars.keys().collect()
    }

    /// Pointwise `⊑`.
    pub fn le(&self, p: &Program, other: &TypeState) -> ModelResult<bool> {
        for v in self.vars.keys().chain(other.vars.keys()) {
            if !p.subtype(self.get(v), other.get(v))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Pointwise join.
    pub fn join(&self, p: &Program, other: &TypeState) -> ModelResult<TypeState> {
        let mut vars = self.vars.clone();
        for (v, t) in &other.vars {
            let joined = p.join(self.get(v), t)?;
            vars.insert(v.clone(), joined);
        }
        Ok(TypeState { vars })
    }

    /// Joins `other` into `self`; reports whether anything changed.
    pub fn join_in_place(&mut self, p: &Program, other: &TypeState) -> ModelResult<bool> {
        let mut changed = false;
        for (v, t) in &other.vars {
            let cur = self.get(v);
            let joined = p.join(cur, t)?;
            if &joined != cur || !self.vars.contains_key(v) {
                self.vars.insert(v.clone(), joined);
                changed = true;
            }
        }
        Ok(changed)
    }
}

impl fmt::Display for TypeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, t)) in self.vars.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}: {t}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for TypeState {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.vars.len()))?;
        for (v, t) in &self.vars {
            map.serialize_entry(v.as_str(), &t.to_string())?;
        }
        map.end()
    }
}

/// Fixpoint type states of one method, for every reachable program point.
pub type MethodTypeTable = BTreeMap<usize, TypeState>;
