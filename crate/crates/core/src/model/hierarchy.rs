//! Class hierarchy queries and the initialization-type lattice.

use thiserror::Error;

use super::ids::{ClassId, MethodName, MethodRef};
use super::syntax::{ClassDef, InitType, MethodDef, Program};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("undeclared class `{0}`")]
    UndeclaredClass(ClassId),
}

pub type ModelResult<T> = Result<T, ModelError>;

impl Program {
    pub fn class(&self, c: &ClassId) -> ModelResult<&ClassDef> {
        self.classes.get(c).ok_or_else(|| ModelError::UndeclaredClass(c.clone()))
    }

    pub fn super_of(&self, c: &ClassId) -> Option<&ClassId> {
        self.classes.get(c).and_then(|cd| cd.super_class.as_ref())
    }

    /// `c` followed by its ancestors, nearest first. Stops on a cycle or an undeclared super.
    pub fn ancestors<'a>(&'a self, c: &'a ClassId) -> impl Iterator<Item = &'a ClassId> + 'a {
        let limit = self.classes.len() + 1;
        std::iter::successors(Some(c), move |cur| self.super_of(cur)).take(limit)
    }

    /// The reflexive-transitive closure of `super`: `c1 ⪯ c2`.
    pub fn class_le(&self, c1: &ClassId, c2: &ClassId) -> ModelResult<bool> {
        self.class(c1)?;
        self.class(c2)?;
        Ok(self.ancestors(c1).any(|a| a == c2))
    }

    /// `Raw(c.super)`, with the root's absent super read as `RawBot`.
    pub fn raw_super(&self, c: &ClassId) -> InitType {
        match self.super_of(c) {
            Some(s) => InitType::Raw(s.clone()),
            None => InitType::RawBot,
        }
    }

    /// Subtyping: `Init ⊑ Raw(c) ⊑ Raw(c') ⊑ RawBot` when `c ⪯ c'`.
    pub fn subtype(&self, t1: &InitType, t2: &InitType) -> ModelResult<bool> {
        use InitType::*;
        Ok(match (t1, t2) {
            (Init, Raw(c)) => {
                self.class(c)?;
                true
            }
            (Raw(c), RawBot) => {
                self.class(c)?;
                true
            }
            (Init, _) | (_, RawBot) => true,
            (Raw(a), Raw(b)) => self.class_le(a, b)?,
            (Raw(c), Init) => {
                self.class(c)?;
                false
            }
            (RawBot, _) => false,
        })
    }

    /// Nearest class that is an ancestor of both arguments.
    pub fn common_ancestor(&self, c1: &ClassId, c2: &ClassId) -> ModelResult<Option<ClassId>> {
        self.class(c1)?;
        self.class(c2)?;
        let left: Vec<&ClassId> = self.ancestors(c1).collect();
        Ok(self.ancestors(c2).find(|a| left.contains(a)).cloned())
    }

    /// Least upper bound under `⊑`.
    pub fn join(&self, t1: &InitType, t2: &InitType) -> ModelResult<InitType> {
        use InitType::*;
        Ok(match (t1, t2) {
            (RawBot, _) | (_, RawBot) => RawBot,
            (Init, t) | (t, Init) => t.clone(),
            (Raw(a), Raw(b)) => match self.common_ancestor(a, b)? {
                Some(c) => Raw(c),
                None => RawBot,
            },
        })
    }

    /// Dynamic dispatch: the first class among `c` and its ancestors that declares `m`.
    pub fn lookup_ref(&self, c: &ClassId, m: &MethodName) -> Option<MethodRef> {
        self.ancestors(c)
            .find(|a| self.classes.get(*a).is_some_and(|cd| cd.methods.contains_key(m)))
            .map(|a| MethodRef::new(a.clone(), m.clone()))
    }

    pub fn lookup(&self, c: &ClassId, m: &MethodName) -> Option<&MethodDef> {
        self.lookup_ref(c, m).and_then(|r| self.method(&r))
    }

    /// The method declared by `r.class` (constructor for `init`).
    pub fn method(&self, r: &MethodRef) -> Option<&MethodDef> {
        let cd = self.classes.get(&r.class)?;
        if r.is_ctor() {
            Some(&cd.ctor)
        } else {
            cd.methods.get(&r.name)
        }
    }

    /// Every method of the program, constructors included, in a stable order.
    pub fn method_refs(&self) -> Vec<MethodRef> {
        let mut out = Vec::new();
        for (c, cd) in &self.classes {
            out.push(MethodRef::ctor(c.clone()));
            out.extend(cd.methods.keys().map(|m| MethodRef::new(c.clone(), m.clone())));
        }
        out
    }

    pub fn roots(&self) -> Vec<&ClassId> {
        self.classes.values().filter(|cd| cd.super_class.is_none()).map(|cd| &cd.id).collect()
    }

    /// All declared classes `d` with `d ⪯ c`.
    pub fn subclasses<'a>(&'a self, c: &'a ClassId) -> impl Iterator<Item = &'a ClassId> + 'a {
        self.classes.keys().filter(move |d| self.ancestors(d).any(|a| a == c))
    }

    /// Every element of the type lattice over this program's classes.
    pub fn all_types(&self) -> Vec<InitType> {
        let mut out = vec![InitType::Init];
        out.extend(self.classes.keys().cloned().map(InitType::Raw));
        out.push(InitType::RawBot);
        out
    }

    /// Length of the longest super chain.
    pub fn depth(&self) -> usize {
        self.classes.keys().map(|c| self.ancestors(c).count()).max().unwrap_or(0)
    }
}
