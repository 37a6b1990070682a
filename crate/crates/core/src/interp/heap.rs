use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::rc::Rc;

use serde::Serialize;

use super::digest::digest;
use crate::model::{ClassId, FieldId, InitType, Program};

pub type Loc = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Value {
    Null,
    Loc(Loc),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => f.write_str("null"),
            Value::Loc(l) => write!(f, "@{l}"),
        }
    }
}

/// `[c, c_init, fields]`. `init_level = None` is the uninitialized tag ⊥.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct HeapObject {
    pub dyn_class: ClassId,
    pub init_level: Option<ClassId>,
    pub fields: BTreeMap<FieldId, Value>,
}

impl HeapObject {
    pub fn field(&self, f: &FieldId) -> Value {
        self.fields.get(f).copied().unwrap_or(Value::Null)
    }
}

impl fmt::Display for HeapObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = self.init_level.as_ref().map_or("⊥".to_string(), |c| c.to_string());
        write!(f, "[{}, {}", self.dyn_class, tag)?;
        for (name, v) in &self.fields {
            write!(f, ", {name}={v}")?;
        }
        f.write_str("]")
    }
}

/// Objects indexed by location. Locations are never freed, so indices are never reused.
///
/// Objects are shared between clones of a heap and copied on write. Each carries a digest
/// of its location and contents, and the heap keeps their sum, so hashing a heap and
/// finding the objects that differ between two heaps are cheap.
#[derive(Debug, Clone, Default, Serialize)]
#[serde(transparent)]
pub struct Heap {
    objects: Vec<Rc<HeapObject>>,
    #[serde(skip)]
    digests: Vec<u128>,
    #[serde(skip)]
    sum: u128,
}

impl PartialEq for Heap {
    fn eq(&self, other: &Self) -> bool {
        self.sum == other.sum && self.objects == other.objects
    }
}

impl Eq for Heap {}

impl Hash for Heap {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.objects.len().hash(state);
        self.sum.hash(state);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetInitError {
    Dangling(Loc),
    /// The tag was neither the class's parent nor already at or below the class.
    Order { found: Option<ClassId>, class: ClassId },
}

impl Heap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn get(&self, l: Loc) -> Option<&HeapObject> {
        self.objects.get(l).map(|o| &**o)
    }

    /// Changes the object at `l` in place and returns what `f` returns.
    pub fn update<R>(&mut self, l: Loc, f: impl FnOnce(&mut HeapObject) -> R) -> Option<R> {
        let o = Rc::make_mut(self.objects.get_mut(l)?);
        let r = f(o);
        let d = digest(&(l, &*o));
        self.sum = self.sum.wrapping_sub(self.digests[l]).wrapping_add(d);
        self.digests[l] = d;
        Some(r)
    }

    /// The digest of the object at `l`; equal digests mean equal objects.
    pub fn digest_at(&self, l: Loc) -> Option<u128> {
        self.digests.get(l).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Loc, &HeapObject)> {
        self.objects.iter().map(|o| &**o).enumerate()
    }

    /// A fresh `[c, ⊥, all fields null]`.
    pub fn alloc(&mut self, p: &Program, c: &ClassId) -> Loc {
        let fields = p.fields.keys().map(|f| (f.clone(), Value::Null)).collect();
        self.push(HeapObject { dyn_class: c.clone(), init_level: None, fields })
    }

    /// Pushes an arbitrary object; meant for building heaps in tests and enumerations.
    pub fn push(&mut self, o: HeapObject) -> Loc {
        let l = self.objects.len();
        let d = digest(&(l, &o));
        self.objects.push(Rc::new(o));
        self.digests.push(d);
        self.sum = self.sum.wrapping_add(d);
        l
    }

    /// Marks the object at `l` initialized up to `c`.
    ///
    /// The tag moves from `c.super` (⊥ for the root) to `c`. A tag that is already `c`
    /// or below it is left alone: an explicit `setinit` followed by the constructor's
    /// return, or a second `super(...)`, re-runs this on an object that is past `c`.
    pub fn set_init(&mut self, p: &Program, c: &ClassId, l: Loc) -> Result<(), SetInitError> {
        let o = self.objects.get(l).ok_or(SetInitError::Dangling(l))?;
        let parent = p.super_of(c);
        if o.init_level.as_ref() == parent {
            self.update(l, |o| o.init_level = Some(c.clone()));
            return Ok(());
        }
        if let Some(tag) = &o.init_level {
            if p.class_le(tag, c).unwrap_or(false) {
                return Ok(());
            }
        }
        Err(SetInitError::Order { found: o.init_level.clone(), class: c.clone() })
    }
}

/// The judgment `h ⊢ v : t`.
///
/// `null` has every type and every location has `Raw`. A location has `Raw(c)` when
/// every class above both its dynamic class and `c` is above its tag, and `Init` when
/// its tag is its dynamic class. Dangling locations have no type.
pub fn value_has_type(p: &Program, h: &Heap, v: Value, t: &InitType) -> bool {
    let l = match v {
        Value::Null => return true,
        Value::Loc(l) => l,
    };
    let Some(o) = h.get(l) else { return false };
    match t {
        InitType::RawBot => true,
        InitType::Init => o.init_level.as_ref() == Some(&o.dyn_class),
        InitType::Raw(c) => p
            .ancestors(&o.dyn_class)
            .filter(|c2| p.class_le(c, c2).unwrap_or(false))
            .all(|c2| o.init_level.as_ref().is_some_and(|tag| p.class_le(tag, c2).unwrap_or(false))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::testing::hierarchy;

    fn c(s: &str) -> ClassId {
        ClassId::new(s)
    }

    fn obj(class: &str, tag: Option<&str>) -> HeapObject {
        HeapObject { dyn_class: c(class), init_level: tag.map(c), fields: BTreeMap::new() }
    }

    fn abc() -> Program {
        hierarchy(&[("Object", None), ("A", Some("Object")), ("B", Some("A"))])
    }

    #[test]
    fn null_has_every_type() {
        let p = abc();
        for t in p.all_types() {
            assert!(value_has_type(&p, &Heap::new(), Value::Null, &t));
        }
    }

    #[test]
    fn fresh_object_is_only_raw() {
        let p = abc();
        let mut h = Heap::new();
        let l = h.alloc(&p, &c("B"));
        assert_eq!(h.len(), 1);
        assert!(value_has_type(&p, &h, Value::Loc(l), &InitType::RawBot));
        assert!(!value_has_type(&p, &h, Value::Loc(l), &InitType::raw("Object")));
        assert!(!value_has_type(&p, &h, Value::Loc(l), &InitType::Init));
        assert_ne!(h.alloc(&p, &c("B")), l);
    }

    #[test]
    fn tags_decide_raw_and_init() {
        let p = abc();
        let mut h = Heap::new();
        let half = h.push(obj("B", Some("A")));
        let full = h.push(obj("B", Some("B")));
        assert!(value_has_type(&p, &h, Value::Loc(half), &InitType::raw("A")));
        assert!(!value_has_type(&p, &h, Value::Loc(half), &InitType::raw("B")));
        assert!(!value_has_type(&p, &h, Value::Loc(half), &InitType::Init));
        assert!(value_has_type(&p, &h, Value::Loc(full), &InitType::Init));
        assert!(!value_has_type(&p, &h, Value::Loc(7), &InitType::RawBot));
    }

    #[test]
    fn set_init_follows_constructor_order() {
        let p = abc();
        let mut h = Heap::new();
        let l = h.alloc(&p, &c("B"));
        assert!(matches!(h.set_init(&p, &c("A"), l), Err(SetInitError::Order { .. })));
        h.set_init(&p, &c("Object"), l).unwrap();
        h.set_init(&p, &c("A"), l).unwrap();
        assert_eq!(h.get(l).unwrap().init_level, Some(c("A")));
        h.set_init(&p, &c("B"), l).unwrap();
        // Already past A: no change.
        h.set_init(&p, &c("A"), l).unwrap();
        assert_eq!(h.get(l).unwrap().init_level, Some(c("B")));
    }

    #[test]
    fn set_init_on_root() {
        let p = abc();
        let mut h = Heap::new();
        let l = h.alloc(&p, &c("Object"));
        h.set_init(&p, &c("Object"), l).unwrap();
        assert!(value_has_type(&p, &h, Value::Loc(l), &InitType::Init));
    }

    #[test]
    fn digests_follow_contents() {
        use crate::interp::digest::digest;
        let p = abc();
        let mut a = Heap::new();
        let l = a.alloc(&p, &c("B"));
        a.set_init(&p, &c("Object"), l).unwrap();
        let mut b = Heap::new();
        b.push(obj("B", Some("Object")));
        assert_eq!(a, b);
        assert_eq!(digest(&a), digest(&b));
        let before = a.digest_at(l);
        a.update(l, |o| o.fields.insert(FieldId::new("f"), Value::Null));
        assert_ne!(a.digest_at(l), before);
        assert_ne!(a, b);
        a.update(l, |o| o.fields.clear());
        assert_eq!((a.digest_at(l), digest(&a)), (before, digest(&b)));
    }
}
