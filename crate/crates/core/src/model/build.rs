//! Convenience constructors for building programs in code.

use super::ids::{ClassId, ExcId, FieldId, MethodName};
use super::syntax::{ClassDef, InitType, Instr, MethodDef, Program};

impl MethodDef {
    /// A plain method with the safe default policy (`Init` everywhere).
    pub fn new(name: impl Into<MethodName>, instrs: Vec<Instr>) -> Self {
        Self {
            name: name.into(),
            instrs,
            handlers: Default::default(),
            pre: InitType::Init,
            post: InitType::Init,
            argtype: InitType::Init,
            rettype: InitType::Init,
            is_constructor: false,
        }
    }

    /// A constructor of `class` with the safe default policy.
    pub fn constructor(class: &ClassId, instrs: Vec<Instr>) -> Self {
        Self {
            name: MethodName::ctor(),
            instrs,
            handlers: Default::default(),
            pre: InitType::RawBot,
            post: InitType::Raw(class.clone()),
            argtype: InitType::Init,
            rettype: InitType::Init,
            is_constructor: true,
        }
    }

    pub fn with_pre(mut self, t: InitType) -> Self {
        self.pre = t;
        self
    }

    pub fn with_post(mut self, t: InitType) -> Self {
        self.post = t;
        self
    }

    pub fn with_argtype(mut self, t: InitType) -> Self {
        self.argtype = t;
        self
    }

    pub fn with_rettype(mut self, t: InitType) -> Self {
        self.rettype = t;
        self
    }

    pub fn with_handler(mut self, pc: usize, exc: &str, target: usize) -> Self {
        self.handlers.insert((pc, ExcId::new(exc)), target);
        self
    }
}

impl ClassDef {
    pub fn new(id: impl Into<ClassId>, super_class: Option<&str>, ctor: Vec<Instr>) -> Self {
        let id = id.into();
        let ctor = MethodDef::constructor(&id, ctor);
        Self { id, super_class: super_class.map(ClassId::new), fields: Vec::new(), methods: Default::default(), ctor }
    }

    pub fn with_ctor(mut self, ctor: MethodDef) -> Self {
        self.ctor = ctor;
        self
    }

    pub fn with_method(mut self, m: MethodDef) -> Self {
        self.methods.insert(m.name.clone(), m);
        self
    }

    pub fn with_field(mut self, f: &str) -> Self {
        self.fields.push(FieldId::new(f));
        self
    }
}

impl Program {
    pub fn new(main: impl Into<ClassId>) -> Self {
        Self { classes: Default::default(), main: main.into(), fields: Default::default() }
    }

    /// Adds a class; fields it declares default to `Init` unless already typed.
    pub fn with_class(mut self, c: ClassDef) -> Self {
        for f in &c.fields {
            self.fields.entry(f.clone()).or_insert(InitType::Init);
        }
        self.classes.insert(c.id.clone(), c);
        self
    }

    pub fn with_field_type(mut self, f: &str, t: InitType) -> Self {
        self.fields.insert(FieldId::new(f), t);
        self
    }
}
