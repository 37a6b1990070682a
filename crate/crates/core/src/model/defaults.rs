//! Programs with optional annotations, and the safe-by-default completion.

use std::collections::BTreeMap;

use super::ids::{ClassId, FieldId, MethodName};
use super::syntax::{ClassDef, Handlers, InitType, Instr, MethodDef, Program};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialMethod {
    pub name: MethodName,
    pub instrs: Vec<Instr>,
    pub handlers: Handlers,
    pub pre: Option<InitType>,
    pub post: Option<InitType>,
    pub argtype: Option<InitType>,
    pub rettype: Option<InitType>,
    pub is_constructor: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialClass {
    pub id: ClassId,
    pub super_class: Option<ClassId>,
    pub fields: Vec<(FieldId, Option<InitType>)>,
    pub methods: BTreeMap<MethodName, PartialMethod>,
    pub ctor: PartialMethod,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialProgram {
    pub classes: BTreeMap<ClassId, PartialClass>,
    pub main: ClassId,
}

fn complete_method(class: &ClassId, m: PartialMethod) -> MethodDef {
    let pre = m.pre.unwrap_or(if m.is_constructor { InitType::RawBot } else { InitType::Init });
    let post = match m.post {
        Some(t) => t,
        None if m.is_constructor => InitType::Raw(class.clone()),
        None => pre.clone(),
    };
    MethodDef {
        name: m.name,
        instrs: m.instrs,
        handlers: m.handlers,
        pre,
        post,
        argtype: m.argtype.unwrap_or(InitType::Init),
        rettype: m.rettype.unwrap_or(InitType::Init),
        is_constructor: m.is_constructor,
    }
}

/// Fills every omitted annotation with the safe default:
/// fields, arguments and results are `Init`; constructors go from `Raw` to `Raw(C)`;
/// other methods expect an `Init` receiver and keep the receiver's type on exit.
pub fn apply_default_annotations(p: PartialProgram) -> Program {
    let mut fields = BTreeMap::new();
    let mut classes = BTreeMap::new();
    for (id, pc) in p.classes {
        let mut field_names = Vec::with_capacity(pc.fields.len());
        for (f, t) in pc.fields {
            fields.insert(f.clone(), t.unwrap_or(InitType::Init));
            field_names.push(f);
        }
        let methods = pc.methods.into_iter().map(|(n, m)| (n, complete_method(&id, m))).collect();
        let ctor = complete_method(&id, pc.ctor);
        classes.insert(id.clone(), ClassDef { id, super_class: pc.super_class, fields: field_names, methods, ctor });
    }
    Program { classes, main: p.main, fields }
}
