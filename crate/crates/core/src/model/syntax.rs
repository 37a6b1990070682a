use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::ids::{ClassId, ExcId, FieldId, MethodName, VarId};

/// Initialization type of a reference.
///
/// `Init` is the bottom of the subtyping order and `RawBot` the top; in between,
/// `Raw(c)` says that the constructors of `c` and of all its ancestors have completed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InitType {
    Init,
    Raw(ClassId),
    RawBot,
}

impl InitType {
    pub fn raw(class: impl Into<ClassId>) -> Self {
        InitType::Raw(class.into())
    }
}

impl fmt::Display for InitType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitType::Init => f.write_str("Init"),
            InitType::Raw(c) => write!(f, "Raw({c})"),
            InitType::RawBot => f.write_str("Raw"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Null,
    Var(VarId),
    Field(Box<Expr>, FieldId),
}

impl Expr {
    pub fn var(name: &str) -> Self {
        Expr::Var(VarId::new(name))
    }

    pub fn field(base: Expr, field: &str) -> Self {
        Expr::Field(Box::new(base), FieldId::new(field))
    }

    /// The variable at the root of the expression, if any.
    pub fn root_var(&self) -> Option<&VarId> {
        match self {
            Expr::Null => None,
            Expr::Var(v) => Some(v),
            Expr::Field(base, _) => base.root_var(),
        }
    }

    pub fn fields(&self) -> Vec<&FieldId> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Expr::Field(base, f) = cur {
            out.push(f);
            cur = base;
        }
        out.reverse();
        out
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Null => f.write_str("null"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Field(base, field) => write!(f, "{base}.{field}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Instr {
    /// `dst <- expr`
    Assign { dst: VarId, expr: Expr },
    /// `obj.field <- src`
    FieldWrite { obj: VarId, field: FieldId, src: VarId },
    /// `dst <- new class(arg)`: allocation and constructor call.
    New { dst: VarId, class: ClassId, arg: VarId },
    /// `if * jmp target`
    IfStar { target: usize },
    /// `super(arg)`, only inside constructors.
    SuperCall { arg: VarId },
    /// `dst <- recv.declaring::method(arg)`
    VirtualCall { dst: VarId, recv: VarId, declaring: ClassId, method: MethodName, arg: VarId },
    Return { var: VarId },
    SetInit,
    /// `dst <- (Init) src`
    CastInit { dst: VarId, src: VarId },
    /// `dst <- (Raw(class)) src`
    CastRaw { dst: VarId, class: ClassId, src: VarId },
}

impl Instr {
    /// The local variable this instruction writes.
    pub fn defined_var(&self) -> Option<&VarId> {
        match self {
            Instr::Assign { dst, .. }
            | Instr::New { dst, .. }
            | Instr::VirtualCall { dst, .. }
            | Instr::CastInit { dst, .. }
            | Instr::CastRaw { dst, .. } => Some(dst),
            _ => None,
        }
    }

    pub fn used_vars(&self) -> Vec<&VarId> {
        match self {
            Instr::Assign { expr, .. } => expr.root_var().into_iter().collect(),
            Instr::FieldWrite { obj, src, .. } => vec![obj, src],
            Instr::New { arg, .. } | Instr::SuperCall { arg } => vec![arg],
            Instr::VirtualCall { recv, arg, .. } => vec![recv, arg],
            Instr::Return { var } => vec![var],
            Instr::CastInit { src, .. } | Instr::CastRaw { src, .. } => vec![src],
            Instr::IfStar { .. } | Instr::SetInit => vec![],
        }
    }

    pub fn is_return(&self) -> bool {
        matches!(self, Instr::Return { .. })
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::Assign { dst, expr } => write!(f, "{dst} <- {expr}"),
            Instr::FieldWrite { obj, field, src } => write!(f, "{obj}.{field} <- {src}"),
            Instr::New { dst, class, arg } => write!(f, "{dst} <- new {class}({arg})"),
            Instr::IfStar { target } => write!(f, "if * jmp {target}"),
            Instr::SuperCall { arg } => write!(f, "super({arg})"),
            Instr::VirtualCall { dst, recv, declaring, method, arg } => {
                write!(f, "{dst} <- {recv}.{declaring}::{method}({arg})")
            }
            Instr::Return { var } => write!(f, "return {var}"),
            Instr::SetInit => f.write_str("setinit"),
            Instr::CastInit { dst, src } => write!(f, "{dst} <- (Init) {src}"),
            Instr::CastRaw { dst, class, src } => write!(f, "{dst} <- (Raw({class})) {src}"),
        }
    }
}

/// Exception handler table: `(pc, exception) -> handler pc`.
pub type Handlers = BTreeMap<(usize, ExcId), usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDef {
    pub name: MethodName,
    pub instrs: Vec<Instr>,
    pub handlers: Handlers,
    /// Type of `this` on entry.
    pub pre: InitType,
    /// Type of `this` on normal exit.
    pub post: InitType,
    pub argtype: InitType,
    pub rettype: InitType,
    pub is_constructor: bool,
}

impl MethodDef {
    /// All variables of the method: `this`, `arg` and every variable mentioned in the body.
    pub fn variables(&self) -> BTreeSet<VarId> {
        let mut vars = BTreeSet::new();
        vars.insert(VarId::this());
        vars.insert(VarId::arg());
        for ins in &self.instrs {
            vars.extend(ins.defined_var().cloned());
            vars.extend(ins.used_vars().into_iter().cloned());
        }
        vars
    }

    /// Normal-flow successors of the instruction at `pc`.
    pub fn successors(&self, pc: usize) -> Vec<usize> {
        match self.instrs.get(pc) {
            None | Some(Instr::Return { .. }) => vec![],
            Some(Instr::IfStar { target }) if *target != pc + 1 => vec![pc + 1, *target],
            Some(_) => vec![pc + 1],
        }
    }

    pub fn handler(&self, pc: usize, exc: &ExcId) -> Option<usize> {
        self.handlers.get(&(pc, exc.clone())).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDef {
    pub id: ClassId,
    pub super_class: Option<ClassId>,
    /// Fields declared by this class, in declaration order. Their types live in [`Program::fields`].
    pub fields: Vec<FieldId>,
    pub methods: BTreeMap<MethodName, MethodDef>,
    pub ctor: MethodDef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub classes: BTreeMap<ClassId, ClassDef>,
    pub main: ClassId,
    pub fields: BTreeMap<FieldId, InitType>,
}
