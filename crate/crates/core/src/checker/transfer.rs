//! One typing rule per instruction form.
//!
//! Each rule is split into the output state, which never fails, and its side
//! conditions. The fixpoint iterates the former; diagnostics come from the latter
//! once the fixpoint is reached.

use super::state::TypeState;
use crate::diag::{Code, Diagnostic, Site};
use crate::model::{ClassDef, Expr, InitType, Instr, MethodDef, MethodRef, ModelError, Program, VarId};

/// The method an instruction belongs to.
#[derive(Debug, Clone, Copy)]
pub struct MethodCtx<'a> {
    pub program: &'a Program,
    pub class: &'a ClassDef,
    pub method: &'a MethodDef,
}

impl<'a> MethodCtx<'a> {
    pub fn new(program: &'a Program, class: &'a ClassDef, method: &'a MethodDef) -> Self {
        Self { program, class, method }
    }

    pub fn mref(&self) -> MethodRef {
        MethodRef::new(self.class.id.clone(), self.method.name.clone())
    }

    fn site(&self, pc: usize) -> Site {
        Site::Instr { method: self.mref(), pc }
    }
}

pub(crate) fn model_diag(e: ModelError) -> Diagnostic {
    Diagnostic::error(Code::UnresolvedName, e.to_string())
}

/// Expression typing: `null : Init`, `x : L(x)`, `e.f : fields(f)` whatever the type of `e`.
pub fn type_expr(p: &Program, l: &TypeState, e: &Expr) -> Result<InitType, Diagnostic> {
    match e {
        Expr::Null => Ok(InitType::Init),
        Expr::Var(x) => Ok(l.get(x).clone()),
        Expr::Field(_, f) => p
            .fields
            .get(f)
            .cloned()
            .ok_or_else(|| Diagnostic::error(Code::UnresolvedName, format!("undeclared field `{f}`"))),
    }
}

/// Output state of `ins` from `l`, ignoring side conditions.
pub(crate) fn post_state(ctx: &MethodCtx, ins: &Instr, l: &TypeState) -> TypeState {
    let p = ctx.program;
    let mut out = l.clone();
    match ins {
        Instr::Assign { dst, expr } => {
            let t = type_expr(p, l, expr).unwrap_or(InitType::RawBot);
            out.set(dst.clone(), t);
        }
        Instr::New { dst, .. } | Instr::CastInit { dst, .. } => out.set(dst.clone(), InitType::Init),
        Instr::CastRaw { dst, class, .. } => out.set(dst.clone(), InitType::Raw(class.clone())),
        Instr::SuperCall { .. } => out.set(VarId::this(), ctx.program.raw_super(&ctx.class.id)),
        Instr::SetInit => out.set(VarId::this(), InitType::Raw(ctx.class.id.clone())),
        Instr::VirtualCall { dst, recv, declaring, method, .. } => {
            match p.method(&MethodRef::new(declaring.clone(), method.clone())) {
                Some(callee) => {
                    out.set(recv.clone(), callee.post.clone());
                    out.set(dst.clone(), callee.rettype.clone());
                }
                None => {
                    out.set(recv.clone(), InitType::RawBot);
                    out.set(dst.clone(), InitType::RawBot);
                }
            }
        }
        Instr::FieldWrite { .. } | Instr::IfStar { .. } | Instr::Return { .. } => {}
    }
    out
}

fn require(
    ctx: &MethodCtx,
    pc: usize,
    code: Code,
    what: &str,
    actual: &InitType,
    expected: &InitType,
) -> Result<(), Diagnostic> {
    if ctx.program.subtype(actual, expected).map_err(model_diag)? {
        Ok(())
    } else {
        Err(Diagnostic::error(code, format!("{what}: {actual} is not a subtype of {expected}")).at(ctx.site(pc)))
    }
}

/// Side conditions of the rule for `ins` in state `l`.
pub(crate) fn side_conditions(ctx: &MethodCtx, pc: usize, ins: &Instr, l: &TypeState) -> Result<(), Diagnostic> {
    let p = ctx.program;
    let c = &ctx.class.id;
    let this = VarId::this();
    match ins {
        Instr::Assign { dst, expr } => {
            if dst.is_this() {
                return Err(Diagnostic::error(Code::AssignToThis, "assignment to `this`").at(ctx.site(pc)));
            }
            type_expr(p, l, expr).map(|_| ()).map_err(|d| d.at(ctx.site(pc)))
        }
        Instr::FieldWrite { field, src, .. } => {
            let ft = p.fields.get(field).ok_or_else(|| {
                Diagnostic::error(Code::UnresolvedName, format!("undeclared field `{field}`")).at(ctx.site(pc))
            })?;
            require(ctx, pc, Code::FieldWriteViolation, &format!("value written to `{field}`"), l.get(src), ft)
        }
        Instr::New { class, arg, .. } => {
            let ctor = &p.class(class).map_err(|e| model_diag(e).at(ctx.site(pc)))?.ctor;
            require(ctx, pc, Code::NewArgViolation, &format!("argument of `new {class}`"), l.get(arg), &ctor.argtype)
        }
        Instr::SuperCall { arg } => {
            let sup = p.super_of(c).ok_or_else(|| {
                Diagnostic::error(Code::SuperCallInRoot, format!("root class `{c}` has no super constructor"))
                    .at(ctx.site(pc))
            })?;
            let ctor = &p.class(sup).map_err(|e| model_diag(e).at(ctx.site(pc)))?.ctor;
            require(ctx, pc, Code::SuperArgViolation, &format!("argument of `{sup}.init`"), l.get(arg), &ctor.argtype)
        }
        Instr::VirtualCall { recv, declaring, method, arg, .. } => {
            let target = MethodRef::new(declaring.clone(), method.clone());
            let callee = p.method(&target).ok_or_else(|| {
                Diagnostic::error(Code::UnresolvedName, format!("`{target}` is not declared")).at(ctx.site(pc))
            })?;
            require(ctx, pc, Code::CallPreViolationStatic, &format!("receiver `{recv}` of `{target}`"), l.get(recv), &callee.pre)?;
            require(ctx, pc, Code::CallArgViolationStatic, &format!("argument `{arg}` of `{target}`"), l.get(arg), &callee.argtype)
        }
        Instr::Return { var } => {
            if ctx.method.is_constructor {
                if !var.is_this() {
                    return Err(Diagnostic::error(Code::ConstructorReturnNotThis, "constructors must return `this`")
                        .at(ctx.site(pc)));
                }
                require(
                    ctx,
                    pc,
                    Code::ConstructorReturnUninitialized,
                    "`this` when the constructor returns",
                    l.get(&this),
                    &p.raw_super(c),
                )?;
                // The implicit SetInit leaves the receiver initialized up to this class.
                require(ctx, pc, Code::ReturnPostViolation, "`this` after the constructor", &InitType::Raw(c.clone()), &ctx.method.post)
            } else {
                require(ctx, pc, Code::ReturnPostViolation, "`this` on return", l.get(&this), &ctx.method.post)?;
                require(ctx, pc, Code::ReturnTypeViolation, &format!("returned `{var}`"), l.get(var), &ctx.method.rettype)
            }
        }
        Instr::SetInit => {
            if !ctx.method.is_constructor {
                return Err(Diagnostic::error(Code::SetInitOutsideConstructor, "`setinit` outside a constructor")
                    .at(ctx.site(pc)));
            }
            require(ctx, pc, Code::SetInitOrderViolationStatic, "`this` at `setinit`", l.get(&this), &p.raw_super(c))
        }
        Instr::IfStar { .. } | Instr::CastInit { .. } | Instr::CastRaw { .. } => Ok(()),
    }
}

/// The typing judgment `m ⊢ ins : L -> L'`: the output state if every side condition holds.
pub fn transfer(ctx: &MethodCtx, pc: usize, ins: &Instr, l: &TypeState) -> Result<TypeState, Diagnostic> {
    side_conditions(ctx, pc, ins, l)?;
    Ok(post_state(ctx, ins, l))
}
