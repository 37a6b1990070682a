use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::rc::Rc;

use serde::Serialize;

use super::digest::digest;
use super::heap::{value_has_type, Heap, Value};
use crate::model::{
    ExcId, Expr, InitType, Instr, MethodDef, MethodRef, Program, VarId, EXC_CAST, EXC_CLASS_CHANGE, EXC_NULL,
};

pub type Locals = BTreeMap<VarId, Value>;

/// A suspended caller: where to resume and which local receives the result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Frame {
    pub method: MethodRef,
    pub pc: usize,
    pub locals: Locals,
    pub result: Option<VarId>,
    /// Digest of this frame and every frame below it.
    #[serde(skip)]
    pub chain: u128,
}

impl Frame {
    pub fn new(method: MethodRef, pc: usize, locals: Locals, result: Option<VarId>, below: Option<&Frame>) -> Self {
        let chain = digest(&(below.map(|f| f.chain), &method, pc, &locals, &result));
        Self { method, pc, locals, result, chain }
    }
}

impl Hash for Frame {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.chain.hash(state);
    }
}

/// `⟨m, i, ρ, σ, cs⟩`, plus the exception being propagated, if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MachineState {
    pub method: MethodRef,
    pub pc: usize,
    pub locals: Locals,
    pub heap: Heap,
    /// Suspended frames are never modified, so clones of a state share them.
    pub stack: Vec<Rc<Frame>>,
    pub exc: Option<ExcId>,
}

/// Hashes the heap and stack through their digests, so it costs the same at any depth.
impl Hash for MachineState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.method.hash(state);
        self.pc.hash(state);
        self.locals.hash(state);
        self.heap.hash(state);
        self.stack.len().hash(state);
        self.stack.last().map(|f| f.chain).hash(state);
        self.exc.hash(state);
    }
}

impl MachineState {
    /// `main` of the main class, `this` and every other local null, empty heap.
    pub fn initial(p: &Program) -> Self {
        Self {
            method: MethodRef::new(p.main.clone(), "main".into()),
            pc: 0,
            locals: Locals::new(),
            heap: Heap::new(),
            stack: Vec::new(),
            exc: None,
        }
    }

    pub fn local(&self, x: &VarId) -> Value {
        self.locals.get(x).copied().unwrap_or(Value::Null)
    }

    pub fn instr<'p>(&self, p: &'p Program) -> Option<&'p Instr> {
        p.method(&self.method)?.instrs.get(self.pc)
    }

    /// True when the next step is a nondeterministic branch.
    pub fn at_branch(&self, p: &Program) -> bool {
        self.exc.is_none() && matches!(self.instr(p), Some(Instr::IfStar { .. }))
    }

    fn raise(mut self, e: &str) -> StepResult {
        self.exc = Some(ExcId::new(e));
        StepResult::Next(self)
    }

    fn advance(mut self) -> StepResult {
        self.pc += 1;
        StepResult::Next(self)
    }

    fn enter(mut self, callee: MethodRef, this: Value, arg: Value, result: Option<VarId>) -> StepResult {
        let caller = Frame::new(
            std::mem::replace(&mut self.method, callee),
            self.pc,
            std::mem::take(&mut self.locals),
            result,
            self.stack.last().map(|f| &**f),
        );
        self.stack.push(Rc::new(caller));
        self.pc = 0;
        self.locals.insert(VarId::this(), this);
        self.locals.insert(VarId::arg(), arg);
        StepResult::Next(self)
    }

    fn stuck(self, reason: StuckReason) -> StepResult {
        StepResult::Stuck { reason, method: self.method.clone(), pc: self.pc, state: Box::new(self) }
    }
}

impl fmt::Display for MachineState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} pc {}", self.method, self.pc)?;
        if let Some(e) = &self.exc {
            write!(f, " raising {e}")?;
        }
        f.write_str(" locals {")?;
        for (i, (x, v)) in self.locals.iter().enumerate() {
            write!(f, "{}{x}={v}", if i > 0 { ", " } else { "" })?;
        }
        f.write_str("} heap {")?;
        for (l, o) in self.heap.iter() {
            write!(f, "{}@{l}={o}", if l > 0 { ", " } else { "" })?;
        }
        write!(f, "}} depth {}", self.stack.len())
    }
}

/// Why no rule applies. The set is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StuckReason {
    CallPreViolation,
    CallArgViolation,
    SetinitOrderViolation,
    MissingMethod,
    ConstructorReturnNotThis,
}

impl StuckReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StuckReason::CallPreViolation => "call-pre-violation",
            StuckReason::CallArgViolation => "call-arg-violation",
            StuckReason::SetinitOrderViolation => "setinit-order-violation",
            StuckReason::MissingMethod => "missing-method",
            StuckReason::ConstructorReturnNotThis => "constructor-return-not-this",
        }
    }
}

impl fmt::Display for StuckReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub enum StepResult {
    Next(MachineState),
    Final(Value, Box<MachineState>),
    FinalExceptional(ExcId, Box<MachineState>),
    Stuck { reason: StuckReason, method: MethodRef, pc: usize, state: Box<MachineState> },
}

pub fn eval_expr(h: &Heap, s: &MachineState, e: &Expr) -> Result<Value, ExcId> {
    match e {
        Expr::Null => Ok(Value::Null),
        Expr::Var(x) => Ok(s.local(x)),
        Expr::Field(base, f) => match eval_expr(h, s, base)? {
            Value::Null => Err(ExcId::new(EXC_NULL)),
            Value::Loc(l) => Ok(h.get(l).expect("dangling location").field(f)),
        },
    }
}

fn method_def<'p>(p: &'p Program, m: &MethodRef) -> &'p MethodDef {
    p.method(m).unwrap_or_else(|| panic!("running undeclared method {m}"))
}

/// Performs one transition. `take_jump` picks the branch of an `if *` and is ignored otherwise.
pub fn step(p: &Program, mut s: MachineState, take_jump: bool) -> StepResult {
    let m = method_def(p, &s.method);
    if let Some(e) = s.exc.clone() {
        if let Some(j) = m.handler(s.pc, &e) {
            s.pc = j;
            s.exc = None;
            return StepResult::Next(s);
        }
        return match s.stack.pop() {
            None => StepResult::FinalExceptional(e, Box::new(s)),
            Some(f) => {
                let f = Rc::unwrap_or_clone(f);
                s.method = f.method;
                s.pc = f.pc;
                s.locals = f.locals;
                StepResult::Next(s)
            }
        };
    }
    let class = s.method.class.clone();
    match &m.instrs[s.pc] {
        Instr::Assign { dst, expr } => match eval_expr(&s.heap, &s, expr) {
            Ok(v) => {
                s.locals.insert(dst.clone(), v);
                s.advance()
            }
            Err(e) => s.raise(e.as_str()),
        },
        Instr::FieldWrite { obj, field, src } => match s.local(obj) {
            Value::Null => s.raise(EXC_NULL),
            Value::Loc(l) => {
                let v = s.local(src);
                s.heap.update(l, |o| o.fields.insert(field.clone(), v)).expect("dangling location");
                s.advance()
            }
        },
        Instr::IfStar { target } => {
            s.pc = if take_jump { *target } else { s.pc + 1 };
            StepResult::Next(s)
        }
        Instr::New { dst, class: c, arg } => {
            let l = s.heap.alloc(p, c);
            let ctor = MethodRef::ctor(c.clone());
            let def = method_def(p, &ctor);
            let argv = s.local(arg);
            if !value_has_type(p, &s.heap, Value::Loc(l), &def.pre) {
                return s.stuck(StuckReason::CallPreViolation);
            }
            if !value_has_type(p, &s.heap, argv, &def.argtype) {
                return s.stuck(StuckReason::CallArgViolation);
            }
            s.enter(ctor, Value::Loc(l), argv, Some(dst.clone()))
        }
        Instr::SuperCall { arg } => {
            let Some(sup) = p.super_of(&class).cloned() else {
                return s.stuck(StuckReason::MissingMethod);
            };
            let ctor = MethodRef::ctor(sup);
            let def = method_def(p, &ctor);
            let (this, argv) = (s.local(&VarId::this()), s.local(arg));
            if !value_has_type(p, &s.heap, this, &def.pre) {
                return s.stuck(StuckReason::CallPreViolation);
            }
            if !value_has_type(p, &s.heap, argv, &def.argtype) {
                return s.stuck(StuckReason::CallArgViolation);
            }
            s.enter(ctor, this, argv, None)
        }
        Instr::VirtualCall { dst, recv, declaring, method, arg } => {
            let rv = s.local(recv);
            let Value::Loc(l) = rv else { return s.raise(EXC_NULL) };
            let dyn_class = s.heap.get(l).expect("dangling location").dyn_class.clone();
            if !p.class_le(&dyn_class, declaring).unwrap_or(false) {
                return s.raise(EXC_CLASS_CHANGE);
            }
            let Some(callee) = p.lookup_ref(&dyn_class, method) else {
                return s.stuck(StuckReason::MissingMethod);
            };
            let def = method_def(p, &callee);
            let argv = s.local(arg);
            if !value_has_type(p, &s.heap, rv, &def.pre) {
                return s.stuck(StuckReason::CallPreViolation);
            }
            if !value_has_type(p, &s.heap, argv, &def.argtype) {
                return s.stuck(StuckReason::CallArgViolation);
            }
            s.enter(callee, rv, argv, Some(dst.clone()))
        }
        Instr::SetInit => match s.local(&VarId::this()) {
            Value::Null => s.raise(EXC_NULL),
            Value::Loc(l) => match s.heap.set_init(p, &class, l) {
                Ok(()) => s.advance(),
                Err(_) => s.stuck(StuckReason::SetinitOrderViolation),
            },
        },
        Instr::CastInit { dst, src } => cast(p, s, dst, src, &InitType::Init),
        Instr::CastRaw { dst, class: c, src } => cast(p, s, dst, src, &InitType::Raw(c.clone())),
        Instr::Return { var } => {
            let v = s.local(var);
            if m.is_constructor {
                if !var.is_this() {
                    return s.stuck(StuckReason::ConstructorReturnNotThis);
                }
                if let Value::Loc(l) = v {
                    if s.heap.set_init(p, &class, l).is_err() {
                        return s.stuck(StuckReason::SetinitOrderViolation);
                    }
                }
            }
            match s.stack.pop() {
                None => StepResult::Final(v, Box::new(s)),
                Some(f) => {
                    let f = Rc::unwrap_or_clone(f);
                    s.method = f.method;
                    s.pc = f.pc + 1;
                    s.locals = f.locals;
                    if let Some(r) = f.result {
                        s.locals.insert(r, v);
                    }
                    StepResult::Next(s)
                }
            }
        }
    }
}

fn cast(p: &Program, mut s: MachineState, dst: &VarId, src: &VarId, t: &InitType) -> StepResult {
    let v = s.local(src);
    if value_has_type(p, &s.heap, v, t) {
        s.locals.insert(dst.clone(), v);
        s.advance()
    } else {
        s.raise(EXC_CAST)
    }
}
