//! Exhaustive enumeration of tiny programs.
//!
//! The space, for bounds `b`:
//! - `k ≤ max_classes` classes `C0..`, each `Ci` (i > 0) extending some `Cj` with `j < i`;
//! - `n ≤ max_fields` fields `f0..` declared by `C0`, each typed by any lattice element;
//! - method slots `m0..` per class; `C0` spends its first slot on `main`. A present method
//!   has any four lattice elements as `pre`, `post`, `argtype`, `rettype`;
//! - `main` and constructors keep the default annotations;
//! - every body of 1 to `max_instrs_per_method` instructions over the variables
//!   `this, arg, v0, ..` whose last instruction is a return (`return this` in constructors),
//!   with at most one handler when `allow_handlers` is set.
//!
//! Programs come out in a fixed order and never twice.

use super::generate::{class_name, field_name, method_name, GenBounds};
use crate::model::{
    ClassDef, ClassId, Expr, FieldId, InitType, Instr, MethodDef, MethodName, MethodRef, Program, VarId, EXC_CAST,
    EXC_CLASS_CHANGE, EXC_NULL, MAIN,
};

/// Largest space the enumerator accepts.
pub const ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnumError {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("about {estimate} programs within these bounds, more than the cap of {cap}")]
    TooLarge { estimate: u128, cap: u128 },
}

/// The instructions allowed at one program point of one kind of method, for a fixed body length.
#[derive(Debug, Clone)]
struct BodySpace {
    is_ctor: bool,
    /// Per length `len` (index `len - 1`): instruction alphabet, return variables, handler options.
    by_len: Vec<(Vec<Instr>, Vec<VarId>, Vec<Option<(usize, &'static str, usize)>>)>,
}

impl BodySpace {
    fn count_len(&self, i: usize) -> u128 {
        let (alpha, rets, hs) = &self.by_len[i];
        (alpha.len() as u128).saturating_pow(i as u32).saturating_mul(rets.len() as u128).saturating_mul(hs.len() as u128)
    }

    fn count(&self) -> u128 {
        (0..self.by_len.len()).fold(0u128, |acc, i| acc.saturating_add(self.count_len(i)))
    }

    fn decode(&self, mut idx: u128, name: MethodName, template: &MethodDef) -> MethodDef {
        let mut i = 0;
        while idx >= self.count_len(i) {
            idx -= self.count_len(i);
            i += 1;
        }
        let (alpha, rets, hs) = &self.by_len[i];
        let mut instrs = Vec::with_capacity(i + 1);
        for _ in 0..i {
            instrs.push(alpha[(idx % alpha.len() as u128) as usize].clone());
            idx /= alpha.len() as u128;
        }
        instrs.push(Instr::Return { var: rets[(idx % rets.len() as u128) as usize].clone() });
        idx /= rets.len() as u128;
        let mut m = template.clone();
        m.name = name;
        m.instrs = instrs;
        if let Some((pc, exc, target)) = hs[(idx % hs.len() as u128) as usize] {
            m = m.with_handler(pc, exc, target);
        }
        debug_assert!(self.is_ctor == m.is_constructor);
        m
    }
}

/// Hierarchy, field count and method presence: the choices that shape the alphabets.
#[derive(Debug, Clone)]
struct Shape {
    supers: Vec<Option<usize>>,
    fields: usize,
    /// Per class, the present method slots.
    methods: Vec<Vec<usize>>,
}

impl Shape {
    fn classes(&self) -> Vec<ClassId> {
        (0..self.supers.len()).map(class_name).collect()
    }

    fn lattice(&self) -> Vec<InitType> {
        let mut out = vec![InitType::Init];
        out.extend(self.classes().into_iter().map(InitType::Raw));
        out.push(InitType::RawBot);
        out
    }

    /// Names of the non-main methods of class `c`.
    fn method_names(&self, c: usize) -> Vec<MethodName> {
        self.methods[c].iter().map(|&i| method_name(i)).collect()
    }

    fn method_refs(&self) -> Vec<MethodRef> {
        let classes = self.classes();
        let mut out = vec![MethodRef::new(classes[0].clone(), MethodName::new(MAIN))];
        for (c, cls) in classes.iter().enumerate() {
            out.extend(self.method_names(c).into_iter().map(|m| MethodRef::new(cls.clone(), m)));
        }
        out
    }

    fn signature_count(&self) -> usize {
        self.methods.iter().map(Vec::len).sum()
    }
}

fn shapes(b: &GenBounds) -> Vec<Shape> {
    let mut out = Vec::new();
    for k in 1..=b.max_classes {
        // Parent choices: class i picks any j < i.
        let mut parents: Vec<Vec<Option<usize>>> = vec![vec![None]];
        for i in 1..k {
            parents = parents.into_iter().flat_map(|ps| (0..i).map(move |j| [ps.clone(), vec![Some(j)]].concat())).collect();
        }
        for supers in parents {
            for fields in 0..=b.max_fields {
                let slots: Vec<usize> =
                    (0..k).map(|c| if c == 0 { b.max_methods_per_class - 1 } else { b.max_methods_per_class }).collect();
                let total: usize = slots.iter().sum();
                for mask in 0u64..(1u64 << total) {
                    let mut methods = Vec::with_capacity(k);
                    let mut bit = 0;
                    for &n in &slots {
                        methods.push((0..n).filter(|s| mask & (1 << (bit + s)) != 0).collect());
                        bit += n;
                    }
                    out.push(Shape { supers: supers.clone(), fields, methods });
                }
            }
        }
    }
    out
}

fn body_space(b: &GenBounds, shape: &Shape, class: usize, is_ctor: bool) -> BodySpace {
    let classes = shape.classes();
    let fields: Vec<FieldId> = (0..shape.fields).map(field_name).collect();
    let dsts = b.var_pool();
    let srcs: Vec<VarId> = std::iter::once(VarId::this()).chain(dsts.iter().cloned()).collect();
    let calls = shape.method_refs();
    let mut by_len = Vec::new();
    for len in 1..=b.max_instrs_per_method {
        let mut alpha = Vec::new();
        for d in &dsts {
            alpha.push(Instr::Assign { dst: d.clone(), expr: Expr::Null });
            for s in &srcs {
                alpha.push(Instr::Assign { dst: d.clone(), expr: Expr::Var(s.clone()) });
                for f in &fields {
                    alpha.push(Instr::Assign { dst: d.clone(), expr: Expr::Field(Box::new(Expr::Var(s.clone())), f.clone()) });
                }
            }
        }
        for o in &srcs {
            for f in &fields {
                for s in &srcs {
                    alpha.push(Instr::FieldWrite { obj: o.clone(), field: f.clone(), src: s.clone() });
                }
            }
        }
        for target in 0..len {
            alpha.push(Instr::IfStar { target });
        }
        for d in &dsts {
            for c in &classes {
                for s in &srcs {
                    alpha.push(Instr::New { dst: d.clone(), class: c.clone(), arg: s.clone() });
                }
            }
            for r in &srcs {
                for m in &calls {
                    for a in &srcs {
                        alpha.push(Instr::VirtualCall {
                            dst: d.clone(),
                            recv: r.clone(),
                            declaring: m.class.clone(),
                            method: m.name.clone(),
                            arg: a.clone(),
                        });
                    }
                }
            }
            if b.allow_casts {
                for s in &srcs {
                    alpha.push(Instr::CastInit { dst: d.clone(), src: s.clone() });
                    for c in &classes {
                        alpha.push(Instr::CastRaw { dst: d.clone(), class: c.clone(), src: s.clone() });
                    }
                }
            }
        }
        if is_ctor {
            alpha.push(Instr::SetInit);
            if shape.supers[class].is_some() {
                for s in &srcs {
                    alpha.push(Instr::SuperCall { arg: s.clone() });
                }
            }
        }
        let rets = if is_ctor { vec![VarId::this()] } else { srcs.clone() };
        let mut hs = vec![None];
        if b.allow_handlers {
            for pc in 0..len - 1 {
                for exc in [EXC_NULL, EXC_CAST, EXC_CLASS_CHANGE] {
                    for t in (0..len).collect::<Vec<_>>() {
                        hs.push(Some((pc, exc, t)));
                    }
                }
            }
        }
        by_len.push((alpha, rets, hs));
    }
    BodySpace { is_ctor, by_len }
}

/// Digits of one shape's mixed-radix odometer, innermost first.
struct ShapeSpace {
    shape: Shape,
    lattice: Vec<InitType>,
    ctor_spaces: Vec<BodySpace>,
    method_spaces: Vec<BodySpace>,
    main_space: BodySpace,
}

impl ShapeSpace {
    fn new(b: &GenBounds, shape: Shape) -> Self {
        let k = shape.supers.len();
        let lattice = shape.lattice();
        let ctor_spaces = (0..k).map(|c| body_space(b, &shape, c, true)).collect();
        let method_spaces = (0..k).map(|c| body_space(b, &shape, c, false)).collect();
        let main_space = body_space(b, &shape, 0, false);
        Self { shape, lattice, ctor_spaces, method_spaces, main_space }
    }

    fn radices(&self) -> Vec<u128> {
        let l = self.lattice.len() as u128;
        let mut r = vec![l; self.shape.fields];
        r.extend(std::iter::repeat(l).take(4 * self.shape.signature_count()));
        r.extend(self.ctor_spaces.iter().map(BodySpace::count));
        for (c, ms) in self.shape.methods.iter().enumerate() {
            r.extend(std::iter::repeat(self.method_spaces[c].count()).take(ms.len()));
        }
        r.push(self.main_space.count());
        r
    }

    fn count(&self) -> u128 {
        self.radices().into_iter().fold(1u128, |a, x| a.saturating_mul(x))
    }

    fn program(&self, mut idx: u128) -> Program {
        let radices = self.radices();
        let mut digits = Vec::with_capacity(radices.len());
        for r in &radices {
            digits.push(idx % r);
            idx /= r;
        }
        let mut d = digits.into_iter();
        let mut next = || d.next().expect("digit");
        let classes = self.shape.classes();
        let mut p = Program::new(classes[0].clone());
        let field_types: Vec<InitType> = (0..self.shape.fields).map(|_| self.lattice[next() as usize].clone()).collect();
        let mut sigs = Vec::new();
        for _ in 0..self.shape.signature_count() {
            let mut four = [0usize; 4];
            for x in &mut four {
                *x = next() as usize;
            }
            sigs.push(four);
        }
        let ctor_idx: Vec<u128> = (0..classes.len()).map(|_| next()).collect();
        let mut sig_iter = sigs.into_iter();
        let mut cds = Vec::new();
        for (c, id) in classes.iter().enumerate() {
            let sup = self.shape.supers[c].map(|s| classes[s].as_str().to_string());
            let template = MethodDef::constructor(id, Vec::new());
            let ctor = self.ctor_spaces[c].decode(ctor_idx[c], MethodName::ctor(), &template);
            let mut cd = ClassDef::new(id.clone(), sup.as_deref(), Vec::new()).with_ctor(ctor);
            for name in self.shape.method_names(c) {
                let [pre, post, arg, ret] = sig_iter.next().expect("signature");
                let template = MethodDef::new(name.clone(), Vec::new())
                    .with_pre(self.lattice[pre].clone())
                    .with_post(self.lattice[post].clone())
                    .with_argtype(self.lattice[arg].clone())
                    .with_rettype(self.lattice[ret].clone());
                cd = cd.with_method(self.method_spaces[c].decode(next(), name, &template));
            }
            cds.push(cd);
        }
        let main = self.main_space.decode(next(), MethodName::new(MAIN), &MethodDef::new(MAIN, Vec::new()));
        cds[0] = cds[0].clone().with_method(main);
        for (i, t) in field_types.iter().enumerate() {
            cds[0] = cds[0].clone().with_field(field_name(i).as_str());
            p.fields.insert(field_name(i), t.clone());
        }
        for cd in cds {
            p = p.with_class(cd);
        }
        p
    }
}

/// Number of programs within `b`, saturating.
pub fn count_small_programs(b: &GenBounds) -> Result<u128, EnumError> {
    b.validate().map_err(EnumError::InvalidBounds)?;
    if b.max_classes > 4 || b.max_methods_per_class > 4 || b.max_instrs_per_method > 6 || b.max_fields > 4 {
        return Err(EnumError::TooLarge { estimate: u128::MAX, cap: ENUMERATION_CAP });
    }
    Ok(shapes(b).into_iter().fold(0u128, |acc, s| acc.saturating_add(ShapeSpace::new(b, s).count())))
}

/// Every program within `b`, or a refusal with an estimate when there are more than [`ENUMERATION_CAP`].
pub fn enumerate_small_programs(b: &GenBounds) -> Result<impl Iterator<Item = Program>, EnumError> {
    let total = count_small_programs(b)?;
    if total > ENUMERATION_CAP {
        return Err(EnumError::TooLarge { estimate: total, cap: ENUMERATION_CAP });
    }
    let spaces: Vec<ShapeSpace> = shapes(b).into_iter().map(|s| ShapeSpace::new(b, s)).collect();
    Ok(spaces.into_iter().flat_map(|s| {
        let n = s.count();
        (0..n).map(move |i| s.program(i))
    }))
}
