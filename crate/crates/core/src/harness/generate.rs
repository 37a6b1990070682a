use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::model::{
    ClassDef, ClassId, Expr, FieldId, InitType, Instr, MethodDef, MethodName, MethodRef, Program, VarId, EXC_CAST,
    EXC_CLASS_CHANGE, EXC_NULL, MAIN,
};

/// Size limits for generated and enumerated programs.
///
/// `max_vars` counts the variables besides `this`: the pool is `arg, v0, v1, ...`.
/// The main class gets a `main` method on top of its `max_methods_per_class` methods.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenBounds {
    pub max_classes: usize,
    pub max_methods_per_class: usize,
    pub max_instrs_per_method: usize,
    pub max_vars: usize,
    pub max_fields: usize,
    pub allow_casts: bool,
    pub allow_handlers: bool,
}

impl Default for GenBounds {
    fn default() -> Self {
        Self {
            max_classes: 3,
            max_methods_per_class: 3,
            max_instrs_per_method: 8,
            max_vars: 3,
            max_fields: 2,
            allow_casts: true,
            allow_handlers: true,
        }
    }
}

impl GenBounds {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("max_classes", self.max_classes),
            ("max_methods_per_class", self.max_methods_per_class),
            ("max_instrs_per_method", self.max_instrs_per_method),
            ("max_vars", self.max_vars),
        ] {
            if v == 0 {
                return Err(format!("{name} must be at least 1"));
            }
        }
        Ok(())
    }

    pub(crate) fn var_pool(&self) -> Vec<VarId> {
        std::iter::once(VarId::arg()).chain((0..).map(|i| VarId::new(&format!("v{i}")))).take(self.max_vars).collect()
    }
}

pub(crate) fn class_name(i: usize) -> ClassId {
    ClassId::new(&format!("C{i}"))
}

pub(crate) fn method_name(i: usize) -> MethodName {
    MethodName::new(&format!("m{i}"))
}

pub(crate) fn field_name(i: usize) -> FieldId {
    FieldId::new(&format!("f{i}"))
}

/// Signatures decided before any body is written, so that calls can aim at compatible methods.
struct Sigs {
    classes: Vec<ClassId>,
    supers: Vec<Option<usize>>,
    fields: Vec<(FieldId, InitType)>,
    methods: BTreeMap<MethodRef, MethodDef>,
    ctors: Vec<MethodDef>,
}

struct Gen<'b> {
    rng: ChaCha8Rng,
    b: &'b GenBounds,
    pool: Vec<VarId>,
}

impl Gen<'_> {
    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    /// A lattice element, biased toward `Init`.
    fn init_type(&mut self, classes: &[ClassId]) -> InitType {
        match self.rng.gen_range(0..10) {
            0..=4 => InitType::Init,
            5..=7 => InitType::Raw(classes.choose(&mut self.rng).expect("at least one class").clone()),
            _ => InitType::RawBot,
        }
    }

    fn var(&mut self) -> VarId {
        self.pool.choose(&mut self.rng).expect("non-empty pool").clone()
    }

    fn source(&mut self) -> VarId {
        if self.chance(0.3) {
            VarId::this()
        } else {
            self.var()
        }
    }

    fn signatures(&mut self) -> Sigs {
        let n = self.rng.gen_range(1..=self.b.max_classes);
        let classes: Vec<ClassId> = (0..n).map(class_name).collect();
        let supers: Vec<Option<usize>> =
            (0..n).map(|i| if i == 0 { None } else { Some(self.rng.gen_range(0..i)) }).collect();
        let nf = self.rng.gen_range(0..=self.b.max_fields);
        let fields = (0..nf).map(|i| (field_name(i), self.init_type(&classes))).collect();

        let mut methods: BTreeMap<MethodRef, MethodDef> = BTreeMap::new();
        for (i, c) in classes.iter().enumerate() {
            let k = self.rng.gen_range(0..=self.b.max_methods_per_class);
            let mut names: Vec<usize> = (0..self.b.max_methods_per_class).collect();
            names.shuffle(&mut self.rng);
            for &mi in names.iter().take(k) {
                let name = method_name(mi);
                // Overrides often copy the inherited signature so the program stays typable.
                let inherited = self.inherited(&classes, &supers, &methods, i, &name);
                let mut m = MethodDef::new(name.clone(), Vec::new());
                match inherited {
                    Some(sig) if self.chance(0.6) => {
                        m.pre = sig.pre;
                        m.post = sig.post;
                        m.argtype = sig.argtype;
                        m.rettype = sig.rettype;
                    }
                    _ => {
                        m.pre = self.init_type(&classes);
                        m.post = if self.chance(0.7) { m.pre.clone() } else { self.init_type(&classes) };
                        m.argtype = self.init_type(&classes);
                        m.rettype = self.init_type(&classes);
                    }
                }
                methods.insert(MethodRef::new(c.clone(), name), m);
            }
        }
        let ctors = classes
            .iter()
            .map(|c| {
                let mut m = MethodDef::constructor(c, Vec::new());
                m.argtype = self.init_type(&classes);
                if self.chance(0.05) {
                    m.pre = self.init_type(&classes);
                }
                if self.chance(0.1) {
                    m.post = self.init_type(&classes);
                }
                m
            })
            .collect();
        Sigs { classes, supers, fields, methods, ctors }
    }

    fn inherited(
        &self,
        classes: &[ClassId],
        supers: &[Option<usize>],
        methods: &BTreeMap<MethodRef, MethodDef>,
        i: usize,
        name: &MethodName,
    ) -> Option<MethodDef> {
        let mut cur = supers[i];
        while let Some(s) = cur {
            if let Some(m) = methods.get(&MethodRef::new(classes[s].clone(), name.clone())) {
                return Some(m.clone());
            }
            cur = supers[s];
        }
        None
    }

    fn body(&mut self, sigs: &Sigs, p: &Program, class: usize, m: &MethodDef) -> MethodDef {
        let c = &sigs.classes[class];
        let len = self.rng.gen_range(1..=self.b.max_instrs_per_method);
        let mut approx: BTreeMap<VarId, InitType> = BTreeMap::new();
        approx.insert(VarId::this(), m.pre.clone());
        approx.insert(VarId::arg(), m.argtype.clone());
        let ty = |approx: &BTreeMap<VarId, InitType>, v: &VarId| approx.get(v).cloned().unwrap_or(InitType::Init);

        let mut instrs = Vec::with_capacity(len);
        let is_root_ctor = m.is_constructor && sigs.supers[class].is_none();
        let super_at = if m.is_constructor && !is_root_ctor && self.chance(0.9) && len > 1 {
            Some(self.rng.gen_range(0..len - 1))
        } else {
            None
        };
        for pc in 0..len - 1 {
            let ins = if Some(pc) == super_at {
                Instr::SuperCall { arg: self.compatible_arg(&approx, &sigs.ctors[sigs.supers[class].unwrap()].argtype, p) }
            } else {
                self.instr(sigs, p, class, m, pc, len, &approx)
            };
            self.approx_step(sigs, p, c, &ins, &mut approx);
            instrs.push(ins);
        }
        let ret = if m.is_constructor {
            VarId::this()
        } else if self.chance(0.6) {
            let want = m.rettype.clone();
            self.pick_var(|v| p.subtype(&ty(&approx, v), &want).unwrap_or(false)).unwrap_or_else(|| self.var())
        } else {
            self.source()
        };
        instrs.push(Instr::Return { var: ret });

        let mut out = m.clone();
        out.instrs = instrs;
        if self.b.allow_handlers && len > 1 && self.chance(0.3) {
            let pc = self.rng.gen_range(0..len - 1);
            let exc = *[EXC_NULL, EXC_NULL, EXC_CAST, EXC_CLASS_CHANGE].choose(&mut self.rng).unwrap();
            let target = self.rng.gen_range(0..len);
            out = out.with_handler(pc, exc, target);
        }
        out
    }

    fn pick_var(&mut self, ok: impl Fn(&VarId) -> bool) -> Option<VarId> {
        let mut cands: Vec<VarId> = std::iter::once(VarId::this()).chain(self.pool.iter().cloned()).filter(|v| ok(v)).collect();
        cands.sort();
        cands.choose(&mut self.rng).cloned()
    }

    fn compatible_arg(&mut self, approx: &BTreeMap<VarId, InitType>, want: &InitType, p: &Program) -> VarId {
        if self.chance(0.6) {
            let found = self.pick_var(|v| p.subtype(approx.get(v).unwrap_or(&InitType::Init), want).unwrap_or(false));
            if let Some(v) = found {
                return v;
            }
        }
        self.source()
    }

    #[allow(clippy::too_many_arguments)]
    fn instr(
        &mut self,
        sigs: &Sigs,
        p: &Program,
        class: usize,
        m: &MethodDef,
        pc: usize,
        len: usize,
        approx: &BTreeMap<VarId, InitType>,
    ) -> Instr {
        let has_fields = !sigs.fields.is_empty();
        loop {
            let ins = match self.rng.gen_range(0..100) {
                0..=14 => {
                    let expr = match self.rng.gen_range(0..3) {
                        0 => Expr::Null,
                        1 => Expr::Var(self.source()),
                        _ if has_fields => {
                            let f = sigs.fields.choose(&mut self.rng).unwrap().0.clone();
                            Expr::Field(Box::new(Expr::Var(self.source())), f)
                        }
                        _ => Expr::Null,
                    };
                    Instr::Assign { dst: self.var(), expr }
                }
                15..=24 if has_fields => {
                    let (f, t) = sigs.fields.choose(&mut self.rng).unwrap().clone();
                    let src = self.compatible_arg(approx, &t, p);
                    Instr::FieldWrite { obj: self.source(), field: f, src }
                }
                25..=34 => {
                    // Mostly forward jumps; backward ones make loops.
                    let target = if self.chance(0.8) { self.rng.gen_range(pc + 1..len) } else { self.rng.gen_range(0..=pc) };
                    Instr::IfStar { target }
                }
                35..=54 => {
                    let ci = self.rng.gen_range(0..sigs.classes.len());
                    let arg = self.compatible_arg(approx, &sigs.ctors[ci].argtype, p);
                    Instr::New { dst: self.var(), class: sigs.classes[ci].clone(), arg }
                }
                55..=79 if !sigs.methods.is_empty() => self.call(sigs, p, approx),
                80..=87 if self.b.allow_casts => {
                    let src = self.source();
                    if self.chance(0.5) {
                        Instr::CastInit { dst: self.var(), src }
                    } else {
                        Instr::CastRaw { dst: self.var(), class: sigs.classes.choose(&mut self.rng).unwrap().clone(), src }
                    }
                }
                88..=94 if m.is_constructor => Instr::SetInit,
                95..=99 if m.is_constructor && sigs.supers[class].is_some() => {
                    let sup = sigs.supers[class].unwrap();
                    Instr::SuperCall { arg: self.compatible_arg(approx, &sigs.ctors[sup].argtype, p) }
                }
                _ => continue,
            };
            return ins;
        }
    }

    fn call(&mut self, sigs: &Sigs, p: &Program, approx: &BTreeMap<VarId, InitType>) -> Instr {
        let dst = self.var();
        let ty = |v: &VarId| approx.get(v).cloned().unwrap_or(InitType::Init);
        if self.chance(0.6) {
            let mut options = Vec::new();
            for (r, sig) in &sigs.methods {
                for recv in std::iter::once(VarId::this()).chain(self.pool.iter().cloned()) {
                    if p.subtype(&ty(&recv), &sig.pre).unwrap_or(false) {
                        options.push((r.clone(), recv));
                    }
                }
            }
            if let Some((target, recv)) = options.choose(&mut self.rng).cloned() {
                let arg = self.compatible_arg(approx, &sigs.methods[&target].argtype, p);
                return Instr::VirtualCall { dst, recv, declaring: target.class, method: target.name, arg };
            }
        }
        let targets: Vec<&MethodRef> = sigs.methods.keys().collect();
        let target = (*targets.choose(&mut self.rng).unwrap()).clone();
        let (recv, arg) = (self.source(), self.source());
        Instr::VirtualCall { dst, recv, declaring: target.class, method: target.name, arg }
    }

    /// Straight-line approximation of the typing rules, used only to bias choices.
    fn approx_step(&mut self, sigs: &Sigs, p: &Program, c: &ClassId, ins: &Instr, approx: &mut BTreeMap<VarId, InitType>) {
        let ty = |approx: &BTreeMap<VarId, InitType>, v: &VarId| approx.get(v).cloned().unwrap_or(InitType::Init);
        match ins {
            Instr::Assign { dst, expr } => {
                let t = match expr {
                    Expr::Null => InitType::Init,
                    Expr::Var(x) => ty(approx, x),
                    Expr::Field(_, f) => p.fields.get(f).cloned().unwrap_or(InitType::RawBot),
                };
                approx.insert(dst.clone(), t);
            }
            Instr::New { dst, .. } | Instr::CastInit { dst, .. } => {
                approx.insert(dst.clone(), InitType::Init);
            }
            Instr::CastRaw { dst, class, .. } => {
                approx.insert(dst.clone(), InitType::Raw(class.clone()));
            }
            Instr::SuperCall { .. } => {
                approx.insert(VarId::this(), p.raw_super(c));
            }
            Instr::SetInit => {
                approx.insert(VarId::this(), InitType::Raw(c.clone()));
            }
            Instr::VirtualCall { dst, recv, declaring, method, .. } => {
                if let Some(sig) = sigs.methods.get(&MethodRef::new(declaring.clone(), method.clone())) {
                    approx.insert(recv.clone(), sig.post.clone());
                    approx.insert(dst.clone(), sig.rettype.clone());
                }
            }
            Instr::FieldWrite { .. } | Instr::IfStar { .. } | Instr::Return { .. } => {}
        }
    }
}

/// A random structurally valid program, fully determined by `seed` and `b`.
pub fn generate_program(seed: u64, b: &GenBounds) -> Program {
    let mut g = Gen { rng: ChaCha8Rng::seed_from_u64(seed), b, pool: b.var_pool() };
    let sigs = g.signatures();

    // A skeleton carrying every signature, used for subtyping and field types while bodies are drawn.
    let mut skeleton = Program::new(sigs.classes[0].clone());
    for (i, c) in sigs.classes.iter().enumerate() {
        let sup = sigs.supers[i].map(|s| sigs.classes[s].as_str().to_string());
        let mut cd = ClassDef::new(c.clone(), sup.as_deref(), Vec::new()).with_ctor(sigs.ctors[i].clone());
        for m in sigs.methods.iter().filter(|(r, _)| &r.class == c).map(|(_, m)| m) {
            cd = cd.with_method(m.clone());
        }
        skeleton = skeleton.with_class(cd);
    }
    for (i, (f, t)) in sigs.fields.iter().enumerate() {
        let owner = sigs.classes[i % sigs.classes.len()].clone();
        skeleton.classes.get_mut(&owner).unwrap().fields.push(f.clone());
        skeleton.fields.insert(f.clone(), t.clone());
    }

    let mut p = skeleton.clone();
    for (i, c) in sigs.classes.iter().enumerate() {
        let ctor = g.body(&sigs, &skeleton, i, &sigs.ctors[i]);
        let names: Vec<MethodName> = skeleton.classes[c].methods.keys().cloned().collect();
        let mut bodies = Vec::new();
        for name in names {
            let sig = &skeleton.classes[c].methods[&name];
            bodies.push(g.body(&sigs, &skeleton, i, sig));
        }
        let cd = p.classes.get_mut(c).unwrap();
        cd.ctor = ctor;
        for m in bodies {
            cd.methods.insert(m.name.clone(), m);
        }
    }
    let main_sig = MethodDef::new(MAIN, Vec::new());
    let mut main = g.body(&sigs, &skeleton, 0, &main_sig);
    // main starts with objects to work on more often than not.
    if main.instrs.len() < b.max_instrs_per_method && g.chance(0.7) {
        let ci = g.rng.gen_range(0..sigs.classes.len());
        let dst = g.var();
        main.instrs.insert(0, Instr::New { dst, class: sigs.classes[ci].clone(), arg: VarId::arg() });
        shift_targets(&mut main, 0);
    }
    p.classes.get_mut(&sigs.classes[0]).unwrap().methods.insert(main.name.clone(), main);
    p
}

/// Renumbers jump and handler targets after an instruction was inserted at `at`.
fn shift_targets(m: &mut MethodDef, at: usize) {
    for ins in &mut m.instrs[at + 1..] {
        if let Instr::IfStar { target } = ins {
            if *target >= at {
                *target += 1;
            }
        }
    }
    m.handlers = std::mem::take(&mut m.handlers)
        .into_iter()
        .map(|((pc, e), t)| ((if pc >= at { pc + 1 } else { pc }, e), if t >= at { t + 1 } else { t }))
        .collect();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::has_errors;
    use crate::model::validate_structure;

    #[test]
    fn deterministic() {
        let b = GenBounds::default();
        for seed in 0..20 {
            assert_eq!(generate_program(seed, &b), generate_program(seed, &b));
        }
    }

    #[test]
    fn minimal_bounds() {
        let b = GenBounds { max_classes: 1, max_instrs_per_method: 1, ..GenBounds::default() };
        for seed in 0..20 {
            let p = generate_program(seed, &b);
            assert_eq!(p.classes.len(), 1);
            let cd = p.classes.values().next().unwrap();
            assert_eq!(cd.ctor.instrs, vec![Instr::Return { var: VarId::this() }]);
        }
    }

    #[test]
    fn always_structurally_valid() {
        let b = GenBounds::default();
        for seed in 0..2000 {
            let p = generate_program(seed, &b);
            let d = validate_structure(&p);
            assert!(!has_errors(&d), "seed {seed}: {d:?}");
        }
    }
}
