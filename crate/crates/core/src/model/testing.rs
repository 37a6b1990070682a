use super::{ClassDef, Instr, MethodDef, Program, VarId};

/// A program with the given `(class, super)` pairs, trivial constructors and a `main` in the first class.
pub fn hierarchy(classes: &[(&str, Option<&str>)]) -> Program {
    let mut p = Program::new(classes[0].0);
    for (i, (name, sup)) in classes.iter().enumerate() {
        let body = match sup {
            Some(_) => vec![Instr::SuperCall { arg: VarId::arg() }, Instr::Return { var: VarId::this() }],
            None => vec![Instr::Return { var: VarId::this() }],
        };
        let mut cd = ClassDef::new(*name, *sup, body);
        if i == 0 {
            cd = cd.with_method(MethodDef::new("main", vec![Instr::Return { var: VarId::new("x") }]));
        }
        p = p.with_class(cd);
    }
    p
}
