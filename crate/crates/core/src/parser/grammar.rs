use std::collections::BTreeMap;

use super::lexer::{loc, Pos, Tok, Token};
use super::SourceMap;
use crate::diag::{Code, Diagnostic};
use crate::model::{
    ClassId, ExcId, Expr, FieldId, InitType, Instr, MethodName, MethodRef, PartialClass, PartialMethod,
    PartialProgram, VarId,
};

const KEYWORDS: &[&str] = &[
    "class", "extends", "field", "init", "method", "pre", "post", "ret", "handler", "return", "setinit", "super", "if",
    "jmp", "new", "null", "Init", "Raw",
];

type PResult<T> = Result<T, Diagnostic>;

pub(crate) struct Parser<'a> {
    file: &'a str,
    toks: Vec<Token>,
    pos: usize,
    /// Non-fatal diagnostics (duplicates, label mismatches).
    pub errors: Vec<Diagnostic>,
    pub map: SourceMap,
}

impl<'a> Parser<'a> {
    pub fn new(file: &'a str, toks: Vec<Token>) -> Self {
        Self { file, toks, pos: 0, errors: Vec::new(), map: SourceMap::new(file) }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn here(&self) -> Pos {
        self.toks[self.pos].pos
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax(&self, what: &str) -> Diagnostic {
        Diagnostic::error(Code::SyntaxError, format!("expected {what}, found {}", self.peek()))
            .located(loc(self.file, self.here()))
    }

    fn expect(&mut self, t: Tok) -> PResult<Pos> {
        if *self.peek() == t {
            Ok(self.advance().pos)
        } else {
            Err(self.syntax(&t.to_string()))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Pos> {
        if self.is_kw(kw) {
            Ok(self.advance().pos)
        } else {
            Err(self.syntax(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let pos = self.advance().pos;
                Ok((s, pos))
            }
            _ => Err(self.syntax(what)),
        }
    }

    fn var(&mut self) -> PResult<VarId> {
        self.ident("a variable").map(|(s, _)| VarId::new(s))
    }

    fn int(&mut self, what: &str) -> PResult<(usize, Pos)> {
        match *self.peek() {
            Tok::Int(n) => {
                let pos = self.advance().pos;
                Ok((n, pos))
            }
            _ => Err(self.syntax(what)),
        }
    }

    fn duplicate(&mut self, what: String, pos: Pos) {
        self.errors.push(Diagnostic::error(Code::DuplicateDefinition, what).located(loc(self.file, pos)));
    }

    pub fn program(&mut self) -> PResult<Option<PartialProgram>> {
        if *self.peek() == Tok::Eof {
            return Ok(None);
        }
        let mut classes: BTreeMap<ClassId, PartialClass> = BTreeMap::new();
        let mut main: Option<ClassId> = None;
        while *self.peek() != Tok::Eof {
            if self.is_kw("main") {
                let kw = self.advance().pos;
                let (name, pos) = self.ident("the main class name")?;
                self.expect(Tok::Semi)?;
                if main.is_some() {
                    self.duplicate("`main` declared twice".into(), kw);
                } else {
                    main = Some(ClassId::new(&name));
                    self.map.main = Some(loc(self.file, pos));
                }
            } else if self.is_kw("class") {
                let class = self.class()?;
                // Duplicates were reported when the name was read.
                classes.entry(class.id.clone()).or_insert(class);
            } else {
                return Err(self.syntax("`class` or `main`"));
            }
        }
        let main = match main {
            Some(m) => m,
            None => {
                let pos = self.here();
                self.errors.push(
                    Diagnostic::error(Code::MissingMain, "missing `main C;` declaration").located(loc(self.file, pos)),
                );
                ClassId::new("")
            }
        };
        Ok(Some(PartialProgram { classes, main }))
    }

    fn class(&mut self) -> PResult<PartialClass> {
        let kw = self.expect_kw("class")?;
        let (name, name_pos) = self.ident("a class name")?;
        let id = ClassId::new(&name);
        if self.map.classes.contains_key(&id) {
            self.duplicate(format!("class `{id}` declared twice"), name_pos);
        } else {
            self.map.classes.insert(id.clone(), loc(self.file, name_pos));
        }
        let super_class = if self.eat_kw("extends") {
            Some(ClassId::new(self.ident("a super class name")?.0))
        } else {
            None
        };
        self.expect(Tok::LBrace)?;
        let mut fields = Vec::new();
        let mut methods: BTreeMap<MethodName, PartialMethod> = BTreeMap::new();
        let mut ctor: Option<PartialMethod> = None;
        loop {
            if *self.peek() == Tok::RBrace {
                self.advance();
                break;
            }
            if self.is_kw("field") {
                self.advance();
                let (f, pos) = self.ident("a field name")?;
                let ty = if *self.peek() == Tok::Colon {
                    self.advance();
                    Some(self.ty()?)
                } else {
                    None
                };
                self.expect(Tok::Semi)?;
                let f = FieldId::new(f);
                if self.map.fields.contains_key(&f) {
                    self.duplicate(format!("field `{f}` declared twice"), pos);
                } else {
                    self.map.fields.insert(f.clone(), loc(self.file, pos));
                    fields.push((f, ty));
                }
            } else if self.is_kw("init") {
                let pos = self.here();
                self.advance();
                let m = self.method_rest(&id, MethodName::ctor(), pos, true)?;
                if ctor.is_some() {
                    self.duplicate(format!("class `{id}` has more than one constructor"), pos);
                } else {
                    ctor = Some(m);
                }
            } else if self.is_kw("method") {
                self.advance();
                let pos = self.here();
                let name = match self.peek().clone() {
                    Tok::Ident(s) if s == "init" => {
                        return Err(Diagnostic::error(
                            Code::ReservedName,
                            "`init` is reserved for constructors",
                        )
                        .located(loc(self.file, pos)))
                    }
                    _ => MethodName::new(self.ident("a method name")?.0),
                };
                if methods.contains_key(&name) {
                    // Parse it anyway so the rest of the class is checked.
                    self.duplicate(format!("method `{id}.{name}` declared twice"), pos);
                    let mut scratch = std::mem::replace(&mut self.map, SourceMap::new(self.file));
                    let r = self.method_rest(&id, name, pos, false);
                    std::mem::swap(&mut self.map, &mut scratch);
                    r?;
                } else {
                    let m = self.method_rest(&id, name.clone(), pos, false)?;
                    methods.insert(name, m);
                }
            } else {
                return Err(self.syntax("`field`, `init`, `method` or `}`"));
            }
        }
        let ctor = match ctor {
            Some(c) => c,
            None => {
                return Err(Diagnostic::error(Code::MissingConstructor, format!("class `{id}` has no constructor"))
                    .located(loc(self.file, kw)))
            }
        };
        Ok(PartialClass { id, super_class, fields, methods, ctor })
    }

    fn ty(&mut self) -> PResult<InitType> {
        if self.eat_kw("Init") {
            Ok(InitType::Init)
        } else if self.eat_kw("Raw") {
            if *self.peek() == Tok::LParen {
                self.advance();
                let (c, _) = self.ident("a class name")?;
                self.expect(Tok::RParen)?;
                Ok(InitType::Raw(ClassId::new(c)))
            } else {
                Ok(InitType::RawBot)
            }
        } else {
            Err(self.syntax("a type (`Init`, `Raw` or `Raw(C)`)"))
        }
    }

    fn method_rest(&mut self, class: &ClassId, name: MethodName, pos: Pos, ctor: bool) -> PResult<PartialMethod> {
        let mref = MethodRef::new(class.clone(), name.clone());
        self.map.methods.insert(mref.clone(), loc(self.file, pos));
        self.expect(Tok::LParen)?;
        let mut argtype = None;
        if *self.peek() != Tok::RParen {
            let (a, apos) = self.ident("`arg`")?;
            if a != "arg" {
                return Err(Diagnostic::error(Code::SyntaxError, format!("the parameter must be named `arg`, found `{a}`"))
                    .located(loc(self.file, apos)));
            }
            if *self.peek() == Tok::Colon {
                self.advance();
                argtype = Some(self.ty()?);
            }
        }
        self.expect(Tok::RParen)?;
        let pre = if self.eat_kw("pre") { Some(self.ty()?) } else { None };
        let post = if self.eat_kw("post") { Some(self.ty()?) } else { None };
        let rettype = if self.eat_kw("ret") { Some(self.ty()?) } else { None };
        self.expect(Tok::LBrace)?;
        let mut instrs = Vec::new();
        let mut handlers = BTreeMap::new();
        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.advance();
                    break;
                }
                Tok::Ident(s) if s == "handler" => {
                    let hpos = self.advance().pos;
                    let (pc, _) = self.int("a handled pc")?;
                    let (exc, _) = self.ident("an exception name")?;
                    self.expect(Tok::RArrow)?;
                    let (target, _) = self.int("a handler pc")?;
                    self.expect(Tok::Semi)?;
                    let key = (pc, ExcId::new(&exc));
                    if handlers.contains_key(&key) {
                        self.duplicate(format!("handler for `{exc}` at pc {pc} declared twice"), hpos);
                    } else {
                        handlers.insert(key, target);
                        self.map.handlers.entry((mref.clone(), pc)).or_insert_with(|| loc(self.file, hpos));
                    }
                }
                Tok::Int(_) => {
                    let (label, lpos) = self.int("a pc label")?;
                    let pc = instrs.len();
                    if label != pc {
                        self.errors.push(
                            Diagnostic::error(Code::PcLabelMismatch, format!("expected label {pc}, found {label}"))
                                .located(loc(self.file, lpos)),
                        );
                    }
                    self.expect(Tok::Colon)?;
                    let ins = self.instr()?;
                    self.expect(Tok::Semi)?;
                    self.map.instrs.insert((mref.clone(), pc), loc(self.file, lpos));
                    instrs.push(ins);
                }
                _ => return Err(self.syntax("a labelled instruction, `handler` or `}`")),
            }
        }
        Ok(PartialMethod { name, instrs, handlers, pre, post, argtype, rettype, is_constructor: ctor })
    }

    fn instr(&mut self) -> PResult<Instr> {
        if self.eat_kw("return") {
            return Ok(Instr::Return { var: self.var()? });
        }
        if self.eat_kw("setinit") {
            return Ok(Instr::SetInit);
        }
        if self.eat_kw("super") {
            self.expect(Tok::LParen)?;
            let arg = self.var()?;
            self.expect(Tok::RParen)?;
            return Ok(Instr::SuperCall { arg });
        }
        if self.eat_kw("if") {
            self.expect(Tok::Star)?;
            self.expect_kw("jmp")?;
            let (target, _) = self.int("a jump target")?;
            return Ok(Instr::IfStar { target });
        }
        let first = self.var()?;
        if *self.peek() == Tok::Dot {
            self.advance();
            let (f, _) = self.ident("a field name")?;
            self.expect(Tok::LArrow)?;
            let src = self.var()?;
            return Ok(Instr::FieldWrite { obj: first, field: FieldId::new(f), src });
        }
        self.expect(Tok::LArrow)?;
        self.rhs(first)
    }

    fn rhs(&mut self, dst: VarId) -> PResult<Instr> {
        if self.eat_kw("new") {
            let (c, _) = self.ident("a class name")?;
            self.expect(Tok::LParen)?;
            let arg = self.var()?;
            self.expect(Tok::RParen)?;
            return Ok(Instr::New { dst, class: ClassId::new(c), arg });
        }
        if *self.peek() == Tok::LParen {
            self.advance();
            let cast = self.ty()?;
            self.expect(Tok::RParen)?;
            let src = self.var()?;
            return match cast {
                InitType::Init => Ok(Instr::CastInit { dst, src }),
                InitType::Raw(class) => Ok(Instr::CastRaw { dst, class, src }),
                InitType::RawBot => Err(Diagnostic::error(Code::SyntaxError, "a cast to `Raw` checks nothing; use `Raw(C)`")
                    .located(loc(self.file, self.here()))),
            };
        }
        // Virtual call: `r.D::m(y)`.
        if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Dot && *self.peek_at(3) == Tok::DColon {
            let recv = self.var()?;
            self.expect(Tok::Dot)?;
            let (declaring, _) = self.ident("a class name")?;
            self.expect(Tok::DColon)?;
            let (method, mpos) = self.ident("a method name")?;
            if method == "init" {
                return Err(Diagnostic::error(Code::ReservedName, "constructors cannot be called virtually")
                    .located(loc(self.file, mpos)));
            }
            self.expect(Tok::LParen)?;
            let arg = self.var()?;
            self.expect(Tok::RParen)?;
            return Ok(Instr::VirtualCall {
                dst,
                recv,
                declaring: ClassId::new(declaring),
                method: MethodName::new(method),
                arg,
            });
        }
        let mut e = if self.eat_kw("null") { Expr::Null } else { Expr::Var(self.var()?) };
        while *self.peek() == Tok::Dot {
            self.advance();
            let (f, _) = self.ident("a field name")?;
            e = Expr::Field(Box::new(e), FieldId::new(f));
        }
        Ok(Instr::Assign { dst, expr: e })
    }
}
