//! Concrete syntax (`.rt` files): parsing and canonical printing.
//!
//! ```text
//! class Object {
//!   init(arg: Init) pre Raw post Raw(Object) ret Init {
//!     0: return this;
//!   }
//! }
//! class Main extends Object {
//!   field f : Raw;
//!   init() { 0: super(arg); 1: return this; }
//!   method main() {
//!     0: x <- new Main(arg);
//!     1: if * jmp 3;
//!     2: y <- x.Main::main(arg);
//!     3: return x;
//!     handler 2 np -> 3;
//!   }
//! }
//! main Main;
//! ```
//!
//! Omitted annotations are filled with the safe defaults before the program is validated.

mod grammar;
mod lexer;
mod print;

use std::collections::BTreeMap;

use crate::diag::{has_errors, Code, Diagnostic, Site, SourceLocation};
use crate::model::{apply_default_annotations, validate_structure, ClassId, FieldId, MethodRef, PartialProgram, Program};

pub use print::pretty_print;

/// Where each program element was written.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceMap {
    pub file: String,
    pub main: Option<SourceLocation>,
    pub classes: BTreeMap<ClassId, SourceLocation>,
    pub fields: BTreeMap<FieldId, SourceLocation>,
    pub methods: BTreeMap<MethodRef, SourceLocation>,
    pub instrs: BTreeMap<(MethodRef, usize), SourceLocation>,
    pub handlers: BTreeMap<(MethodRef, usize), SourceLocation>,
}

impl SourceMap {
    pub fn new(file: &str) -> Self {
        Self { file: file.to_string(), ..Default::default() }
    }

    pub fn locate(&self, site: &Site) -> Option<SourceLocation> {
        let start = || SourceLocation::new(self.file.clone(), 1, 1);
        match site {
            Site::Program => self.main.clone().or_else(|| Some(start())),
            Site::Class { class } => self.classes.get(class).cloned(),
            Site::Field { field } => self.fields.get(field).cloned(),
            Site::Method { method } => self.methods.get(method).cloned(),
            Site::Instr { method, pc } => {
                self.instrs.get(&(method.clone(), *pc)).or_else(|| self.methods.get(method)).cloned()
            }
            Site::Handler { method, pc } => {
                self.handlers.get(&(method.clone(), *pc)).or_else(|| self.methods.get(method)).cloned()
            }
        }
    }

    /// Fills in the location of every diagnostic that has a site but no location.
    pub fn attach(&self, diags: &mut [Diagnostic]) {
        for d in diags {
            if d.location.is_none() {
                d.location = d.site.as_ref().and_then(|s| self.locate(s));
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Parsed {
    pub program: Program,
    pub source_map: SourceMap,
}

/// Parses without applying defaults or validating.
pub fn parse_partial(file: &str, src: &str) -> Result<(PartialProgram, SourceMap), Vec<Diagnostic>> {
    let toks = lexer::lex(file, src)?;
    let mut parser = grammar::Parser::new(file, toks);
    let partial = match parser.program() {
        Ok(Some(p)) => p,
        Ok(None) => {
            return Err(vec![Diagnostic::error(Code::EmptyProgram, "the input contains no declarations")
                .located(SourceLocation::new(file, 1, 1))])
        }
        Err(d) => {
            let mut errors = parser.errors;
            errors.push(d);
            return Err(errors);
        }
    };
    if !parser.errors.is_empty() {
        return Err(parser.errors);
    }
    Ok((partial, parser.map))
}

/// Parses, applies default annotations and validates the structure of a program.
pub fn parse_file(file: &str, src: &str) -> Result<Parsed, Vec<Diagnostic>> {
    let (partial, source_map) = parse_partial(file, src)?;
    let program = apply_default_annotations(partial);
    let mut diags = validate_structure(&program);
    if has_errors(&diags) {
        source_map.attach(&mut diags);
        return Err(diags);
    }
    Ok(Parsed { program, source_map })
}

pub fn parse(src: &str) -> Result<Program, Vec<Diagnostic>> {
    parse_file("<input>", src).map(|p| p.program)
}
