//! Diagnostics shared by the parser, the structural validator and the checker.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::model::{ClassId, FieldId, MethodRef};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SourceLocation {
    pub file: String,
    /// 1-based.
    pub line: u32,
    /// 1-based.
    pub column: u32,
}

impl SourceLocation {
    pub fn new(file: impl Into<String>, line: u32, column: u32) -> Self {
        Self { file: file.into(), line: line.max(1), column: column.max(1) }
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

/// The closed set of diagnostic codes. `as_str` values are a stable public contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    // lexing and parsing
    LexError,
    SyntaxError,
    EmptyProgram,
    DuplicateDefinition,
    PcLabelMismatch,
    MissingConstructor,
    // structure
    UnresolvedName,
    ReservedName,
    MissingMain,
    EmptyMethod,
    MissingNextInstruction,
    TargetOutOfRange,
    ConstructorReturnNotThis,
    AssignToThis,
    HierarchyCycle,
    HierarchyRoot,
    SuperCallInRoot,
    SuperCallOutsideConstructor,
    SetInitOutsideConstructor,
    // typing
    ConstructorPreViolation,
    FieldWriteViolation,
    ReturnPostViolation,
    ReturnTypeViolation,
    ConstructorReturnUninitialized,
    NewArgViolation,
    SuperArgViolation,
    CallPreViolationStatic,
    CallArgViolationStatic,
    SetInitOrderViolationStatic,
    OverridePreViolation,
    OverrideArgViolation,
    OverridePostViolation,
    OverrideRetViolation,
    UnreachableCode,
}

impl Code {
    pub const ALL: &'static [Code] = &[
        Code::LexError,
        Code::SyntaxError,
        Code::EmptyProgram,
        Code::DuplicateDefinition,
        Code::PcLabelMismatch,
        Code::MissingConstructor,
        Code::UnresolvedName,
        Code::ReservedName,
        Code::MissingMain,
        Code::EmptyMethod,
        Code::MissingNextInstruction,
        Code::TargetOutOfRange,
        Code::ConstructorReturnNotThis,
        Code::AssignToThis,
        Code::HierarchyCycle,
        Code::HierarchyRoot,
        Code::SuperCallInRoot,
        Code::SuperCallOutsideConstructor,
        Code::SetInitOutsideConstructor,
        Code::ConstructorPreViolation,
        Code::FieldWriteViolation,
        Code::ReturnPostViolation,
        Code::ReturnTypeViolation,
        Code::ConstructorReturnUninitialized,
        Code::NewArgViolation,
        Code::SuperArgViolation,
        Code::CallPreViolationStatic,
        Code::CallArgViolationStatic,
        Code::SetInitOrderViolationStatic,
        Code::OverridePreViolation,
        Code::OverrideArgViolation,
        Code::OverridePostViolation,
        Code::OverrideRetViolation,
        Code::UnreachableCode,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Code::LexError => "lex-error",
            Code::SyntaxError => "syntax-error",
            Code::EmptyProgram => "empty-program",
            Code::DuplicateDefinition => "duplicate-definition",
            Code::PcLabelMismatch => "pc-label-mismatch",
            Code::MissingConstructor => "missing-constructor",
            Code::UnresolvedName => "unresolved-name",
            Code::ReservedName => "reserved-name",
            Code::MissingMain => "missing-main",
            Code::EmptyMethod => "empty-method",
            Code::MissingNextInstruction => "missing-next-instruction",
            Code::TargetOutOfRange => "target-out-of-range",
            Code::ConstructorReturnNotThis => "constructor-return-not-this",
            Code::AssignToThis => "assign-to-this",
            Code::HierarchyCycle => "hierarchy-cycle",
            Code::HierarchyRoot => "hierarchy-root",
            Code::SuperCallInRoot => "super-call-in-root",
            Code::SuperCallOutsideConstructor => "super-call-outside-constructor",
            Code::SetInitOutsideConstructor => "setinit-outside-constructor",
            Code::ConstructorPreViolation => "constructor-pre-violation",
            Code::FieldWriteViolation => "field-write-violation",
            Code::ReturnPostViolation => "return-post-violation",
            Code::ReturnTypeViolation => "return-type-violation",
            Code::ConstructorReturnUninitialized => "constructor-return-uninitialized",
            Code::NewArgViolation => "new-arg-violation",
            Code::SuperArgViolation => "super-arg-violation",
            Code::CallPreViolationStatic => "call-pre-violation-static",
            Code::CallArgViolationStatic => "call-arg-violation-static",
            Code::SetInitOrderViolationStatic => "setinit-order-violation-static",
            Code::OverridePreViolation => "override-pre-violation",
            Code::OverrideArgViolation => "override-arg-violation",
            Code::OverridePostViolation => "override-post-violation",
            Code::OverrideRetViolation => "override-ret-violation",
            Code::UnreachableCode => "unreachable-code",
        }
    }

    /// Whether the code is produced before type checking (parse or structural failure).
    pub fn is_structural(self) -> bool {
        self <= Code::SetInitOutsideConstructor
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Code {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Program element a diagnostic is about, independent of any source text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Site {
    Program,
    Class { class: ClassId },
    Field { field: FieldId },
    Method { method: MethodRef },
    Instr { method: MethodRef, pc: usize },
    Handler { method: MethodRef, pc: usize },
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Program => f.write_str("program"),
            Site::Class { class } => write!(f, "class {class}"),
            Site::Field { field } => write!(f, "field {field}"),
            Site::Method { method } => write!(f, "{method}"),
            Site::Instr { method, pc } => write!(f, "{method}@{pc}"),
            Site::Handler { method, pc } => write!(f, "{method} handler@{pc}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<SourceLocation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub site: Option<Site>,
}

impl Diagnostic {
    pub fn error(code: Code, message: impl Into<String>) -> Self {
        Self { severity: Severity::Error, code, message: message.into(), location: None, site: None }
    }

    pub fn warning(code: Code, message: impl Into<String>) -> Self {
        Self { severity: Severity::Warning, code, message: message.into(), location: None, site: None }
    }

    pub fn at(mut self, site: Site) -> Self {
        self.site = Some(site);
        self
    }

    pub fn located(mut self, location: SourceLocation) -> Self {
        self.location = Some(location);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.location, &self.site) {
            (Some(loc), _) => write!(f, "{loc} {} {}", self.code, self.message),
            (None, Some(site)) => write!(f, "{site}: {} {}", self.code, self.message),
            (None, None) => write!(f, "{} {}", self.code, self.message),
        }
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn codes_are_distinct() {
        let names: HashSet<_> = Code::ALL.iter().map(|c| c.as_str()).collect();
        assert_eq!(names.len(), Code::ALL.len());
    }

    #[test]
    fn structural_partition() {
        assert!(Code::HierarchyCycle.is_structural());
        assert!(Code::SetInitOutsideConstructor.is_structural());
        assert!(!Code::CallPreViolationStatic.is_structural());
        assert!(!Code::UnreachableCode.is_structural());
    }

    #[test]
    fn location_clamps_to_one() {
        let loc = SourceLocation::new("a.rt", 0, 0);
        assert_eq!((loc.line, loc.column), (1, 1));
    }
}
