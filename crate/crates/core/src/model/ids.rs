use std::borrow::Borrow;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

macro_rules! ident {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        #[serde(transparent)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(name: impl AsRef<str>) -> Self {
                Self(Arc::from(name.as_ref()))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({:?})", stringify!($name), &*self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self::new(s)
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self::new(s)
            }
        }

        impl Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

ident!(
    /// Name of a class.
    ClassId
);
ident!(
    /// Name of a method. Constructors use the reserved name `init`.
    MethodName
);
ident!(
    /// Name of an instance field. Field names are global to a program.
    FieldId
);
ident!(
    /// Name of a local variable. `this` and `arg` exist in every method.
    VarId
);
ident!(
    /// Name of an exception kind.
    ExcId
);

pub const THIS: &str = "this";
pub const ARG: &str = "arg";
pub const CTOR: &str = "init";
pub const MAIN: &str = "main";

/// Null dereference.
pub const EXC_NULL: &str = "np";
/// Failed dynamic initialization cast.
pub const EXC_CAST: &str = "cce";
/// Virtual call on a receiver whose class does not conform to the call's declaring class.
pub const EXC_CLASS_CHANGE: &str = "icce";

impl VarId {
    pub fn this() -> Self {
        Self::new(THIS)
    }

    pub fn arg() -> Self {
        Self::new(ARG)
    }

    pub fn is_this(&self) -> bool {
        self.as_str() == THIS
    }
}

impl MethodName {
    pub fn ctor() -> Self {
        Self::new(CTOR)
    }

    pub fn is_ctor(&self) -> bool {
        self.as_str() == CTOR
    }
}

/// A method identified by its declaring class and name (`init` for the constructor).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MethodRef {
    pub class: ClassId,
    pub name: MethodName,
}

impl MethodRef {
    pub fn new(class: ClassId, name: MethodName) -> Self {
        Self { class, name }
    }

    pub fn ctor(class: ClassId) -> Self {
        Self { class, name: MethodName::ctor() }
    }

    pub fn is_ctor(&self) -> bool {
        self.name.is_ctor()
    }
}

impl fmt::Display for MethodRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.class, self.name)
    }
}
