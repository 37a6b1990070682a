//! Example programs shipped with the crate, also used as regression tests.

macro_rules! corpus {
    ($($name:ident => $file:literal),* $(,)?) => {
        $(pub const $name: &str = include_str!(concat!("../corpus/", $file));)*
        /// Every corpus file as `(file name, source)`.
        pub const ALL: &[(&str, &str)] = &[$(($file, $name)),*];
    };
}

corpus! {
    MINIMAL => "minimal.rt",
    CLASSLOADER => "classloader.rt",
    CLASSLOADER_ATTACK => "classloader_attack.rt",
    CLASSLOADER_PATCHED => "classloader_patched.rt",
    CLASSLOADER_CAST => "classloader_cast.rt",
    EX1_RAW_CLASS => "ex1_raw_class.rt",
    EX1_INIT_GETTER => "ex1_init_getter.rt",
    SETINIT_REGISTER => "setinit_register.rt",
    SETINIT_MISSING => "setinit_missing.rt",
}

/// Looks a corpus program up by file name.
pub fn get(file: &str) -> Option<&'static str> {
    ALL.iter().find(|(f, _)| *f == file).map(|(_, src)| *src)
}

/// The corpus programs the checker accepts, in corpus order.
pub fn well_typed() -> Vec<crate::model::Program> {
    ALL.iter()
        .filter_map(|(_, src)| crate::parser::parse(src).ok())
        .filter(|p| crate::checker::check_program(p).is_well_typed())
        .collect()
}
