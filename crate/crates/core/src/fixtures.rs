//! Built-in programs, shipped as TOML files under `programs/`.

use crate::program::TransformProgram;
use crate::program_file::parse_program;

pub const CONSTRUCTION_3_4_TOML: &str = include_str!("../programs/construction-3-4.toml");
pub const EXAMPLE_5_6_TOML: &str = include_str!("../programs/example-5-6.toml");
pub const PURE_QUADRATIC_TOML: &str = include_str!("../programs/pure-quadratic.toml");
pub const QUADRATIC_EXTENDED_D4_TOML: &str = include_str!("../programs/quadratic-extended-d4.toml");

pub const NAMES: [&str; 4] = [
    "construction-3-4",
    "example-5-6",
    "pure-quadratic",
    "quadratic-extended-d4",
];

pub fn source(name: &str) -> Option<&'static str> {
    match name {
        "construction-3-4" => Some(CONSTRUCTION_3_4_TOML),
        "example-5-6" => Some(EXAMPLE_5_6_TOML),
        "pure-quadratic" => Some(PURE_QUADRATIC_TOML),
        "quadratic-extended-d4" => Some(QUADRATIC_EXTENDED_D4_TOML),
        _ => None,
    }
}

pub fn by_name(name: &str) -> Option<TransformProgram> {
    source(name).map(|text| parse_program(text).expect("shipped programs are valid"))
}

pub fn construction_3_4() -> TransformProgram {
    by_name("construction-3-4").expect("known fixture")
}

pub fn example_5_6() -> TransformProgram {
    by_name("example-5-6").expect("known fixture")
}

pub fn pure_quadratic() -> TransformProgram {
    by_name("pure-quadratic").expect("known fixture")
}

pub fn quadratic_extended_d4() -> TransformProgram {
    by_name("quadratic-extended-d4").expect("known fixture")
}

pub fn all() -> Vec<(&'static str, TransformProgram)> {
    NAMES.iter().map(|&n| (n, by_name(n).expect("known fixture"))).collect()
}
