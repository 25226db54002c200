//! The fixture corpus shipped under `fixtures/`, parsed on demand.

use crate::polygraph::{parse_polygraph, Polygraph};

pub const AA_TEXT: &str = include_str!("../../../fixtures/AA.opd");
pub const XYZ_TEXT: &str = include_str!("../../../fixtures/XYZ.opd");
pub const KA_TEXT: &str = include_str!("../../../fixtures/KA.opd");
pub const KA_ORDERED_TEXT: &str = include_str!("../../../fixtures/KA-ordered.opd");
pub const KO_TEXT: &str = include_str!("../../../fixtures/KO.opd");
pub const KO_ORDERED_TEXT: &str = include_str!("../../../fixtures/KO-ordered.opd");
pub const MONO_TEXT: &str = include_str!("../../../fixtures/MONO.opd");

pub fn aa() -> Polygraph {
    parse_polygraph(AA_TEXT).expect("AA fixture parses")
}

pub fn xyz() -> Polygraph {
    parse_polygraph(XYZ_TEXT).expect("XYZ fixture parses")
}

pub fn ka() -> Polygraph {
    parse_polygraph(KA_TEXT).expect("KA fixture parses")
}

pub fn ka_ordered() -> Polygraph {
    parse_polygraph(KA_ORDERED_TEXT).expect("KA-ordered fixture parses")
}

pub fn ko() -> Polygraph {
    parse_polygraph(KO_TEXT).expect("KO fixture parses")
}

pub fn ko_ordered() -> Polygraph {
    parse_polygraph(KO_ORDERED_TEXT).expect("KO-ordered fixture parses")
}

pub fn mono() -> Polygraph {
    parse_polygraph(MONO_TEXT).expect("MONO fixture parses")
}
