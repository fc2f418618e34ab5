//! Spectral correspondence on the computer: pushforwards to the line,
//! direct images with their Higgs fields, and the nilpotent cone.

pub mod lattice;

pub use lattice::{lattice_of_c, lattice_of_ct, Cover, LatticePair, SplittingType};
pub mod higgs;

pub use higgs::{
    baker_akhiezer_divisor, c_section, c_value, check_higgs_structure, construct_nilpotent, destabilizer_search,
    direct_image, hh_limit_status, hom_line_to_e, iso_trivial, nilpotent_from_quad, quad_from_nilpotent, verify_section,
    wedge, CSection, ChartMatrices, DestabilizerResult, HhLimit, HhLimitReport, HiggsBundleData, Injection,
    StabilityTest,
};
