//! Szegő-class tests, Jost functions and solutions, the disk m-function
//! representation, ratio asymptotics and characters of Jacobi matrices.

mod asymptotics;
mod character;
mod jost;
mod mh;
mod report;
mod spectral;

pub use asymptotics::{asymptotic_ratio, pn_ratio, AsymptoticRatio, PnRatio};
pub use character::{
    character_of_j, character_with_probes, match_torus_character, phase_distance, stripping_check,
    walk_characters, TorusMatch, MATCH_TOL, RESOLUTION_TOL,
};
pub use jost::{
    jost_function, jost_solution, jost_u0, JostContext, JostData, JostSolution, BOUNDARY_TAIL_TOL,
    NODES_PER_ARC,
};
pub use mh::{mh_representation_check, DiskMFunction, MhCheck};
pub use report::{
    szego_class_report, szego_report_from_parts, tail_matches, SzegoReport, PRODUCT_HORIZON,
};
pub use spectral::operator_measure;
