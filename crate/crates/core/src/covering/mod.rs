//! Fuchsian covering of the complement of a finite gap set by the disk.

mod blaschke;
mod boundary;
mod fit;
mod group;
mod map;
mod mobius;

pub use blaschke::{
    blaschke_character, blaschke_factor, probes, BlaschkeEvaluator, BlaschkeValue, Character,
};
pub use boundary::{
    boundary_value, free_arcs, min_boundary_phase_slope, pushforward_check, ArcEnd, BoundaryNode,
    BoundaryRule, BoundarySamples, FreeArc, PushforwardCheck,
};
pub use fit::{
    automorphy_residual, fit_circles, initial_angles, slit_residuals, CircleFit, FIT_ACCEPT,
    FIT_TOL,
};
pub use group::{linear_fit, BurnsideSums, Orthocircle, OrthocircleGroup, Word, DEFAULT_WORD_CAP};
pub use map::{map_length_cap, CoveringMap, MAP_MAX_LENGTH, MAP_TAIL_TOL, MAP_WORD_BUDGET};
pub use mobius::MobiusMap;
