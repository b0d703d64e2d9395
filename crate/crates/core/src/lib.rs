//! Monochromatic polynomial patterns in finite colorings of `[1..N]`:
//! pattern families, witness search, avoiding colorings and thresholds, the
//! bitset construction for `{x, x + y, xy}`, and reductions to quadratic
//! and multiplicative equations.

pub mod avoid;
pub mod coloring;
pub mod constructive;
pub mod error;
pub mod family;
pub mod poly;
pub mod rational;
pub mod reductions;
pub mod witness;

pub use avoid::{
    check_certificate, enumerate_avoiders, exists_avoiding, greedy_avoider, threshold, verify_certificate,
    AvoidCertificate, AvoidOptions, GreedyStrategy, SearchLimits, SearchStats, ThresholdResult, ThresholdValue,
};
pub use coloring::{Coloring, RunLengthColoring};
pub use constructive::{run_construction, ConstructionParams, ConstructionWitness, ConstructiveTrace, IntSet};
pub use error::{ColoringError, ConstructionError, FamilyError, PolyError, ReductionError, SearchError};
pub use family::{moreira_family, parse_preset, preset_family, reduction_family, MoreiraSpec, PatternFamily};
pub use poly::{IntPoly, MachinePoly};
pub use rational::{rational_roots_deg2, Rational};
pub use reductions::{
    check_quad_solution, exp_lift, lift_coloring, quadratic_setup, solve_quadratic, QuadSolution, ReductionData,
    SolveOptions,
};
pub use witness::{
    count_witnesses, enumerate_instances, find_all_witnesses, find_first_witness, verify_witness, CompiledFamily,
    Instance, SearchBox, Witness, WitnessOptions, WitnessRecord,
};
