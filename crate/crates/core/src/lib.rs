pub mod binary_symplectic;
pub mod clifford_dictionaries;
pub mod error;
pub mod extent_pipeline;
pub mod gate_library;
pub mod l1_solver;
pub mod operator;
pub mod symmetry_reduction;
