//! Declarative run configuration and the suite runner behind the CLI.

mod config;
mod run;

pub use config::{
    FamilyDecl, ReductionDecl, RunConfig, SolutionDecl, SuiteName, TransformDecl, WaveDecl, ALL_SUITES,
};
pub use run::{execute, trivial_specs, Expectation, RunReport, SuiteItem, SuiteResult, CONTROL_MARGIN, SCHEMA_VERSION};
