//! Batch front end for the cohwork workbench: jobs, reports and the
//! equivalence chart.

pub mod equivalence;
pub mod job;
pub mod output;

pub use equivalence::{classify_equivalence, Artifacts, Chart, Claim, EquivalenceCertificate, Level, Status};
pub use job::{run, Command, JobConfig, JobOutcome};
pub use output::{Format, JobReport};
