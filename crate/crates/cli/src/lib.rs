//! Scenario files, the command runner and report emission for `relci`.

pub mod parse;
pub mod report;
pub mod run;
pub mod scenario;
