//! Script front end for the superloops library.
//!
//! A script declares generators, forms, loops and pole families, then runs
//! one verification command. Running a script yields a [`Report`] with a
//! JSON and a text rendering.

pub mod error;
pub mod eval;
pub mod report;
pub mod suite;
pub mod syntax;

pub use error::{CliError, Pos, ScriptError};
pub use eval::{run, run_source, Options};
pub use report::Report;
pub use syntax::{parse, Script};
