//! Command-line tools and file formats on top of `foldsaddle-core`:
//! SVG portraits, CSV/JSON diagram tables, parallel sweeps and the
//! self-verification suite.

pub mod acceptance;
pub mod cli;
pub mod config;
pub mod report;
pub mod svg;
pub mod sweep;
pub mod tables;
