//! IO, file formats, and the command-line pipeline around `jumpgame-core`.

pub mod cli;
pub mod format;
pub mod io;
pub mod parallel;
