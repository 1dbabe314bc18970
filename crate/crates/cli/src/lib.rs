//! Problem/report schema shared by the `quadiag` binary and its tests.

pub mod io;
