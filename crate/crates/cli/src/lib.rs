//! IO companion for `xcube-core`: the four XML document formats, CSV
//! reports, generation profile files and the wall-clock benchmark harness.

pub mod bench;
pub mod csvout;
pub mod profile;
pub mod xml;
