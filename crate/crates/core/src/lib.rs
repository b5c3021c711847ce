//! Finite graded algebras over F_2 and F_3, twisted Thom modules over
//! them, minimal free resolutions and Adams E2 charts.

pub mod algebra;
pub mod cohomology;
pub mod fp;
pub mod io;
pub mod module;
pub mod par;
pub mod presets;
pub mod render;
pub mod resolution;
pub mod scenario;
pub mod twist;
