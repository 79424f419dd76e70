pub mod cocirc;
pub mod criterion;
pub mod dualflow;
pub mod exactlp;
pub mod feasibility;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod puzzle;
pub mod rigidity;
pub mod svg;
pub mod rational;
