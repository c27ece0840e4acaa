pub mod dirac;
pub mod gbdt;
pub mod io;
pub mod linalg;
pub mod nonstationary;
