pub mod boundary;
pub mod cylinder;
pub mod detline;
pub mod graded;
pub mod linalg;
pub mod models;
pub mod par;
pub mod schema;
pub mod symbols;
pub mod twisted;
pub mod zeta_eta;
