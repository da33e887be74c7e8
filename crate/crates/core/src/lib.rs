pub mod cli;
pub mod constraints;
pub mod corpus;
pub mod extract;
pub mod field;
pub mod fuzz;
pub mod interaction;
pub mod io;
pub mod isa;
pub mod program;
pub mod prove;
pub mod trace;
