pub mod cli;
pub mod grid;
pub mod io;
pub mod verify;
