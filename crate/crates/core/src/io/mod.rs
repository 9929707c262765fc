pub mod checkpoint;
pub mod config;
pub mod csv;
pub mod plots;
