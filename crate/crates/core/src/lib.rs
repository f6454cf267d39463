pub mod error;
pub mod policy;
pub mod special;
pub mod elliptic;
pub mod matrix;
pub mod scaled;
pub mod exchange;
pub mod checks;
pub mod cli;
