pub mod api;
pub mod builder;
pub mod cli;
pub mod kb;
pub mod query;
pub mod runtime;
pub mod sim;
pub mod syntax;
