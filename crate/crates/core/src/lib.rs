//! Reactive multi-context systems: contexts with their own logics, linked by
//! bridge rules over each other's beliefs and over sensor readings, updated
//! step by step by deterministic management functions.

pub mod bridge;
pub mod cli;
pub mod config;
pub mod consistency;
pub mod engine;
pub mod kb;
pub mod logic;
pub mod management;
pub mod query;
pub mod report;
pub mod scenarios;
mod syntax;
pub mod term;

pub use syntax::ParseError;
