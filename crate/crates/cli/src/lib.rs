//! Command-line front end and HTTP session service for keepaway.

pub mod commands;
pub mod http;
pub mod instance;
pub mod session;
