//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

pub mod checks;
pub mod oracles;
pub mod properties;
