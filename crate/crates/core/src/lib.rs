//! Verification toolkit for configurable PLC safety programs.
//!
//! Programs come in through the textual frontend ([`il`]) or the FBD XML
//! importer ([`fbd`]), are typechecked into [`ir::TypedProgram`], and are
//! checked against requirements by the engines in [`engines`].

pub mod corpus;
pub mod diag;
pub mod encoder;
pub mod engines;
pub mod fbd;
pub mod il;
pub mod ir;
pub mod manifest;
pub mod report;
pub mod requirements;
pub mod sat;
