//! Exact finite models for the arithmetic of SL(2) period integrals: class
//! groups of quadratic fields, V4 field diagrams with character groups at
//! each node, monomial parameters, and the verdicts built on them.

pub mod abgroup;
pub mod casestudy;
pub mod cli;
pub mod fieldnet;
pub mod localrules;
pub mod monomial;
pub mod oracle_rep;
pub mod pseudo;
pub mod quadclass;
pub mod ssprimes;
pub mod weilmodel;
