//! Non-termination analysis of logic programs by unfolding pattern rules.

pub mod binunf;
pub mod context;
pub mod detect;
pub mod interp;
pub mod parser;
pub mod pattern;
pub mod program;
pub mod simple;
pub mod subst;
pub mod term;
pub mod unfold;
pub mod unify;
