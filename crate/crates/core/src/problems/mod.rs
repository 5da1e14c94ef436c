//! Concrete stiff systems with their hand-derived decompositions.

pub mod conservation;
pub mod telegraph;
pub mod toy;
