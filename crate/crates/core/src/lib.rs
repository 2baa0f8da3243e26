//! Exact-arithmetic toolkit for averaging operators on Lie algebras, current
//! conformal algebras, and rational solutions of the classical Yang-Baxter
//! equation built from them.

pub mod exact;
pub mod liealg;
pub mod linalg;
pub mod report;
pub mod conformal;
pub mod averaging;
pub mod cybe;
pub mod sweep;
