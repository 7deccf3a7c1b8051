//! Numerical building blocks shared by the exact engine, the Firework
//! analytics and the oracles.

pub mod dd;
pub mod quad;
pub mod series;
pub mod special;

pub use dd::Dd;
pub use quad::integrate;
