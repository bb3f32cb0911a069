//! Statistics for studying defenses and the queries attacks synthesize.

pub mod boundary;
pub mod hotelling;
pub mod rho;
pub mod special;
pub mod stability;

pub use boundary::{boundary_distance_stats, BoundaryStats};
pub use hotelling::{hotelling_t2, HotellingResult};
pub use rho::{estimate_rho, RhoEstimate};
pub use stability::stability_stop;
