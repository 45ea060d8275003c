//! The dense fold ray: registries and the snake schedule, generation in full
//! and theta mode, geodesic certificates and density search.

pub mod build;
pub mod certify;
pub mod schedule;
pub mod search;

pub use build::{audit_reducedness, base_point, base_point_for, generate_ray, rose_fold_ray, theta_ray, Ray, RayBlock, RayFold};
pub use certify::{certify_geodesic, lipschitz_along, volume_ratio, Certificate};
pub use schedule::{audit, snake_schedule, RayConfig, RayMode, RaySchedule, Slot};
pub use search::{density_search, simplicial_distance, SearchHit, Target, TangentDatum};
