//! Gradient flows of cone-end Morse functions on surfaces.

pub mod integrate;
pub mod problem;
pub mod profile;
pub mod shoot;

pub use integrate::{classify_limit, integrate_sampled, integrate_trajectory, Direction, Limit, Trajectory};
pub use problem::{parse_flow_problem, FlowProblem};
pub use profile::{cone_gradient, convert_end, ConeEndProfile};
pub use shoot::{build_morse_data, count_m, ShootingConfig};
