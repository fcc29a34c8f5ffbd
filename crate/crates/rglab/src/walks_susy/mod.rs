//! Walk representations of Green functions, self-avoiding walk
//! enumeration, and the supersymmetric forms engine.

pub mod bubble;
pub mod forms;
pub mod saw;
pub mod walks;

pub use bubble::{euclid_bubble, BubbleValue};
pub use forms::{super_expectation, Form};
pub use saw::{saw_count, SawCounts};
pub use walks::{ctrw_feynman_kac, resolvent_walk_sum, wsaw_two_point, WeightedGraph};
