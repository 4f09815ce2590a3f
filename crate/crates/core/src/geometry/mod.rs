//! Boxes, unions of boxes and the bisection machinery built on them.

mod aabb;
pub mod bisect;
mod cover;
mod interval;
mod resolution;
mod union;

pub use aabb::Aabb;
pub use bisect::{branch_and_bound, Bisection, Decision, LimitExceeded};
pub use cover::{region_to_boxes, region_to_boxes_with, Approx};
pub use interval::Interval;
pub use resolution::Resolution;
pub use union::BoxUnion;
pub(crate) use union::covered_by;
