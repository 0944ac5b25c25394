//! Shortening and simultaneous two-node repair.

mod central;
mod shorten;

pub use central::{
    cascade_bandwidth, central_repair_two, cut_set_bandwidth_two, naive_bandwidth, plan_central_repair, subspace_bandwidth,
    subspace_gap, CentralRepairPlan, Strategy,
};
pub use shorten::{shorten, ShortenedCode};
