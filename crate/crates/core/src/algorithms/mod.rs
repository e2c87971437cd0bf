//! Placement algorithms.

mod random;
mod tree_dp;
mod uckm;

pub use random::{
    rp_distribution, rp_place, rrp_distribution, rrp_place, vrrp_distribution, vrrp_place,
    vrrp_split, VrrpSplit, FLOOR_SLACK,
};
pub use tree_dp::{tree_dp_solve, DpTable};
pub use uckm::{
    uckm_exhaustive, uckm_solve, UckmLogEntry, UckmSolution, UckmStatus, INTEGRALITY_TOL,
};
