//! Aggregate counts built on the form counters: the solubility set `T` and
//! its weighted size, the nine-variable counter `M`, the local factors `E_p`
//! and the arithmetic sums.

mod local;
mod mbox;
mod sums;
mod tset;

pub use local::{ep, EpCase, EpReport};
pub use mbox::{bounds_m, count_m, MBounds, MBoxQuery};
pub use sums::{lower_sum, lower_sum_cutoff, s_sum, s_sum_ratios, theta_sum, theta_sum_f64, ThetaSum};
pub use tset::{build_t, cal_t, CalT, TSetQuery};
