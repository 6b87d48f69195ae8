// `!(x > 0.0)` also rejects NaN; tabulated quadrature constants keep full digits
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod expr;
pub mod measure;
pub mod numerics;
pub mod orlicz;
pub mod capacity;
pub mod transfer;
pub mod hermite;
pub mod testfn;
pub mod spectrum;
pub mod gauss_lsi;
