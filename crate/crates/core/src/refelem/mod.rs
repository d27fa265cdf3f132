//! Reference element `[-1, 1]^2`, reference edge `[-1, 1]`, modal bases and
//! Gauss rules on both.

mod basis;
mod quadrature;

pub use basis::{legendre_table, make_basis, BasisSet, BasisTable, MAX_DEGREE};
pub use quadrature::{
    gauss_legendre, make_edge_rule, make_volume_rule, EdgeRule, QuadratureRule, VolumeRule,
};
