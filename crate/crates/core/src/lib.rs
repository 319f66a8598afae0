//! Two closely spaced two-level atoms decaying through a shared vacuum
//! field, treated as a classical information channel between the initial
//! and final atomic populations.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod information;
pub mod liouvillian;
pub mod measurement;
pub mod oracle;
pub mod propagator;
pub mod verify;

pub use algebra::{hs_inner, pair_basis, product_state, single_atom_basis, DensityMatrix, OperatorBasis, TlaState};
pub use error::{Error, Result};
pub use information::{closed_form_max, entropy_bits, info_surface, mutual_information, optimize, InfoMode, InfoResult};
pub use liouvillian::{collective_decay_generator, exchange_factor, DecayRates, Geometry, Orientation, Superoperator};
pub use measurement::{joint_four_point, joint_two_point, JointDistribution};
pub use propagator::{apply_to_state, evolve, quasi_stationary_map, singlet_probability, ChannelMap};

pub use nalgebra::Complex;

/// Complex scalar used throughout.
pub type C64 = Complex<f64>;
/// Single-atom operator.
pub type Op2 = nalgebra::Matrix2<C64>;
/// Two-atom operator, basis |gg>, |ge>, |eg>, |ee> (atom 1 is the left factor).
pub type Op4 = nalgebra::Matrix4<C64>;
/// Superoperator coefficients over the 16-element pair basis.
pub type Mat16 = nalgebra::SMatrix<C64, 16, 16>;
/// Coordinates of a two-atom operator in the pair basis.
pub type Vec16 = nalgebra::SVector<C64, 16>;
