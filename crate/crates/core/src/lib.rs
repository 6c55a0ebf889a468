//! Stiffness modelling of multi-chain parallel manipulators with lumped
//! (virtual-joint) springs.
//!
//! Each serial chain is a product of rigid links, one actuated joint, passive
//! joints and six-dof virtual springs. The chain Cartesian stiffness comes
//! from the kinetostatic block system; chain stiffnesses add at the platform.

pub mod chain;
pub mod error;
pub mod jacobian;
pub mod kinetostatics;
pub mod linalg;
pub mod link;
pub mod model;
pub mod oracle;
pub mod orthoglide;
pub mod spatial;
pub mod study;

pub use chain::{ChainCoordinates, ChainDescription, ChainElement};
pub use error::{Error, Result};
pub use kinetostatics::{
    chain_stiffness_loaded, chain_stiffness_unloaded, manipulator_stiffness, ManipulatorStiffness, StiffnessIndices,
    Wrench,
};
pub use link::{beam_compliance, BeamSpec, LinkCompliance, Section};
pub use orthoglide::{build_3prpar, build_3puu, Architecture, OrthoglideModel, OrthoglideParams};
pub use spatial::{Axis, ElementaryAxis, SmallDisplacement, Transform};
