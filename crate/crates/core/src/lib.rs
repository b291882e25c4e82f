//! Computational model of the unramified unitary group `U(2,1)(E/F)` over
//! `F = Q_p`, its congruence subgroups `K_n`, principal-series fixed vectors
//! and the level raising operators acting on them.

pub mod error;
pub mod localfield;
pub mod group;
pub mod flag;
pub mod scalar;
pub mod pseries;
pub mod whittaker;

pub use error::{Error, Result};
pub use localfield::{EElement, FieldConfig};
pub use group::{GroupElement, SubgroupSpec};
pub use flag::{FlagPoint, Frame, OrbitPartition};
pub use pseries::{FixedSpace, TorusCharacter};
pub use scalar::Cyclo;
