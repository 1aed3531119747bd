//! Steady-state heat transport through a Coulomb-coupled double quantum dot
//! used as a thermal diode.
//!
//! Each dot exchanges electrons with its own bath; the inter-dot charging
//! energy `U` couples the two. Heat flows only around the four-state cycle of
//! correlated tunnelling events, which makes the device rectify.

pub mod analysis;
pub mod error;
pub mod io;
pub mod kinetics;
pub mod model;
pub mod table;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};
