//! Software IEEE 802.15.4 radio: O-QPSK PHY baseband, a microsecond medium
//! access scheduler, a register-mapped radio controller and a deterministic
//! simulated medium tying nodes together.

pub mod controller;
pub mod experiment;
pub mod frame;
pub mod kv;
pub mod mas;
pub mod medium;
pub mod phy;

pub use controller::{IrqEvent, IrqKind, RadioConfig, RadioController, RegError, Register};
pub use frame::{FrameConfig, FrameError, LengthMode, Mpdu};
pub use mas::{Handle, Mas, MasConfig, MasError, Tick};
pub use medium::{LinkModel, Medium, Network, NodeId, Topology};
pub use phy::{IqBuffer, PhyConfig, PhyReport, PulseShape, Spreading};
