//! Well-balanced finite volume solver for multi-component coupled scalar
//! conservation laws on polygonal meshes.
//!
//! The unknown `u` is shared by `L+1` components. A color field `v`, averaged
//! on each mesh edge, blends the components through the coupling functions of
//! a [`coupling::CouplingModel`]. [`scheme`] advances the cell values with a
//! subcell reconstruction that preserves constant states exactly, and
//! [`diagnostics`] turns the discrete maximum principle and entropy
//! inequalities into per-step checks.

pub mod coupling;
pub mod diagnostics;
pub mod exec;
pub mod flux;
pub mod io;
pub mod mesh;
pub mod presets;
pub mod scheme;
pub mod verify;
