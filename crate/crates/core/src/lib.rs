//! Polyhedral approximation of metric surfaces.
//!
//! The crate embeds sampled metric triangles bi-Lipschitz into the plane,
//! fills them with polyhedral disks built from grid decompositions and cube
//! caps, glues the fillings into approximating surfaces, and estimates
//! discrete 2-modulus on the results. All algorithms are generic over the
//! [`Scalar`] type; the aliases below fix it to `f64`.

pub mod complex;
pub mod export;
pub mod filling;
pub mod geometry;
pub mod modulus;
pub mod scalar;
pub mod surface;
pub mod triangle;

pub use scalar::Scalar;

pub type Point = geometry::Point2<f64>;
pub type Polygon = geometry::PlanarPolygon<f64>;
pub type Decomposition = geometry::GridDecomposition<f64>;
