pub mod error;
pub mod geom;
pub mod mesh;

pub use error::{Error, Result};
pub use mesh::TriangleMesh;
pub mod alignment;
pub mod extraction;
pub mod signature;
pub mod forest;
pub mod datagen;
pub mod pipeline;
