//! Sparse Laplacian assembly: 1D finite differences, vertex-centred finite
//! volumes on tetrahedra, mass symmetrization, and two-region partitions.

mod laplacian;
mod mesh1d;
mod region;
mod tet;

pub use laplacian::{symmetrize, Laplacian, MassScaling};
pub use mesh1d::{build_laplacian_1d, Mesh1D};
pub use region::{partition_regions, HalfInterval, OpenBox, Region, RegionPartition, RegionPredicate, SphereRegion};
pub use tet::{build_fvm_tet, MassStiffness, TetMesh};
