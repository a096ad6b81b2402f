//! Mean-field information Hessians on finite graphs.
//!
//! For a graph `G`, a mean function `theta` and an energy `E` on the
//! probability simplex, this crate assembles the Gamma operators, solves for
//! local and global Ricci curvature bounds, computes two-point transport
//! distances, integrates geodesics and gradient flows, and checks the
//! functional inequalities that follow from a positive curvature bound.

pub mod curvature;
pub mod dynamics;
pub mod energies;
pub mod error;
pub mod gamma;
pub mod geodesics;
pub mod graph;
pub mod means;
pub mod ode;
pub mod product;
pub mod quadrature;
pub mod report;
pub mod search;
pub mod simplex;
pub mod two_point;

pub use curvature::{global_curvature, kappa_at, local_curvature, CurvatureReport, GlobalCurvatureReport};
pub use energies::{Energy, EntropyKind};
pub use error::{Error, Result};
pub use gamma::{Gamma2Formula, GammaContext};
pub use graph::{cartesian_product, laplacian, Family, Graph, SymmetricMatrix};
pub use means::{DerivativeMode, MeanFunction, MeanKind, Which};
pub use simplex::SimplexPoint;
pub use search::SearchParams;
pub use two_point::TwoPointProblem;
pub use geodesics::{geodesic_rhs, integrate_geodesic, GeodesicState, GeodesicTrajectory};
