//! Self-contained numerical kernel: dense complex linear algebra, Hermitian
//! eigendecomposition, adaptive ODE integration and Bessel functions.

pub mod bessel;
pub mod eigen;
pub mod matrix;
pub mod ode;

pub use bessel::{bessel_j, bessel_j_symmetric};
pub use eigen::{eigh, EigenDecomposition};
pub use matrix::{ComplexMatrix, ComplexVector, SparseMatrix};
pub use ode::{
    integrate, integrate_master, integrate_schrodinger, propagate_master, propagate_schrodinger, Event, Generator,
    Liouvillian, OdeOptions, OdeStats, OdeSystem,
};
