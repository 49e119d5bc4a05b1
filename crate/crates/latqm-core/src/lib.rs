//! Quantum dynamics on a periodic 1D lattice, built around two discrete
//! Laplacians: the standard three-point central difference and the nonlocal
//! hop kernel with coefficients (-1)^m / m^2 whose dispersion reproduces the
//! free-particle energy hbar^2 k^2 / 2M at every grid momentum.
//!
//! The crate provides
//!
//! * grids, discrete Fourier transforms and Gaussian packets ([`lattice`]),
//! * the kernel tables, their dispersion relations, and interchangeable
//!   direct-convolution and spectral application engines ([`kernels`]),
//! * explicit Euler and RK4 propagation with norm monitoring ([`propagator`]),
//! * dense position/momentum/Hamiltonian matrices and the discrete
//!   commutator identities ([`operators`]),
//! * the square-barrier transmission experiment with its analytic oracle and
//!   short-time hop statistics ([`scattering`]),
//! * CSV emission with deterministic formatting ([`io`]).

pub mod error;
mod fft;
pub mod io;
pub mod kernels;
pub mod lattice;
pub mod operators;
pub mod propagator;
pub mod quad;
pub mod scattering;

pub use error::{Error, Result};
pub use kernels::{build_kernel_dd, kernel_tail_sum, Engine, Kernel, KernelVariant, SeparableKernel};
pub use lattice::{
    gaussian_packet, probability_in_region, Lattice, MomentumFunction, WaveFunction,
};
pub use operators::{
    build_hamiltonian, build_momentum, build_position, commutator, discrete_derivative,
    smooth_commutator_action, verify_commutator_identity, CommutatorReport, OperatorLabel,
    OperatorMatrix,
};
pub use propagator::{
    evolve, step_euler, step_rk4, EvolutionConfig, Integrator, Potential, Trajectory,
    TrajectorySample,
};
pub use scattering::{
    barrier_potential, default_tau_max, hop_statistics, run_scattering, theory_transmission,
    uncertainty_product, BarrierSpec, HopReport, HopRow, PacketSpec, ScatterSample,
    ScatteringResult, StopReason,
};
