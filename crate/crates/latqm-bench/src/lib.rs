//! Shared fixtures for the workspace benches.

use latqm_core::{gaussian_packet, Kernel, KernelVariant, Lattice, WaveFunction};

/// Standard packet used by all benches: centered in the left half with the
/// reference carrier, narrow enough to fit every lattice size.
pub fn bench_state(n: usize) -> WaveFunction {
    let lat = Lattice::unit(n).unwrap();
    let sigma = (n as f64 / 32.0).max(2.0);
    let (psi, _) = gaussian_packet(lat, -(n as f64) / 4.0, 0.5, sigma).unwrap();
    psi
}

pub fn bench_kernel(variant: KernelVariant, n: usize) -> Kernel {
    Kernel::build(variant, Lattice::unit(n).unwrap()).unwrap()
}
