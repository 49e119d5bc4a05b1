//! Periodic 1D grids and wavefunctions on them.
//!
//! Sites sit at x = n*ell for n in {-N/2, ..., N/2-1}; the conjugate momentum
//! grid is k = 2*pi*m/(N*ell) over the same index range. Storage order maps a
//! site index i in 0..N to n = i - N/2, and likewise for momenta, so index 0
//! is the leftmost site and the unpaired momentum -pi/ell.
//!
//! Wavefunctions follow the discrete normalization sum_x |psi(x)|^2 = 1. The
//! position/momentum transform is symmetric (1/sqrt(N) both ways) with
//! forward phase exp(-i*k*x), so it is exactly unitary.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;

/// A periodic 1D lattice of N sites with spacing `ell`, plus the physical
/// constants hbar and particle mass that fix energy and time scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    n: usize,
    ell: f64,
    hbar: f64,
    mass: f64,
}

impl Lattice {
    pub fn new(n: usize, ell: f64, hbar: f64, mass: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::invalid(format!(
                "site count N must be even and >= 4, got {n}"
            )));
        }
        for (name, v) in [("ell", ell), ("hbar", hbar), ("mass", mass)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Lattice { n, ell, hbar, mass })
    }

    /// Lattice with ell = hbar = mass = 1, the dimensionless setup used by
    /// the reference experiments.
    pub fn unit(n: usize) -> Result<Self> {
        Lattice::new(n, 1.0, 1.0, 1.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Total length L = N*ell.
    pub fn length(&self) -> f64 {
        self.n as f64 * self.ell
    }

    /// Position of storage site `i`: (i - N/2) * ell.
    pub fn position(&self, i: usize) -> f64 {
        (i as f64 - self.n as f64 / 2.0) * self.ell
    }

    /// Momentum grid point for storage index `j`: 2*pi*(j - N/2)/(N*ell).
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI * (j as f64 - self.n as f64 / 2.0) / self.length()
    }

    /// Spacing of the momentum grid, 2*pi/L.
    pub fn wavenumber_spacing(&self) -> f64 {
        2.0 * PI / self.length()
    }

    /// hbar^2 / (M * ell^2), the natural energy unit of hop coefficients.
    pub fn energy_scale(&self) -> f64 {
        self.hbar * self.hbar / (self.mass * self.ell * self.ell)
    }

    /// Dimensionless time tau = hbar * t / (M * ell^2).
    pub fn tau_from_time(&self, t: f64) -> f64 {
        self.hbar * t / (self.mass * self.ell * self.ell)
    }

    pub fn time_from_tau(&self, tau: f64) -> f64 {
        tau * self.mass * self.ell * self.ell / self.hbar
    }
}

/// Complex amplitudes over the position grid at a fixed dimensionless time.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    lattice: Lattice,
    amps: Vec<Complex64>,
    time: f64,
}

impl WaveFunction {
    pub fn from_amplitudes(lattice: Lattice, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != lattice.n() {
            return Err(Error::invalid(format!(
                "amplitude count {} does not match N = {}",
                amps.len(),
                lattice.n()
            )));
        }
        Ok(WaveFunction { lattice, amps, time: 0.0 })
    }

    /// State concentrated on a single site.
    pub fn delta(lattice: Lattice, site: usize) -> Result<Self> {
        if site >= lattice.n() {
            return Err(Error::invalid(format!(
                "site {site} out of range for N = {}",
                lattice.n()
            )));
        }
        let mut amps = vec![Complex64::ZERO; lattice.n()];
        amps[site] = Complex64::ONE;
        Ok(WaveFunction { lattice, amps, time: 0.0 })
    }

    /// Normalized plane wave exp(i*k*x)/sqrt(N) for the grid momentum with
    /// storage index `j`.
    pub fn plane_wave(lattice: Lattice, j: usize) -> Result<Self> {
        if j >= lattice.n() {
            return Err(Error::invalid(format!(
                "momentum index {j} out of range for N = {}",
                lattice.n()
            )));
        }
        let k = lattice.wavenumber(j);
        let scale = 1.0 / (lattice.n() as f64).sqrt();
        let amps = (0..lattice.n())
            .map(|i| Complex64::from_polar(scale, k * lattice.position(i)))
            .collect();
        Ok(WaveFunction { lattice, amps, time: 0.0 })
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub(crate) fn with_time(lattice: Lattice, amps: Vec<Complex64>, time: f64) -> Self {
        WaveFunction { lattice, amps, time }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probability(&self, site: usize) -> f64 {
        self.amps[site].norm_sqr()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            for a in &mut self.amps {
                *a *= inv;
            }
        }
    }

    /// sum_x x |psi(x)|^2 / sum_x |psi(x)|^2.
    pub fn mean_position(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            num += self.lattice.position(i) * p;
            den += p;
        }
        num / den
    }

    /// Largest per-component amplitude difference against another state.
    pub fn max_component_distance(&self, other: &WaveFunction) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Forward transform into the momentum representation:
    /// psi~(k) = (1/sqrt(N)) sum_x exp(-i*k*x) psi(x).
    pub fn to_momentum(&self) -> MomentumFunction {
        let amps = grid_transform(self.lattice, &self.amps, Direction::Forward);
        MomentumFunction { lattice: self.lattice, amps, time: self.time }
    }
}

/// Complex amplitudes over the momentum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumFunction {
    lattice: Lattice,
    amps: Vec<Complex64>,
    time: f64,
}

impl MomentumFunction {
    pub fn from_amplitudes(lattice: Lattice, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != lattice.n() {
            return Err(Error::invalid(format!(
                "amplitude count {} does not match N = {}",
                amps.len(),
                lattice.n()
            )));
        }
        Ok(MomentumFunction { lattice, amps, time: 0.0 })
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// sum_k k |psi~(k)|^2 / sum_k |psi~(k)|^2.
    pub fn mean_wavenumber(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            num += self.lattice.wavenumber(j) * p;
            den += p;
        }
        num / den
    }

    /// Inverse transform back to the position representation, the exact
    /// inverse of [`WaveFunction::to_momentum`].
    pub fn to_position(&self) -> WaveFunction {
        let amps = grid_transform(self.lattice, &self.amps, Direction::Inverse);
        WaveFunction { lattice: self.lattice, amps, time: self.time }
    }
}

enum Direction {
    Forward,
    Inverse,
}

/// Symmetric transform between the site-ordered position grid and the
/// site-ordered momentum grid. Both grids run over indices shifted by N/2, so
/// the raw FFT picks up alternating signs on input and output plus a global
/// parity factor (-1)^(N/2).
fn grid_transform(lattice: Lattice, amps: &[Complex64], dir: Direction) -> Vec<Complex64> {
    let n = lattice.n();
    let mut buf: Vec<Complex64> = amps
        .iter()
        .enumerate()
        .map(|(i, a)| if i % 2 == 0 { *a } else { -a })
        .collect();
    match dir {
        Direction::Forward => fft::forward(&mut buf),
        Direction::Inverse => fft::inverse(&mut buf),
    }
    let parity = if (n / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let scale = parity / (n as f64).sqrt();
    for (j, b) in buf.iter_mut().enumerate() {
        *b *= if j % 2 == 0 { scale } else { -scale };
    }
    buf
}

/// Gaussian wave packet centered at `x0` with carrier wavenumber `k0` and
/// width `sigma`, sampled on the grid and renormalized to the discrete
/// convention. Returns the packet and a flag that is true when sigma exceeds
/// L/8, i.e. when the tails wrap around the periodic boundary appreciably.
pub fn gaussian_packet(
    lattice: Lattice,
    x0: f64,
    k0: f64,
    sigma: f64,
) -> Result<(WaveFunction, bool)> {
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let k_edge = PI / lattice.ell();
    if k0 < -k_edge || k0 >= k_edge {
        return Err(Error::invalid(format!(
            "k0 = {k0} outside the first zone [{}, {})",
            -k_edge, k_edge
        )));
    }
    let wraps = sigma > lattice.length() / 8.0;
    let amps = (0..lattice.n())
        .map(|i| {
            let dx = lattice.position(i) - x0;
            let mag = (-dx * dx / (4.0 * sigma * sigma)).exp();
            Complex64::from_polar(mag, k0 * dx)
        })
        .collect();
    let mut psi = WaveFunction { lattice, amps, time: 0.0 };
    psi.normalize();
    Ok((psi, wraps))
}

/// Exact partial sum of |psi|^2 over the inclusive site range [lo, hi].
pub fn probability_in_region(psi: &WaveFunction, lo: usize, hi: usize) -> Result<f64> {
    let n = psi.lattice().n();
    if lo > hi || hi >= n {
        return Err(Error::invalid(format!(
            "region [{lo}, {hi}] invalid for N = {n}"
        )));
    }
    Ok(psi.amplitudes()[lo..=hi].iter().map(|a| a.norm_sqr()).sum())
}
