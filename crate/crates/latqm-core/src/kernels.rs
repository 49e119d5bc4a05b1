//! Hamiltonian hop kernels and their dispersion relations.
//!
//! A kernel is a real, even coefficient table c_m over signed hop distances.
//! It acts on a wavefunction as
//!
//!   (H psi)(x) = (hbar^2 / M ell^2) * sum_m c_m psi(x - m*ell),
//!
//! with periodic index wrap. Three variants are provided:
//!
//! * `Central`: c_0 = 1, c_(+-1) = -1/2, the three-point second-difference
//!   stencil. Its dispersion (hbar^2/M ell^2)(1 - cos k*ell) deviates from the
//!   free-particle energy by more than one percent once |k*ell| passes ~0.35.
//! * `ExactTruncated(M)`: c_0 = pi^2/6, c_m = (-1)^m / m^2 for 1 <= |m| <= M.
//!   The infinite-range table whose symbol converges to hbar^2 k^2 / 2M.
//! * `ExactFiniteN`: the inverse transform of the exact dispersion over the
//!   N-point momentum grid: c_0 = (pi^2/6)(1 + 2/N^2) and
//!   c_m = (-1)^m pi^2 / (N^2 sin^2(m pi/N)), a circular table of length N
//!   whose dispersion equals hbar^2 k^2 / 2M at every grid momentum exactly.
//!
//! All kernels are circulant on the periodic grid, so the direct convolution
//! engine and the spectral engine (diagonal multiplication in the momentum
//! representation) agree to rounding.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::lattice::{Lattice, WaveFunction};

/// Which coefficient table to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelVariant {
    /// Alternating 1/m^2 table truncated at hop distance `m_max`.
    ExactTruncated { m_max: usize },
    /// Finite-N circular table, exact at every grid momentum.
    ExactFiniteN,
    /// Nearest-neighbor central difference.
    Central,
}

impl fmt::Display for KernelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelVariant::ExactTruncated { .. } => write!(f, "exact-truncated"),
            KernelVariant::ExactFiniteN => write!(f, "exact-finite"),
            KernelVariant::Central => write!(f, "central"),
        }
    }
}

/// Application engine selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Spectral above [`Engine::AUTO_SPECTRAL_MIN`] sites, direct below.
    Auto,
    Direct,
    Spectral,
}

impl Engine {
    /// Measured direct/spectral crossover; see the workspace benches.
    pub const AUTO_SPECTRAL_MIN: usize = 128;

    pub fn resolve(self, n: usize) -> Engine {
        match self {
            Engine::Auto => {
                if n > Self::AUTO_SPECTRAL_MIN {
                    Engine::Spectral
                } else {
                    Engine::Direct
                }
            }
            other => other,
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Engine::Auto => write!(f, "auto"),
            Engine::Direct => write!(f, "direct"),
            Engine::Spectral => write!(f, "spectral"),
        }
    }
}

/// A built coefficient table bound to a lattice.
///
/// `hops[m-1]` holds the weight applied symmetrically to psi(x -+ m*ell). For
/// the finite-N table the m = N/2 entry is stored at half its closed-form
/// value: the two hops +-N/2 land on the same site of the ring, so the
/// symmetric application then deposits exactly the single circular
/// coefficient. [`Kernel::coeff`] always reports the full closed-form value.
#[derive(Debug, Clone)]
pub struct Kernel {
    variant: KernelVariant,
    lattice: Lattice,
    c0: f64,
    hops: Vec<f64>,
    grid_symbol: Vec<f64>,
}

impl Kernel {
    pub fn build(variant: KernelVariant, lattice: Lattice) -> Result<Self> {
        let n = lattice.n();
        let (c0, hops) = match variant {
            KernelVariant::Central => (1.0, vec![-0.5]),
            KernelVariant::ExactTruncated { m_max } => {
                if m_max < 1 || m_max > n / 2 {
                    return Err(Error::invalid(format!(
                        "m_max = {m_max} outside 1..=N/2 = {}",
                        n / 2
                    )));
                }
                let hops = (1..=m_max)
                    .map(|m| neg_one_pow(m) / (m * m) as f64)
                    .collect();
                (PI * PI / 6.0, hops)
            }
            KernelVariant::ExactFiniteN => {
                let nf = n as f64;
                let c0 = PI * PI / 6.0 * (1.0 + 2.0 / (nf * nf));
                let hops = (1..=n / 2)
                    .map(|m| {
                        let s = (m as f64 * PI / nf).sin();
                        let c = neg_one_pow(m) * PI * PI / (nf * nf * s * s);
                        if 2 * m == n {
                            c / 2.0
                        } else {
                            c
                        }
                    })
                    .collect();
                (c0, hops)
            }
        };
        let mut kernel = Kernel { variant, lattice, c0, hops, grid_symbol: Vec::new() };
        kernel.grid_symbol = (0..n)
            .map(|j| kernel.symbol(lattice.wavenumber(j) * lattice.ell()))
            .collect();
        Ok(kernel)
    }

    pub fn variant(&self) -> KernelVariant {
        self.variant
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    /// Largest hop distance with a nonzero coefficient.
    pub fn m_max(&self) -> usize {
        self.hops.len()
    }

    /// Signed-hop coefficient c_m (zero beyond m_max).
    pub fn coeff(&self, m: i64) -> f64 {
        let a = m.unsigned_abs() as usize;
        if a == 0 {
            return self.c0;
        }
        if a > self.hops.len() {
            return 0.0;
        }
        let w = self.hops[a - 1];
        if matches!(self.variant, KernelVariant::ExactFiniteN) && 2 * a == self.lattice.n() {
            2.0 * w
        } else {
            w
        }
    }

    /// Dimensionless symbol c_0 + 2 sum_m c_m cos(m * kl) at phase kl = k*ell.
    fn symbol(&self, kl: f64) -> f64 {
        let mut s = self.c0;
        for (i, w) in self.hops.iter().enumerate() {
            s += 2.0 * w * ((i + 1) as f64 * kl).cos();
        }
        s
    }

    /// Single-particle energy at wavenumber `k`:
    /// (hbar^2 / M ell^2) * sum_m c_m exp(-i k m ell), real by symmetry.
    pub fn dispersion(&self, k: f64) -> f64 {
        self.lattice.energy_scale() * self.symbol(k * self.lattice.ell())
    }

    /// Largest dimensionless symbol magnitude over the grid; bounds the
    /// spectral radius seen by explicit integrators.
    pub fn max_grid_symbol(&self) -> f64 {
        self.grid_symbol.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    fn check_lattice(&self, psi: &WaveFunction) -> Result<()> {
        if psi.lattice() != self.lattice {
            return Err(Error::LatticeMismatch(
                "kernel and wavefunction live on different lattices".into(),
            ));
        }
        Ok(())
    }

    /// H psi by real-space convolution with periodic wrap, O(N * m_max).
    pub fn apply_direct(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        self.check_lattice(psi)?;
        let mut out = vec![Complex64::ZERO; self.lattice.n()];
        self.convolve(psi.amplitudes(), &mut out);
        let scale = self.lattice.energy_scale();
        for a in &mut out {
            *a *= scale;
        }
        Ok(WaveFunction::with_time(self.lattice, out, psi.time()))
    }

    /// H psi through the momentum representation, O(N log N): transform,
    /// multiply by the dispersion, transform back.
    pub fn apply_spectral(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        self.check_lattice(psi)?;
        let mut buf = psi.amplitudes().to_vec();
        self.spectral_multiply(&mut buf);
        let scale = self.lattice.energy_scale();
        for a in &mut buf {
            *a *= scale;
        }
        Ok(WaveFunction::with_time(self.lattice, buf, psi.time()))
    }

    /// H psi with automatic engine selection.
    pub fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        self.apply_with(psi, Engine::Auto)
    }

    pub fn apply_with(&self, psi: &WaveFunction, engine: Engine) -> Result<WaveFunction> {
        match engine.resolve(self.lattice.n()) {
            Engine::Direct => self.apply_direct(psi),
            _ => self.apply_spectral(psi),
        }
    }

    /// Dimensionless convolution (M ell^2 / hbar^2) H psi into `out`.
    pub(crate) fn convolve(&self, amps: &[Complex64], out: &mut [Complex64]) {
        let n = amps.len();
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.c0 * amps[i];
            for (idx, w) in self.hops.iter().enumerate() {
                let m = idx + 1;
                let back = if i >= m { i - m } else { i + n - m };
                let fwd = if i + m < n { i + m } else { i + m - n };
                acc += w * (amps[back] + amps[fwd]);
            }
            *o = acc;
        }
    }

    /// Dimensionless spectral application in place: transform, multiply by
    /// the grid symbol, transform back. The sign bookkeeping of the shifted
    /// grids cancels between the two transforms, leaving only alternating
    /// input/output signs and the 1/N of the unnormalized pair.
    pub(crate) fn spectral_multiply(&self, buf: &mut [Complex64]) {
        let n = buf.len();
        for (i, b) in buf.iter_mut().enumerate() {
            if i % 2 == 1 {
                *b = -*b;
            }
        }
        fft::forward(buf);
        for (j, b) in buf.iter_mut().enumerate() {
            *b *= self.grid_symbol[j];
        }
        fft::inverse(buf);
        let inv_n = 1.0 / n as f64;
        for (i, b) in buf.iter_mut().enumerate() {
            *b *= if i % 2 == 0 { inv_n } else { -inv_n };
        }
    }
}

fn neg_one_pow(m: usize) -> f64 {
    if m % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Partial sum sum_{m=1}^{M} (-1)^m / m^2, which converges to -pi^2/12 with
/// the alternating-series bound |error| <= 1/(M+1)^2.
pub fn kernel_tail_sum(m_max: usize) -> f64 {
    // Summing small terms first keeps rounding below the tail bound.
    (1..=m_max)
        .rev()
        .map(|m| neg_one_pow(m) / (m * m) as f64)
        .sum()
}

/// Separable D-dimensional kernel: the 1D table applied along each axis, with
/// diagonal constant D * c_0 (pi^2/2 for the exact table in 3D, pi^2/3 in 2D).
#[derive(Debug, Clone)]
pub struct SeparableKernel {
    axis: Kernel,
    dims: u32,
}

impl SeparableKernel {
    pub fn axis_kernel(&self) -> &Kernel {
        &self.axis
    }

    pub fn dims(&self) -> u32 {
        self.dims
    }

    /// Dimensionless diagonal coefficient D * c_0.
    pub fn diagonal_coeff(&self) -> f64 {
        self.dims as f64 * self.axis.coeff(0)
    }

    /// On-site energy (hbar^2 / M ell^2) * D * c_0.
    pub fn diagonal_energy(&self) -> f64 {
        self.axis.lattice().energy_scale() * self.diagonal_coeff()
    }
}

/// Build the per-axis kernel description for D in {1, 2, 3}.
pub fn build_kernel_dd(
    variant: KernelVariant,
    lattice: Lattice,
    dims: u32,
) -> Result<SeparableKernel> {
    if !(1..=3).contains(&dims) {
        return Err(Error::invalid(format!("dimension must be 1, 2 or 3, got {dims}")));
    }
    Ok(SeparableKernel { axis: Kernel::build(variant, lattice)?, dims })
}
