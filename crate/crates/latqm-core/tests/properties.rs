//! Randomized invariants: transform unitarity, kernel Hermiticity, engine
//! agreement, and linearity of the stepping map.

use num_complex::Complex64;
use proptest::collection::vec;
use proptest::prelude::*;

use latqm_core::{
    gaussian_packet, probability_in_region, step_euler, Engine, EvolutionConfig, Integrator,
    Kernel, KernelVariant, Lattice, Potential, WaveFunction,
};

const N: usize = 64;

fn normalized_state(lat: Lattice, raw: &[(f64, f64)]) -> WaveFunction {
    let amps: Vec<Complex64> = raw.iter().map(|(re, im)| Complex64::new(*re, *im)).collect();
    let mut psi = WaveFunction::from_amplitudes(lat, amps).unwrap();
    psi.normalize();
    psi
}

fn kernels(lat: Lattice) -> Vec<Kernel> {
    vec![
        Kernel::build(KernelVariant::Central, lat).unwrap(),
        Kernel::build(KernelVariant::ExactFiniteN, lat).unwrap(),
        Kernel::build(KernelVariant::ExactTruncated { m_max: N / 2 }, lat).unwrap(),
        Kernel::build(KernelVariant::ExactTruncated { m_max: 10 }, lat).unwrap(),
    ]
}

fn inner(a: &WaveFunction, b: &WaveFunction) -> Complex64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x.conj() * y)
        .sum()
}

fn amp_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    vec((-1.0f64..1.0, -1.0f64..1.0), N)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn fourier_round_trip_and_parseval(raw in amp_strategy()) {
        prop_assume!(raw.iter().any(|(re, im)| re.abs() + im.abs() > 1e-3));
        let lat = Lattice::unit(N).unwrap();
        let psi = normalized_state(lat, &raw);
        let phi = psi.to_momentum();
        prop_assert!((phi.norm_sqr() - psi.norm_sqr()).abs() < 1e-12);
        let back = phi.to_position();
        prop_assert!(psi.max_component_distance(&back) < 1e-12);
    }

    #[test]
    fn region_probability_is_additive(raw in amp_strategy(), split in 0usize..N - 1) {
        prop_assume!(raw.iter().any(|(re, im)| re.abs() + im.abs() > 1e-3));
        let lat = Lattice::unit(N).unwrap();
        let psi = normalized_state(lat, &raw);
        let a = probability_in_region(&psi, 0, split).unwrap();
        let b = probability_in_region(&psi, split + 1, N - 1).unwrap();
        prop_assert!((a + b - psi.norm_sqr()).abs() < 1e-13);
    }

    #[test]
    fn engines_agree_and_kernels_are_hermitian(
        raw_a in amp_strategy(),
        raw_b in amp_strategy(),
    ) {
        prop_assume!(raw_a.iter().any(|(re, im)| re.abs() + im.abs() > 1e-3));
        prop_assume!(raw_b.iter().any(|(re, im)| re.abs() + im.abs() > 1e-3));
        let lat = Lattice::unit(N).unwrap();
        let psi = normalized_state(lat, &raw_a);
        let chi = normalized_state(lat, &raw_b);
        for kernel in kernels(lat) {
            let direct = kernel.apply_direct(&psi).unwrap();
            let spectral = kernel.apply_spectral(&psi).unwrap();
            prop_assert!(
                direct.max_component_distance(&spectral) < 1e-10,
                "engines disagree for {}", kernel.variant()
            );
            let h_chi = kernel.apply_direct(&chi).unwrap();
            let lhs = inner(&chi, &direct);
            let rhs = inner(&psi, &h_chi).conj();
            prop_assert!((lhs - rhs).norm() < 1e-10, "not Hermitian: {}", kernel.variant());
        }
    }

    #[test]
    fn euler_step_is_linear(
        raw_a in amp_strategy(),
        raw_b in amp_strategy(),
        alpha in (-1.0f64..1.0, -1.0f64..1.0),
        beta in (-1.0f64..1.0, -1.0f64..1.0),
    ) {
        prop_assume!(raw_a.iter().any(|(re, im)| re.abs() + im.abs() > 1e-3));
        prop_assume!(raw_b.iter().any(|(re, im)| re.abs() + im.abs() > 1e-3));
        let lat = Lattice::unit(N).unwrap();
        let kernel = Kernel::build(KernelVariant::ExactFiniteN, lat).unwrap();
        let pot = Potential::zero(lat);
        let a = normalized_state(lat, &raw_a);
        let b = normalized_state(lat, &raw_b);
        let alpha = Complex64::new(alpha.0, alpha.1);
        let beta = Complex64::new(beta.0, beta.1);
        let combo: Vec<Complex64> = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
        let combo = WaveFunction::from_amplitudes(lat, combo).unwrap();
        let dtau = 0.004;
        let sa = step_euler(&a, &kernel, &pot, dtau).unwrap();
        let sb = step_euler(&b, &kernel, &pot, dtau).unwrap();
        let sc = step_euler(&combo, &kernel, &pot, dtau).unwrap();
        let worst = sc
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, v)| (v - (alpha * sa.amplitudes()[i] + beta * sb.amplitudes()[i])).norm())
            .fold(0.0, f64::max);
        prop_assert!(worst < 1e-12, "linearity residual {worst}");
    }

    #[test]
    fn gaussian_momentum_density_symmetric_about_grid_carrier(
        sigma in 5.0f64..8.0,
        mode in 4i64..20,
    ) {
        let lat = Lattice::unit(N).unwrap();
        let k0 = lat.wavenumber((N as i64 / 2 + mode) as usize);
        let (psi, _) = gaussian_packet(lat, 0.0, k0, sigma).unwrap();
        let dens: Vec<f64> = psi
            .to_momentum()
            .amplitudes()
            .iter()
            .map(|a| a.norm_sqr())
            .collect();
        let j0 = (N as i64 / 2 + mode) as usize;
        for d in 1..=3usize {
            let hi = dens[j0 + d];
            let lo = dens[j0 - d];
            let rel = (hi - lo).abs() / hi.max(lo);
            prop_assert!(rel < 1e-10, "offset {d}: rel {rel}");
        }
    }

    #[test]
    fn evolution_keeps_probability_bookkeeping(seed_k0 in 0.2f64..0.6) {
        let lat = Lattice::unit(N).unwrap();
        let kernel = Kernel::build(KernelVariant::ExactFiniteN, lat).unwrap();
        let pot = Potential::zero(lat);
        let (psi, _) = gaussian_packet(lat, -8.0, seed_k0, 4.0).unwrap();
        let cfg = EvolutionConfig {
            dtau: 0.002,
            integrator: Integrator::Rk4,
            steps_per_sample: 100,
            engine: Engine::Auto,
            store_states: false,
            ..Default::default()
        };
        let traj = latqm_core::evolve(&psi, &kernel, &pot, &cfg, 2.0).unwrap();
        for s in &traj.samples {
            prop_assert!((s.norm - 1.0).abs() < 1e-6); // RK4 drift is tiny here
        }
    }
}
