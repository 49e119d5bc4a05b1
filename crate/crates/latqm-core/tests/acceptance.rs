//! Acceptance suite: one test per headline claim, each printing a PASS line
//! with the measured value and its tolerance. Run with `--nocapture` to see
//! the report:
//!
//!   cargo test -p latqm-core --test acceptance -- --nocapture

use std::f64::consts::PI;
use std::time::Instant;

use latqm_core::{
    build_momentum, gaussian_packet, hop_statistics, kernel_tail_sum, run_scattering,
    theory_transmission, uncertainty_product, verify_commutator_identity, BarrierSpec, Engine,
    EvolutionConfig, Integrator, Kernel, KernelVariant, Lattice, PacketSpec, Potential,
    ScatteringResult, WaveFunction,
};
use num_complex::Complex64;

const K0: f64 = PI / 6.0;
const SIGMA_OVER_ELL: f64 = 15.0;
const E0_OVER_U: f64 = PI * PI / 8.0;
const W_OVER_ELL: f64 = 10.0;
const DTAU: f64 = 1e-3;

/// Reference experiment scaled to lattice spacing `ell`: same physical
/// packet, barrier and time step as the unit-spacing headline run.
fn reference_run(variant: KernelVariant, n: usize, ell: f64) -> ScatteringResult {
    let lat = Lattice::new(n, ell, 1.0, 1.0).unwrap();
    let kernel = Kernel::build(variant, lat).unwrap();
    let e0 = K0 * K0 / 2.0;
    let barrier = BarrierSpec {
        height: e0 / E0_OVER_U,
        width_sites: (W_OVER_ELL / ell).round() as usize,
        left_site: n / 2 + 1,
    };
    let packet = PacketSpec { x0: lat.position(n / 4), k0: K0, sigma: SIGMA_OVER_ELL };
    let cfg = EvolutionConfig {
        dtau: DTAU,
        integrator: Integrator::Euler,
        engine: Engine::Auto,
        store_states: false,
        ..Default::default()
    };
    run_scattering(lat, &kernel, &barrier, &packet, &cfg).unwrap()
}

fn check(criterion: &str, value: f64, target: f64, tol: f64, started: Instant) {
    let ok = (value - target).abs() <= tol;
    println!(
        "acceptance {criterion}: {} value={value:.6} target={target:.6} tol={tol} ({:.1?})",
        if ok { "PASS" } else { "FAIL" },
        started.elapsed()
    );
    assert!(ok, "{criterion}: {value} not within {tol} of {target}");
}

#[test]
fn acceptance_01_transmission_exact_scheme() {
    let t0 = Instant::now();
    let res = reference_run(KernelVariant::ExactFiniteN, 500, 1.0);
    assert_eq!(res.engine_used, Engine::Spectral);
    check("01 exact-scheme transmission", res.transmission, 0.654, 0.010, t0);
    // Figure-level bookkeeping: the right lobe of the final profile carries
    // exactly the measured transmission.
    let norm: f64 = res.final_prob.iter().sum();
    let right: f64 = res.final_prob[res.barrier.last_site() + 1..].iter().sum();
    assert!((right / norm - res.transmission).abs() < 1e-9);
    let sum = res.transmission + res.reflection + res.remainder_in_barrier;
    assert!((sum - 1.0).abs() < 1e-9);
}

#[test]
fn acceptance_02_theory_oracle() {
    let t0 = Instant::now();
    let lat = Lattice::unit(500).unwrap();
    let e0 = K0 * K0 / 2.0;
    let barrier = BarrierSpec {
        height: e0 / E0_OVER_U,
        width_sites: W_OVER_ELL as usize,
        left_site: 251,
    };
    let packet = PacketSpec { x0: -125.0, k0: K0, sigma: SIGMA_OVER_ELL };
    let t = theory_transmission(&packet, &barrier, lat).unwrap();
    check("02 theory oracle", t, 0.632, 0.005, t0);
}

#[test]
fn acceptance_03_transmission_central_scheme() {
    let t0 = Instant::now();
    let coarse = reference_run(KernelVariant::Central, 500, 1.0);
    check("03a central transmission, ell=1", coarse.transmission, 0.603, 0.010, t0);

    let t1 = Instant::now();
    let refined = reference_run(KernelVariant::Central, 1500, 1.0 / 3.0);
    check("03b central transmission, ell=1/3", refined.transmission, 0.633, 0.010, t1);

    // Refinement moves the central scheme toward the analytic oracle.
    let err_coarse = (coarse.transmission - coarse.theory).abs();
    let err_refined = (refined.transmission - refined.theory).abs();
    assert!(
        err_refined < err_coarse,
        "refining ell should improve accuracy: {err_coarse} -> {err_refined}"
    );
}

#[test]
fn acceptance_04_dispersion_threshold() {
    let t0 = Instant::now();
    let lat = Lattice::unit(500).unwrap();
    let kernel = Kernel::build(KernelVariant::Central, lat).unwrap();
    let mut worst_below = 0.0f64;
    let mut first_above = f64::INFINITY;
    for j in 0..500 {
        let k = lat.wavenumber(j);
        let x = (k * lat.ell()).abs();
        if x == 0.0 {
            continue;
        }
        let free = k * k / 2.0;
        let rel = (kernel.dispersion(k) - free).abs() / free;
        if x <= 0.345 {
            worst_below = worst_below.max(rel);
            assert!(rel < 0.01, "kl = {x}: rel {rel} >= 1%");
        }
        if x >= 0.36 {
            first_above = first_above.min(rel);
            assert!(rel > 0.01, "kl = {x}: rel {rel} <= 1%");
        }
    }
    println!(
        "acceptance 04 dispersion threshold: PASS worst(kl<=0.345)={worst_below:.5} \
         min(kl>=0.36)={first_above:.5} ({:.1?})",
        t0.elapsed()
    );
}

#[test]
fn acceptance_05_finite_n_kernel_exactness() {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for n in [4usize, 64, 500] {
        let lat = Lattice::unit(n).unwrap();
        let kernel = Kernel::build(KernelVariant::ExactFiniteN, lat).unwrap();
        for j in 0..n {
            let k = lat.wavenumber(j);
            let free = k * k / 2.0;
            let got = kernel.dispersion(k);
            if free > 0.0 {
                let rel = ((got - free) / free).abs();
                worst = worst.max(rel);
                assert!(rel <= 1e-10, "N={n}, k={k}: rel {rel}");
            } else {
                assert!(got.abs() <= 1e-10 * PI * PI / 2.0);
            }
        }
        let want = PI * PI / 6.0 * (1.0 + 2.0 / (n * n) as f64);
        assert!((kernel.coeff(0) - want).abs() <= 1e-12, "diagonal at N={n}");
    }
    println!(
        "acceptance 05 finite-N exactness: PASS worst rel={worst:.2e} ({:.1?})",
        t0.elapsed()
    );
}

#[test]
fn acceptance_06_commutator_identity() {
    let t0 = Instant::now();
    let mut worst_dev = 0.0f64;
    for n in [4usize, 8, 64] {
        let report = verify_commutator_identity(Lattice::unit(n).unwrap()).unwrap();
        worst_dev = worst_dev.max(report.max_deviation);
        assert!(report.max_deviation <= 1e-10, "N={n}: {}", report.max_deviation);
        assert!(report.diag_norm <= 1e-12, "N={n}: diag {}", report.diag_norm);
    }
    // Every position eigenstate sees <x|P|x> = -hbar pi / L.
    let lat = Lattice::unit(64).unwrap();
    let p = build_momentum(lat, false).unwrap();
    let want = -PI / lat.length();
    for i in 0..64 {
        let d = p.entry(i, i);
        assert!((d.re - want).abs() <= 1e-12 && d.im.abs() <= 1e-12);
    }
    println!(
        "acceptance 06 commutator identity: PASS worst dev={worst_dev:.2e} ({:.1?})",
        t0.elapsed()
    );
}

#[test]
fn acceptance_07_hop_law_and_uncertainty() {
    let t0 = Instant::now();
    let lat = Lattice::unit(500).unwrap();
    let report = hop_statistics(lat, DTAU).unwrap();
    let mut worst = 0.0f64;
    for row in &report.rows[..50] {
        let rel = ((row.measured - row.predicted) / row.predicted).abs();
        worst = worst.max(rel);
        assert!(rel <= 1e-12, "m = {}: rel {rel}", row.m);
    }
    let u = uncertainty_product(lat, DTAU).unwrap();
    check("07 uncertainty product", u, PI / 3.0f64.sqrt(), 1e-3, t0);
    println!("acceptance 07 hop law: PASS worst rel={worst:.2e} over m = 1..=50");
    assert!(u > 0.5, "(Delta P) ell must exceed hbar/2");
}

#[test]
fn acceptance_08_identity_sum() {
    let t0 = Instant::now();
    let s = kernel_tail_sum(10_000);
    check("08 alternating identity sum", s, -PI * PI / 12.0, 1e-8, t0);
}

#[test]
fn acceptance_09_engine_equivalence_suite() {
    let t0 = Instant::now();
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(20260808);
    let lat = Lattice::unit(64).unwrap();
    let kernels = [
        Kernel::build(KernelVariant::Central, lat).unwrap(),
        Kernel::build(KernelVariant::ExactFiniteN, lat).unwrap(),
        Kernel::build(KernelVariant::ExactTruncated { m_max: 32 }, lat).unwrap(),
    ];
    let pot = Potential::zero(lat);
    let mut worst_engine = 0.0f64;
    let mut worst_herm = 0.0f64;
    let mut worst_linear = 0.0f64;
    let random_state = |rng: &mut StdRng| {
        let amps: Vec<Complex64> = (0..64)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let mut psi = WaveFunction::from_amplitudes(lat, amps).unwrap();
        psi.normalize();
        psi
    };
    for _ in 0..100 {
        let psi = random_state(&mut rng);
        let chi = random_state(&mut rng);
        for kernel in &kernels {
            let d = kernel.apply_direct(&psi).unwrap();
            let s = kernel.apply_spectral(&psi).unwrap();
            worst_engine = worst_engine.max(d.max_component_distance(&s));

            let hc = kernel.apply_direct(&chi).unwrap();
            let lhs: Complex64 = chi
                .amplitudes()
                .iter()
                .zip(d.amplitudes())
                .map(|(a, b)| a.conj() * b)
                .sum();
            let rhs: Complex64 = psi
                .amplitudes()
                .iter()
                .zip(hc.amplitudes())
                .map(|(a, b)| a.conj() * b)
                .sum();
            worst_herm = worst_herm.max((lhs - rhs.conj()).norm());
        }
        // Linearity of one Euler step on a random superposition.
        let kernel = &kernels[1];
        let alpha = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let combo: Vec<Complex64> = psi
            .amplitudes()
            .iter()
            .zip(chi.amplitudes())
            .map(|(a, b)| alpha * a + b)
            .collect();
        let combo = WaveFunction::from_amplitudes(lat, combo).unwrap();
        let sa = latqm_core::step_euler(&psi, kernel, &pot, 0.003).unwrap();
        let sb = latqm_core::step_euler(&chi, kernel, &pot, 0.003).unwrap();
        let sc = latqm_core::step_euler(&combo, kernel, &pot, 0.003).unwrap();
        let lin = sc
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(i, v)| (v - (alpha * sa.amplitudes()[i] + sb.amplitudes()[i])).norm())
            .fold(0.0, f64::max);
        worst_linear = worst_linear.max(lin);
    }
    assert!(worst_engine < 1e-10, "engine disagreement {worst_engine}");
    assert!(worst_herm < 1e-10, "Hermiticity defect {worst_herm}");
    assert!(worst_linear < 1e-12, "linearity defect {worst_linear}");
    println!(
        "acceptance 09 engine equivalence: PASS engines={worst_engine:.2e} \
         hermiticity={worst_herm:.2e} linearity={worst_linear:.2e} ({:.1?})",
        t0.elapsed()
    );
}

#[test]
fn acceptance_10_group_velocity_dichotomy() {
    let t0 = Instant::now();
    let lat = Lattice::unit(500).unwrap();
    let pot = Potential::zero(lat);
    let cfg = EvolutionConfig { dtau: DTAU, store_states: false, ..Default::default() };
    let tau = 150.0;
    let (psi, _) = gaussian_packet(lat, -125.0, K0, 15.0).unwrap();
    let x0 = psi.mean_position();

    let exact = Kernel::build(KernelVariant::ExactFiniteN, lat).unwrap();
    let traj = latqm_core::evolve(&psi, &exact, &pot, &cfg, tau).unwrap();
    let v_exact = (traj.final_state().mean_position() - x0) / tau;
    check("10a free-particle speed, exact kernel", v_exact, K0, 0.01 * K0, t0);

    let t1 = Instant::now();
    let central = Kernel::build(KernelVariant::Central, lat).unwrap();
    let traj = latqm_core::evolve(&psi, &central, &pot, &cfg, tau).unwrap();
    let v_central = (traj.final_state().mean_position() - x0) / tau;
    let want = K0.sin();
    check("10b lattice speed, central kernel", v_central, want, 0.01 * want, t1);

    assert!(v_central < v_exact, "the two theories must separate at k0 = pi/6");
}
