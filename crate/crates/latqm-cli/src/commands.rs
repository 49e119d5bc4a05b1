//! Subcommand implementations. Every run writes its data files plus a
//! `manifest.json` echoing the resolved configuration, result summary,
//! per-phase wall-clock and the kernel application engine used.

use std::path::PathBuf;
use std::time::Instant;

use latqm_core::io::{self, fmt_sig};
use latqm_core::{
    discrete_derivative, gaussian_packet, hop_statistics, run_scattering,
    smooth_commutator_action, uncertainty_product, verify_commutator_identity, BarrierSpec,
    EvolutionConfig, Kernel, Lattice, PacketSpec, Result, StopReason, WaveFunction,
};

use crate::config::{Command, RunConfig};
use crate::json::{obj, Json};

struct Timings {
    phases: Vec<(&'static str, f64)>,
    started: Instant,
}

impl Timings {
    fn new() -> Self {
        Timings { phases: Vec::new(), started: Instant::now() }
    }

    fn phase<T>(&mut self, name: &'static str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.phases.push((name, t.elapsed().as_secs_f64() * 1e3));
        out
    }

    fn to_json(&self) -> Json {
        let mut pairs: Vec<(String, Json)> = self
            .phases
            .iter()
            .map(|(k, ms)| (k.to_string(), Json::Float(*ms)))
            .collect();
        pairs.push(("total".to_string(), Json::Float(self.started.elapsed().as_secs_f64() * 1e3)));
        Json::Obj(pairs)
    }
}

fn map_of(values: &std::collections::BTreeMap<String, String>) -> Json {
    Json::Obj(values.iter().map(|(k, v)| (k.clone(), Json::Str(v.clone()))).collect())
}

fn write_manifest(
    cfg: &RunConfig,
    engine: &str,
    results: Json,
    timings: &Timings,
    outputs: &[&str],
) -> Result<()> {
    let manifest = obj(vec![
        ("subcommand", Json::Str(cfg.command.name().to_string())),
        ("seed", Json::Int(cfg.seed as i64)),
        ("config", map_of(&cfg.values)),
        ("config_file", map_of(&cfg.file_values)),
        ("flags", map_of(&cfg.flag_values)),
        ("engine", Json::Str(engine.to_string())),
        ("results", results),
        ("timings_ms", timings.to_json()),
        (
            "outputs",
            Json::Arr(outputs.iter().map(|o| Json::Str(o.to_string())).collect()),
        ),
    ]);
    io::atomic_write(&cfg.output_dir.join("manifest.json"), &manifest.render())
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(name)
}

fn lattice_from(cfg: &RunConfig) -> Result<Lattice> {
    Lattice::new(cfg.get_usize("N"), cfg.get_f64("ell"), 1.0, 1.0)
}

fn resolve_m_max(cfg: &mut RunConfig, n: usize) -> usize {
    let m = cfg
        .values
        .get("m_max")
        .map(|v| v.parse().expect("validated at parse time"))
        .unwrap_or(n / 2);
    cfg.record_resolved("m_max", m.to_string());
    m
}

pub fn dispatch(cfg: &mut RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    match cfg.command {
        Command::Scatter => scatter(cfg),
        Command::Dispersion => dispersion(cfg),
        Command::Commutator => commutator(cfg),
        Command::Hop => hop(cfg),
        Command::KernelDump => kernel_dump(cfg),
        Command::DerivativeCheck => derivative_check(cfg),
    }
}

fn scatter(cfg: &mut RunConfig) -> Result<()> {
    let mut timings = Timings::new();
    let lat = lattice_from(cfg)?;
    let n = lat.n();

    let barrier_left = cfg
        .values
        .get("barrier_left")
        .map(|v| v.parse().expect("validated at parse time"))
        .unwrap_or(n / 2 + 1);
    cfg.record_resolved("barrier_left", barrier_left.to_string());

    let kernel_variant = cfg.get_kernel("kernel", n / 2);
    let kernel = timings.phase("setup", || Kernel::build(kernel_variant, lat))?;

    let k0 = cfg.get_f64("k0");
    let sigma = cfg.get_f64("sigma_over_ell") * lat.ell();
    let e0 = lat.hbar() * lat.hbar() * k0 * k0 / (2.0 * lat.mass());
    let barrier = BarrierSpec {
        height: e0 / cfg.get_f64("E0_over_U"),
        width_sites: cfg.get_usize("W_over_ell"),
        left_site: barrier_left,
    };
    let packet = PacketSpec { x0: lat.position(n / 4), k0, sigma };
    if sigma > lat.length() / 8.0 {
        eprintln!("warning: sigma = {sigma} exceeds L/8; the packet wraps the ring");
    }
    let run_cfg = EvolutionConfig {
        dtau: cfg.get_f64("dtau"),
        integrator: cfg.get_integrator("integrator"),
        engine: cfg.engine(),
        store_states: false,
        ..Default::default()
    };

    let result =
        timings.phase("kernel_apply", || run_scattering(lat, &kernel, &barrier, &packet, &run_cfg))?;
    if result.stability_warning {
        eprintln!("warning: dtau is large for this kernel's spectral radius");
    }

    let io_result = timings.phase("io", || -> Result<()> {
        let result_json = obj(vec![
            ("transmission", Json::Float(result.transmission)),
            ("reflection", Json::Float(result.reflection)),
            ("remainder", Json::Float(result.remainder_in_barrier)),
            ("theory", Json::Float(result.theory)),
            ("norm_drift", Json::Float(result.norm_drift)),
            ("tau_stop", Json::Float(result.tau_stop)),
        ]);
        io::atomic_write(&out_path(cfg, "result.json"), &result_json.render())?;
        io::emit_profile(&result, &out_path(cfg, "profile.csv"))?;
        io::write_trajectory_csv(&result.samples, &out_path(cfg, "trajectory.csv"))?;
        Ok(())
    });
    io_result?;

    for (name, v) in [
        ("transmission", result.transmission),
        ("reflection", result.reflection),
        ("remainder", result.remainder_in_barrier),
        ("theory", result.theory),
        ("norm_drift", result.norm_drift),
        ("tau_stop", result.tau_stop),
    ] {
        println!("{name} {}", fmt_sig(v));
    }
    println!(
        "stop_reason {}",
        match result.stop_reason {
            StopReason::Plateau => "plateau",
            StopReason::Horizon => "horizon",
        }
    );

    let results = obj(vec![
        ("transmission", Json::Float(result.transmission)),
        ("reflection", Json::Float(result.reflection)),
        ("remainder", Json::Float(result.remainder_in_barrier)),
        ("theory", Json::Float(result.theory)),
        ("norm_drift", Json::Float(result.norm_drift)),
        ("tau_stop", Json::Float(result.tau_stop)),
        (
            "stop_reason",
            Json::Str(
                match result.stop_reason {
                    StopReason::Plateau => "plateau",
                    StopReason::Horizon => "horizon",
                }
                .to_string(),
            ),
        ),
    ]);
    write_manifest(
        cfg,
        &result.engine_used.to_string(),
        results,
        &timings,
        &["result.json", "profile.csv", "trajectory.csv"],
    )
}

fn dispersion(cfg: &mut RunConfig) -> Result<()> {
    let mut timings = Timings::new();
    let lat = lattice_from(cfg)?;
    let m_max = resolve_m_max(cfg, lat.n());
    let kernel = timings.phase("setup", || Kernel::build(cfg.get_kernel("kernel", m_max), lat))?;

    let (csv, crossing) = timings.phase("kernel_apply", || {
        let csv = io::dispersion_csv(&kernel);
        // First grid phase k*ell where the relative error passes one percent.
        let mut crossing = f64::NAN;
        for j in lat.n() / 2 + 1..lat.n() {
            let k = lat.wavenumber(j);
            let free = lat.hbar() * lat.hbar() * k * k / (2.0 * lat.mass());
            let rel = (kernel.dispersion(k) - free).abs() / free;
            if rel > 0.01 {
                crossing = k * lat.ell();
                break;
            }
        }
        (csv, crossing)
    });
    timings.phase("io", || io::atomic_write(&out_path(cfg, "dispersion.csv"), &csv))?;

    println!("one_percent_crossing_kl {}", fmt_sig(crossing));
    let results = obj(vec![("one_percent_crossing_kl", Json::Float(crossing))]);
    write_manifest(cfg, "direct", results, &timings, &["dispersion.csv"])
}

fn commutator(cfg: &mut RunConfig) -> Result<()> {
    let mut timings = Timings::new();
    let lat = lattice_from(cfg)?;
    let report = timings.phase("kernel_apply", || verify_commutator_identity(lat))?;
    // Smooth-state residual on a centered packet wide enough to be smooth at
    // this N but still supported on the ring.
    let sigma = (lat.length() / 32.0).max(lat.ell());
    let (psi, _) = gaussian_packet(lat, 0.0, 0.0, sigma)?;
    let residual = smooth_commutator_action(&psi);

    let table = format!(
        "N max_deviation_identity diag_norm smooth_residual\n{} {} {} {}\n",
        report.n,
        fmt_sig(report.max_deviation),
        fmt_sig(report.diag_norm),
        fmt_sig(residual)
    );
    timings.phase("io", || io::atomic_write(&out_path(cfg, "commutator.txt"), &table))?;
    print!("{table}");

    let results = obj(vec![
        ("max_deviation_identity", Json::Float(report.max_deviation)),
        ("diag_norm", Json::Float(report.diag_norm)),
        ("smooth_residual", Json::Float(residual)),
    ]);
    write_manifest(cfg, "direct", results, &timings, &["commutator.txt"])
}

fn hop(cfg: &mut RunConfig) -> Result<()> {
    let mut timings = Timings::new();
    let lat = lattice_from(cfg)?;
    let dtau = cfg.get_f64("dtau");
    let report = timings.phase("kernel_apply", || hop_statistics(lat, dtau))?;
    let u = uncertainty_product(lat, dtau)?;

    let mut csv = String::from("m,measured_prob,predicted_prob\n");
    for row in &report.rows {
        csv.push_str(&format!(
            "{},{},{}\n",
            row.m,
            fmt_sig(row.measured),
            fmt_sig(row.predicted)
        ));
    }
    timings.phase("io", || io::atomic_write(&out_path(cfg, "hop.csv"), &csv))?;

    println!("uncertainty_product {}", fmt_sig(u));
    println!("jump_estimate {}", fmt_sig(report.jump_dp_ell_over_hbar));
    println!("raw_second_moment {}", fmt_sig(report.raw_second_moment));

    let results = obj(vec![
        ("uncertainty_product", Json::Float(u)),
        ("jump_estimate", Json::Float(report.jump_dp_ell_over_hbar)),
        ("raw_second_moment", Json::Float(report.raw_second_moment)),
        ("conditional_second_moment", Json::Float(report.conditional_second_moment)),
    ]);
    write_manifest(cfg, "direct", results, &timings, &["hop.csv"])
}

fn kernel_dump(cfg: &mut RunConfig) -> Result<()> {
    let mut timings = Timings::new();
    let lat = lattice_from(cfg)?;
    let m_max = resolve_m_max(cfg, lat.n());
    let kernel = timings.phase("kernel_apply", || Kernel::build(cfg.get_kernel("kernel", m_max), lat))?;
    timings.phase("io", || io::write_kernel_csv(&kernel, &out_path(cfg, "kernel.csv")))?;

    println!("m_max {}", kernel.m_max());
    println!("c0 {}", fmt_sig(kernel.coeff(0)));
    let results = obj(vec![
        ("m_max", Json::Int(kernel.m_max() as i64)),
        ("c0", Json::Float(kernel.coeff(0))),
    ]);
    write_manifest(cfg, "direct", results, &timings, &["kernel.csv"])
}

fn derivative_check(cfg: &mut RunConfig) -> Result<()> {
    let mut timings = Timings::new();
    let lat = lattice_from(cfg)?;
    let m_max = resolve_m_max(cfg, lat.n());
    let sigma = cfg.get_f64("sigma_over_ell") * lat.ell();
    let (psi, _) = gaussian_packet(lat, 0.0, 0.0, sigma)?;
    let numeric = timings.phase("kernel_apply", || discrete_derivative(&psi, m_max))?;

    let analytic = |i: usize, psi: &WaveFunction| -> f64 {
        -lat.position(i) / (2.0 * sigma * sigma) * psi.amplitudes()[i].re
    };
    let mut csv = String::from("site,x,numeric,analytic,abs_err\n");
    let mut core_err = 0.0f64;
    let mut global_err = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..lat.n() {
        let x = lat.position(i);
        let want = analytic(i, &psi);
        let got = numeric.amplitudes()[i].re;
        let err = (got - want).abs().max(numeric.amplitudes()[i].im.abs());
        global_err = global_err.max(err);
        if x.abs() <= 6.0 * sigma {
            core_err = core_err.max(err);
        }
        scale = scale.max(want.abs());
        csv.push_str(&format!(
            "{i},{},{},{},{}\n",
            fmt_sig(x),
            fmt_sig(got),
            fmt_sig(want),
            fmt_sig(err)
        ));
    }
    timings.phase("io", || io::atomic_write(&out_path(cfg, "derivative.csv"), &csv))?;

    println!("max_err_within_6_sigma {}", fmt_sig(core_err));
    println!("max_err_global {}", fmt_sig(global_err));
    println!("max_slope {}", fmt_sig(scale));
    let results = obj(vec![
        ("max_err_within_6_sigma", Json::Float(core_err)),
        ("max_err_global", Json::Float(global_err)),
        ("max_slope", Json::Float(scale)),
    ]);
    write_manifest(cfg, "direct", results, &timings, &["derivative.csv"])
}

