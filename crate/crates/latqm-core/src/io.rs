//! CSV emission for wavefunctions, kernels, dispersion tables, trajectories
//! and scattering profiles. All floats print with 12 significant digits and
//! files are written atomically (temp file in the target directory, then
//! rename) so concurrent runs never expose partial output.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::lattice::WaveFunction;
use crate::scattering::{ScatterSample, ScatteringResult};

/// 12 significant digits, scientific notation.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Write-temp-then-rename so readers never observe a partial file.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let stamp = TEMP_COUNTER.fetch_add(1, Ordering::Relaxed);
    let tmp_name = format!(
        ".{}.{}.{}.tmp",
        path.file_name().and_then(|f| f.to_str()).unwrap_or("out"),
        std::process::id(),
        stamp
    );
    let tmp = match dir {
        Some(d) => d.join(&tmp_name),
        None => Path::new(&tmp_name).to_path_buf(),
    };
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Columns: site_index, x, re, im, prob. LF line endings, header mandatory.
pub fn wavefunction_csv(psi: &WaveFunction) -> String {
    let lat = psi.lattice();
    let mut out = String::from("site_index,x,re,im,prob\n");
    for (i, a) in psi.amplitudes().iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{}",
            fmt_sig(lat.position(i)),
            fmt_sig(a.re),
            fmt_sig(a.im),
            fmt_sig(a.norm_sqr())
        );
    }
    out
}

pub fn write_wavefunction_csv(psi: &WaveFunction, path: &Path) -> Result<()> {
    atomic_write(path, &wavefunction_csv(psi))
}

/// Columns: m, c_m over the signed hop range of the kernel.
pub fn kernel_csv(kernel: &Kernel) -> String {
    let mut out = String::from("m,c_m\n");
    let m_max = kernel.m_max() as i64;
    for m in -m_max..=m_max {
        let _ = writeln!(out, "{m},{}", fmt_sig(kernel.coeff(m)));
    }
    out
}

pub fn write_kernel_csv(kernel: &Kernel, path: &Path) -> Result<()> {
    atomic_write(path, &kernel_csv(kernel))
}

/// Columns: k, eps_exact, eps_kernel, rel_err over grid momenta in [0, pi/ell].
pub fn dispersion_csv(kernel: &Kernel) -> String {
    let lat = kernel.lattice();
    let n = lat.n();
    let mut out = String::from("k,eps_exact,eps_kernel,rel_err\n");
    for j in n / 2..n {
        push_dispersion_row(&mut out, kernel, lat.wavenumber(j));
    }
    // The grid holds -pi/ell but not +pi/ell; close the sweep at the edge.
    push_dispersion_row(&mut out, kernel, -lat.wavenumber(0));
    out
}

fn push_dispersion_row(out: &mut String, kernel: &Kernel, k: f64) {
    let lat = kernel.lattice();
    let exact = lat.hbar() * lat.hbar() * k * k / (2.0 * lat.mass());
    let got = kernel.dispersion(k);
    let rel = if exact > 0.0 { (got - exact).abs() / exact } else { 0.0 };
    let _ = writeln!(out, "{},{},{},{}", fmt_sig(k), fmt_sig(exact), fmt_sig(got), fmt_sig(rel));
}

/// Columns: tau, norm, prob_left, prob_barrier, prob_right.
pub fn trajectory_csv(samples: &[ScatterSample]) -> String {
    let mut out = String::from("tau,norm,prob_left,prob_barrier,prob_right\n");
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_sig(s.tau),
            fmt_sig(s.norm),
            fmt_sig(s.prob_left),
            fmt_sig(s.prob_barrier),
            fmt_sig(s.prob_right)
        );
    }
    out
}

pub fn write_trajectory_csv(samples: &[ScatterSample], path: &Path) -> Result<()> {
    atomic_write(path, &trajectory_csv(samples))
}

/// Columns: site, prob_initial, prob_final, potential_indicator.
pub fn profile_csv(result: &ScatteringResult) -> String {
    let mut out = String::from("site,prob_initial,prob_final,potential_indicator\n");
    let barrier = &result.barrier;
    for site in 0..result.lattice.n() {
        let inside = site >= barrier.left_site && site <= barrier.last_site();
        let _ = writeln!(
            out,
            "{site},{},{},{}",
            fmt_sig(result.initial_prob[site]),
            fmt_sig(result.final_prob[site]),
            if inside { 1 } else { 0 }
        );
    }
    out
}

/// Write the initial and final probability profiles of a scattering run.
pub fn emit_profile(result: &ScatteringResult, path: &Path) -> Result<()> {
    atomic_write(path, &profile_csv(result))
}

/// Parse a profile written by [`emit_profile`].
pub fn read_profile_csv(path: &Path) -> Result<Vec<(usize, f64, f64, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if lineno == 0 {
            if line != "site,prob_initial,prob_final,potential_indicator" {
                return Err(Error::invalid(format!("unexpected profile header: {line}")));
            }
            continue;
        }
        let mut parts = line.split(',');
        let mut field = |name: &str| {
            parts
                .next()
                .ok_or_else(|| Error::invalid(format!("profile line {lineno}: missing {name}")))
        };
        let site = field("site")?
            .parse::<usize>()
            .map_err(|e| Error::invalid(format!("profile line {lineno}: {e}")))?;
        let mut num = |name: &str| -> Result<f64> {
            field(name)?
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("profile line {lineno}: {e}")))
        };
        rows.push((site, num("prob_initial")?, num("prob_final")?, num("potential_indicator")?));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{Kernel, KernelVariant};
    use crate::lattice::{gaussian_packet, Lattice};

    #[test]
    fn sig_digit_format() {
        assert_eq!(fmt_sig(0.654), "6.54000000000e-1");
        assert_eq!(fmt_sig(0.0), "0.00000000000e0");
        assert_eq!(fmt_sig(-12345.678903), "-1.23456789030e4");
    }

    #[test]
    fn wavefunction_csv_shape() {
        let lat = Lattice::unit(8).unwrap();
        let (psi, _) = gaussian_packet(lat, 0.0, 0.0, 1.0).unwrap();
        let text = wavefunction_csv(&psi);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[0], "site_index,x,re,im,prob");
        assert!(lines[1].starts_with("0,-4.00000000000e0,"));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn kernel_csv_row() {
        let lat = Lattice::unit(4).unwrap();
        let k = Kernel::build(KernelVariant::ExactFiniteN, lat).unwrap();
        let text = kernel_csv(&k);
        let row: Vec<&str> = text.lines().filter(|l| l.starts_with("1,")).collect();
        assert_eq!(row.len(), 1);
        let v: f64 = row[0].split(',').nth(1).unwrap().parse().unwrap();
        assert!((v + std::f64::consts::PI.powi(2) / 8.0).abs() < 1e-11);
    }

    #[test]
    fn dispersion_csv_covers_zone() {
        let lat = Lattice::unit(64).unwrap();
        let k = Kernel::build(KernelVariant::Central, lat).unwrap();
        let text = dispersion_csv(&k);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 33); // header + k = 0..=pi on the half-grid
        assert!(lines[1].starts_with("0.00000000000e0,"));
        let last: Vec<&str> = lines.last().unwrap().split(',').collect();
        let k_last: f64 = last[0].parse().unwrap();
        assert!((k_last - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn atomic_write_and_profile_round_trip() {
        use crate::propagator::EvolutionConfig;
        use crate::scattering::{run_scattering, BarrierSpec, PacketSpec};
        let dir = tempfile::tempdir().unwrap();
        let lat = Lattice::unit(500).unwrap();
        let kernel = Kernel::build(KernelVariant::ExactFiniteN, lat).unwrap();
        let barrier = BarrierSpec { height: 0.0, width_sites: 10, left_site: 251 };
        let packet = PacketSpec { x0: -125.0, k0: std::f64::consts::PI / 6.0, sigma: 15.0 };
        let res = run_scattering(lat, &kernel, &barrier, &packet, &EvolutionConfig::default())
            .unwrap();
        let path = dir.path().join("profile.csv");
        emit_profile(&res, &path).unwrap();
        let rows = read_profile_csv(&path).unwrap();
        assert_eq!(rows.len(), 500);
        for (site, pi, pf, ind) in &rows {
            // 12 significant digits resolve the source values to 5e-12.
            let a = res.initial_prob[*site];
            let b = res.final_prob[*site];
            assert!((pi - a).abs() <= 1e-11 * a.abs() + f64::MIN_POSITIVE);
            assert!((pf - b).abs() <= 1e-11 * b.abs() + f64::MIN_POSITIVE);
            let inside = *site >= 251 && *site <= 261;
            assert_eq!(*ind == 1.0, inside);
        }
        // Identical content rewrites to identical bytes.
        let first = std::fs::read(&path).unwrap();
        emit_profile(&res, &path).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
    }

    #[test]
    fn io_error_surfaces() {
        let res = atomic_write(Path::new("/nonexistent-dir/x/file.csv"), "data");
        assert!(matches!(res, Err(Error::Io(_))));
    }
}
