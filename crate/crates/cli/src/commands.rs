//! The five subcommands. Each builds its scenario from the resolved config and
//! writes its files through [`Output`].

use dtc::dynamics::{
    evolve_master_with, evolve_trajectories_observed, mean_and_stderr, pure_density, random_pure_state,
};
use dtc::liouville::{build_liouvillian, classify, spectrum};
use dtc::model::Model;
use dtc::probes::{dft_blackman, find_peaks, DftSpectrum, Peak, ProbeRecorder, TimeSeries};
use dtc::symmetry::{find_dark_states, verify_dynamical_symmetry};
use serde::Serialize;

use crate::config::{RunConfig, DYNAMICS_MAX_SITES, SPECTRUM_MAX_SITES};
use crate::error::CliError;
use crate::output::{row, Output};

pub struct Context {
    pub config: RunConfig,
    pub quiet: bool,
}

impl Context {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn model(&self) -> Result<Model, CliError> {
        Ok(Model::build(&self.config.scenario()?)?)
    }

    fn output(&self, command: &'static str) -> Result<Output, CliError> {
        Output::create(&self.config.output_dir, command, &self.config)
    }
}

pub fn spectrum_cmd(ctx: &Context) -> Result<Output, CliError> {
    let cfg = &ctx.config;
    cfg.require_sites(SPECTRUM_MAX_SITES, "spectrum")?;
    let m = ctx.model()?;
    let l = build_liouvillian(&m.hamiltonian, &m.jumps)?;
    ctx.note(format!("diagonalizing a {0}x{0} Liouvillian", l.superdim()));
    let lambdas = spectrum(&l)?;
    let report = classify(&lambdas, &cfg.spectrum, &cfg.commensurability);
    let mut out = ctx.output("spectrum")?;
    let rows = lambdas
        .iter()
        .zip(&report.classes)
        .enumerate()
        .map(|(k, (z, c))| format!("{k},{},{},{}", z.re, z.im, c.as_str()));
    out.csv("spectrum.csv", &["index", "re", "im", "class"], rows)?;
    out.json("spectrum_report.json", &report)?;
    ctx.note(format!(
        "{} eigenvalues: {} stationary, {} oscillatory, gap {}",
        lambdas.len(),
        report.stationary.len(),
        report.oscillatory.len(),
        report.gap
    ));
    Ok(out)
}

#[derive(Serialize)]
struct PeakReport<'a> {
    series: &'static str,
    window: &'static str,
    t_start: f64,
    n_samples: usize,
    bin_width: f64,
    rel_threshold: f64,
    peaks: &'a [Peak],
}

fn write_dft(
    out: &mut Output,
    name: &'static str,
    series: &TimeSeries,
    t_start: f64,
    threshold: f64,
) -> Result<(DftSpectrum, Vec<Peak>), CliError> {
    let spec = dft_blackman(series, t_start)?;
    let peaks = find_peaks(&spec, threshold)?;
    let rows = spec
        .frequencies
        .iter()
        .zip(&spec.magnitudes)
        .map(|(w, a)| row(&[*w, *a]));
    out.csv(&format!("dft_{name}.csv"), &["omega", "magnitude"], rows)?;
    out.json(
        &format!("peaks_{name}.json"),
        &PeakReport {
            series: name,
            window: spec.window.as_str(),
            t_start,
            n_samples: spec.n_samples,
            bin_width: spec.bin_width(),
            rel_threshold: threshold,
            peaks: &peaks,
        },
    )?;
    Ok((spec, peaks))
}

#[derive(Serialize)]
struct EvolveSummary {
    probe_site: usize,
    integration: dtc::dynamics::IntegrationStats,
    /// Largest imaginary part dropped from the spin and echo samples.
    spin_max_imag: f64,
    echo_max_imag: f64,
    dominant_spin_peak: Option<Peak>,
    dominant_echo_peak: Option<Peak>,
}

pub fn evolve_cmd(ctx: &Context) -> Result<Output, CliError> {
    let cfg = &ctx.config;
    cfg.require_sites(DYNAMICS_MAX_SITES, "evolve")?;
    let m = ctx.model()?;
    let l = build_liouvillian(&m.hamiltonian, &m.jumps)?;
    let psi = random_pure_state(&m.hamiltonian, cfg.seeds.initial_state)?;
    let rho0 = pure_density(&psi);
    let grid = cfg.grid();
    let site = cfg.probe_site();
    let mut rec = ProbeRecorder::new(vec![m.spins.s_x(site)?.clone()], Some(rho0.clone()));
    let tick = (grid.n_samples / 10).max(1);
    ctx.note(format!("evolving {} samples on [{}, {}]", grid.n_samples, grid.t0, grid.t1));
    let stats = evolve_master_with(&l, &rho0, &grid, &cfg.integrator, |i, t, rho| {
        if i % tick == 0 && i > 0 {
            ctx.note(format!("  t = {t:.3}"));
        }
        rec.record(i, t, rho)
    })?;
    let spin = rec.observable_series(0)?;
    let echo = rec.echo_series().expect("echo reference set")?;

    let mut out = ctx.output("evolve")?;
    let rows = (0..spin.len()).map(|i| row(&[spin.times[i], spin.values[i], echo.values[i]]));
    out.csv("series.csv", &["t", "sx", "echo"], rows)?;
    let dominant = |p: &[Peak]| p.iter().copied().max_by(|a, b| a.magnitude.total_cmp(&b.magnitude));
    let (_, spin_peaks) = write_dft(&mut out, "spin", &spin, cfg.t_start(), cfg.dft.peak_threshold)?;
    let (_, echo_peaks) = write_dft(&mut out, "echo", &echo, cfg.t_start(), cfg.dft.peak_threshold)?;
    out.json(
        "evolve.json",
        &EvolveSummary {
            probe_site: site,
            integration: stats,
            spin_max_imag: spin.max_imag,
            echo_max_imag: echo.max_imag,
            dominant_spin_peak: dominant(&spin_peaks),
            dominant_echo_peak: dominant(&echo_peaks),
        },
    )?;
    ctx.note(format!(
        "{} steps ({} rejected); echo peaks at {:?}",
        stats.accepted,
        stats.rejected,
        echo_peaks.iter().map(|p| p.omega).collect::<Vec<_>>()
    ));
    Ok(out)
}

#[derive(Serialize)]
struct EnsembleSummary<'a> {
    probe_site: usize,
    count: usize,
    rng_seed: u64,
    written_series: usize,
    jump_counts: &'a [usize],
}

pub fn trajectories_cmd(ctx: &Context) -> Result<Output, CliError> {
    let cfg = &ctx.config;
    cfg.require_sites(DYNAMICS_MAX_SITES, "trajectories")?;
    let m = ctx.model()?;
    let psi = random_pure_state(&m.hamiltonian, cfg.seeds.initial_state)?;
    let grid = cfg.grid();
    let site = cfg.probe_site();
    let count = cfg.trajectories.count;
    ctx.note(format!("running {count} trajectories"));
    let ens = evolve_trajectories_observed(
        &m.hamiltonian,
        &m.jumps,
        &psi,
        &grid,
        count,
        cfg.seeds.trajectories,
        &cfg.trajectory_options(),
        std::slice::from_ref(m.spins.s_x(site)?),
    )?;
    let series = ens.series(0);
    let stats = mean_and_stderr(&grid, &series)?;
    let times = grid.times();

    let mut out = ctx.output("trajectories")?;
    let shown = count.min(cfg.trajectories.write_series);
    let mut columns = vec!["t".to_string()];
    columns.extend((0..shown).map(|k| format!("traj_{k}")));
    let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
    let rows = (0..grid.n_samples).map(|i| {
        let mut v = vec![times[i]];
        v.extend(series[..shown].iter().map(|s| s[i]));
        row(&v)
    });
    out.csv("trajectories.csv", &columns, rows)?;
    let rows = (0..grid.n_samples).map(|i| {
        let err = stats.stderr.as_ref().map_or(f64::NAN, |e| e[i]);
        row(&[times[i], stats.mean[i], err])
    });
    out.csv("ensemble.csv", &["t", "mean", "stderr"], rows)?;
    out.json(
        "ensemble.json",
        &EnsembleSummary {
            probe_site: site,
            count,
            rng_seed: ens.rng_seed,
            written_series: shown,
            jump_counts: &ens.jump_counts,
        },
    )?;
    Ok(out)
}

pub fn darkstates_cmd(ctx: &Context) -> Result<Output, CliError> {
    let cfg = &ctx.config;
    cfg.require_sites(DYNAMICS_MAX_SITES, "darkstates")?;
    let m = ctx.model()?;
    let report = find_dark_states(&m.hamiltonian, &m.jumps, &cfg.dark_states)?;
    if let Some(w) = &report.warning {
        ctx.note(format!("warning: {w}"));
    }
    let mut out = ctx.output("darkstates")?;
    out.json("darkstates.json", &report)?;
    ctx.note(format!("{} dark states", report.states.len()));
    Ok(out)
}

#[derive(Serialize)]
struct SymmetryReport<'a> {
    candidate: &'static str,
    certificate: &'a dtc::symmetry::SymmetryCertificate,
}

pub fn symmetry_cmd(ctx: &Context) -> Result<Output, CliError> {
    let cfg = &ctx.config;
    let m = ctx.model()?;
    let cert = verify_dynamical_symmetry(&m.hamiltonian, &m.jumps, &m.spins.s_plus, cfg.symmetry_tol)?;
    let mut out = ctx.output("symmetry")?;
    out.json(
        "symmetry.json",
        &SymmetryReport {
            candidate: "s_plus",
            certificate: &cert,
        },
    )?;
    ctx.note(format!(
        "S+ certificate {}: omega {}, residuals {:.2e} / {:.2e}",
        if cert.pass { "passes" } else { "fails" },
        cert.omega,
        cert.residual_h,
        cert.residual_l
    ));
    Ok(out)
}
