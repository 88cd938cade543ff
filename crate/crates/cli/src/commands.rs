// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use ionpulse_core::codebook::{list_pulse_files, read_pulse, CodebookError};
use ionpulse_core::device::resolve_device;
use ionpulse_core::simulate::{noisy_fidelity, run_cat_circuit, CatConfig, GridSpec, NoiseModel};
use ionpulse_core::synth::{duration_sweep, fidelity, propagate};
use ionpulse_core::{
    CircuitExporter, Codebook, DeviceSpec, Error, ExportBackend, GateRegistry, GateSpec, ModelSpec, PulseSpec, Strategy,
};
use serde_json::json;

use crate::circuit::{gate_spec, merge_model, CircuitFile, CircuitOp};
use crate::error::{CliError, Exit};
use crate::{CacheAction, Cli, CliResult, Command, DeviceArgs, GateArgs, GateKind, ModelArgs};

pub fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Synth { gate, model, device, strategy } => {
            let ctx = Context::open(cli, device)?;
            let gate = build_gate(gate)?;
            let model = ctx.model_for(&gate, model)?;
            synth(&ctx, &gate, &model, (*strategy).into())
        }
        Command::Sweep { gate, model, device, durations, strategy, out } => {
            let ctx = Context::open(cli, device)?;
            let gate = build_gate(gate)?;
            let model = ctx.model_for(&gate, model)?;
            if let Some(bad) = durations.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
                return Err(CliError::usage(format!("durations must be positive, got {bad}")));
            }
            sweep(&ctx, &gate, &model, durations, (*strategy).into(), out.as_deref())
        }
        Command::Cat {
            alpha,
            zeta,
            n_max,
            device,
            noise_gamma,
            traj,
            grid_half_width,
            grid_points,
            strategy,
            out_dir,
        } => {
            let ctx = Context::open(cli, device)?;
            let noise = noise_gamma.map(|g| NoiseModel::new(g, *traj, cli.seed)).transpose()?;
            let config = CatConfig {
                alpha: *alpha,
                zeta: *zeta,
                grid: GridSpec::square(*grid_half_width, *grid_points),
                noise,
                strategy: (*strategy).into(),
            };
            cat(&ctx, *n_max, &config, out_dir)
        }
        Command::Noise { gate, model, device, gamma, traj, per_traj, strategy } => {
            let ctx = Context::open(cli, device)?;
            let gate = build_gate(gate)?;
            let model = ctx.model_for(&gate, model)?;
            let gamma = gamma.unwrap_or_else(|| ctx.device.motional_dephasing());
            let noise = NoiseModel::new(gamma, *traj, cli.seed)?;
            noise_study(&ctx, &gate, &model, &noise, *per_traj, (*strategy).into())
        }
        Command::Export { circuit, backends, buffer_us, device, out_dir } => {
            let ctx = Context::open(cli, device)?;
            let backends: Vec<ExportBackend> = if backends.is_empty() {
                ExportBackend::ALL.to_vec()
            } else {
                backends.iter().map(|&b| b.into()).collect()
            };
            export(&ctx, circuit, &backends, *buffer_us, out_dir)
        }
        Command::Cache { action } => {
            let library = &cli.library;
            match action {
                CacheAction::List { json } => cache_list(library, *json),
                CacheAction::Gc { dry_run } => cache_gc(library, *dry_run),
            }
        }
    }
}

struct Context {
    codebook: Arc<Codebook>,
    device: DeviceSpec,
    seed: u64,
}

impl Context {
    fn open(cli: &Cli, overrides: &DeviceArgs) -> CliResult<Self> {
        let mut device = resolve_device(&cli.device)?;
        if let Some(delta) = overrides.delta {
            device.delta = delta;
        }
        if let Some(eta) = overrides.eta {
            device.eta = eta;
        }
        if let Some(omega_max) = overrides.omega_max {
            device.omega_max = omega_max;
        }
        device.validate()?;
        let codebook = Codebook::new(&cli.library, Arc::new(GateRegistry::with_builtins()));
        Ok(Self { codebook: Arc::new(codebook), device, seed: cli.seed })
    }

    /// Registry default for the gate type, then command-line overrides.
    fn model_for(&self, gate: &GateSpec, args: &ModelArgs) -> CliResult<ModelSpec> {
        let base = self.codebook.registry().default_model(&gate.gate_type)?;
        let model = ModelSpec {
            n_max: args.n_max.unwrap_or(base.n_max),
            num_tslots: args.num_tslots.unwrap_or(base.num_tslots),
            duration_us: args.duration_us.unwrap_or(base.duration_us),
            amp_bound: args.amp_bound.unwrap_or(base.amp_bound),
            fid_tol: args.fid_tol.unwrap_or(base.fid_tol),
            grad_tol: args.grad_tol.unwrap_or(base.grad_tol),
            max_iter: args.max_iter.unwrap_or(base.max_iter),
            seed: self.seed,
        };
        model.validate()?;
        Ok(model)
    }
}

fn build_gate(args: &GateArgs) -> CliResult<GateSpec> {
    let missing = |flag: &str, gate: &str| CliError::usage(format!("--{flag} is required for {gate}"));
    let gate = match args.gate {
        GateKind::Cd => GateSpec::cd(args.alpha.ok_or_else(|| missing("alpha", "CD"))?)?,
        GateKind::Cr => GateSpec::cr(args.theta.ok_or_else(|| missing("theta", "CR"))?)?,
        GateKind::Cs => GateSpec::cs(args.zeta.ok_or_else(|| missing("zeta", "CS"))?)?,
    };
    Ok(gate)
}

fn print_json(value: &serde_json::Value) -> CliResult {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn pulse_summary(pulse: &PulseSpec, path: &Path, cache_hit: bool) -> serde_json::Value {
    json!({
        "key": pulse.key,
        "gate": pulse.gate,
        "duration_us": pulse.duration_us,
        "fidelity": pulse.achieved_fidelity,
        "converged": pulse.converged,
        "iterations": pulse.iterations,
        "cache_hit": cache_hit,
        "path": path.exists().then(|| path.display().to_string()),
    })
}

fn synth(ctx: &Context, gate: &GateSpec, model: &ModelSpec, strategy: Strategy) -> CliResult {
    let cb = &ctx.codebook;
    match cb.compile_pulse(gate, &ctx.device, model, strategy) {
        Ok(pulse) => {
            let hit = cb.stats().syntheses == 0;
            if hit {
                log::info!("cache hit for {} (0 optimizer iterations)", pulse.gate.label());
            } else {
                log::info!(
                    "synthesized {}: F = {:.6} after {} iterations",
                    pulse.gate.label(),
                    pulse.achieved_fidelity,
                    pulse.iterations
                );
            }
            print_json(&pulse_summary(&pulse, &cb.path_of(&pulse.key), hit))
        }
        Err(Error::Codebook(CodebookError::NotConverged { fidelity, fid_tol, stored, pulse })) => {
            print_json(&pulse_summary(&pulse, &cb.path_of(&pulse.key), false))?;
            Err(CliError {
                exit: Exit::NotConverged,
                message: format!(
                    "not converged: best F = {fidelity:.6} (target 1 - F <= {fid_tol:e}){}",
                    if stored { ", cached anyway" } else { "" }
                ),
            })
        }
        Err(e) => Err(e.into()),
    }
}

fn sweep(
    ctx: &Context,
    gate: &GateSpec,
    model: &ModelSpec,
    durations: &[f64],
    strategy: Strategy,
    out: Option<&Path>,
) -> CliResult {
    let points = duration_sweep(&ctx.codebook, gate, &ctx.device, model, durations, strategy);
    let mut csv = String::from("duration_us,infidelity,key\n");
    for p in &points {
        if let Some(err) = &p.error {
            log::warn!("{} µs: {err}", p.duration_us);
        } else if !p.converged {
            log::warn!("{} µs: not converged", p.duration_us);
        }
        let infid = p.infidelity.map(|x| format!("{x:e}")).unwrap_or_default();
        csv.push_str(&format!("{},{},{}\n", p.duration_us, infid, p.key.as_deref().unwrap_or("")));
    }
    match out {
        Some(path) => write_file(path, csv.as_bytes()),
        None => {
            std::io::stdout().lock().write_all(csv.as_bytes())?;
            Ok(())
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

fn cat(ctx: &Context, n_max: usize, config: &CatConfig, out_dir: &Path) -> CliResult {
    let registry = ctx.codebook.registry();
    let cs_model = ModelSpec { n_max, seed: ctx.seed, ..registry.default_model("CS")? };
    let cd_model = ModelSpec { n_max, seed: ctx.seed, ..registry.default_model("CD")? };
    let run = run_cat_circuit(&ctx.codebook, &ctx.device, &cs_model, &cd_model, config)?;
    let mut files = Vec::new();
    for (stage, grid) in &run.stages {
        let path = out_dir.join(format!("wigner_{stage}.csv"));
        let mut buf = Vec::new();
        grid.write_csv(&mut buf)?;
        write_file(&path, &buf)?;
        files.push(path.display().to_string());
    }
    let m = &run.metrics;
    let metrics = json!({
        "negativity": m.negativity,
        "p_up": m.p_up,
        "ideal_overlap": m.ideal_overlap,
        "cs_key": m.cs_key,
        "cd_key": m.cd_key,
        "cs_fidelity": m.cs_fidelity,
        "cd_fidelity": m.cd_fidelity,
        "optimizer_calls": m.syntheses,
        "trajectories": m.trajectories,
        "gamma_hz": config.noise.as_ref().map(|n| n.gamma),
        "seed": ctx.seed,
        "wigner_files": files,
    });
    let text = serde_json::to_string_pretty(&metrics).map_err(|e| CliError::io(e.to_string()))? + "\n";
    write_file(&out_dir.join("cat_metrics.json"), text.as_bytes())?;
    log::info!("negativity {:.4}, p(up) {:.4}", m.negativity, m.p_up);
    print_json(&metrics)
}

fn noise_study(
    ctx: &Context,
    gate: &GateSpec,
    model: &ModelSpec,
    noise: &NoiseModel,
    per_traj: bool,
    strategy: Strategy,
) -> CliResult {
    let pulse = ctx.codebook.compile_pulse(gate, &ctx.device, model, strategy)?;
    let problem = ctx.codebook.problem_for(&pulse)?;
    let closed = fidelity(&problem.u_target, &propagate(&problem, &pulse.waveforms)?)?;
    let nf = noisy_fidelity(&problem, &pulse.waveforms, noise)?;
    log::info!("{}: closed F = {closed:.6}, noisy F = {:.4}", pulse.gate.label(), nf.mean);
    let mut value = json!({
        "gate": pulse.gate,
        "key": pulse.key,
        "gamma_hz": noise.gamma,
        "trajectories": noise.num_trajectories,
        "seed": noise.rng_seed,
        "closed_fidelity": closed,
        "mean": nf.mean,
        "std": nf.std,
    });
    if per_traj {
        value["per_trajectory"] = json!(nf.per_trajectory);
    }
    print_json(&value)
}

fn export(
    ctx: &Context,
    circuit: &Path,
    backends: &[ExportBackend],
    buffer_us: Option<f64>,
    out_dir: &Path,
) -> CliResult {
    let file = CircuitFile::load(circuit)?;
    let mut ex = CircuitExporter::new(Arc::clone(&ctx.codebook), ctx.device.clone()).named(file.name.clone());
    if let Some(b) = buffer_us.or(file.buffer_us) {
        ex = ex.with_buffer_us(b);
    }
    for (i, op) in file.gates.iter().enumerate() {
        match op {
            CircuitOp::Gate { gate, params, qubit, qumode, model } => {
                let spec = gate_spec(gate, params, *qubit, *qumode)?;
                let mut m = ModelSpec { seed: ctx.seed, ..ctx.codebook.registry().default_model(&spec.gate_type)? };
                if let Some(overrides) = model {
                    m = merge_model(&m, overrides)?;
                }
                ex.add_gate_with_model(spec, m).map_err(|e| {
                    let err = CliError::from(e);
                    CliError { message: format!("circuit entry {i}: {}", err.message), ..err }
                })?;
            }
            CircuitOp::Ideal { ideal, qubit } => ex.add_ideal(ideal, *qubit)?,
        }
    }
    let paths = ex.export(out_dir, backends)?;
    let stats = ctx.codebook.stats();
    log::info!("{} entries, {} optimizer calls, {} cache hits", ex.len(), stats.syntheses, stats.hits);
    print_json(&json!({
        "files": paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "optimizer_calls": stats.syntheses,
    }))
}

fn cache_list(library: &Path, as_json: bool) -> CliResult {
    let cb = Codebook::new(library, Arc::new(GateRegistry::with_builtins()));
    let mut entries = cb.entries()?;
    entries.sort_by(|a, b| a.key.cmp(&b.key));
    if as_json {
        let rows: Vec<_> = entries.iter().map(|p| pulse_summary(p, &cb.path_of(&p.key), true)).collect();
        return print_json(&json!(rows));
    }
    let mut out = std::io::stdout().lock();
    for p in &entries {
        writeln!(
            out,
            "{}  {:<40} {:>8.1} us  F={:.6}{}",
            &p.key[..16],
            p.gate.label(),
            p.duration_us,
            p.achieved_fidelity,
            if p.converged { "" } else { "  (not converged)" }
        )?;
    }
    log::info!("{} entries in {}", entries.len(), library.display());
    Ok(())
}

/// Corrupt entries and stray temporary files from interrupted writes.
fn cache_gc(library: &Path, dry_run: bool) -> CliResult {
    let mut doomed = Vec::new();
    let files = list_pulse_files(library)?;
    for path in &files {
        if let Err(e) = read_pulse(path) {
            log::warn!("{e}");
            doomed.push(path.clone());
        }
    }
    let shard_dirs: Vec<_> = files.iter().filter_map(|p| p.parent().map(Path::to_path_buf)).collect();
    let mut seen = std::collections::BTreeSet::new();
    for dir in shard_dirs.into_iter().filter(|d| seen.insert(d.clone())) {
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            if name.starts_with(".tmp") {
                doomed.push(path);
            }
        }
    }
    if !dry_run {
        for path in &doomed {
            fs::remove_file(path).map_err(|e| CliError::io(format!("cannot remove {}: {e}", path.display())))?;
        }
    }
    print_json(&json!({
        "scanned": files.len(),
        "removed": doomed.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "dry_run": dry_run,
    }))
}
