use std::path::{Path, PathBuf};

use gremlab::cascade::{cascade_energy, sample_cascade};
use gremlab::limit::{free_energy_curve, rem_free_energy_variational};
use gremlab::scalar::{ground_state_constant, optimal_magnetization, rho};
use gremlab::simulator::{rescale_energies, run_replicas, EnergyScaling};
use gremlab::model::coarse_grain;
use gremlab::SimulationSpec;

use crate::config::{FreeEnergyConfig, RunConfig};
use crate::experiments::{cascade_seed, fluctuations, partition_tail, FluctuationParams};
use crate::output::{self, Table};
use crate::{Cli, Command, Common, Invalid};

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    Failed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Passed => crate::EXIT_OK,
            Outcome::Failed => crate::EXIT_FAILED,
        }
    }
}

struct Run {
    cfg: RunConfig,
    raw: Option<String>,
    out: Option<PathBuf>,
}

impl Run {
    fn load(common: &Common) -> anyhow::Result<Self> {
        let (mut cfg, raw) = match &common.config {
            Some(path) => {
                let (cfg, raw) = RunConfig::load(path)?;
                (cfg, Some(raw))
            }
            None => (RunConfig::default(), None),
        };
        if let Some(seed) = common.seed {
            cfg.seed = Some(seed);
        }
        if let Some(s) = cfg.simulate.as_mut() {
            s.zero_disorder |= common.zero_disorder;
            if let Some(k) = common.top_k {
                s.top_k = k;
            }
        }
        if let Some(f) = cfg.fluctuations.as_mut() {
            if let Some(k) = common.top_k {
                f.top_k = k;
            }
        }
        Ok(Self {
            cfg,
            raw,
            out: common.out.clone(),
        })
    }

    /// Output directory for commands that always write files.
    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Copies the configuration and its effective form next to the results.
    fn write_run_config(&self, dir: &Path) -> anyhow::Result<()> {
        if let Some(raw) = &self.raw {
            output::write(&dir.join("config.toml"), raw)?;
        }
        output::write(&dir.join("effective.toml"), &self.cfg.to_toml())
    }

    /// Prints a table, or writes it under `--out` when given.
    fn emit_table(&self, file: &str, table: &Table) -> anyhow::Result<()> {
        match &self.out {
            Some(dir) => {
                self.write_run_config(dir)?;
                output::write(&dir.join(file), table.as_str())
            }
            None => {
                print!("{}", table.as_str());
                Ok(())
            }
        }
    }
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, Invalid> {
    s.as_ref().ok_or_else(|| Invalid(format!("config has no [{name}] section")))
}

fn check_h_grid(grid: &[f64]) -> Result<(), Invalid> {
    if grid.is_empty() {
        return Err(Invalid("h grid is empty".into()));
    }
    if grid.iter().any(|h| !h.is_finite()) {
        return Err(Invalid("h grid has a non-finite value".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Invalid("h grid must be strictly increasing".into()));
    }
    Ok(())
}

pub fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let run = Run::load(&cli.common)?;
    match &cli.command {
        Command::Tstar { h_grid } => tstar(&run, h_grid.as_deref()),
        Command::CoarseGrain => coarse_grain_cmd(&run),
        Command::FreeEnergy => free_energy(&run),
        Command::Simulate => simulate(&run),
        Command::Fluctuations => fluctuations_cmd(&run),
        Command::Cascade => cascade(&run),
        Command::Validate => validate(&run),
    }
}

fn tstar(run: &Run, flag: Option<&[f64]>) -> anyhow::Result<Outcome> {
    let grid = match (flag, &run.cfg.tstar) {
        (Some(g), _) => g.to_vec(),
        (None, Some(t)) => t.h_grid.clone(),
        (None, None) => return Err(Invalid("no h grid: pass --h-grid or add a [tstar] section".into()).into()),
    };
    check_h_grid(&grid)?;
    let mut table = Table::new(output::TSTAR_HEADER);
    for h in grid {
        let t = optimal_magnetization(h).map_err(Invalid::from)?;
        let m = ground_state_constant(h).map_err(Invalid::from)?;
        let r = rho(t).map_err(Invalid::from)?;
        table.row(&[h.to_string(), t.to_string(), m.to_string(), r.to_string()]);
    }
    run.emit_table("tstar.csv", &table)?;
    Ok(Outcome::Passed)
}

fn coarse_grain_cmd(run: &Run) -> anyhow::Result<Outcome> {
    let model = run.cfg.model();
    let op = model.order_parameter()?;
    let cg = coarse_grain(&op, model.h).map_err(Invalid::from)?;
    let mut table = Table::new(output::COARSE_GRAIN_HEADER);
    for l in 0..cg.m() {
        table.row(&[
            (l + 1).to_string(),
            cg.j[l + 1].to_string(),
            cg.q_bar[l].to_string(),
            cg.x_bar[l].to_string(),
            cg.theta_bar[l].to_string(),
            cg.gamma_bar[l].to_string(),
            cg.t_block[l].to_string(),
            cg.critical.to_string(),
        ]);
    }
    run.emit_table("coarse_grain.csv", &table)?;
    Ok(Outcome::Passed)
}

fn free_energy(run: &Run) -> anyhow::Result<Outcome> {
    let model = run.cfg.model();
    let op = model.order_parameter()?;
    let fe = run.cfg.free_energy.clone().unwrap_or_else(FreeEnergyConfig::default);
    let betas = fe.grid();
    let curve = free_energy_curve(&op, model.h, &betas).map_err(Invalid::from)?;
    let mut table = Table::new(output::FREE_ENERGY_HEADER);
    for (i, &b) in curve.beta_grid.iter().enumerate() {
        let variational = if op.n() == 1 {
            rem_free_energy_variational(b, model.h, fe.variational_grid)
                .map_err(Invalid::from)?
                .to_string()
        } else {
            String::new()
        };
        table.row(&[b.to_string(), curve.values[i].to_string(), curve.threshold_levels[i].to_string(), variational]);
    }
    run.emit_table("free_energy.csv", &table)?;
    Ok(Outcome::Passed)
}

fn simulation_spec(run: &Run) -> Result<(SimulationSpec, usize), Invalid> {
    let sim = section(&run.cfg.simulate, "simulate")?;
    let model = run.cfg.model();
    let mut spec = SimulationSpec::new(sim.n, model.order_parameter()?, model.h, sim.betas.clone(), run.cfg.seed(), sim.replicas);
    spec.zero_disorder = sim.zero_disorder;
    spec.size_cap = sim.size_cap;
    spec.validate()?;
    if spec.n < 64 && sim.top_k as u128 > 1u128 << spec.n {
        return Err(Invalid(format!("top_k = {} exceeds 2^N", sim.top_k)));
    }
    Ok((spec, sim.top_k))
}

fn simulate(run: &Run) -> anyhow::Result<Outcome> {
    let (spec, top_k) = simulation_spec(run)?;
    let runs = run_replicas(&spec, top_k).map_err(Invalid::from)?;
    let dir = run.out_dir();
    run.write_run_config(&dir)?;
    let records: Vec<_> = runs.iter().map(|e| &e.record).collect();
    output::write(&dir.join("observables.jsonl"), &output::jsonl(&records)?)?;
    if top_k > 0 {
        let scaling = EnergyScaling::for_spec(&spec).map_err(Invalid::from)?;
        for e in &runs {
            let sample = rescale_energies(&e.top_energies, spec.n, &scaling).map_err(Invalid::from)?;
            let name = format!("points/replica_{:04}.csv", e.record.replica);
            output::write(&dir.join(name), &output::points_csv(sample.points()))?;
        }
    }
    Ok(Outcome::Passed)
}

fn fluctuation_params(run: &Run) -> Result<FluctuationParams, Invalid> {
    let f = section(&run.cfg.fluctuations, "fluctuations")?;
    let model = run.cfg.model();
    Ok(FluctuationParams {
        op: model.order_parameter()?,
        h: model.h,
        n: f.n,
        seed: run.cfg.seed(),
        replicas: f.replicas,
        top_k: f.top_k,
        interval: f.interval,
        cascade_seeds: f.cascade_seeds,
        cascade_k: f.cascade_k,
        scaling_h: f.scaling_h,
        size_cap: f.size_cap,
    })
}

fn fluctuations_cmd(run: &Run) -> anyhow::Result<Outcome> {
    let params = fluctuation_params(run)?;
    let report = fluctuations(&params).map_err(Invalid::from)?;
    let dir = run.out_dir();
    run.write_run_config(&dir)?;
    output::write_json(&dir.join("report.json"), &report)?;
    let mut maxima = Table::new("replica,rescaled_max");
    for (r, m) in report.maxima.iter().enumerate() {
        maxima.row(&[r.to_string(), m.to_string()]);
    }
    output::write(&dir.join("maxima.csv"), maxima.as_str())?;
    if !report.reference.is_empty() {
        let mut reference = Table::new("sample,cascade_max");
        for (i, m) in report.reference.iter().enumerate() {
            reference.row(&[i.to_string(), m.to_string()]);
        }
        output::write(&dir.join("cascade_maxima.csv"), reference.as_str())?;
    }
    for t in &report.tests {
        println!("{}: statistic {} (1% critical {}) {}", t.test, t.statistic, t.critical_01, if t.pass_01 { "pass" } else { "FAIL" });
    }
    println!("{}", if report.passed { "PASS" } else { "FAIL" });
    Ok(if report.passed { Outcome::Passed } else { Outcome::Failed })
}

fn gamma_bar(run: &Run) -> Result<Vec<f64>, Invalid> {
    let c = section(&run.cfg.cascade, "cascade")?;
    match &c.gamma_bar {
        Some(g) => Ok(g.clone()),
        None => {
            let model = run.cfg.model();
            Ok(coarse_grain(&model.order_parameter()?, model.h)?.gamma_bar)
        }
    }
}

fn cascade(run: &Run) -> anyhow::Result<Outcome> {
    let c = section(&run.cfg.cascade, "cascade")?.clone();
    let gamma = gamma_bar(run)?;
    let seed = run.cfg.seed();
    let (report, integrals) = partition_tail(seed, &gamma, c.beta, c.k, c.seeds, c.top_fraction).map_err(Invalid::from)?;
    let first = sample_cascade(cascade_seed(seed, 0), gamma.len(), c.k).map_err(Invalid::from)?;
    let energies = cascade_energy(&first, &gamma).map_err(Invalid::from)?;
    let dir = run.out_dir();
    run.write_run_config(&dir)?;
    let mut table = Table::new(output::INTEGRALS_HEADER);
    for (i, pi) in integrals.iter().enumerate() {
        table.row(&[i.to_string(), pi.log_value.to_string(), pi.tail_fraction.to_string(), pi.tail_flag.to_string()]);
    }
    output::write(&dir.join("integrals.csv"), table.as_str())?;
    output::write(&dir.join("energies_0000.csv"), &output::points_csv(energies.points()))?;
    output::write_json(&dir.join("report.json"), &report)?;
    println!(
        "tail index {} (95% CI [{}, {}]), expected {}",
        report.hill.alpha, report.hill.ci_low, report.hill.ci_high, report.expected_alpha
    );
    Ok(Outcome::Passed)
}

fn validate(run: &Run) -> anyhow::Result<Outcome> {
    let model = run.cfg.model();
    let op = model.order_parameter()?;
    coarse_grain(&op, model.h).map_err(Invalid::from)?;
    if let Some(t) = &run.cfg.tstar {
        check_h_grid(&t.h_grid)?;
    }
    if let Some(f) = &run.cfg.free_energy {
        let b = f.grid();
        if b.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || b.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Invalid("beta grid must be finite, non-negative and strictly increasing".into()).into());
        }
    }
    if run.cfg.simulate.is_some() {
        simulation_spec(run)?;
    }
    if run.cfg.fluctuations.is_some() {
        let p = fluctuation_params(run)?;
        let mut spec = SimulationSpec::new(p.n, p.op, p.h, Vec::new(), p.seed, p.replicas);
        spec.size_cap = p.size_cap;
        spec.validate().map_err(Invalid::from)?;
    }
    if let Some(c) = &run.cfg.cascade {
        let g = gamma_bar(run)?;
        if let Some((l, x)) = g.iter().enumerate().find(|(_, x)| !(c.beta * **x > 1.0)) {
            return Err(Invalid(format!("beta * gamma_bar_{} = {} is not above 1", l + 1, c.beta * x)).into());
        }
    }
    println!("ok");
    Ok(Outcome::Passed)
}
