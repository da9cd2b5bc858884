//! Seeded Monte-Carlo experiments: user draws, joint optimization,
//! beampattern export and the LWA versus fully digital MIMO comparison.
//!
//! Randomness comes from ChaCha8 with one stream per trial index, so trial
//! `t` sees the same user draw regardless of how many trials are run.

mod config;
pub mod stats;

pub use config::ScenarioConfig;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fs;
use std::path::{Path, PathBuf};

use crate::channel::{
    beampattern, build_channel, BeamMap, Scenario, User, UserSet, DEFAULT_LOG_FLOOR,
};
use crate::error::Result;
use crate::format::sig9;
use crate::mimo::{build_mimo_channel, mimo_sum_rate, normalize_to_lwa, MimoChannelTensor};
use crate::optimizer::{optimize_with_table, AllocationResult, GeometryTable};

/// Generator for trial `trial` of the experiment seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Draws `config.users` positions uniformly over the configured angle and range box.
///
/// Each user consumes one angle draw followed by one range draw.
pub fn sample_users<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<UserSet> {
    let users = (0..config.users)
        .map(|_| {
            let angle = uniform(rng, config.angle_min_deg, config.angle_max_deg).to_radians();
            let range = uniform(rng, config.range_min_m, config.range_max_m);
            User { angle, range }
        })
        .collect();
    UserSet::new(users)
}

/// Users of trial `trial` under `config.seed`.
pub fn users_for_trial(config: &ScenarioConfig, trial: u64) -> Result<UserSet> {
    sample_users(config, &mut trial_rng(config.seed, trial))
}

/// One optimized LWA deployment.
#[derive(Debug, Clone)]
pub struct OptimizeRun {
    pub users: UserSet,
    pub result: AllocationResult,
}

impl OptimizeRun {
    pub fn to_report(&self) -> String {
        format!("{}\n{}", users_report(&self.users), self.result.to_report())
    }
}

fn users_report(users: &UserSet) -> String {
    let mut out = String::from("# users\nangle_deg,range_m\n");
    out.push_str(&users_csv_body(users));
    out
}

fn users_csv_body(users: &UserSet) -> String {
    users
        .iter()
        .map(|u| format!("{},{}\n", sig9(u.angle.to_degrees()), sig9(u.range)))
        .collect()
}

fn scenario_for(config: &ScenarioConfig, users: UserSet) -> Result<Scenario> {
    Ok(Scenario::with_default_loss(config.frequency_grid()?, users))
}

/// Runs the alternating optimizer for an explicit scenario.
pub fn optimize_scenario(config: &ScenarioConfig, scenario: &Scenario) -> Result<AllocationResult> {
    let table = GeometryTable::build(&config.search_grids()?, scenario);
    optimize_with_table(
        &table,
        config.power,
        scenario.grid.len(),
        &config.noise()?,
        &config.optimizer_settings(),
    )
}

/// Optimizes the first trial's user draw at the configured power.
pub fn run_optimize(config: &ScenarioConfig) -> Result<OptimizeRun> {
    config.validate()?;
    let users = users_for_trial(config, 0)?;
    let scenario = scenario_for(config, users.clone())?;
    let result = optimize_scenario(config, &scenario)?;
    Ok(OptimizeRun { users, result })
}

/// Optimized deployment together with its radiated energy map.
#[derive(Debug, Clone)]
pub struct BeampatternRun {
    pub users: UserSet,
    pub result: AllocationResult,
    pub map: BeamMap,
}

impl BeampatternRun {
    /// Writes `beampattern.csv`, `users.csv` and `allocation.txt` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let files = [
            ("beampattern.csv", self.map.to_csv()),
            (
                "users.csv",
                format!("angle_deg,range_m\n{}", users_csv_body(&self.users)),
            ),
            ("allocation.txt", self.result.to_report()),
        ];
        let mut written = Vec::new();
        for (name, body) in files {
            let path = dir.join(name);
            fs::write(&path, body)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Optimizes `scenario` and maps its energy over the configured angle/range grid.
pub fn run_beampattern_for(config: &ScenarioConfig, scenario: &Scenario) -> Result<BeampatternRun> {
    let result = optimize_scenario(config, scenario)?;
    let (angles, ranges) = config.map_axes();
    let map = beampattern(
        &result.config,
        &scenario.grid,
        &result.powers,
        scenario.loss.as_ref(),
        &angles,
        &ranges,
        DEFAULT_LOG_FLOOR,
    )?;
    Ok(BeampatternRun {
        users: scenario.users.clone(),
        result,
        map,
    })
}

/// Samples the first trial's users, optimizes them and exports the energy map.
pub fn run_beampattern_experiment(config: &ScenarioConfig) -> Result<BeampatternRun> {
    config.validate()?;
    let scenario = scenario_for(config, users_for_trial(config, 0)?)?;
    run_beampattern_for(config, &scenario)
}

/// Rates of one trial at one SNR point, both systems on the same user draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedRates {
    pub lwa: f64,
    pub mimo: f64,
}

/// Paired LWA and normalized-MIMO evaluation of one user draw.
#[derive(Debug, Clone)]
pub struct ComparisonRun {
    pub trial: u64,
    pub users: UserSet,
    pub lwa: AllocationResult,
    pub mimo_rate: f64,
    pub mimo_normalization: f64,
    pub snr_db: f64,
}

impl ComparisonRun {
    pub fn to_report(&self) -> String {
        format!(
            "# comparison\ntrial = {}\nsnr_db = {}\nlwa_rate_bits = {}\nmimo_rate_bits = {}\n\
             mimo_normalization = {}\n\n{}\n{}",
            self.trial,
            sig9(self.snr_db),
            sig9(self.lwa.sum_rate),
            sig9(self.mimo_rate),
            sig9(self.mimo_normalization),
            users_report(&self.users),
            self.lwa.to_report()
        )
    }
}

/// Per-trial state reused across SNR points.
struct TrialSetup {
    users: UserSet,
    scenario: Scenario,
    table: GeometryTable,
    mimo: MimoChannelTensor,
}

impl TrialSetup {
    fn new(config: &ScenarioConfig, trial: u64) -> Result<Self> {
        let users = users_for_trial(config, trial)?;
        let scenario = scenario_for(config, users.clone())?;
        let table = GeometryTable::build(&config.search_grids()?, &scenario);
        let mimo = build_mimo_channel(&config.ula()?, &scenario.grid, &users)?;
        Ok(Self {
            users,
            scenario,
            table,
            mimo,
        })
    }

    /// Optimized LWA and normalized MIMO at `budget`.
    fn evaluate(
        &self,
        config: &ScenarioConfig,
        budget: f64,
    ) -> Result<(AllocationResult, PairedRates, f64)> {
        let noise = config.noise()?;
        let lwa = optimize_with_table(
            &self.table,
            budget,
            self.scenario.grid.len(),
            &noise,
            &config.optimizer_settings(),
        )?;
        let channel = build_channel(
            &lwa.config,
            &self.scenario.grid,
            &self.scenario.users,
            self.scenario.loss.as_ref(),
        );
        let mimo = normalize_to_lwa(&self.mimo, &channel)?;
        let mimo_rate = mimo_sum_rate(&mimo, budget, &noise)?;
        let rates = PairedRates {
            lwa: lwa.sum_rate,
            mimo: mimo_rate,
        };
        Ok((lwa, rates, mimo.normalization_factor()))
    }
}

/// Single paired comparison for trial `trial` at the configured power.
pub fn compare_mimo(config: &ScenarioConfig, trial: u64) -> Result<ComparisonRun> {
    config.validate()?;
    let setup = TrialSetup::new(config, trial)?;
    let (lwa, rates, normalization) = setup.evaluate(config, config.power)?;
    Ok(ComparisonRun {
        trial,
        users: setup.users,
        lwa,
        mimo_rate: rates.mimo,
        mimo_normalization: normalization,
        snr_db: config.snr_db_of_power(),
    })
}

/// Aggregate of one SNR point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub snr_db: f64,
    pub mean_lwa: f64,
    pub std_lwa: f64,
    pub mean_mimo: f64,
    pub std_mimo: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// `per_trial[t][s]` holds trial `t` at SNR point `s`.
    pub per_trial: Vec<Vec<PairedRates>>,
}

impl SweepResult {
    /// CSV with header `snr_db,mean_lwa,std_lwa,mean_mimo,std_mimo,trials`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("snr_db,mean_lwa,std_lwa,mean_mimo,std_mimo,trials\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                sig9(r.snr_db),
                sig9(r.mean_lwa),
                sig9(r.std_lwa),
                sig9(r.mean_mimo),
                sig9(r.std_mimo),
                r.trials
            ));
        }
        out
    }
}

/// Sum-rate versus average SNR `P / (N sigma^2)` for both systems.
///
/// Trial `t` draws its users once and evaluates every SNR point on them.
pub fn run_snr_sweep(config: &ScenarioConfig, snr_points_db: &[f64]) -> Result<SweepResult> {
    config.validate()?;
    if snr_points_db.is_empty() {
        return Err(crate::error::LwaError::InvalidInput(
            "SNR sweep needs at least one point".into(),
        ));
    }
    let per_trial: Vec<Vec<PairedRates>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let setup = TrialSetup::new(config, trial)?;
            snr_points_db
                .iter()
                .map(|&snr| {
                    setup
                        .evaluate(config, config.power_for_snr_db(snr))
                        .map(|(_, rates, _)| rates)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let rows = snr_points_db
        .iter()
        .enumerate()
        .map(|(s, &snr_db)| {
            let lwa: Vec<f64> = per_trial.iter().map(|t| t[s].lwa).collect();
            let mimo: Vec<f64> = per_trial.iter().map(|t| t[s].mimo).collect();
            let (mean_lwa, std_lwa) = stats::mean_std(&lwa);
            let (mean_mimo, std_mimo) = stats::mean_std(&mimo);
            SweepRow {
                snr_db,
                mean_lwa,
                std_lwa,
                mean_mimo,
                std_mimo,
                trials: per_trial.len(),
            }
        })
        .collect();
    Ok(SweepResult { rows, per_trial })
}
