//! Joint tuning of the antenna geometry and the spectral power allocation.
//!
//! The sum-rate is non-convex in `(b, L)` but concave in the powers for a
//! fixed geometry. [`alternate_optimize`] therefore alternates an exhaustive
//! grid search over `(b, L)` under the current powers with a waterfilling
//! step under the chosen geometry.

use rayon::prelude::*;

use crate::channel::{average_rate_from_gains, build_channel, NoiseModel, Scenario};
use crate::error::{LwaError, Result};
use crate::format::sig9;
use crate::physics::{LwaBounds, LwaConfig};

/// Relative slack allowed on the budget when validating an allocation.
const BUDGET_SLACK: f64 = 1e-9;
const WATERFILL_MAX_ITERATIONS: usize = 200;
const WATERFILL_RESIDUAL: f64 = 1e-12;

/// Per-subband transmit powers under a total budget.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    powers: Vec<f64>,
    budget: f64,
}

impl PowerAllocation {
    pub fn new(powers: Vec<f64>, budget: f64) -> Result<Self> {
        if !(budget >= 0.0 && budget.is_finite()) {
            return Err(LwaError::InvalidInput(format!(
                "power budget must be non-negative, got {budget}"
            )));
        }
        if let Some(p) = powers.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(LwaError::InvalidInput(format!(
                "powers must be non-negative, got {p}"
            )));
        }
        let total: f64 = powers.iter().sum();
        if total > budget * (1.0 + BUDGET_SLACK) {
            return Err(LwaError::InvalidInput(format!(
                "allocated power {total} exceeds budget {budget}"
            )));
        }
        Ok(Self { powers, budget })
    }

    /// `P / N` on every subband.
    pub fn uniform(subbands: usize, budget: f64) -> Result<Self> {
        if subbands == 0 {
            return Err(LwaError::InvalidInput("no subbands".into()));
        }
        Self::new(vec![budget / subbands as f64; subbands], budget)
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }
}

/// Optimal power split over parallel channels with power gains `gains_squared`.
///
/// Returns `P_n = max(mu - sigma^2 / g_n, 0)` with the water level `mu` found
/// by bisection so that the powers exhaust `budget`. Zero-gain channels get
/// exactly zero. A zero budget yields an all-zero allocation.
pub fn waterfill(
    gains_squared: &[f64],
    budget: f64,
    noise: &NoiseModel,
) -> Result<PowerAllocation> {
    if gains_squared.is_empty() {
        return Err(LwaError::InvalidInput("no channels to waterfill".into()));
    }
    if let Some(g) = gains_squared
        .iter()
        .find(|g| !(**g >= 0.0 && g.is_finite()))
    {
        return Err(LwaError::InvalidInput(format!(
            "channel gains must be non-negative, got {g}"
        )));
    }
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(LwaError::InvalidInput(format!(
            "power budget must be non-negative, got {budget}"
        )));
    }
    let sigma2 = noise.variance();
    let floors: Vec<Option<f64>> = gains_squared
        .iter()
        .map(|&g| (g > 0.0).then(|| sigma2 / g))
        .collect();
    let lowest = floors
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if !lowest.is_finite() {
        return Err(LwaError::AllGainsZero);
    }
    if budget == 0.0 {
        return PowerAllocation::new(vec![0.0; gains_squared.len()], 0.0);
    }

    let poured = |level: f64| -> f64 {
        floors
            .iter()
            .flatten()
            .map(|floor| (level - floor).max(0.0))
            .sum()
    };
    // At `lowest` nothing is poured; at `lowest + budget` at least `budget` is.
    let (mut lo, mut hi) = (lowest, lowest + budget);
    let mut level = hi;
    for _ in 0..WATERFILL_MAX_ITERATIONS {
        level = 0.5 * (lo + hi);
        let excess = poured(level) - budget;
        if excess.abs() <= WATERFILL_RESIDUAL * budget || level <= lo || level >= hi {
            break;
        }
        if excess > 0.0 {
            hi = level;
        } else {
            lo = level;
        }
    }
    // Polish: with the active set fixed the powers have a closed form,
    // P_n = (P - sum_j (floor_n - floor_j)) / |A|, evaluated on floor
    // differences so tiny budgets keep their relative accuracy.
    let mut active: Vec<usize> = (0..floors.len())
        .filter(|&n| floors[n].is_some_and(|f| f < level))
        .collect();
    if active.is_empty() {
        // Budget below rounding of the lowest floor: it all goes to the best channel.
        active = (0..floors.len())
            .filter(|&n| floors[n] == Some(lowest))
            .take(1)
            .collect();
    }
    let mut powers = vec![0.0; floors.len()];
    loop {
        let count = active.len() as f64;
        let mut dropped = false;
        for &n in &active {
            let f_n = floors[n].expect("active channels have a floor");
            let spread: f64 = active
                .iter()
                .map(|&j| f_n - floors[j].expect("active channels have a floor"))
                .sum();
            powers[n] = (budget - spread) / count;
            dropped |= powers[n] < 0.0;
        }
        if !dropped {
            break;
        }
        active.retain(|&n| powers[n] >= 0.0);
        powers.iter_mut().for_each(|p| *p = p.max(0.0));
    }
    PowerAllocation::new(powers, budget)
}

/// Candidate values for the plate separation and slit length.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchGrids {
    b_values: Vec<f64>,
    l_values: Vec<f64>,
}

impl SearchGrids {
    /// Uniform grids including both endpoints. A single-point axis uses the
    /// midpoint of its range.
    pub fn uniform(bounds: &LwaBounds, b_points: usize, l_points: usize) -> Result<Self> {
        Self::from_values(
            linspace(bounds.b_min, bounds.b_max, b_points)?,
            linspace(bounds.l_min, bounds.l_max, l_points)?,
        )
    }

    /// Explicit grids; each must be non-empty, positive and strictly increasing.
    pub fn from_values(b_values: Vec<f64>, l_values: Vec<f64>) -> Result<Self> {
        for (name, values) in [("b", &b_values), ("L", &l_values)] {
            if values.is_empty() {
                return Err(LwaError::InvalidInput(format!("{name} grid is empty")));
            }
            if values.iter().any(|v| !(*v > 0.0 && v.is_finite()))
                || values.windows(2).any(|w| w[1] <= w[0])
            {
                return Err(LwaError::InvalidInput(format!(
                    "{name} grid must be positive and strictly increasing"
                )));
            }
        }
        Ok(Self { b_values, l_values })
    }

    pub fn b_values(&self) -> &[f64] {
        &self.b_values
    }

    pub fn l_values(&self) -> &[f64] {
        &self.l_values
    }

    pub fn len(&self) -> usize {
        self.b_values.len() * self.l_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Candidate `index` in tie-break order: ascending `b`, then ascending `L`.
    pub fn candidate(&self, index: usize) -> LwaConfig {
        let n_l = self.l_values.len();
        LwaConfig {
            plate_separation: self.b_values[index / n_l],
            slit_length: self.l_values[index % n_l],
            leakage: 0.0,
        }
    }

    pub fn candidates(&self) -> impl Iterator<Item = LwaConfig> + '_ {
        (0..self.len()).map(|i| self.candidate(i))
    }
}

fn linspace(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    match points {
        0 => Err(LwaError::InvalidInput(
            "grid needs at least one point".into(),
        )),
        1 => Ok(vec![0.5 * (lo + hi)]),
        _ => {
            let step = (hi - lo) / (points - 1) as f64;
            let mut v: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
            v[points - 1] = hi;
            Ok(v)
        }
    }
}

/// Channel power gains `||h_n||^2` of every grid candidate.
///
/// Built once per scenario so repeated searches only re-weight the gains.
#[derive(Debug, Clone)]
pub struct GeometryTable {
    grids: SearchGrids,
    gains: Vec<Vec<f64>>,
}

impl GeometryTable {
    pub fn build(grids: &SearchGrids, scenario: &Scenario) -> Self {
        let gains = (0..grids.len())
            .into_par_iter()
            .map(|i| {
                build_channel(
                    &grids.candidate(i),
                    &scenario.grid,
                    &scenario.users,
                    scenario.loss.as_ref(),
                )
                .gains_squared()
            })
            .collect();
        Self {
            grids: grids.clone(),
            gains,
        }
    }

    pub fn grids(&self) -> &SearchGrids {
        &self.grids
    }

    pub fn gains(&self, index: usize) -> &[f64] {
        &self.gains[index]
    }

    /// Best candidate under fixed powers; ties go to the lowest index.
    pub fn argmax(&self, powers: &PowerAllocation, noise: &NoiseModel) -> Result<(usize, f64)> {
        let rates: Vec<f64> = self
            .gains
            .par_iter()
            .map(|g| average_rate_from_gains(g, powers.powers(), noise))
            .collect::<Result<_>>()?;
        let mut best = 0;
        for (i, r) in rates.iter().enumerate() {
            if *r > rates[best] {
                best = i;
            }
        }
        Ok((best, rates[best]))
    }
}

/// Winning geometry of a grid search and its rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridChoice {
    pub config: LwaConfig,
    pub rate: f64,
}

/// Exhaustive search for the geometry maximizing the sum-rate under fixed powers.
pub fn grid_search_geometry(
    grids: &SearchGrids,
    fixed_powers: &PowerAllocation,
    scenario: &Scenario,
    noise: &NoiseModel,
) -> Result<GridChoice> {
    if fixed_powers.len() != scenario.grid.len() {
        return Err(LwaError::LengthMismatch {
            expected: scenario.grid.len(),
            actual: fixed_powers.len(),
        });
    }
    let table = GeometryTable::build(grids, scenario);
    let (index, rate) = table.argmax(fixed_powers, noise)?;
    Ok(GridChoice {
        config: grids.candidate(index),
        rate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    pub max_iterations: usize,
    /// Stop once geometry and powers repeat between iterations.
    pub early_exit: bool,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            max_iterations: 10,
            early_exit: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub plate_separation: f64,
    pub slit_length: f64,
    pub rate: f64,
}

/// Outcome of [`alternate_optimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    pub config: LwaConfig,
    pub powers: PowerAllocation,
    pub sum_rate: f64,
    pub trace: Vec<IterationRecord>,
    /// Set when the loop stopped on a fixed point.
    pub converged: bool,
}

impl AllocationResult {
    /// Trace as CSV with header `iter,b_m,L_m,rate_bits`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iter,b_m,L_m,rate_bits\n");
        for rec in &self.trace {
            out.push_str(&format!(
                "{},{},{},{}\n",
                rec.iteration,
                sig9(rec.plate_separation),
                sig9(rec.slit_length),
                sig9(rec.rate)
            ));
        }
        out
    }

    /// Plain-text report: `key = value` header lines followed by the trace CSV.
    pub fn to_report(&self) -> String {
        let powers: Vec<String> = self.powers.powers().iter().map(|p| sig9(*p)).collect();
        format!(
            "# allocation\nb_m = {}\nL_m = {}\nsum_rate_bits = {}\nbudget = {}\n\
             iterations = {}\nconverged = {}\npowers = [{}]\n\n# trace\n{}",
            sig9(self.config.plate_separation),
            sig9(self.config.slit_length),
            sig9(self.sum_rate),
            sig9(self.powers.budget()),
            self.trace.len(),
            self.converged,
            powers.join(", "),
            self.trace_csv()
        )
    }
}

/// Alternating optimization of geometry and powers.
///
/// Starts from uniform powers `P / N`. Each iteration picks the best grid
/// geometry under the previous powers, then waterfills under that geometry.
/// The recorded rate never decreases between iterations.
pub fn alternate_optimize(
    grids: &SearchGrids,
    budget: f64,
    scenario: &Scenario,
    noise: &NoiseModel,
    settings: &OptimizerSettings,
) -> Result<AllocationResult> {
    let table = GeometryTable::build(grids, scenario);
    optimize_with_table(&table, budget, scenario.grid.len(), noise, settings)
}

/// [`alternate_optimize`] over a prebuilt candidate table.
pub fn optimize_with_table(
    table: &GeometryTable,
    budget: f64,
    subbands: usize,
    noise: &NoiseModel,
    settings: &OptimizerSettings,
) -> Result<AllocationResult> {
    if settings.max_iterations == 0 {
        return Err(LwaError::InvalidInput(
            "max_iterations must be at least 1".into(),
        ));
    }
    let mut powers = PowerAllocation::uniform(subbands, budget)?;
    let mut previous: Option<usize> = None;
    let mut trace = Vec::with_capacity(settings.max_iterations);
    let mut converged = false;
    let mut rate = 0.0;
    let mut index = 0;

    for iteration in 1..=settings.max_iterations {
        let (best, rate_before) = table.argmax(&powers, noise)?;
        let gains = table.gains(best);
        let filled = waterfill(gains, budget, noise)?;
        let filled_rate = average_rate_from_gains(gains, filled.powers(), noise)?;
        // Waterfilling is optimal for this geometry; keep the old powers only
        // if rounding made it look marginally worse.
        let next = if filled_rate >= rate_before {
            rate = filled_rate;
            filled
        } else {
            rate = rate_before;
            powers.clone()
        };
        index = best;
        let config = table.grids().candidate(best);
        trace.push(IterationRecord {
            iteration,
            plate_separation: config.plate_separation,
            slit_length: config.slit_length,
            rate,
        });
        let fixed_point = previous == Some(best) && next == powers;
        powers = next;
        previous = Some(best);
        if settings.early_exit && fixed_point {
            converged = true;
            break;
        }
    }

    Ok(AllocationResult {
        config: table.grids().candidate(index),
        powers,
        sum_rate: rate,
        trace,
        converged,
    })
}
