use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::problem::{dirichlet_estimate, exact_flip_delta, total_energy, FlipScope, Problem};
use crate::error::{invalid, Result};
use crate::grid::{Configuration, IndicatorSet};

/// Changes within this band count as ties and are rejected.
pub const TIE_TOL: f64 = 1e-12;

/// Exact `ΔJ` below `−POLISH_TOL` is applied during polishing.
const POLISH_TOL: f64 = 1e-10;

pub const HISTORY_HEADER: &str = "sweep,dirichlet,per_sigma,total,flips_accepted,committed";

#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    pub max_sweeps: usize,
    pub scope: FlipScope,
    /// Initial temperature; 0 gives strict descent.
    pub t0: f64,
    /// Temperature factor per sweep, in (0, 1).
    pub decay: f64,
    pub seed: u64,
    /// Sweeps without a commit before stopping.
    pub patience: usize,
    /// Proposal passes between authoritative re-solves.
    pub resolve_every: usize,
    /// Passes of exact-`ΔJ` polishing after the sweeps (0 disables).
    pub polish_passes: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            max_sweeps: 200,
            scope: FlipScope::default(),
            t0: 0.0,
            decay: 0.9,
            seed: 0,
            patience: 3,
            resolve_every: 1,
            polish_passes: 50,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 {
            return Err(invalid("max_sweeps", "at least one sweep"));
        }
        if !(self.t0 >= 0.0 && self.t0.is_finite()) {
            return Err(invalid("t0", format!("temperature must be finite and ≥ 0, got {}", self.t0)));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(invalid("decay", format!("decay must lie in (0,1), got {}", self.decay)));
        }
        if self.patience == 0 {
            return Err(invalid("patience", "at least one sweep"));
        }
        if self.resolve_every == 0 {
            return Err(invalid("resolve_every", "at least one pass"));
        }
        Ok(())
    }
}

/// Mutable search state carried between sweeps.
#[derive(Debug, Clone)]
pub struct SearchState {
    rng: ChaCha8Rng,
    pub temperature: f64,
    /// Proposals must beat `−margin`; raised after rollbacks.
    pub margin: f64,
}

impl SearchState {
    pub fn new(params: &SearchParams) -> SearchState {
        SearchState {
            rng: ChaCha8Rng::seed_from_u64(params.seed),
            temperature: params.t0,
            margin: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// The configuration in force after the sweep.
    pub config: Configuration,
    pub flips_accepted: usize,
    pub committed: bool,
}

fn breakdown_of(problem: &Problem, config: &Configuration) -> crate::grid::EnergyBreakdown {
    config.breakdown.unwrap_or_else(|| total_energy(config, problem.model()))
}

/// One block of proposal passes followed by an authoritative re-solve.
///
/// Cells in scope are visited in seeded random order; a flip is accepted
/// when its estimate beats `−margin` (or by the Metropolis rule while the
/// temperature is positive). Flipped cells and their neighbors are frozen
/// for the rest of the block, since their estimates would be stale. The
/// block is committed only if the recomputed total decreased.
pub fn sweep(problem: &Problem, config: &Configuration, params: &SearchParams, state: &mut SearchState) -> Result<SweepOutcome> {
    let d = problem.domain();
    let model = problem.model();
    let om = d.omega();
    let mut set = config.set.clone();
    let mut fields = model.local_fields(&set);
    let mut frozen = vec![false; om.len()];
    let mut accepted: Vec<f64> = Vec::new();
    for _ in 0..params.resolve_every {
        let mut cells = params.scope.cells(&set);
        cells.shuffle(&mut state.rng);
        for k in cells {
            if frozen[k] {
                continue;
            }
            let c = om[k];
            let s = set.omega_phase(k);
            let est = s as f64 * fields[k] + dirichlet_estimate(config, c);
            let accept = if est.abs() <= TIE_TOL {
                false
            } else if est < -state.margin {
                true
            } else if state.temperature > 0.0 && est > 0.0 {
                state.rng.gen::<f64>() < (-est / state.temperature).exp()
            } else {
                false
            };
            if accept {
                model.update_fields(&mut fields, k, s);
                set.flip(c)?;
                frozen[k] = true;
                for nb in d.neighbors(c) {
                    if let Some(j) = d.omega_index(nb) {
                        frozen[j] = true;
                    }
                }
                accepted.push(est);
            }
        }
    }
    let temperature = state.temperature;
    state.temperature *= params.decay;
    if accepted.is_empty() {
        return Ok(SweepOutcome {
            config: config.clone(),
            flips_accepted: 0,
            committed: false,
        });
    }
    let old = breakdown_of(problem, config).total;
    let cand = problem.evaluate_from(&set, Some(config))?;
    let delta = cand.breakdown.expect("evaluated").total - old;
    let commit = delta < -TIE_TOL || (temperature > 0.0 && state.rng.gen::<f64>() < (-delta / temperature).exp());
    if commit {
        state.margin *= 0.5;
        if state.margin < TIE_TOL {
            state.margin = 0.0;
        }
        Ok(SweepOutcome {
            config: cand,
            flips_accepted: accepted.len(),
            committed: true,
        })
    } else {
        let weakest = accepted.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
        state.margin = (2.0 * state.margin).max(weakest);
        Ok(SweepOutcome {
            config: config.clone(),
            flips_accepted: accepted.len(),
            committed: false,
        })
    }
}

/// One line of the energy history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub sweep: usize,
    pub dirichlet: f64,
    pub per_sigma: f64,
    pub total: f64,
    pub flips_accepted: usize,
    pub committed: bool,
}

impl HistoryRow {
    fn new(sweep: usize, config: &Configuration, flips_accepted: usize, committed: bool) -> HistoryRow {
        let b = config.breakdown.expect("evaluated");
        HistoryRow {
            sweep,
            dirichlet: b.dirichlet,
            per_sigma: b.per_sigma,
            total: b.total,
            flips_accepted,
            committed,
        }
    }
}

pub fn history_csv(rows: &[HistoryRow]) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.sweep, r.dirichlet, r.per_sigma, r.total, r.flips_accepted, r.committed as u8
        );
    }
    out
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    /// Best configuration found.
    pub config: Configuration,
    /// Row 0 is the initial configuration; each row reports the state in
    /// force after that sweep or polish step.
    pub history: Vec<HistoryRow>,
    pub seed: u64,
    /// False when `max_sweeps` ran out or polishing did not settle.
    pub converged: bool,
}

impl MinimizeResult {
    pub fn history_csv(&self) -> String {
        history_csv(&self.history)
    }
}

/// Minimizes from the sign of the harmonic extension of `φ`.
pub fn minimize(problem: &Problem, params: &SearchParams) -> Result<MinimizeResult> {
    params.validate()?;
    let init = problem.initial_set()?;
    minimize_from(problem, &init, params)
}

/// Minimizes from a given set.
pub fn minimize_from(problem: &Problem, start: &IndicatorSet, params: &SearchParams) -> Result<MinimizeResult> {
    params.validate()?;
    let mut config = problem.evaluate(start)?;
    let mut history = vec![HistoryRow::new(0, &config, 0, true)];
    let mut state = SearchState::new(params);
    let mut best = config.clone();
    let mut idle = 0;
    let mut settled = false;
    let mut step = 0;
    for _ in 0..params.max_sweeps {
        step += 1;
        let out = sweep(problem, &config, params, &mut state)?;
        config = out.config;
        history.push(HistoryRow::new(step, &config, out.flips_accepted, out.committed));
        let total = config.breakdown.expect("evaluated").total;
        if total < best.breakdown.expect("evaluated").total {
            best = config.clone();
        }
        idle = if out.committed { 0 } else { idle + 1 };
        if idle >= params.patience {
            settled = true;
            break;
        }
    }
    let mut config = best;
    let mut polished = params.polish_passes == 0;
    for _ in 0..params.polish_passes {
        let mut improved = false;
        for k in params.scope.cells(&config.set) {
            let c = problem.domain().omega()[k];
            if exact_flip_delta(problem, &config, c)? >= -POLISH_TOL {
                continue;
            }
            let mut set = config.set.clone();
            set.flip(c)?;
            let cand = problem.evaluate_from(&set, Some(&config))?;
            if cand.breakdown.expect("evaluated").total < config.breakdown.expect("evaluated").total - TIE_TOL {
                config = cand;
                improved = true;
                step += 1;
                history.push(HistoryRow::new(step, &config, 1, true));
            }
        }
        if !improved {
            polished = true;
            break;
        }
    }
    Ok(MinimizeResult {
        config,
        history,
        seed: params.seed,
        converged: settled && polished,
    })
}
