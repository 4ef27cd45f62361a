//! Multi-objective evolution of one program unit.
//!
//! Each iteration selects the top fraction of the first Pareto front,
//! applies every applicable operator once per parent at a fresh location,
//! naturalizes synthetic identifiers, and admits offspring that pass the
//! validation gates. The population only grows (up to an optional cap that
//! always keeps the first front), so the champion never gets worse.

pub mod lineage;
pub mod nsga;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::{measure, FitnessScore, ReferenceProfile};
use crate::naming::{naturalize_identifiers, NamingProvider};
use crate::operators::{applicable_operators, apply_operator, Location, OperatorId, TransformationRecord};
use crate::unit::ProgramUnit;
use crate::validation::{Gates, TestReport};

pub use nsga::{crowding_distance, dominates, non_dominated_sort};

fn default_breed() -> f64 {
    0.2
}

fn default_budget() -> f64 {
    3600.0
}

fn default_offspring_cap() -> usize {
    500
}

fn default_stagnation() -> u32 {
    3
}

fn default_population_cap() -> Option<usize> {
    Some(256)
}

/// How parents are drawn from the first front. Only deterministic top-k is
/// implemented; the field reserves room for a fitness-proportional variant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionStrategy {
    #[default]
    TopK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    #[serde(default)]
    pub selection: SelectionStrategy,
    /// Fraction `k` of the population selected for breeding.
    #[serde(default = "default_breed")]
    pub breed_fraction: f64,
    /// Wall-clock budget per unit in seconds.
    #[serde(default = "default_budget")]
    pub budget_s: f64,
    /// Optional iteration limit; reaching it counts as an exhausted budget.
    #[serde(default)]
    pub max_iterations: Option<u32>,
    /// Most offspring produced per iteration.
    #[serde(default = "default_offspring_cap")]
    pub offspring_cap: usize,
    /// Consecutive iterations without any candidate before giving up.
    #[serde(default = "default_stagnation")]
    pub stagnation_limit: u32,
    /// Population size bound; truncation keeps whole fronts in rank order,
    /// then the most isolated members of the split front.
    #[serde(default = "default_population_cap")]
    pub population_cap: Option<usize>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            selection: SelectionStrategy::TopK,
            breed_fraction: default_breed(),
            budget_s: default_budget(),
            max_iterations: None,
            offspring_cap: default_offspring_cap(),
            stagnation_limit: default_stagnation(),
            population_cap: default_population_cap(),
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.breed_fraction > 0.0 && self.breed_fraction <= 1.0) {
            return Err(format!("breed fraction {} not in (0, 1]", self.breed_fraction));
        }
        if !(self.budget_s >= 0.0) {
            return Err(format!("budget {} is negative", self.budget_s));
        }
        if self.offspring_cap == 0 {
            return Err("offspring cap must be positive".into());
        }
        if self.population_cap == Some(0) {
            return Err("population cap must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Individual {
    pub program: ProgramUnit,
    pub fitness: FitnessScore,
    pub history: Vec<TransformationRecord>,
    /// Iteration that produced the individual; the original is 0.
    pub generation: u32,
    pub lint_score: Option<f64>,
    pub report: Option<TestReport>,
    pub fingerprint: u64,
}

impl Individual {
    pub fn point(&self) -> (f64, f64) {
        (self.fitness.rc, self.fitness.rr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    RcReachedOne,
    BudgetExhausted,
    NoApplicableOps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub iteration: u32,
    pub best_rc: f64,
    pub mean_rc: f64,
    pub population: usize,
    pub candidates: usize,
    pub accepted: usize,
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub original: Individual,
    pub champion: Individual,
    pub pareto_front: Vec<Individual>,
    pub trajectory: Vec<TrajectoryPoint>,
    pub termination_reason: TerminationReason,
    pub iterations: u32,
    /// Rejections per gate, plus operator failures under `operator_error`.
    pub rejections: BTreeMap<String, usize>,
}

/// Indices of the breeding parents: the first front ordered by rc, then rr
/// (both descending), then older generation, truncated to `ceil(k * |pop|)`
/// but at least one and at most the front size.
pub fn select_to_evolve(population: &[Individual], k: f64) -> Vec<usize> {
    if population.is_empty() {
        return Vec::new();
    }
    let points: Vec<(f64, f64)> = population.iter().map(Individual::point).collect();
    let mut front = non_dominated_sort(&points).swap_remove(0);
    front.sort_by(|&a, &b| {
        let (pa, pb) = (&population[a], &population[b]);
        pb.fitness
            .rc
            .total_cmp(&pa.fitness.rc)
            .then(pb.fitness.rr.total_cmp(&pa.fitness.rr))
            .then(pa.generation.cmp(&pb.generation))
            .then(a.cmp(&b))
    });
    let quota = ((k * population.len() as f64).ceil() as usize).max(1);
    front.truncate(quota);
    front
}

/// Index of the champion: highest rc on the first front, ties broken by
/// higher rr, then shorter history, then earlier admission.
pub fn select_top_candidate(population: &[Individual]) -> Option<usize> {
    let points: Vec<(f64, f64)> = population.iter().map(Individual::point).collect();
    let front = non_dominated_sort(&points).into_iter().next()?;
    front.into_iter().min_by(|&a, &b| {
        let (pa, pb) = (&population[a], &population[b]);
        pb.fitness
            .rc
            .total_cmp(&pa.fitness.rc)
            .then(pb.fitness.rr.total_cmp(&pa.fitness.rr))
            .then(pa.history.len().cmp(&pb.history.len()))
            .then(a.cmp(&b))
    })
}

/// Truncates to `cap` members by front rank and crowding distance. The
/// original (index 0) is always kept.
pub fn truncate_population(population: &mut Vec<Individual>, cap: usize) {
    if population.len() <= cap {
        return;
    }
    let points: Vec<(f64, f64)> = population.iter().map(Individual::point).collect();
    let mut keep: BTreeSet<usize> = BTreeSet::from([0]);
    for front in non_dominated_sort(&points) {
        let room = cap.saturating_sub(keep.len());
        if room == 0 {
            break;
        }
        let rest: Vec<usize> = front.iter().copied().filter(|i| !keep.contains(i)).collect();
        if rest.len() <= room {
            keep.extend(rest);
            continue;
        }
        let dist = crowding_distance(&points, &rest);
        let mut order: Vec<usize> = (0..rest.len()).collect();
        order.sort_by(|&a, &b| dist[b].total_cmp(&dist[a]).then(rest[a].cmp(&rest[b])));
        keep.extend(order.into_iter().take(room).map(|w| rest[w]));
        break;
    }
    let mut idx = 0;
    population.retain(|_| {
        let k = keep.contains(&idx);
        idx += 1;
        k
    });
}

/// Derives the generator seed of one iteration.
pub fn iteration_seed(seed: u64, iteration: u32) -> u64 {
    let mut z = seed ^ u64::from(iteration).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// An offspring before validation.
#[derive(Debug, Clone)]
pub struct Offspring {
    pub individual: Individual,
    pub parent_rc: f64,
}

#[derive(Debug, Default)]
pub struct TransformOutcome {
    pub offspring: Vec<Offspring>,
    pub operator_errors: usize,
}

struct Plan {
    parent: usize,
    op: OperatorId,
    location: Location,
    seed: u64,
}

/// Applies each applicable operator once to each parent at a location the
/// operator has not used on that lineage yet, chosen uniformly. Offspring
/// beyond `cap` are dropped starting with those of the lowest-rc parents.
pub fn transform_selection(
    parents: &[&Individual],
    iteration: u32,
    seed: u64,
    cap: usize,
    profile: &ReferenceProfile,
    namer: Option<&dyn NamingProvider>,
) -> TransformOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(iteration_seed(seed, iteration));
    let per_parent: Vec<Vec<(OperatorId, Vec<Location>)>> =
        parents.par_iter().map(|p| applicable_operators(&p.program)).collect();
    let mut plans = Vec::new();
    for (pi, (parent, ops)) in parents.iter().zip(per_parent).enumerate() {
        for (op, locations) in ops {
            let used: BTreeSet<_> = parent
                .history
                .iter()
                .filter(|r| r.operator == op)
                .map(|r| r.location.key())
                .collect();
            let fresh: Vec<Location> = locations.into_iter().filter(|l| !used.contains(&l.key())).collect();
            if fresh.is_empty() {
                continue;
            }
            let location = fresh[rng.gen_range(0..fresh.len())].clone();
            plans.push(Plan {
                parent: pi,
                op,
                location,
                seed: rng.gen(),
            });
        }
    }
    let results: Vec<Option<Offspring>> = plans
        .par_iter()
        .map(|plan| {
            let parent = parents[plan.parent];
            let (program, mut record) = match apply_operator(&parent.program, plan.op, &plan.location, plan.seed) {
                Ok(r) => r,
                Err(e) => {
                    log::debug!("{}: {e}", parent.program.manifest.id);
                    return None;
                }
            };
            let program = match namer {
                Some(n) if !record.synthetic.is_empty() => {
                    let (renamed, names) = naturalize_identifiers(&program, &record.synthetic, n);
                    record.synthetic = names;
                    renamed
                }
                _ => program,
            };
            record.iteration = iteration;
            let fitness = measure(&program, profile).fitness;
            let mut history = parent.history.clone();
            history.push(record);
            Some(Offspring {
                individual: Individual {
                    fingerprint: program.fingerprint(),
                    program,
                    fitness,
                    history,
                    generation: iteration,
                    lint_score: None,
                    report: None,
                },
                parent_rc: parent.fitness.rc,
            })
        })
        .collect();
    let operator_errors = results.iter().filter(|r| r.is_none()).count();
    let mut offspring: Vec<Offspring> = results.into_iter().flatten().collect();
    if offspring.len() > cap {
        // stable sort keeps plan order among children of equal-rc parents
        offspring.sort_by(|a, b| b.parent_rc.total_cmp(&a.parent_rc));
        offspring.truncate(cap);
    }
    TransformOutcome {
        offspring,
        operator_errors,
    }
}

/// Everything an evolution run of one unit needs besides the unit itself.
pub struct Evolver<'a> {
    pub config: &'a EvolutionConfig,
    pub profile: &'a ReferenceProfile,
    pub gates: &'a Gates,
    pub namer: Option<&'a dyn NamingProvider>,
    pub seed: u64,
}

impl Evolver<'_> {
    pub fn original(&self, unit: &ProgramUnit) -> Individual {
        Individual {
            program: unit.clone(),
            fitness: measure(unit, self.profile).fitness,
            history: Vec::new(),
            generation: 0,
            lint_score: self.gates.baseline.lint_score,
            report: Some(self.gates.baseline.report.clone()),
            fingerprint: unit.fingerprint(),
        }
    }

    /// Runs the loop until rc reaches 1, the budget is spent, or no
    /// candidates appear for `stagnation_limit` consecutive iterations.
    pub fn evolve_program(&self, unit: &ProgramUnit) -> EvolutionResult {
        let started = Instant::now();
        let budget = Duration::from_secs_f64(self.config.budget_s.max(0.0));
        let original = self.original(unit);
        let mut population = vec![original.clone()];
        let mut seen: BTreeSet<u64> = BTreeSet::from([original.fingerprint]);
        let mut trajectory = Vec::new();
        let mut rejections: BTreeMap<String, usize> = BTreeMap::new();
        let mut empty_streak = 0;
        let mut iteration = 0u32;
        let reason = loop {
            if population.iter().any(|p| p.fitness.rc >= 1.0 - 1e-12) {
                break TerminationReason::RcReachedOne;
            }
            if started.elapsed() >= budget || self.config.max_iterations.is_some_and(|m| iteration >= m) {
                break TerminationReason::BudgetExhausted;
            }
            iteration += 1;
            let parents: Vec<&Individual> = select_to_evolve(&population, self.config.breed_fraction)
                .into_iter()
                .map(|i| &population[i])
                .collect();
            let outcome = transform_selection(
                &parents,
                iteration,
                self.seed,
                self.config.offspring_cap,
                self.profile,
                self.namer,
            );
            if outcome.operator_errors > 0 {
                *rejections.entry("operator_error".into()).or_default() += outcome.operator_errors;
            }
            let candidates = outcome.offspring.len();
            let mut fresh = Vec::new();
            for o in outcome.offspring {
                if seen.insert(o.individual.fingerprint) {
                    fresh.push(o.individual);
                } else {
                    *rejections.entry("duplicate".into()).or_default() += 1;
                }
            }
            let verdicts: Vec<_> = fresh
                .par_iter()
                .map(|c| self.gates.check(&c.program, &c.fitness))
                .collect();
            let mut accepted = 0;
            for (mut c, v) in fresh.into_iter().zip(verdicts) {
                if v.accepted {
                    c.lint_score = v.lint_score;
                    c.report = v.report;
                    population.push(c);
                    accepted += 1;
                } else if let Some(r) = v.rejected_by {
                    *rejections.entry(format!("{r:?}")).or_default() += 1;
                }
            }
            if let Some(cap) = self.config.population_cap {
                truncate_population(&mut population, cap);
            }
            let best_rc = population.iter().map(|p| p.fitness.rc).fold(f64::MIN, f64::max);
            let mean_rc = population.iter().map(|p| p.fitness.rc).sum::<f64>() / population.len() as f64;
            trajectory.push(TrajectoryPoint {
                iteration,
                best_rc,
                mean_rc,
                population: population.len(),
                candidates,
                accepted,
            });
            log::debug!(
                "{} iteration {iteration}: {candidates} candidates, {accepted} accepted, best rc {best_rc:.4}",
                unit.manifest.id
            );
            empty_streak = if candidates == 0 { empty_streak + 1 } else { 0 };
            if empty_streak >= self.config.stagnation_limit {
                break TerminationReason::NoApplicableOps;
            }
        };
        let points: Vec<(f64, f64)> = population.iter().map(Individual::point).collect();
        let front = non_dominated_sort(&points).swap_remove(0);
        let champion = population[select_top_candidate(&population).expect("population holds the original")].clone();
        EvolutionResult {
            original,
            champion,
            pareto_front: front.into_iter().map(|i| population[i].clone()).collect(),
            trajectory,
            termination_reason: reason,
            iterations: iteration,
            rejections,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ind(rc: f64, rr: f64, generation: u32, history: usize) -> Individual {
        let program = ProgramUnit::from_source("u", "x = 1\n").unwrap();
        let record = TransformationRecord {
            operator: OperatorId::S10,
            location: Location::new("solution.py", crate::python::ast::LineageId(1), "x"),
            iteration: 1,
            rng_seed: 0,
            replaced_lineage_ids: BTreeSet::new(),
            inserted_lineage_ids: BTreeSet::new(),
            synthetic: Vec::new(),
        };
        Individual {
            fingerprint: program.fingerprint(),
            program,
            fitness: FitnessScore {
                rc,
                rr,
                rc_i: vec![rc],
                rr_i: vec![rr],
            },
            history: vec![record; history],
            generation,
            lint_score: None,
            report: None,
        }
    }

    #[test]
    fn selection_takes_the_best_of_front_zero() {
        let pop = vec![
            ind(0.2, 0.9, 0, 0),
            ind(0.5, 0.6, 1, 1),
            ind(0.4, 0.7, 1, 1),
            ind(0.3, 0.5, 1, 1),
            ind(0.5, 0.6, 2, 2),
        ];
        // ceil(0.2 * 5) = 1
        assert_eq!(select_to_evolve(&pop, 0.2), vec![1]);
        // quota 4 capped at the front size 4, older generation first on ties
        assert_eq!(select_to_evolve(&pop, 0.8), vec![1, 4, 2, 0]);
        assert_eq!(select_top_candidate(&pop), Some(1));
        assert_eq!(select_to_evolve(&pop[..1], 0.2), vec![0]);
    }

    #[test]
    fn champion_prefers_shorter_history() {
        let pop = vec![ind(0.1, 0.1, 0, 0), ind(0.6, 0.6, 2, 3), ind(0.6, 0.6, 3, 1)];
        assert_eq!(select_top_candidate(&pop), Some(2));
    }

    #[test]
    fn truncation_keeps_original_and_first_front() {
        let mut pop = vec![ind(0.1, 0.1, 0, 0)];
        for i in 1..=10 {
            let x = i as f64 / 20.0;
            pop.push(ind(x + 0.2, 0.8 - x, 1, 1));
            pop.push(ind(x, 0.5 - x, 1, 1));
        }
        truncate_population(&mut pop, 12);
        assert_eq!(pop.len(), 12);
        assert_eq!(pop[0].fitness.rc, 0.1);
        assert_eq!(pop.iter().filter(|p| p.fitness.rc + p.fitness.rr > 0.99).count(), 10);
    }

    #[test]
    fn iteration_seeds_differ() {
        let a: BTreeSet<u64> = (0..100).map(|i| iteration_seed(7, i)).collect();
        assert_eq!(a.len(), 100);
        assert_ne!(iteration_seed(7, 1), iteration_seed(8, 1));
    }

    #[test]
    fn transform_selection_respects_history_and_cap() {
        let src = "def total(values):\n    acc = 0\n    for v in values:\n        acc += v\n    return acc\n";
        let program = ProgramUnit::from_source("u", src).unwrap();
        let profile = ReferenceProfile::shipped();
        let parent = Individual {
            fitness: measure(&program, &profile).fitness,
            fingerprint: program.fingerprint(),
            program,
            history: Vec::new(),
            generation: 0,
            lint_score: None,
            report: None,
        };
        let out = transform_selection(&[&parent], 1, 3, 500, &profile, None);
        let ops: Vec<OperatorId> = out.offspring.iter().map(|o| o.individual.history[0].operator).collect();
        let distinct: BTreeSet<_> = ops.iter().collect();
        assert_eq!(distinct.len(), ops.len(), "one child per operator");
        assert!(ops.len() >= 10, "{ops:?}");
        let again = transform_selection(&[&parent], 1, 3, 500, &profile, None);
        let texts = |o: &TransformOutcome| o.offspring.iter().map(|c| c.individual.program.source_texts()).collect::<Vec<_>>();
        assert_eq!(texts(&out), texts(&again));
        let capped = transform_selection(&[&parent], 1, 3, 2, &profile, None);
        assert_eq!(capped.offspring.len(), 2);

        // a child that used S10 at its only site gets no S10 offspring
        let child = out
            .offspring
            .iter()
            .find(|o| o.individual.history[0].operator == OperatorId::S10)
            .map(|o| o.individual.clone())
            .unwrap();
        let grand = transform_selection(&[&child], 2, 3, 500, &profile, None);
        for g in &grand.offspring {
            let h = &g.individual.history;
            assert_eq!(h.len(), 2);
            if h[1].operator == OperatorId::S10 {
                assert_ne!(h[1].location.key(), h[0].location.key());
            }
        }
    }
}
