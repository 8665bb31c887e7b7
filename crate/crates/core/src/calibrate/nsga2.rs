//! NSGA-II over bounded real genes, with an optional covariance block
//! proposed by the adaptive Inverse-Wishart kernel.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{CovarianceKernel, GenerationHistory, KernelSettings};
use super::operators::{polynomial_mutation, sbx_crossover, Bounds};
use super::pareto::{crowding_distance, dominates_unchecked, non_dominated_sort};
use crate::error::Result;
use crate::rng::{child, derive_seed};

/// Objective value assigned when an evaluation cannot be completed.
pub const PENALTY: f64 = 1e9;

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub objectives: Vec<f64>,
    pub failed: bool,
}

impl Evaluation {
    pub fn penalty(k: usize) -> Self {
        Self { objectives: vec![PENALTY; k], failed: true }
    }
}

/// A minimisation problem over a box of scalar genes plus, optionally, one
/// SPD matrix per candidate.
pub trait Problem: Sync {
    fn bounds(&self) -> &Bounds;
    fn covariance_dim(&self) -> Option<usize> {
        None
    }
    fn evaluate(&self, genes: &[f64], sigma: Option<&DMatrix<f64>>, seed: u64) -> Evaluation;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genes: Vec<f64>,
    /// Row-major covariance block, when the problem has one.
    pub sigma: Option<Vec<Vec<f64>>>,
    pub objectives: Vec<f64>,
    pub rank: usize,
    /// Crowding distance within its front; `None` is infinite.
    pub crowding: Option<f64>,
    pub eval_seed: u64,
    pub failed: bool,
}

impl Individual {
    pub fn sigma_matrix(&self) -> Option<DMatrix<f64>> {
        self.sigma.as_ref().map(|rows| DMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j]))
    }

    fn crowding_value(&self) -> f64 {
        self.crowding.unwrap_or(f64::INFINITY)
    }

    /// Crowded-comparison order: lower rank, then larger crowding distance.
    pub fn better_than(&self, other: &Self) -> bool {
        self.rank < other.rank || (self.rank == other.rank && self.crowding_value() > other.crowding_value())
    }
}

pub(crate) fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn default_population() -> usize {
    40
}
fn default_generations() -> usize {
    40
}
fn default_eta_c() -> f64 {
    5.0
}
fn default_p_c() -> f64 {
    0.7
}
fn default_eta_m() -> f64 {
    10.0
}
fn default_p_m() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nsga2Config {
    #[serde(default = "default_population")]
    pub population: usize,
    #[serde(default = "default_generations")]
    pub generations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eta_c")]
    pub eta_c: f64,
    #[serde(default = "default_p_c")]
    pub p_c: f64,
    #[serde(default = "default_eta_m")]
    pub eta_m: f64,
    #[serde(default = "default_p_m")]
    pub p_m: f64,
    #[serde(default)]
    pub kernel: KernelSettings,
    /// Keep every generation's full population in the traces.
    #[serde(default)]
    pub record_populations: bool,
}

impl Default for Nsga2Config {
    fn default() -> Self {
        Self {
            population: default_population(),
            generations: default_generations(),
            seed: 0,
            eta_c: default_eta_c(),
            p_c: default_p_c(),
            eta_m: default_eta_m(),
            p_m: default_p_m(),
            kernel: KernelSettings::default(),
            record_populations: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationTrace {
    pub generation: usize,
    pub eval_seed: u64,
    /// Objectives of the population kept after selection.
    pub objectives: Vec<Vec<f64>>,
    pub front_size: usize,
    pub failures: usize,
    /// Trace of the kernel's history average used to propose this
    /// generation's covariances.
    pub psi_trace: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<Vec<Individual>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nsga2Result {
    pub population: Vec<Individual>,
    pub front: Vec<Individual>,
    pub traces: Vec<GenerationTrace>,
    /// Generations whose best individual was dominated by a member of an
    /// earlier population.
    pub elitism_violations: usize,
}

/// Seed shared by every evaluation in generation `g`.
pub fn generation_seed(master: u64, g: usize) -> u64 {
    derive_seed(master, 1 + g as u64)
}

fn assign_rank_crowding(pop: &mut [Individual]) {
    let objs: Vec<Vec<f64>> = pop.iter().map(|i| i.objectives.clone()).collect();
    let ranks = non_dominated_sort(&objs);
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    for r in 1..=max_rank {
        let members: Vec<usize> = (0..pop.len()).filter(|&i| ranks[i] == r).collect();
        let front: Vec<Vec<f64>> = members.iter().map(|&i| objs[i].clone()).collect();
        for (&i, d) in members.iter().zip(crowding_distance(&front)) {
            pop[i].rank = r;
            pop[i].crowding = d.is_finite().then_some(d);
        }
    }
}

/// Keeps `n` members by rank, filling the last admitted front by crowding.
fn select(mut pool: Vec<Individual>, n: usize) -> Vec<Individual> {
    assign_rank_crowding(&mut pool);
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&pool[a], &pool[b]);
        x.rank.cmp(&y.rank).then(y.crowding_value().total_cmp(&x.crowding_value())).then(a.cmp(&b))
    });
    let keep: Vec<usize> = order.into_iter().take(n).collect();
    let mut taken: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
    let mut out: Vec<Individual> = keep.into_iter().map(|i| taken[i].take().expect("unique")).collect();
    assign_rank_crowding(&mut out);
    out
}

fn best_index(pop: &[Individual]) -> usize {
    let mut best = 0;
    for i in 1..pop.len() {
        let (a, b) = (&pop[i], &pop[best]);
        let ord = a
            .rank
            .cmp(&b.rank)
            .then(b.crowding_value().total_cmp(&a.crowding_value()))
            .then_with(|| a.objectives.iter().zip(&b.objectives).map(|(x, y)| x.total_cmp(y)).fold(std::cmp::Ordering::Equal, |o, c| o.then(c)));
        if ord == std::cmp::Ordering::Less {
            best = i;
        }
    }
    best
}

fn evaluate_all<P: Problem>(problem: &P, pop: &mut [Individual], seed: u64) {
    pop.par_iter_mut().for_each(|ind| {
        let sigma = ind.sigma_matrix();
        let e = problem.evaluate(&ind.genes, sigma.as_ref(), seed);
        ind.objectives = e.objectives;
        ind.failed = e.failed;
        ind.eval_seed = seed;
    });
}

fn tournament<'a, R: Rng + ?Sized>(pop: &'a [Individual], rng: &mut R) -> &'a Individual {
    let a = &pop[rng.random_range(0..pop.len())];
    let b = &pop[rng.random_range(0..pop.len())];
    if b.better_than(a) {
        b
    } else {
        a
    }
}

fn history_of(pop: &[Individual]) -> GenerationHistory {
    GenerationHistory {
        sigmas: pop.iter().filter_map(Individual::sigma_matrix).collect(),
        ranks: pop.iter().filter(|i| i.sigma.is_some()).map(|i| i.rank).collect(),
    }
}

/// A covariance draw (as rows) and the trace of the scale it was drawn around.
type SigmaProposal = (Option<Vec<Vec<f64>>>, Option<f64>);

pub fn run_nsga2<P: Problem>(problem: &P, config: &Nsga2Config) -> Result<Nsga2Result> {
    let n = config.population;
    if n < 2 {
        return Err(crate::Error::InvalidConfig("population must hold at least two individuals".into()));
    }
    let bounds = problem.bounds();
    let kernel = problem.covariance_dim().map(|d| CovarianceKernel::new(d, config.kernel.clone())).transpose()?;
    let mut rng = child(config.seed, 0);
    let mut history: Vec<GenerationHistory> = Vec::new();

    let propose_sigma = |history: &[GenerationHistory], rng: &mut crate::rng::SimRng| -> Result<SigmaProposal> {
        match &kernel {
            None => Ok((None, None)),
            Some(k) => {
                let psi = k.psi_n(history);
                Ok((Some(matrix_rows(&k.sample(&psi, rng)?)), Some(psi.trace())))
            }
        }
    };

    let mut pop = Vec::with_capacity(n);
    let mut psi_trace = None;
    for _ in 0..n {
        let genes = bounds.sample_uniform(&mut rng);
        let (sigma, tr) = propose_sigma(&history, &mut rng)?;
        psi_trace = tr;
        pop.push(Individual { genes, sigma, objectives: Vec::new(), rank: 0, crowding: None, eval_seed: 0, failed: false });
    }
    let seed0 = generation_seed(config.seed, 0);
    evaluate_all(problem, &mut pop, seed0);
    assign_rank_crowding(&mut pop);
    history.push(history_of(&pop));

    let trace = |g: usize, seed: u64, pop: &[Individual], psi: Option<f64>| GenerationTrace {
        generation: g,
        eval_seed: seed,
        objectives: pop.iter().map(|i| i.objectives.clone()).collect(),
        front_size: pop.iter().filter(|i| i.rank == 1).count(),
        failures: pop.iter().filter(|i| i.failed).count(),
        psi_trace: psi,
        population: config.record_populations.then(|| pop.to_vec()),
    };
    let mut traces = vec![trace(0, seed0, &pop, psi_trace)];
    let mut elitism_violations = 0;

    for g in 1..=config.generations {
        let psi_tr = kernel.as_ref().map(|k| k.psi_n(&history).trace());
        let mut offspring = Vec::with_capacity(n);
        while offspring.len() < n {
            let a = tournament(&pop, &mut rng);
            let b = tournament(&pop, &mut rng);
            let (c1, c2) = sbx_crossover(&a.genes, &b.genes, bounds, config.eta_c, config.p_c, &mut rng);
            for c in [c1, c2] {
                if offspring.len() == n {
                    break;
                }
                let genes = polynomial_mutation(&c, bounds, config.eta_m, config.p_m, &mut rng);
                let (sigma, _) = propose_sigma(&history, &mut rng)?;
                offspring.push(Individual {
                    genes,
                    sigma,
                    objectives: Vec::new(),
                    rank: 0,
                    crowding: None,
                    eval_seed: 0,
                    failed: false,
                });
            }
        }
        let seed = generation_seed(config.seed, g);
        evaluate_all(problem, &mut offspring, seed);
        let mut pool = pop;
        pool.extend(offspring);
        pop = select(pool, n);
        history.push(history_of(&pop));

        let best = &pop[best_index(&pop)].objectives;
        if traces.iter().any(|t| t.objectives.iter().any(|o| dominates_unchecked(o, best))) {
            elitism_violations += 1;
        }
        traces.push(trace(g, seed, &pop, psi_tr));
    }

    let front = pop.iter().filter(|i| i.rank == 1).cloned().collect();
    Ok(Nsga2Result { population: pop, front, traces, elitism_violations })
}
