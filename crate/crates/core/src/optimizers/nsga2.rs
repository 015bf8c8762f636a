//! Elitist non-dominated sorting GA for two minimised objectives.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_bounds, sanitize, OptimizerError};
use crate::problem::Bound;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub np: usize,
    pub crossover_prob: f64,
    pub crossover_eta: f64,
    /// Per-variable mutation probability; `None` means `1/n`.
    pub mutation_prob: Option<f64>,
    pub mutation_eta: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            np: 100,
            crossover_prob: 0.9,
            crossover_eta: 20.0,
            mutation_prob: None,
            mutation_eta: 20.0,
        }
    }
}

impl GaParams {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        if self.np < 2 || self.np % 2 != 0 {
            return Err(OptimizerError::InvalidParams("np must be even and at least 2"));
        }
        let prob_ok = |p: f64| (0.0..=1.0).contains(&p);
        if !prob_ok(self.crossover_prob) || !self.mutation_prob.is_none_or(prob_ok) {
            return Err(OptimizerError::InvalidParams("probabilities must lie in [0, 1]"));
        }
        if !(self.crossover_eta >= 0.0 && self.mutation_eta >= 0.0) {
            return Err(OptimizerError::InvalidParams("distribution indices must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub objectives: [f64; 2],
    /// Front index, 0 for the non-dominated front.
    pub rank: usize,
    pub crowding: f64,
}

pub fn dominates(a: &[f64; 2], b: &[f64; 2]) -> bool {
    a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1])
}

/// Fast non-dominated sorting. Returns fronts as index lists, best first.
pub fn non_dominated_fronts(objs: &[[f64; 2]]) -> Vec<Vec<usize>> {
    let n = objs.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&objs[i], &objs[j]) {
                dominated_by[i].push(j);
                counts[j] += 1;
            } else if dominates(&objs[j], &objs[i]) {
                dominated_by[j].push(i);
                counts[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                counts[j] -= 1;
                if counts[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance of each member of `front`, in the same order.
pub fn crowding_distances(objs: &[[f64; 2]], front: &[usize]) -> Vec<f64> {
    let k = front.len();
    let mut dist = vec![0.0; k];
    if k <= 2 {
        return vec![f64::INFINITY; k];
    }
    for m in 0..2 {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| objs[front[a]][m].total_cmp(&objs[front[b]][m]));
        let lo = objs[front[order[0]]][m];
        let hi = objs[front[order[k - 1]]][m];
        dist[order[0]] = f64::INFINITY;
        dist[order[k - 1]] = f64::INFINITY;
        let span = hi - lo;
        if !(span > 0.0) || !span.is_finite() {
            continue;
        }
        for w in 1..k - 1 {
            let gap = objs[front[order[w + 1]]][m] - objs[front[order[w - 1]]][m];
            dist[order[w]] += gap / span;
        }
    }
    dist
}

fn crowded_better(a: &Solution, b: &Solution) -> bool {
    a.rank < b.rank || (a.rank == b.rank && a.crowding > b.crowding)
}

/// Assigns rank and crowding, then keeps the best `np` by (rank, crowding).
fn survive(mut pool: Vec<Solution>, np: usize) -> Vec<Solution> {
    let objs: Vec<[f64; 2]> = pool.iter().map(|s| s.objectives).collect();
    let fronts = non_dominated_fronts(&objs);
    let mut keep = Vec::with_capacity(np);
    for (rank, front) in fronts.iter().enumerate() {
        let cd = crowding_distances(&objs, front);
        for (&i, &d) in front.iter().zip(&cd) {
            pool[i].rank = rank;
            pool[i].crowding = d;
        }
        if keep.len() + front.len() <= np {
            keep.extend_from_slice(front);
        } else {
            let mut rest: Vec<usize> = front.clone();
            rest.sort_by(|&a, &b| pool[b].crowding.total_cmp(&pool[a].crowding).then(a.cmp(&b)));
            keep.extend_from_slice(&rest[..np - keep.len()]);
        }
        if keep.len() == np {
            break;
        }
    }
    let mut slots: Vec<Option<Solution>> = pool.into_iter().map(Some).collect();
    keep.into_iter().map(|i| slots[i].take().unwrap()).collect()
}

fn sbx(p1: &[f64], p2: &[f64], bounds: &[Bound], params: &GaParams, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    if rng.random::<f64>() > params.crossover_prob {
        return (c1, c2);
    }
    let eta = params.crossover_eta;
    for j in 0..p1.len() {
        if rng.random::<f64>() > 0.5 || (p1[j] - p2[j]).abs() <= 1e-14 {
            continue;
        }
        let (lo, hi) = (bounds[j].lower, bounds[j].upper);
        let y1 = p1[j].min(p2[j]);
        let y2 = p1[j].max(p2[j]);
        let u: f64 = rng.random();
        let spread = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let bq1 = spread(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
        let bq2 = spread(1.0 + 2.0 * (hi - y2) / (y2 - y1));
        let a = (0.5 * ((y1 + y2) - bq1 * (y2 - y1))).clamp(lo, hi);
        let b = (0.5 * ((y1 + y2) + bq2 * (y2 - y1))).clamp(lo, hi);
        if rng.random::<f64>() <= 0.5 {
            c1[j] = b;
            c2[j] = a;
        } else {
            c1[j] = a;
            c2[j] = b;
        }
    }
    (c1, c2)
}

fn polynomial_mutation(x: &mut [f64], bounds: &[Bound], params: &GaParams, rng: &mut ChaCha8Rng) {
    let prob = params.mutation_prob.unwrap_or(1.0 / x.len() as f64);
    let eta = params.mutation_eta;
    let pow = 1.0 / (eta + 1.0);
    for (v, b) in x.iter_mut().zip(bounds) {
        if rng.random::<f64>() > prob {
            continue;
        }
        let w = b.width();
        let d1 = (*v - b.lower) / w;
        let d2 = (b.upper - *v) / w;
        let u: f64 = rng.random();
        let dq = if u < 0.5 {
            let val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
            val.powf(pow) - 1.0
        } else {
            let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - val.powf(pow)
        };
        *v = (*v + dq * w).clamp(b.lower, b.upper);
    }
}

fn tournament<'a>(pop: &'a [Solution], rng: &mut ChaCha8Rng) -> &'a Solution {
    let a = &pop[rng.random_range(0..pop.len())];
    let b = &pop[rng.random_range(0..pop.len())];
    match (crowded_better(a, b), crowded_better(b, a)) {
        (true, _) => a,
        (_, true) => b,
        _ if rng.random::<bool>() => a,
        _ => b,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nsga2Outcome {
    pub population: Vec<Solution>,
    pub evaluations: u64,
}

/// Runs `max_generations` generations after the initial population, so the
/// objective is called `np · (max_generations + 1)` times. `observer` sees
/// the population after initialisation (generation 0) and after every
/// generation.
pub fn nsga2_run(
    mut objective: impl FnMut(&[f64]) -> [f64; 2],
    bounds: &[Bound],
    params: &GaParams,
    max_generations: usize,
    seed: u64,
    mut observer: impl FnMut(usize, &[Solution]),
) -> Result<Nsga2Outcome, OptimizerError> {
    check_bounds(bounds)?;
    params.validate()?;
    if max_generations == 0 {
        return Err(OptimizerError::InvalidBudget { budget: 0, needed: 1 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut evaluations = 0u64;
    let mut eval = |x: Vec<f64>, evaluations: &mut u64| {
        *evaluations += 1;
        let [a, b] = objective(&x);
        Solution {
            x,
            objectives: [sanitize(a), sanitize(b)],
            rank: 0,
            crowding: 0.0,
        }
    };
    let init: Vec<Solution> = (0..params.np)
        .map(|_| {
            let x = bounds.iter().map(|b| rng.random_range(b.lower..=b.upper)).collect();
            eval(x, &mut evaluations)
        })
        .collect();
    let mut pop = survive(init, params.np);
    observer(0, &pop);
    for g in 1..=max_generations {
        let mut offspring = Vec::with_capacity(params.np);
        while offspring.len() < params.np {
            let p1 = tournament(&pop, &mut rng).x.clone();
            let p2 = tournament(&pop, &mut rng).x.clone();
            let (mut c1, mut c2) = sbx(&p1, &p2, bounds, params, &mut rng);
            polynomial_mutation(&mut c1, bounds, params, &mut rng);
            polynomial_mutation(&mut c2, bounds, params, &mut rng);
            offspring.push(eval(c1, &mut evaluations));
            offspring.push(eval(c2, &mut evaluations));
        }
        let mut pool = pop;
        pool.extend(offspring);
        pop = survive(pool, params.np);
        observer(g, &pop);
    }
    pop.sort_by(|a, b| {
        a.rank
            .cmp(&b.rank)
            .then(a.objectives[0].total_cmp(&b.objectives[0]))
            .then(Ordering::Equal)
    });
    Ok(Nsga2Outcome { population: pop, evaluations })
}
