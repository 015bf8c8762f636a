//! Adaptive differential evolution (JADE): current-to-pbest/1 mutation with
//! an optional archive of replaced parents, binomial crossover, and
//! self-adapted crossover rate and scale factor.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{check_bounds, sanitize, OptimizerError};
use crate::problem::Bound;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeParams {
    pub np: usize,
    /// Fraction of the population eligible as the p-best donor.
    pub p_best: f64,
    /// Adaptation rate of `mu_cr` and `mu_f`.
    pub c: f64,
    pub mu_cr: f64,
    pub mu_f: f64,
    /// Capacity of the archive of replaced parents; 0 disables it.
    pub archive_size: usize,
}

impl Default for DeParams {
    fn default() -> Self {
        Self {
            np: 100,
            p_best: 0.05,
            c: 0.1,
            mu_cr: 0.5,
            mu_f: 0.5,
            archive_size: 100,
        }
    }
}

impl DeParams {
    /// Defaults with a population of `10·dim`, kept within `[20, 100]`.
    pub fn for_dimension(dim: usize) -> Self {
        let np = (10 * dim).clamp(20, 100);
        Self {
            np,
            archive_size: np,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), OptimizerError> {
        if self.np < 4 {
            return Err(OptimizerError::InvalidParams("np must be at least 4"));
        }
        if !(self.p_best > 0.0 && self.p_best <= 1.0) {
            return Err(OptimizerError::InvalidParams("p_best must be in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.c) {
            return Err(OptimizerError::InvalidParams("c must be in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.mu_cr) || !(0.0..=1.0).contains(&self.mu_f) {
            return Err(OptimizerError::InvalidParams("mu_cr and mu_f must be in [0, 1]"));
        }
        Ok(())
    }
}

/// Reflects a coordinate back into `[lower, upper]`; anything still outside
/// after one reflection is clamped.
pub fn reflect(v: f64, b: Bound) -> f64 {
    let r = if v < b.lower {
        2.0 * b.lower - v
    } else if v > b.upper {
        2.0 * b.upper - v
    } else {
        return v;
    };
    r.clamp(b.lower, b.upper)
}

/// A steppable JADE population. Objective values are minimised; NaN counts
/// as +∞.
#[derive(Debug, Clone)]
pub struct Jade {
    params: DeParams,
    bounds: Vec<Bound>,
    rng: ChaCha8Rng,
    pop: Vec<Vec<f64>>,
    fit: Vec<f64>,
    mu_cr: f64,
    mu_f: f64,
    archive: Vec<Vec<f64>>,
}

impl Jade {
    pub fn new(bounds: &[Bound], params: DeParams, seed: u64) -> Result<Self, OptimizerError> {
        check_bounds(bounds)?;
        params.validate()?;
        Ok(Self {
            mu_cr: params.mu_cr,
            mu_f: params.mu_f,
            params,
            bounds: bounds.to_vec(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            pop: Vec::new(),
            fit: Vec::new(),
            archive: Vec::new(),
        })
    }

    pub fn np(&self) -> usize {
        self.params.np
    }

    pub fn population(&self) -> &[Vec<f64>] {
        &self.pop
    }

    pub fn fitness(&self) -> &[f64] {
        &self.fit
    }

    pub fn mu(&self) -> (f64, f64) {
        (self.mu_cr, self.mu_f)
    }

    pub fn best_index(&self) -> usize {
        (0..self.fit.len())
            .min_by(|&a, &b| self.fit[a].total_cmp(&self.fit[b]))
            .expect("population is initialised")
    }

    /// Uniform random population; adaptation state and archive are reset.
    pub fn initialize(&mut self, objective: &mut impl FnMut(&[f64]) -> f64) {
        let rng = &mut self.rng;
        self.pop = (0..self.params.np)
            .map(|_| {
                self.bounds
                    .iter()
                    .map(|b| rng.random_range(b.lower..=b.upper))
                    .collect()
            })
            .collect();
        self.fit = self.pop.iter().map(|x| sanitize(objective(x))).collect();
        self.mu_cr = self.params.mu_cr;
        self.mu_f = self.params.mu_f;
        self.archive.clear();
    }

    /// Recomputes every stored objective value.
    pub fn reevaluate(&mut self, objective: &mut impl FnMut(&[f64]) -> f64) {
        self.fit = self.pop.iter().map(|x| sanitize(objective(x))).collect();
    }

    fn sample_cr(&mut self) -> f64 {
        let n = Normal::new(self.mu_cr, 0.1).expect("finite parameters");
        n.sample(&mut self.rng).clamp(0.0, 1.0)
    }

    fn sample_f(&mut self) -> f64 {
        let c = Cauchy::new(self.mu_f, 0.1).expect("finite parameters");
        loop {
            let f = c.sample(&mut self.rng);
            if f > 0.0 {
                return f.min(1.0);
            }
        }
    }

    /// One generation: `np` trial vectors, each evaluated once.
    pub fn generation(&mut self, objective: &mut impl FnMut(&[f64]) -> f64) {
        let np = self.params.np;
        let dim = self.bounds.len();
        let mut order: Vec<usize> = (0..np).collect();
        order.sort_by(|&a, &b| self.fit[a].total_cmp(&self.fit[b]));
        let top = ((self.params.p_best * np as f64).round() as usize).clamp(1, np);

        let mut trials = Vec::with_capacity(np);
        let mut params = Vec::with_capacity(np);
        for i in 0..np {
            let cr = self.sample_cr();
            let f = self.sample_f();
            let pbest = *order[..top].choose(&mut self.rng).unwrap();
            let r1 = loop {
                let r = self.rng.random_range(0..np);
                if r != i {
                    break r;
                }
            };
            let union = np + self.archive.len();
            let r2 = loop {
                let r = self.rng.random_range(0..union);
                if r != i && r != r1 {
                    break r;
                }
            };
            let x = &self.pop[i];
            let xp = &self.pop[pbest];
            let x1 = &self.pop[r1];
            let x2 = if r2 < np { &self.pop[r2] } else { &self.archive[r2 - np] };
            let j_rand = self.rng.random_range(0..dim);
            let mut u = x.clone();
            for j in 0..dim {
                if j == j_rand || self.rng.random::<f64>() < cr {
                    let v = x[j] + f * (xp[j] - x[j]) + f * (x1[j] - x2[j]);
                    u[j] = reflect(v, self.bounds[j]);
                }
            }
            trials.push(u);
            params.push((cr, f));
        }

        let mut s_cr = Vec::new();
        let mut s_f = Vec::new();
        for (i, u) in trials.into_iter().enumerate() {
            let fu = sanitize(objective(&u));
            if fu < self.fit[i] {
                let old = std::mem::replace(&mut self.pop[i], u);
                if self.params.archive_size > 0 {
                    self.archive.push(old);
                }
                self.fit[i] = fu;
                s_cr.push(params[i].0);
                s_f.push(params[i].1);
            }
        }
        while self.archive.len() > self.params.archive_size {
            let k = self.rng.random_range(0..self.archive.len());
            self.archive.swap_remove(k);
        }
        if !s_cr.is_empty() {
            let c = self.params.c;
            let mean_cr = s_cr.iter().sum::<f64>() / s_cr.len() as f64;
            let lehmer = s_f.iter().map(|f| f * f).sum::<f64>() / s_f.iter().sum::<f64>();
            self.mu_cr = (1.0 - c) * self.mu_cr + c * mean_cr;
            self.mu_f = (1.0 - c) * self.mu_f + c * lehmer;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JadeOutcome {
    pub population: Vec<Vec<f64>>,
    pub fitness: Vec<f64>,
    pub best: Vec<f64>,
    pub best_value: f64,
    /// Best objective after each generation; the initial population is
    /// generation 1.
    pub trace: Vec<f64>,
    pub evaluations: u64,
}

/// Runs JADE on a fixed objective until another full generation would
/// exceed `budget` evaluations.
pub fn jade_run(
    mut objective: impl FnMut(&[f64]) -> f64,
    bounds: &[Bound],
    params: &DeParams,
    budget: u64,
    seed: u64,
) -> Result<JadeOutcome, OptimizerError> {
    if budget < params.np as u64 {
        return Err(OptimizerError::InvalidBudget { budget, needed: params.np as u64 });
    }
    let mut jade = Jade::new(bounds, params.clone(), seed)?;
    let mut evaluations = 0u64;
    let mut counted = |x: &[f64]| {
        evaluations += 1;
        objective(x)
    };
    let np = params.np as u64;
    jade.initialize(&mut counted);
    let mut used = np;
    let mut trace = vec![jade.fit[jade.best_index()]];
    while used + np <= budget {
        jade.generation(&mut counted);
        used += np;
        trace.push(jade.fit[jade.best_index()]);
    }
    let b = jade.best_index();
    Ok(JadeOutcome {
        best: jade.pop[b].clone(),
        best_value: jade.fit[b],
        population: jade.pop,
        fitness: jade.fit,
        trace,
        evaluations,
    })
}
