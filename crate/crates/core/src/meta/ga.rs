use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{decode, repair, ConvergenceTrace, Genome, HeuristicOutcome};
use crate::exec::Exec;
use crate::model::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaParams {
    pub population: usize,
    pub max_generations: usize,
    /// Per-gene probability of a gaussian step.
    pub mutation_rate: f64,
    pub mutation_sigma: f64,
    /// Share of children produced by crossover; the rest copy a parent.
    pub crossover_fraction: f64,
    pub tournament_size: usize,
    pub elite: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population: 50,
            max_generations: 200,
            mutation_rate: 0.01,
            mutation_sigma: 1.0,
            crossover_fraction: 0.8,
            tournament_size: 2,
            elite: 1,
        }
    }
}

fn tournament<R: Rng + ?Sized>(fit: &[f64], size: usize, rng: &mut R) -> usize {
    let mut best = rng.random_range(0..fit.len());
    for _ in 1..size {
        let c = rng.random_range(0..fit.len());
        if fit[c] < fit[best] || (fit[c] == fit[best] && c < best) {
            best = c;
        }
    }
    best
}

fn ranked(fit: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..fit.len()).collect();
    idx.sort_by(|&a, &b| fit[a].total_cmp(&fit[b]).then(a.cmp(&b)));
    idx
}

pub fn run_ga<R: Rng + ?Sized>(s: &Scenario, p: &GaParams, rng: &mut R) -> HeuristicOutcome {
    run_ga_with(s, p, rng, Exec::default())
}

/// Generational GA: tournament selection, scattered crossover, gaussian
/// mutation rounded and clamped to `0..=M`, elitism and urgent repair.
/// Random draws happen on the calling thread only, so `exec` never changes
/// the result.
pub fn run_ga_with<R: Rng + ?Sized>(s: &Scenario, p: &GaParams, rng: &mut R, exec: Exec) -> HeuristicOutcome {
    assert!(p.population >= 2, "population must be at least 2");
    let n = s.num_tasks();
    let m = s.num_servers();
    let evaluate = |pop: &mut Vec<Genome>| -> Vec<f64> {
        let repaired: Vec<(Genome, f64)> = exec.map(pop, |g| {
            let mut g = g.clone();
            let v = repair(&mut g, s);
            (g, v)
        });
        let mut fit = Vec::with_capacity(pop.len());
        for (k, (g, v)) in repaired.into_iter().enumerate() {
            pop[k] = g;
            fit.push(v);
        }
        fit
    };

    let mut pop: Vec<Genome> = (0..p.population)
        .map(|_| (0..n).map(|_| rng.random_range(0..=m)).collect())
        .collect();
    let mut fit = evaluate(&mut pop);
    let order = ranked(&fit);
    let mut best = (pop[order[0]].clone(), fit[order[0]]);
    let mut trace = ConvergenceTrace { best: vec![best.1] };

    for _ in 0..p.max_generations {
        let order = ranked(&fit);
        let mut next: Vec<Genome> = order
            .iter()
            .take(p.elite.min(p.population))
            .map(|&k| pop[k].clone())
            .collect();
        while next.len() < p.population {
            let a = tournament(&fit, p.tournament_size, rng);
            let mut child = if rng.random_bool(p.crossover_fraction) {
                let b = tournament(&fit, p.tournament_size, rng);
                (0..n)
                    .map(|i| if rng.random_bool(0.5) { pop[a][i] } else { pop[b][i] })
                    .collect()
            } else {
                pop[a].clone()
            };
            for gene in child.iter_mut() {
                if rng.random_bool(p.mutation_rate) {
                    let step: f64 = StandardNormal.sample(rng);
                    let v = (*gene as f64 + p.mutation_sigma * step).round();
                    *gene = v.clamp(0.0, m as f64) as usize;
                }
            }
            next.push(child);
        }
        pop = next;
        fit = evaluate(&mut pop);
        let top = ranked(&fit)[0];
        if fit[top] < best.1 {
            best = (pop[top].clone(), fit[top]);
        }
        trace.best.push(best.1);
    }

    HeuristicOutcome {
        schedule: decode(&best.0, s),
        genome: best.0,
        fitness: best.1,
        trace,
    }
}
