use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{decode, repair, ConvergenceTrace, Genome, HeuristicOutcome};
use crate::exec::Exec;
use crate::model::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PsoParams {
    pub swarm: usize,
    pub max_generations: usize,
    pub cognitive: f64,
    pub social: f64,
    pub inertia: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            swarm: 50,
            max_generations: 200,
            cognitive: 1.49,
            social: 1.49,
            inertia: 0.729,
        }
    }
}

fn to_genome(x: &[f64], m: usize) -> Genome {
    x.iter().map(|&v| v.round().clamp(0.0, m as f64) as usize).collect()
}

pub fn run_pso<R: Rng + ?Sized>(s: &Scenario, p: &PsoParams, rng: &mut R) -> HeuristicOutcome {
    run_pso_with(s, p, rng, Exec::default())
}

/// Global-best PSO on positions in `[0, M]^N`, velocities clamped to `M/2`
/// and starting at rest. Positions are rounded to genomes for evaluation and
/// repaired genes are written back to the position.
pub fn run_pso_with<R: Rng + ?Sized>(s: &Scenario, p: &PsoParams, rng: &mut R, exec: Exec) -> HeuristicOutcome {
    assert!(p.swarm >= 1, "swarm must not be empty");
    let n = s.num_tasks();
    let m = s.num_servers();
    let top = m as f64;
    let vmax = top / 2.0;

    let mut pos: Vec<Vec<f64>> = (0..p.swarm)
        .map(|_| (0..n).map(|_| rng.random_range(0.0..=top)).collect())
        .collect();
    let mut vel = vec![vec![0.0; n]; p.swarm];

    let evaluate = |pos: &mut Vec<Vec<f64>>| -> Vec<(Genome, f64)> {
        let out: Vec<(Genome, f64)> = exec.map(pos, |x| {
            let mut g = to_genome(x, m);
            let v = repair(&mut g, s);
            (g, v)
        });
        for (x, (g, _)) in pos.iter_mut().zip(&out) {
            for (xi, &gi) in x.iter_mut().zip(g) {
                if xi.round().clamp(0.0, top) as usize != gi {
                    *xi = gi as f64;
                }
            }
        }
        out
    };

    let first = evaluate(&mut pos);
    let mut pbest: Vec<(Vec<f64>, Genome, f64)> = pos.iter().zip(first).map(|(x, (g, v))| (x.clone(), g, v)).collect();
    let lead = |pb: &[(Vec<f64>, Genome, f64)]| {
        (0..pb.len())
            .min_by(|&a, &b| pb[a].2.total_cmp(&pb[b].2).then(a.cmp(&b)))
            .expect("non-empty swarm")
    };
    let mut gbest = pbest[lead(&pbest)].clone();
    let mut trace = ConvergenceTrace { best: vec![gbest.2] };

    for _ in 0..p.max_generations {
        for k in 0..p.swarm {
            for d in 0..n {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let v = p.inertia * vel[k][d]
                    + p.cognitive * r1 * (pbest[k].0[d] - pos[k][d])
                    + p.social * r2 * (gbest.0[d] - pos[k][d]);
                vel[k][d] = v.clamp(-vmax, vmax);
                pos[k][d] = (pos[k][d] + vel[k][d]).clamp(0.0, top);
            }
        }
        let evals = evaluate(&mut pos);
        for (k, (g, v)) in evals.into_iter().enumerate() {
            if v < pbest[k].2 {
                pbest[k] = (pos[k].clone(), g, v);
            }
        }
        let l = lead(&pbest);
        if pbest[l].2 < gbest.2 {
            gbest = pbest[l].clone();
        }
        trace.best.push(gbest.2);
    }

    HeuristicOutcome {
        schedule: decode(&gbest.1, s),
        genome: gbest.1,
        fitness: gbest.2,
        trace,
    }
}
