//! Seeded Lloyd k-means with k-means++ initialization, over L2-normalized
//! points, in Euclidean and spherical (cosine) flavours.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{self, CompensatedSum};

pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Squared Euclidean distance to the cluster mean.
    #[default]
    Euclidean,
    /// Spherical k-means: assign by largest dot product with unit centroids.
    Cosine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansOptions {
    pub k: usize,
    pub metric: Metric,
    pub seed: u64,
    pub max_iterations: usize,
}

impl KMeansOptions {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansOptions {
            k,
            metric: Metric::Euclidean,
            seed,
            max_iterations: MAX_ITERATIONS,
        }
    }

    pub fn metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Objective after every assignment step.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl Metric {
    fn cost(self, point: &[f64], centroid: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => squared_distance(point, centroid),
            Metric::Cosine => 1.0 - stats::dot(point, centroid),
        }
    }
}

/// Returns (cluster, cost); ties go to the lowest cluster index.
fn nearest(metric: Metric, point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, metric.cost(point, &centroids[0]));
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = metric.cost(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.gen_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![points[first].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| squared_distance(p, &points[first])).collect();
    while centroids.len() < k {
        let total = stats::sum(d2.iter().copied());
        let next = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                if d <= 0.0 {
                    continue;
                }
                acc += d;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.unwrap()
        } else {
            // every remaining point duplicates a centre
            (0..n).find(|&i| !chosen[i]).unwrap()
        };
        chosen[next] = true;
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(squared_distance(p, &points[next]));
        }
        centroids.push(points[next].clone());
    }
    centroids
}

fn update(points: &[Vec<f64>], assignments: &[usize], centroids: &mut [Vec<f64>], metric: Metric) {
    let dim = points[0].len();
    let mut members = vec![Vec::new(); centroids.len()];
    for (i, &a) in assignments.iter().enumerate() {
        members[a].push(i);
    }
    centroids.par_iter_mut().zip(&members).for_each(|(c, m)| {
        if m.is_empty() {
            return;
        }
        let mut sums = vec![CompensatedSum::new(); dim];
        for &i in m {
            for (s, &x) in sums.iter_mut().zip(&points[i]) {
                s.add(x);
            }
        }
        let mean: Vec<f64> = sums.iter().map(|s| s.value() / m.len() as f64).collect();
        match metric {
            Metric::Euclidean => *c = mean,
            Metric::Cosine => {
                // a zero mean leaves every unit centroid equally good
                if let Some(u) = stats::normalized(&mean) {
                    *c = u;
                }
            }
        }
    });
}

/// Moves the costliest point out of a shared cluster into each empty one.
fn repair_empty(points: &[Vec<f64>], assignments: &mut [usize], costs: &mut [f64], centroids: &mut [Vec<f64>]) {
    let mut sizes = vec![0usize; centroids.len()];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    for j in 0..centroids.len() {
        if sizes[j] > 0 {
            continue;
        }
        let mut far: Option<usize> = None;
        for i in 0..points.len() {
            if sizes[assignments[i]] > 1 && far.is_none_or(|f| costs[i] > costs[f]) {
                far = Some(i);
            }
        }
        let i = far.expect("k <= n leaves a shared cluster while one is empty");
        sizes[assignments[i]] -= 1;
        sizes[j] = 1;
        assignments[i] = j;
        costs[i] = 0.0;
        centroids[j] = points[i].clone();
    }
}

/// Clusters `points` after scaling each to unit length.
pub fn kmeans(points: &[Vec<f64>], opts: &KMeansOptions) -> Result<KMeansResult> {
    let n = points.len();
    if opts.k == 0 || opts.k > n {
        return Err(Error::InvalidK { k: opts.k, n });
    }
    let dim = points[0].len();
    let mut unit = Vec::with_capacity(n);
    for p in points {
        if p.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: p.len(),
            });
        }
        unit.push(stats::normalized(p).ok_or(Error::ZeroVector)?);
    }
    let points = unit;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut centroids = plus_plus(&points, opts.k, &mut rng);
    let mut assignments: Vec<usize> = Vec::new();
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut inertia = f64::INFINITY;

    while iterations < opts.max_iterations.max(1) {
        iterations += 1;
        let (mut next, mut costs): (Vec<usize>, Vec<f64>) =
            points.par_iter().map(|p| nearest(opts.metric, p, &centroids)).unzip();
        repair_empty(&points, &mut next, &mut costs, &mut centroids);
        inertia = stats::sum(costs.iter().copied()).max(0.0);
        history.push(inertia);
        if next == assignments {
            converged = true;
            break;
        }
        assignments = next;
        update(&points, &assignments, &mut centroids, opts.metric);
    }

    Ok(KMeansResult {
        assignments,
        centroids,
        inertia,
        history,
        iterations,
        converged,
    })
}
