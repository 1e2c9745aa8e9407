use num_complex::Complex64;

use super::mass::Mesh;
use super::replication::ReplicationSet;
use crate::model::{ExponentialModel, Term};

const KMEANS_MAX_ITER: usize = 100;

/// Term `j` of replication `replication`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Member {
    pub replication: usize,
    pub term: Term,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Node part of the k-means centroid.
    pub centroid: Complex64,
    pub members: Vec<Member>,
    /// Integration mesh; `None` until selection, or when the mesh had to be
    /// dropped because it coincided with another cluster's.
    pub mesh: Option<Mesh>,
    pub laplacian_mass: Complex64,
    /// Sum of member weights over the number of solved replications.
    pub direct_mass: Complex64,
    pub selected: bool,
}

impl Cluster {
    pub fn member_nodes(&self) -> Vec<Complex64> {
        self.members.iter().map(|m| m.term.node).collect()
    }

    pub fn mean_node(&self) -> Option<Complex64> {
        mean(self.members.iter().map(|m| m.term.node))
    }

    pub fn mean_weight(&self) -> Option<Complex64> {
        mean(self.members.iter().map(|m| m.term.weight))
    }
}

fn mean(values: impl ExactSizeIterator<Item = Complex64>) -> Option<Complex64> {
    let count = values.len();
    (count > 0).then(|| values.sum::<Complex64>() / count as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport {
    pub clusters: Vec<Cluster>,
    pub p_hat: usize,
    /// Averaged terms of the selected clusters.
    pub estimates: ExponentialModel,
    /// Scale applied to `|c|` in the clustering features.
    pub feature_weight: f64,
}

fn rms_spread(values: &[Complex64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let count = values.len() as f64;
    let m = values.iter().sum::<Complex64>() / count;
    (values.iter().map(|v| (v - m).norm_sqr()).sum::<f64>() / count).sqrt()
}

/// `spread(nodes) / max(spread(|c|), mean(|c|))` over the base solution, or
/// 1 when that is not a positive number. The floor keeps nearly equal base
/// magnitudes from blowing up the weight feature.
pub fn feature_weight(base: &[Term]) -> f64 {
    let nodes: Vec<Complex64> = base.iter().map(|t| t.node).collect();
    let mags: Vec<Complex64> = base.iter().map(|t| Complex64::new(t.weight.norm(), 0.0)).collect();
    let mean_mag = mags.iter().map(|m| m.re).sum::<f64>() / mags.len().max(1) as f64;
    let ratio = rms_spread(&nodes) / rms_spread(&mags).max(mean_mag);
    if ratio.is_finite() && ratio > 0.0 {
        ratio
    } else {
        1.0
    }
}

type Feature = [f64; 3];

fn feature(t: &Term, w: f64) -> Feature {
    [t.node.re, t.node.im, w * t.weight.norm()]
}

fn dist2(a: &Feature, b: &Feature) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &Feature, centroids: &[Feature]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, c) in centroids.iter().enumerate() {
        let d = dist2(point, c);
        if d < best_d {
            best = k;
            best_d = d;
        }
    }
    best
}

/// Lloyd iterations from the given initial centroids. Returns the final
/// centroids and assignments.
fn kmeans(points: &[Feature], mut centroids: Vec<Feature>) -> (Vec<Feature>, Vec<usize>) {
    let k = centroids.len();
    let mut assign: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
    for _ in 0..KMEANS_MAX_ITER {
        let mut sums = vec![[0.0; 3]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assign) {
            counts[a] += 1;
            for d in 0..3 {
                sums[a][d] += p[d];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].map(|s| s / counts[c] as f64);
            }
        }
        // Reseed empty clusters at the point farthest from its centroid.
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let far = (0..points.len())
                .filter(|&i| counts[assign[i]] > 1)
                .max_by(|&i, &j| {
                    dist2(&points[i], &centroids[assign[i]]).total_cmp(&dist2(&points[j], &centroids[assign[j]]))
                });
            if let Some(i) = far {
                counts[assign[i]] -= 1;
                counts[c] = 1;
                assign[i] = c;
                centroids[c] = points[i];
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids)).collect();
        if next == assign {
            break;
        }
        assign = next;
    }
    (centroids, assign)
}

/// k-means over every replication term in `(Re xi, Im xi, w |c|)`, one
/// cluster per base eigenpair, initialized at the base features. Masses
/// and selection are left empty.
pub fn cluster_solutions(reps: &ReplicationSet) -> ClusterReport {
    let w = feature_weight(&reps.base.pairs);
    let members: Vec<Member> = reps
        .models
        .iter()
        .enumerate()
        .filter_map(|(r, m)| m.as_ref().map(|m| (r, m)))
        .flat_map(|(r, m)| m.terms().iter().map(move |&term| Member { replication: r, term }))
        .collect();
    let points: Vec<Feature> = members.iter().map(|m| feature(&m.term, w)).collect();
    let init: Vec<Feature> = reps.base.pairs.iter().map(|t| feature(t, w)).collect();
    let (centroids, assign) = kmeans(&points, init);

    let mut clusters: Vec<Cluster> = centroids
        .iter()
        .map(|c| Cluster {
            centroid: Complex64::new(c[0], c[1]),
            members: Vec::new(),
            mesh: None,
            laplacian_mass: Complex64::new(0.0, 0.0),
            direct_mass: Complex64::new(0.0, 0.0),
            selected: false,
        })
        .collect();
    for (m, &a) in members.into_iter().zip(&assign) {
        clusters[a].members.push(m);
    }
    ClusterReport {
        clusters,
        p_hat: 0,
        estimates: ExponentialModel::empty(),
        feature_weight: w,
    }
}
