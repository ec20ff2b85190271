//! Opinion clusters and summary statistics.

use crate::error::{Error, Result};

/// Default merge tolerance on the probability scale.
pub const DEFAULT_CLUSTER_EPSILON: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPartition {
    /// Agent ids per cluster, largest cluster first.
    pub clusters: Vec<Vec<usize>>,
    pub epsilon: f64,
}

impl ClusterPartition {
    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn population(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum()
    }

    /// See [`effective_clusters`].
    pub fn effective(&self) -> f64 {
        effective_clusters(self, self.population())
    }
}

/// Single-linkage clustering on the line: sorted values start a new cluster
/// whenever the gap to the previous value exceeds `epsilon`.
pub fn partition(values: &[f64], epsilon: f64) -> Result<ClusterPartition> {
    if values.is_empty() {
        return Err(Error::Empty("values"));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "cluster epsilon must be positive, got {epsilon}"
        )));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let mut clusters: Vec<Vec<usize>> = vec![vec![order[0]]];
    for pair in order.windows(2) {
        if values[pair[1]] - values[pair[0]] > epsilon {
            clusters.push(Vec::new());
        }
        clusters.last_mut().unwrap().push(pair[1]);
    }
    for c in &mut clusters {
        c.sort_unstable();
    }
    // Stable sort keeps ascending-value order among equal sizes.
    clusters.sort_by_key(|c| std::cmp::Reverse(c.len()));
    Ok(ClusterPartition { clusters, epsilon })
}

/// `n^2 / sum(N_k^2)`: equals k for k equally sized clusters.
pub fn effective_clusters(partition: &ClusterPartition, n: usize) -> f64 {
    let denom: f64 = partition
        .clusters
        .iter()
        .map(|c| (c.len() as f64).powi(2))
        .sum();
    (n as f64).powi(2) / denom
}

pub fn mean_probability(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("values"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}
