use crate::error::{Error, Result};

/// Which solver handles each pseudosample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolvePath {
    /// Linear prediction + warm-started Laguerre + LSQR weights.
    #[default]
    Fast,
    /// Accurate pencil solve for every pseudosample.
    Slow,
}

/// Spacing of the local integration meshes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum MeshSpacing {
    /// `max(1e-3, member standard deviation / 3)` per cluster.
    #[default]
    Auto,
    Fixed(f64),
}

/// How the weight estimate of a selected cluster is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightAveraging {
    /// Arithmetic mean of member weights.
    #[default]
    MemberMean,
    /// Sum of member weights divided by the number of replications. Used
    /// when one replication may place several members in a cluster.
    ReplicationTotal,
}

/// Which terms make up the potential whose Laplacian is integrated on a
/// cluster's mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassPotential {
    /// Only the members of that cluster. Terms of other clusters are
    /// harmonic on the mesh, so dropping them only removes the stencil
    /// error they would leak into it.
    #[default]
    ClusterMembers,
    /// Every term of every solved replication.
    AllTerms,
}

/// How many clusters end up in the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    /// Keep clusters whose `|mass|` exceeds `K sigma`.
    #[default]
    Threshold,
    /// Keep the given number of clusters with the largest `|mass|`.
    Largest(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudosampleConfig {
    /// Number of pseudosamples `R`.
    pub replications: usize,
    /// Deviation of the added noise, `E|nu'|^2 = sigma_prime^2`.
    pub sigma_prime: f64,
    pub seed: u64,
    /// Upper bound on the order; `None` means `n/2`.
    pub p_tilde: Option<usize>,
    /// Selection constant `K > 1`.
    pub k_sigma: f64,
    /// Points per side of each integration mesh (odd, >= 3).
    pub mesh_size: usize,
    pub mesh_spacing: MeshSpacing,
    pub path: SolvePath,
    pub weight_averaging: WeightAveraging,
    pub selection: Selection,
    pub potential: MassPotential,
}

impl Default for PseudosampleConfig {
    fn default() -> Self {
        Self {
            replications: 64,
            sigma_prime: 0.0,
            seed: 0,
            p_tilde: None,
            k_sigma: 5.0,
            mesh_size: 7,
            mesh_spacing: MeshSpacing::Auto,
            path: SolvePath::Fast,
            weight_averaging: WeightAveraging::MemberMean,
            selection: Selection::Threshold,
            potential: MassPotential::ClusterMembers,
        }
    }
}

impl PseudosampleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.replications == 0 {
            return bad("replications must be >= 1".into());
        }
        if !(self.sigma_prime.is_finite() && self.sigma_prime >= 0.0) {
            return bad(format!("sigma_prime must be finite and >= 0, got {}", self.sigma_prime));
        }
        if self.p_tilde == Some(0) {
            return bad("p_tilde must be >= 1".into());
        }
        if !(self.k_sigma > 1.0 && self.k_sigma.is_finite()) {
            return bad(format!("K must be > 1, got {}", self.k_sigma));
        }
        if self.mesh_size < 3 || self.mesh_size.is_multiple_of(2) {
            return bad(format!("mesh size must be odd and >= 3, got {}", self.mesh_size));
        }
        if let MeshSpacing::Fixed(d) = self.mesh_spacing {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("mesh spacing must be > 0, got {d}"));
            }
        }
        if self.selection == Selection::Largest(0) {
            return bad("number of kept clusters must be >= 1".into());
        }
        Ok(())
    }

    /// `sigma~ = sqrt(sigma^2 + sigma'^2)` for data noise `sigma`.
    pub fn sigma_tilde(&self, sigma: f64) -> f64 {
        sigma.hypot(self.sigma_prime)
    }

    /// Effective order bound for a series of length `n`.
    pub fn p_tilde_for(&self, n: usize) -> usize {
        let half = n / 2;
        self.p_tilde.map_or(half, |p| p.min(half)).max(1)
    }
}
