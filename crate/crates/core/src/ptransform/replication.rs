use super::config::{PseudosampleConfig, SolvePath};
use super::map_indexed;
use super::pseudosample::pseudosample;
use crate::error::{Error, Result};
use crate::model::{ExponentialModel, SignalSeries};
use crate::pencil::{accurate_solution, EigenSolution};
use crate::prony::fast_ceip;

/// Fraction of fast-path failures above which the whole run is redone on
/// the slow path.
pub const FAST_FAILURE_LIMIT: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSet {
    /// Accurate solve of the observed series, truncated to `p_tilde`.
    pub base: EigenSolution,
    /// One model per replication; `None` when even the slow path produced nothing.
    pub models: Vec<Option<ExponentialModel>>,
    /// Replications whose fast solve failed and fell back to the slow path.
    pub failures: Vec<usize>,
    /// True when too many fast solves failed and every replication was re-solved slowly.
    pub switched_to_slow: bool,
    pub p_tilde: usize,
}

impl ReplicationSet {
    /// Number of replications that produced a model.
    pub fn solved_count(&self) -> usize {
        self.models.iter().filter(|m| m.is_some()).count()
    }

    pub fn path_used(&self, requested: SolvePath) -> SolvePath {
        if self.switched_to_slow {
            SolvePath::Slow
        } else {
            requested
        }
    }
}

fn slow_solve(series: &SignalSeries, p_tilde: usize) -> Option<ExponentialModel> {
    accurate_solution(series, p_tilde)
        .ok()
        .filter(|s| !s.pairs.is_empty())
        .map(|s| s.to_model())
}

/// Solves every replication produced by `sample(r)` for `r < count`.
fn solve_all<F>(base: EigenSolution, count: usize, path: SolvePath, sample: F) -> ReplicationSet
where
    F: Fn(usize) -> SignalSeries + Sync + Send,
{
    let p_tilde = base.pairs.len();
    let slow_all = || map_indexed(count, |r| slow_solve(&sample(r), p_tilde));

    if path == SolvePath::Slow {
        return ReplicationSet {
            base,
            models: slow_all(),
            failures: Vec::new(),
            switched_to_slow: false,
            p_tilde,
        };
    }

    let fast: Vec<std::result::Result<ExponentialModel, ()>> =
        map_indexed(count, |r| fast_ceip(&sample(r), &base, p_tilde).map_err(|_| ()));
    let failures: Vec<usize> = fast.iter().enumerate().filter(|(_, m)| m.is_err()).map(|(r, _)| r).collect();

    if failures.len() as f64 > FAST_FAILURE_LIMIT * count as f64 {
        return ReplicationSet {
            base,
            models: slow_all(),
            failures,
            switched_to_slow: true,
            p_tilde,
        };
    }

    let models = fast
        .into_iter()
        .enumerate()
        .map(|(r, m)| match m {
            Ok(model) => Some(model),
            Err(()) => slow_solve(&sample(r), p_tilde),
        })
        .collect();
    ReplicationSet {
        base,
        models,
        failures,
        switched_to_slow: false,
        p_tilde,
    }
}

/// Accurate base solve plus one solve per pseudosample.
pub fn solve_replications(series: &SignalSeries, cfg: &PseudosampleConfig) -> Result<ReplicationSet> {
    cfg.validate()?;
    let series = series.truncated_even();
    let base = accurate_solution(&series, cfg.p_tilde_for(series.len()))?;
    if base.pairs.is_empty() {
        return Err(Error::EmptyBase);
    }
    Ok(solve_all(base, cfg.replications, cfg.path, |r| pseudosample(&series, cfg, r)))
}

/// Same as [`solve_replications`] with independent observed samples in place
/// of pseudosamples. The base solve uses their sample mean.
pub fn solve_replicates(samples: &[SignalSeries], cfg: &PseudosampleConfig) -> Result<ReplicationSet> {
    cfg.validate()?;
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidParameter("at least one sample is required".into()))?;
    if let Some(bad) = samples.iter().find(|s| s.len() != first.len()) {
        return Err(Error::LengthMismatch(first.len(), bad.len()));
    }
    let samples: Vec<SignalSeries> = samples.iter().map(|s| s.truncated_even()).collect();
    let mean = mean_series(&samples);
    let base = accurate_solution(&mean, cfg.p_tilde_for(mean.len()))?;
    if base.pairs.is_empty() {
        return Err(Error::EmptyBase);
    }
    Ok(solve_all(base, samples.len(), cfg.path, |r| samples[r].clone()))
}

/// Sample mean, carrying the reduced noise level `sigma / sqrt(R)`.
pub(crate) fn mean_series(samples: &[SignalSeries]) -> SignalSeries {
    let first = &samples[0];
    let count = samples.len() as f64;
    let mean = (0..first.len())
        .map(|k| samples.iter().map(|s| s.samples()[k]).sum::<num_complex::Complex64>() / count)
        .collect();
    SignalSeries::with_dt(mean, first.sigma() / count.sqrt(), first.dt()).expect("mean of finite samples")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{evaluate_model, Term};
    use crate::ptransform::pseudosample::complex_gaussian;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_node_model() -> ExponentialModel {
        ExponentialModel::new(vec![
            Term::new(Complex64::new(1.0, 0.0), Complex64::from_polar(0.9, 0.4)),
            Term::new(Complex64::new(1.0, 0.0), Complex64::from_polar(0.9, -0.4)),
        ])
    }

    #[test]
    fn single_noiseless_replication_matches_base() {
        let s = SignalSeries::new(evaluate_model(&two_node_model(), 0..4), 0.0).unwrap();
        let cfg = PseudosampleConfig { replications: 1, ..Default::default() };
        let reps = solve_replications(&s, &cfg).unwrap();
        let model = reps.models[0].as_ref().unwrap();
        for t in reps.base.pairs.iter() {
            let m = model
                .terms()
                .iter()
                .min_by(|a, b| (a.node - t.node).norm().total_cmp(&(b.node - t.node).norm()))
                .unwrap();
            assert!((m.node - t.node).norm() < 1e-10);
            assert!((m.weight - t.weight).norm() < 1e-10);
        }
    }

    #[test]
    fn tiny_perturbations_stay_near_truth() {
        let truth = two_node_model();
        let s = SignalSeries::new(evaluate_model(&truth, 0..20), 0.0).unwrap();
        let cfg = PseudosampleConfig { replications: 10, sigma_prime: 1e-6, seed: 4, ..Default::default() };
        let reps = solve_replications(&s, &cfg).unwrap();
        assert_eq!(reps.p_tilde, 2);
        for m in reps.models.iter().map(|m| m.as_ref().unwrap()) {
            assert_eq!(m.order(), 2);
            for t in truth.terms() {
                assert!(m.terms().iter().any(|u| (u.node - t.node).norm() < 1e-4));
            }
        }
    }

    #[test]
    fn pure_noise_nodes_gather_near_unit_circle() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = SignalSeries::new((0..20).map(|_| complex_gaussian(&mut rng, 1.0)).collect(), 1.0).unwrap();
        let cfg = PseudosampleConfig { replications: 32, sigma_prime: 0.5, seed: 8, ..Default::default() };
        let reps = solve_replications(&s, &cfg).unwrap();
        let nodes: Vec<Complex64> = reps.models.iter().flatten().flat_map(|m| m.nodes()).collect();
        let near = nodes.iter().filter(|z| z.norm() > 0.5 && z.norm() < 2.0).count();
        assert!(near as f64 >= 0.7 * nodes.len() as f64, "{near}/{}", nodes.len());
    }

    #[test]
    fn zero_series_is_a_hard_error() {
        let s = SignalSeries::from_real(&[0.0; 8], 0.0).unwrap();
        assert_eq!(solve_replications(&s, &PseudosampleConfig::default()), Err(Error::EmptyBase));
    }

    #[test]
    fn slow_path_solves_every_replication() {
        let s = SignalSeries::new(evaluate_model(&two_node_model(), 0..12), 0.01).unwrap();
        let cfg = PseudosampleConfig {
            replications: 5,
            sigma_prime: 0.01,
            p_tilde: Some(2),
            path: SolvePath::Slow,
            ..Default::default()
        };
        let reps = solve_replications(&s, &cfg).unwrap();
        assert!(reps.models.iter().all(|m| m.as_ref().is_some_and(|m| m.order() == 2)));
        assert!(reps.failures.is_empty());
    }

    #[test]
    fn replicates_of_different_lengths_are_rejected() {
        let a = SignalSeries::from_real(&[1.0; 8], 0.0).unwrap();
        let b = SignalSeries::from_real(&[1.0; 6], 0.0).unwrap();
        assert_eq!(solve_replicates(&[a, b], &PseudosampleConfig::default()), Err(Error::LengthMismatch(8, 6)));
    }
}
