use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::PseudosampleConfig;
use crate::model::SignalSeries;

/// Independent stream for replication `r`: the ChaCha key comes from `seed`
/// and the stream id is `r`, so the draws do not depend on scheduling.
pub fn replication_rng(seed: u64, r: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r);
    rng
}

/// Circular complex Gaussian with `E|nu|^2 = sigma^2`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> Complex64 {
    let scale = sigma * std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

/// Replication `r`: `a_k + nu_k^(r)` with `E|nu|^2 = sigma'^2`. The returned
/// series carries `sigma~ = sqrt(sigma^2 + sigma'^2)`.
pub fn pseudosample(series: &SignalSeries, cfg: &PseudosampleConfig, r: usize) -> SignalSeries {
    let sigma_tilde = cfg.sigma_tilde(series.sigma());
    if cfg.sigma_prime == 0.0 {
        return series.with_sigma(sigma_tilde).expect("valid sigma");
    }
    let mut rng = replication_rng(cfg.seed, r as u64);
    let samples = series
        .samples()
        .iter()
        .map(|a| a + complex_gaussian(&mut rng, cfg.sigma_prime))
        .collect();
    SignalSeries::with_dt(samples, sigma_tilde, series.dt()).expect("finite perturbation")
}

pub fn generate_pseudosamples(series: &SignalSeries, cfg: &PseudosampleConfig) -> Vec<SignalSeries> {
    (0..cfg.replications).map(|r| pseudosample(series, cfg, r)).collect()
}
