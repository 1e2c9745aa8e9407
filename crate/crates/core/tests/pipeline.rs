use ptransform::pencil::{build_pencil, solve_pencil};
use ptransform::ptransform::{complex_gaussian, ptransform_estimate, ClusterReport, PseudosampleConfig};
use ptransform::{Complex64, ExponentialModel, SignalSeries, Term};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn three_terms() -> ExponentialModel {
    ExponentialModel::new(vec![
        Term::new(Complex64::new(1.0, 0.0), Complex64::from_polar(0.95, 0.6)),
        Term::new(Complex64::new(0.8, 0.4), Complex64::from_polar(0.9, 2.4)),
        Term::new(Complex64::new(0.6, -0.5), Complex64::from_polar(0.85, -1.8)),
    ])
}

fn noisy(model: &ExponentialModel, n: usize, sigma: f64, seed: u64) -> SignalSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = model.evaluate(0..n).into_iter().map(|s| s + complex_gaussian(&mut rng, sigma)).collect();
    SignalSeries::new(samples, sigma).unwrap()
}

/// Largest distance between a true weight and the direct mass of the
/// selected cluster nearest its node, or `None` if the order is wrong.
fn direct_mass_error(report: &ClusterReport, truth: &ExponentialModel) -> Option<f64> {
    let selected: Vec<(Complex64, Complex64)> = report
        .clusters
        .iter()
        .filter(|c| c.selected)
        .filter_map(|c| Some((c.mean_node()?, c.direct_mass)))
        .collect();
    if selected.len() != truth.order() {
        return None;
    }
    truth
        .terms()
        .iter()
        .map(|t| {
            let (_, mass) = selected.iter().min_by(|a, b| (a.0 - t.node).norm().total_cmp(&(b.0 - t.node).norm()))?;
            Some((mass - t.weight).norm())
        })
        .try_fold(0.0f64, |acc, e| Some(acc.max(e?)))
}

fn mean_direct_mass_error(sigma_tilde: f64) -> f64 {
    let truth = three_terms();
    // sigma' = sigma / 2 gives sigma~ = sigma sqrt(5/4).
    let sigma = sigma_tilde / 1.25f64.sqrt();
    let errors: Vec<f64> = (0..10)
        .map(|seed| {
            let cfg = PseudosampleConfig { replications: 64, sigma_prime: sigma / 2.0, seed, p_tilde: Some(6), ..Default::default() };
            let est = ptransform_estimate(&noisy(&truth, 20, sigma, seed), &cfg).unwrap();
            direct_mass_error(&est.report, &truth).expect("order 3 is selected")
        })
        .collect();
    errors.iter().sum::<f64>() / errors.len() as f64
}

#[test]
fn direct_masses_converge_to_true_weights() {
    let coarse = mean_direct_mass_error(1e-3);
    let fine = mean_direct_mass_error(1e-4);
    assert!(fine < coarse, "{fine:e} vs {coarse:e}");
    let ratio = coarse / fine;
    assert!((3.0..=30.0).contains(&ratio), "error ratio {ratio} over a decade of noise");
    assert!(coarse < 1e-2, "{coarse:e}");
}

#[test]
fn thread_count_does_not_change_the_estimate() {
    let series = noisy(&three_terms(), 24, 1e-2, 3);
    let cfg = PseudosampleConfig { replications: 48, sigma_prime: 5e-3, seed: 3, ..Default::default() };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| ptransform_estimate(&series, &cfg).unwrap())
    };
    let one = run(1);
    let many = run(4);
    assert_eq!(one.report, many.report);
    assert_eq!(one.residuals, many.residuals);
}

#[test]
fn estimate_reproduces_noiseless_series() {
    let truth = three_terms();
    let series = SignalSeries::new(truth.evaluate(0..12), 0.0).unwrap();
    let cfg = PseudosampleConfig { replications: 4, ..Default::default() };
    let est = ptransform_estimate(&series, &cfg).unwrap();
    assert_eq!(est.p_hat(), 3);
    assert!(est.residuals.mse < 1e-24, "{}", est.residuals.mse);
    let ahead = est.model().evaluate(12..20);
    for (a, b) in ahead.iter().zip(truth.evaluate(12..20)) {
        assert!((a - b).norm() < 1e-9);
    }
}

fn separated_nodes(raw: &[(f64, f64)]) -> Option<Vec<Complex64>> {
    let nodes: Vec<Complex64> = raw.iter().map(|&(r, a)| Complex64::from_polar(r, a)).collect();
    let ok = nodes.iter().enumerate().all(|(i, a)| nodes[..i].iter().all(|b| (a - b).norm() >= 0.2));
    ok.then_some(nodes)
}

fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaling_the_data_scales_only_the_weights(
        raw in prop::collection::vec((0.5..1.1f64, 0.0..std::f64::consts::TAU), 1..4),
        alpha_mod in 0.1..10.0f64,
        alpha_arg in 0.0..std::f64::consts::TAU,
    ) {
        let Some(nodes) = separated_nodes(&raw) else { return Ok(()) };
        let model = ExponentialModel::new(nodes.iter().map(|&z| Term::new(Complex64::new(1.0, 0.5), z)).collect());
        let n = 2 * nodes.len() + 2;
        let alpha = Complex64::from_polar(alpha_mod, alpha_arg);
        let base = SignalSeries::new(model.evaluate(0..n), 0.0).unwrap();
        let scaled = SignalSeries::new(base.samples().iter().map(|s| alpha * s).collect(), 0.0).unwrap();
        let a = solve_pencil(&build_pencil(&base).unwrap(), &base);
        let b = solve_pencil(&build_pencil(&scaled).unwrap(), &scaled);
        prop_assert_eq!(a.pairs.len(), b.pairs.len());
        for t in &a.pairs {
            let m = b.pairs.iter().min_by(|x, y| (x.node - t.node).norm().total_cmp(&(y.node - t.node).norm())).unwrap();
            prop_assert!((m.node - t.node).norm() < 1e-8, "{} vs {}", m.node, t.node);
            prop_assert!((m.weight - alpha * t.weight).norm() < 1e-7 * alpha_mod.max(1.0));
        }
    }

    #[test]
    fn shifting_the_data_keeps_the_nodes(
        raw in prop::collection::vec((0.5..1.1f64, 0.0..std::f64::consts::TAU), 1..4),
    ) {
        let Some(nodes) = separated_nodes(&raw) else { return Ok(()) };
        let model = ExponentialModel::new(nodes.iter().map(|&z| Term::new(Complex64::new(0.7, -0.2), z)).collect());
        let n = 2 * nodes.len() + 2;
        let base = SignalSeries::new(model.evaluate(0..n), 0.0).unwrap();
        let shifted = SignalSeries::new(model.evaluate(1..n + 1), 0.0).unwrap();
        let a = sorted(solve_pencil(&build_pencil(&base).unwrap(), &base).nodes());
        let b = sorted(solve_pencil(&build_pencil(&shifted).unwrap(), &shifted).nodes());
        prop_assert_eq!(a.len(), nodes.len());
        prop_assert_eq!(b.len(), nodes.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).norm() < 1e-8, "{} vs {}", x, y);
        }
    }
}
