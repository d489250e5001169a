use lsp_apsp::experiments::{aggregate, run_experiment, ExperimentKind, ExperimentSpec};
use lsp_apsp_core::{Seed, WeightModel};

#[test]
fn essential_degree_stays_logarithmic() {
    let n = 1000;
    let spec = ExperimentSpec::new(ExperimentKind::EssentialDegree, n, 4, WeightModel::Uniform01, Seed(21));
    let rows = run_experiment(&spec).unwrap();
    let limit = 24.0 * (n as f64).ln();
    for row in rows.iter().filter(|r| r.trial.is_some() && r.metric == "max_out_degree") {
        assert!(row.value <= limit, "Δ = {} above {limit}", row.value);
    }
}

#[test]
fn ball_sizes_grow_with_alpha() {
    let spec = ExperimentSpec::new(ExperimentKind::BallSizes, 300, 2, WeightModel::Uniform01, Seed(22));
    let rows = run_experiment(&spec).unwrap();
    let sizes: Vec<f64> = [0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|a| aggregate(&rows, 300, &format!("ball_alpha_{a}")).unwrap().value)
        .collect();
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]), "{sizes:?}");
    assert!(sizes[0] >= 1.0);
}

#[test]
fn churn_experiment_reports_symmetry() {
    let mut spec = ExperimentSpec::new(ExperimentKind::UpdateChurn, 60, 2, WeightModel::Exponential1, Seed(23));
    spec.updates = 200;
    let rows = run_experiment(&spec).unwrap();
    assert_eq!(aggregate(&rows, 60, "sp_asymmetric_updates").unwrap().value, 0.0);
    let sp_minus = aggregate(&rows, 60, "sp_minus").unwrap();
    let sp_plus = aggregate(&rows, 60, "sp_plus").unwrap();
    assert_eq!(sp_minus.value, sp_plus.value);
    assert!(sp_minus.reference.unwrap() > 0.0);
}

#[test]
fn distance_variance_has_reference() {
    let spec = ExperimentSpec::new(ExperimentKind::DistanceStats, 200, 2, WeightModel::Exponential1, Seed(24));
    let rows = run_experiment(&spec).unwrap();
    let var = aggregate(&rows, 200, "distance_variance").unwrap();
    let reference = var.reference.unwrap();
    assert!((reference - std::f64::consts::PI.powi(2) / (2.0 * 200.0 * 200.0)).abs() < 1e-15);
    assert!(var.value > 0.0);
}
