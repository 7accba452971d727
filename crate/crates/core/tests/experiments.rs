use dsim_core::counterexample::build_scheme;
use dsim_core::covering::{covering_experiment, hybrid_experiment, ExperimentReport, HybridInstance, SoftCoveringInstance, SweepConfig};
use dsim_core::dist::{cross_source, gk_common_information, wyner_dsbs};

fn config(n_list: Vec<usize>, trials: usize) -> SweepConfig {
    SweepConfig { n_list, trials, seed: 11, cap_cells: 1 << 20 }
}

#[test]
fn cross_source_common_part() {
    let common = gk_common_information(&cross_source(0.1).unwrap()).unwrap();
    assert_eq!(common.components(), 3);
    assert!((common.entropy_bits - 0.921928094887).abs() < 1e-9);
}

#[test]
fn covering_mean_shrinks_with_positive_gap() {
    let inst = SoftCoveringInstance::noisy_codeword(0.2).unwrap();
    let report = covering_experiment(&inst, &config(vec![2, 6], 16)).unwrap();
    assert!(report.rows[1].mean_bits < report.rows[0].mean_bits);
    let again = ExperimentReport::from_json(&report.to_json()).unwrap();
    assert_eq!(again.rows, report.rows);
}

#[test]
fn hybrid_report_records_common_information() {
    let h = HybridInstance::cross_source_wyner(0.1, 0.3).unwrap();
    let target = h.induced_pair().unwrap();
    let report = hybrid_experiment(&h, &target, &config(vec![1, 2], 4)).unwrap();
    let ci = report.metrics["common_information_bits"].as_f64().unwrap();
    assert!((ci - 0.921928094887).abs() < 1e-9);
    let gap = report.metrics["condition_gap_bits"].as_f64().unwrap();
    assert!((gap - h.condition_gap().unwrap()).abs() < 1e-12);
    assert!(gap > 0.0 && gap < ci);
    assert!(ci > wyner_dsbs(0.24).unwrap());
    assert!(report.rows.iter().all(|r| r.min_bits >= 0.0 && r.trials == 4));
}

#[test]
fn counterexample_stays_far_from_scalar_channels() {
    let s = build_scheme(8, 4, 0.1, 0.05).unwrap();
    let m = s.exact_metrics().unwrap();
    assert!((m.divergence_bits - 0.026294).abs() < 1e-6);
    assert!((m.decomposition.total - m.divergence_bits).abs() < 1e-12);
    assert!(m.decomposition.marginal_divs.iter().all(|&d| d < 1e-12));
    assert!(m.flip_probs.iter().all(|&f| (f - 0.15).abs() < 1e-12));
    assert!(m.scalar_tv > 0.05);
}
