//! The session evaluation pipeline on synthetic data drawn from the task
//! model.

use fld_transfer::dataset::{evaluate_sessions, synthetic_session, EvalOptions, SourceInput};
use fld_transfer::simlab::Classifier;
use fld_transfer::{sample_vmf, RngStream, VmfModel};

#[test]
fn optimal_beats_target_on_most_sessions() {
    let d = 10;
    let prior = VmfModel::north(d, 10.0).unwrap();
    let nus = sample_vmf(&prior, 50, RngStream::new(1, 0)).unwrap();
    let sessions: Vec<_> = nus
        .iter()
        .enumerate()
        .map(|(i, nu)| synthetic_session(format!("s{i:02}"), nu, 200, RngStream::new(2, i as u64)).unwrap())
        .collect();
    let sources = SourceInput::Vectors(sample_vmf(&prior, 100, RngStream::new(3, 0)).unwrap());
    let (outcome, reports) =
        evaluate_sessions(&sessions, &sources, &[0.05], 20, 4, &EvalOptions::default()).unwrap();
    assert!(outcome.skipped.is_empty());
    assert_eq!(outcome.records.len(), 50 * 20 * 4);
    let better = reports
        .iter()
        .filter(|r| r.mean[Classifier::Optimal as usize] > r.mean[Classifier::Target as usize])
        .count();
    assert!(better > 25, "optimal ahead on {better}/50 sessions");

    // Records are ordered by session, split, classifier.
    let keys: Vec<_> = outcome
        .records
        .iter()
        .map(|r| (r.session_id.clone(), r.split_index, r.classifier as usize))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn inputs_are_not_mutated() {
    let prior = VmfModel::north(3, 5.0).unwrap();
    let nu = sample_vmf(&prior, 1, RngStream::new(5, 0)).unwrap().remove(0);
    let sessions = vec![synthetic_session("a", &nu, 40, RngStream::new(6, 0)).unwrap()];
    let before = sessions.clone();
    let sources = SourceInput::Vectors(sample_vmf(&prior, 10, RngStream::new(7, 0)).unwrap());
    let src_before = sources.clone();
    let run = || evaluate_sessions(&sessions, &sources, &[0.1, 0.2], 5, 8, &EvalOptions::default()).unwrap();
    let first = run();
    assert_eq!(sessions, before);
    assert_eq!(sources, src_before);
    assert_eq!(first, run());
}
