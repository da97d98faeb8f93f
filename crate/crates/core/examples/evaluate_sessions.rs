//! Write synthetic sessions to disk, load them back, and run the
//! consecutive-window evaluation with paired significance tests.
//!
//! ```bash
//! cargo run --release --example evaluate_sessions
//! ```

use fld_transfer::dataset::{evaluate_sessions, load_sessions, synthetic_session, write_sessions, EvalOptions, SourceInput};
use fld_transfer::simlab::Classifier;
use fld_transfer::{sample_vmf, RngStream, VmfModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let prior = VmfModel::north(8, 10.0)?;
    let nus = sample_vmf(&prior, 6, RngStream::new(1, 0))?;
    let sessions = nus
        .iter()
        .enumerate()
        .map(|(i, nu)| synthetic_session(format!("p{i:02}"), nu, 150, RngStream::new(2, i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let dir = std::env::temp_dir().join("fld-transfer-sessions-example");
    write_sessions(&dir, &sessions)?;
    let sessions = load_sessions(&dir)?;
    println!("loaded {} sessions from {}", sessions.len(), dir.display());

    let sources = SourceInput::Vectors(sample_vmf(&prior, 100, RngStream::new(3, 0))?);
    let (outcome, reports) = evaluate_sessions(&sessions, &sources, &[0.05, 0.2], 50, 4, &EvalOptions::default())?;
    println!("{} records, {} skipped splits", outcome.records.len(), outcome.skipped.len());
    println!("session     p | target  source  optimal  oracle | p(opt>target)");
    for r in &reports {
        let m = |c: Classifier| r.mean[c as usize];
        println!(
            "{:>7} {:5.2} | {:.4}  {:.4}  {:.4}   {:.4} | {}",
            r.session_id,
            r.p,
            m(Classifier::Target),
            m(Classifier::Source),
            m(Classifier::Optimal),
            m(Classifier::Oracle),
            r.p_optimal_vs_target.map_or("-".into(), |p| format!("{p:.4}"))
        );
    }
    Ok(())
}
