//! One-sided signed-rank test on paired differences.
//!
//! ```bash
//! cargo run --example signed_rank
//! ```

use fld_transfer::dataset::{signed_rank_exact_brute_force, signed_rank_test};

fn main() -> fld_transfer::Result<()> {
    let cases: [(&str, Vec<f64>); 4] = [
        ("all positive", vec![1.0; 10]),
        ("antisymmetric", vec![1.0, -1.0, 2.0, -2.0, 3.0, -3.0]),
        ("mostly positive", vec![0.04, 0.02, -0.01, 0.05, 0.03, 0.0, 0.02, -0.02, 0.06, 0.01]),
        ("large sample", (1..=40).map(|i| (i as f64 * 0.7).sin() + 0.3).collect()),
    ];
    for (name, d) in &cases {
        let p = signed_rank_test(d)?;
        print!("{name:>16}: n = {:2}, p = {p:.6}", d.len());
        if d.len() <= 20 {
            print!(" (enumeration {:.6})", signed_rank_exact_brute_force(d)?);
        }
        println!();
    }
    match signed_rank_test(&[0.1, 0.2, -0.1, 0.0]) {
        Err(e) => println!("{:>16}: {e}", "too few"),
        Ok(p) => println!("unexpected p = {p}"),
    }
    Ok(())
}
