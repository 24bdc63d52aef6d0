//! Embed a binary quadratic program into a three-level set and verify, by
//! exhaustive enumeration, that the minimizers of the embedded instance use
//! only the two smallest levels and decode back to the binary minimizers.
//!
//! ```bash
//! cargo run --release --example embed_binary
//! ```

use nqp::instance::QpInstance;
use nqp::level_set::LevelSet;
use nqp::reduction::reduce_to_level_set;
use nqp::solvers::{brute_force_argmin_set, SolverBudget};

fn main() -> nqp::Result<()> {
    // minimize v'Qv + v'c over v in {0,1}^3
    let binary = QpInstance::from_rows(
        vec![vec![6, -2, 1], vec![-2, 5, -3], vec![1, -3, 4]],
        vec![-7, 2, -1],
        LevelSet::binary(),
        true,
    )?;
    let levels = LevelSet::new(vec![-1, 0, 2])?;

    let (embedded, certificate) = reduce_to_level_set(&binary, &levels, false)?;
    println!("embedded 3 binary variables into the level set {levels}");
    println!("\ncertificate:\n{certificate}");

    let budget = SolverBudget::default();
    let (binary_best, binary_args) = brute_force_argmin_set(&binary, &budget)?;
    let (embedded_best, embedded_args) = brute_force_argmin_set(&embedded, &budget)?;

    println!("binary optimum   {binary_best} at {binary_args:?}");
    println!("embedded optimum {embedded_best} at {embedded_args:?}");

    for t in &embedded_args {
        let decoded = certificate.decode(t)?;
        println!("  {t:?} decodes to {decoded:?}");
    }
    let decoded: Vec<Vec<i64>> = embedded_args
        .iter()
        .map(|t| certificate.decode(t))
        .collect::<nqp::Result<_>>()?;
    assert_eq!(decoded, binary_args, "minimizer sets must correspond");
    assert_eq!(certificate.binary_objective(embedded_best)?, binary_best);
    println!("\nminimizer sets correspond exactly; objectives reconcile through the certificate");
    Ok(())
}
