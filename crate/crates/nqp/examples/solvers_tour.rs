//! Tour of the solver family on one random instance: the exhaustive oracle,
//! coordinate descent, simulated annealing and the multi-start driver.
//!
//! ```bash
//! cargo run --release --example solvers_tour
//! ```

use nqp::instance::QpInstance;
use nqp::level_set::LevelSet;
use nqp::solvers::{
    solve_anneal, solve_brute_force, solve_local_search, solve_multi_start, AnnealSchedule,
    InnerSolver, SolverBudget,
};

fn main() -> nqp::Result<()> {
    let levels = LevelSet::new(vec![-1, 0, 1])?;
    let inst = QpInstance::random_psd(12, levels.clone(), 2024, 5)?;
    println!(
        "random instance: {} variables over {}, PSD by construction",
        inst.n(),
        levels
    );

    let budget = SolverBudget::default();

    let oracle = solve_brute_force(&inst, &budget)?;
    println!(
        "\nexhaustive      objective {:>6}   ({} evaluations, optimum proven)",
        oracle.best.objective, oracle.evaluations
    );

    // a single descent from the all-zero point can stall in a local optimum;
    // that is exactly what the multi-start driver below is for
    let init = vec![0; inst.n()];
    let local = solve_local_search(&inst, &init, 1, &budget)?;
    println!(
        "local search    objective {:>6}   ({} evaluations, {} sweeps, from the all-zero start)",
        local.best.objective, local.evaluations, local.iterations
    );

    let anneal = solve_anneal(&inst, &AnnealSchedule::default(), 1, &budget)?;
    println!(
        "annealing       objective {:>6}   ({} proposals)",
        anneal.best.objective, anneal.iterations
    );

    let multi = solve_multi_start(&inst, 16, 1, &InnerSolver::LocalSearch, &budget)?;
    println!(
        "multi-start x16 objective {:>6}   ({} evaluations in total)",
        multi.best.objective, multi.evaluations
    );

    println!("\nbest assignment {:?}", multi.best.w);
    assert!(local.best.objective >= oracle.best.objective);
    assert!(anneal.best.objective >= oracle.best.objective);
    assert!(multi.best.objective >= oracle.best.objective);
    if multi.best.objective == oracle.best.objective {
        println!("multi-start matched the proven optimum");
    }
    Ok(())
}
