//! Calibrating and running differentially private SGDA.
//!
//! Shows the full plan a privacy budget buys: iteration count, batch size,
//! per-coordinate Gaussian noise scale, and the precondition report that
//! the runner re-checks before touching data (a plan with weakened noise is
//! refused). Then runs the plan on the linear saddle family.
//!
//! ```text
//! cargo run --example private_sgda_plan
//! ```

use dp_saddle::eval::gap_at_point;
use dp_saddle::privacy::{calibrate_noisy_sgda, PrivacyBudget};
use dp_saddle::problems::ProblemSpec;
use dp_saddle::solvers::noisy_sgda;

fn main() -> dp_saddle::Result<()> {
    let problem = ProblemSpec::linear_saddle(8, 1.0, 2.0)?;
    let n = 1024;
    let budget = PrivacyBudget::new(1.0, 1e-5)?;
    let domain = problem.domain();

    let plan = calibrate_noisy_sgda(
        n,
        domain.dim(),
        &budget,
        problem.loss().base_lipschitz(),
        domain.max_distance_from(&domain.center())?,
    )?;
    println!("calibrated plan for (epsilon, delta) = (1, 1e-5), n = {n}:");
    println!("  iterations  = {}", plan.iterations);
    println!("  batch size  = {}", plan.batch_size);
    println!("  step size   = {:.6}", plan.step_size);
    println!("  noise sigma = {:.6}", plan.noise_sigma);
    println!("  preconditions ok = {}", plan.preconditions_ok());
    for line in &plan.preconditions.failures {
        println!("  failure: {line}");
    }

    let dataset = problem.sample_dataset(n, 3)?;
    let output = noisy_sgda(problem.loss(), &domain, &dataset, &plan, None, 9)?;
    let gap = gap_at_point(&problem, &output.point)?;
    println!(
        "ran plan: population gap {:.4} after {} gradient evaluations",
        gap, output.gradient_evaluations
    );

    // a tampered plan (half the calibrated noise) must be rejected
    let mut weakened = plan.clone();
    weakened.noise_sigma /= 2.0;
    weakened.preconditions = dp_saddle::privacy::check_sgda_preconditions(
        n,
        &budget,
        problem.loss().base_lipschitz(),
        weakened.iterations,
        weakened.batch_size,
        weakened.noise_sigma,
    );
    match noisy_sgda(problem.loss(), &domain, &dataset, &weakened, None, 9) {
        Err(e) => println!("weakened plan refused as expected: {e}"),
        Ok(_) => unreachable!("runner accepted an underpowered plan"),
    }
    Ok(())
}
