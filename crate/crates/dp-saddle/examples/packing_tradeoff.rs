//! The stability / accuracy trade-off on the packing design.
//!
//! Regularized ERM with modulus lambda is 2L/(lambda n)-stable but pays an
//! optimization bias that grows with lambda. On the packing instance both
//! sides are measurable exactly, and their product stays below L B^2 / n
//! across the whole lambda grid; the bound is what forces any algorithm
//! that is too stable to be inaccurate somewhere.
//!
//! ```text
//! cargo run --example packing_tradeoff
//! ```

use dp_saddle::eval::uas_probe;
use dp_saddle::problems::{PackingInstance, ProblemSpec};
use dp_saddle::solvers::RegularizedErm;
use dp_saddle::SaddleAlgorithm;

fn main() -> dp_saddle::Result<()> {
    let n = 256;
    let k = 16;
    let scale = 1.0;
    let radius = 1.0;
    let instance = PackingInstance::new(n, k, vec![1; k], scale)?;
    let problem = ProblemSpec::packing(instance.clone(), radius)?;
    let dataset = instance.dataset();
    let view = problem.empirical_view(&dataset)?;
    let optimal = instance.optimal_value(radius);

    let lipschitz = problem.loss().base_lipschitz();
    let diameter = problem.domain().diameter();
    let budget_bound = lipschitz * diameter * diameter / n as f64;

    println!("packing design: n = {n}, K = {k}, product bound L B^2 / n = {budget_bound:.6}");
    println!("   lambda | stability (max) | excess risk | product");
    for lambda in [0.01, 0.05, 0.2, 1.0, 5.0] {
        let algorithm = RegularizedErm { modulus: lambda };
        let stability = uas_probe(&problem, &algorithm, n, 2 * k, 13)?;
        let output = algorithm.solve(&problem, &dataset, 1)?;
        let excess = view.population_value(&output.point)? - optimal;
        let product = stability.max_distance * excess;
        println!(
            " {lambda:>8.2} | {:>15.6} | {excess:>11.6} | {product:.6}",
            stability.max_distance
        );
        assert!(product <= budget_bound, "trade-off bound violated");
    }
    println!("every lambda respects the trade-off bound");
    Ok(())
}
