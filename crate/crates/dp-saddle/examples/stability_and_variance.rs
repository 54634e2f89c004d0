//! Uniform argument stability and output variance probes.
//!
//! Stability: rerun the algorithm on a dataset and a neighbor differing in
//! one sample (same algorithm seed) and measure the output displacement.
//! Variance: rerun across independent datasets and measure the spread. The
//! dataset-mean rule makes both quantities predictable: its per-sample
//! influence is at most sqrt(2) * 2 r / n.
//!
//! ```text
//! cargo run --example stability_and_variance
//! ```

use dp_saddle::algorithm::DatasetMean;
use dp_saddle::eval::{uas_probe, variance_probe};
use dp_saddle::problems::ProblemSpec;

fn main() -> dp_saddle::Result<()> {
    let problem = ProblemSpec::linear_saddle(2, 1.0, 2.0)?;
    let data_radius = problem.loss().base_lipschitz() / (2.0 * 2f64.sqrt());
    let trials = 400;

    println!("dataset-mean rule on the linear saddle family ({trials} probes per n)");
    println!("    n | mean stability | max stability | influence bound | variance | n * Delta^2");
    for n in [64usize, 256, 1024] {
        let stability = uas_probe(&problem, &DatasetMean, n, trials, 31)?;
        let variance = variance_probe(&problem, &DatasetMean, n, trials, 32)?;
        let influence = 2f64.sqrt() * 2.0 * data_radius / n as f64;
        let variance_bound = n as f64 * influence * influence;
        println!(
            " {n:>4} | {:>14.6} | {:>13.6} | {influence:>15.6} | {:>8.6} | {variance_bound:>10.6}",
            stability.mean_distance, stability.max_distance, variance.total_variance
        );
        assert!(stability.max_distance <= influence + 1e-12);
        assert!(variance.total_variance <= variance_bound);
    }
    println!("both probes sit inside their analytic envelopes at every n");
    Ok(())
}
