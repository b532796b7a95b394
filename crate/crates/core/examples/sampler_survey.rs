//! Prints max/median ratios of every sampled inequality for two seed sets.

use eulerbench_core::inequalities::{inequality_sample, InequalityId, SampleConfig};

fn main() {
    for id in InequalityId::ALL {
        let start = std::time::Instant::now();
        let a = inequality_sample(&SampleConfig::new(id, 100, 1)).unwrap();
        let b = inequality_sample(&SampleConfig::new(id, 100, 2)).unwrap();
        let mut cfg = SampleConfig::new(id, 10, 3);
        cfg.constant_velocity = true;
        let c = inequality_sample(&cfg).unwrap();
        println!(
            "{id}: max {:.4} / {:.4}  median {:.4}  failures {}  constant-v max {:.2e}  [{:.2?}]",
            a.max_ratio,
            b.max_ratio,
            a.median_ratio,
            a.failures + b.failures,
            c.max_ratio,
            start.elapsed()
        );
    }
}
