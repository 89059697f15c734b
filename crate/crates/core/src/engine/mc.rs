use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, run_welfare, ArrivalOrder, Mode, OnlinePolicy, Stream};
use crate::error::{FhgError, Result};
use crate::game::SymmetricWeights;

/// Sample mean of the welfare and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let stderr = if n < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        };
        McEstimate { mean, stderr, samples: n }
    }
}

/// Monte Carlo estimate over uniformly random orders. Sample `i` draws its
/// order from stream `(seed, Order, i)` and runs the policy with master seed
/// `derive_seed(seed, Run, i)`, so the result does not depend on scheduling.
pub fn expected_welfare_mc<G: SymmetricWeights>(
    g: &G,
    policy: &dyn OnlinePolicy,
    mode: Mode,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if samples == 0 {
        return Err(FhgError::InvalidArgument("samples must be at least 1".into()));
    }
    let n = g.agent_count();
    let values = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, Stream::Order, i));
            let order = ArrivalOrder::random(n, &mut rng);
            run_welfare(g, order.agents(), policy, mode, derive_seed(seed, Stream::Run, i)).map(|w| w.to_f64())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(McEstimate::from_values(&values))
}
