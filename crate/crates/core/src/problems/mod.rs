//! Seeded benchmark generators and reference oracles.
//!
//! Every random array comes from its own ChaCha8 stream (`seed`, stream id),
//! so instances are identical across platforms and adding a new array never
//! perturbs the existing ones.

pub mod gen;
pub mod oracle;

use alloc::vec::Vec;
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub use gen::{
    gen_conic_lp, gen_elastic_sqrt, gen_qp, gen_sqrt_loss_composite, gen_tv_recon, phantom, ConicInstance,
    ElasticInstance, InstanceSpec, QpData, QpInstance, SqrtLossInstance, TvInstance,
};
pub use oracle::{
    fstar_crosscheck, kkt_residual, long_run_reference, qp_active_set_oracle, qp_kkt_residual, qp_polish_oracle, qp_reference,
    sqrt_loss_oracle, sqrt_loss_reference, CrossCheck, QpSolution,
};

/// Independent generator for array `stream` of instance `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn randn(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Uniform draws on the open interval `(0, 1)`.
pub fn rand_open01(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(Open01)).collect()
}
