//! Classical counterparts: an exact finite normal martingale and Monte Carlo
//! Brownian / compensated Poisson samplers.

pub mod bernoulli;
pub mod mc;

pub use bernoulli::{BernoulliSpace, Lemma1Verdict, RandomVariable, Theorem5Check};
pub use mc::{
    brownian_mc, hermite_oracle, mc_iterated, poisson_mc, tensor_power, MeanEstimate, PathEnsemble,
};
