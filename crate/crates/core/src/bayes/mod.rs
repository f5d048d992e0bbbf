//! Bayesian-network models over binary attributes: structure representation,
//! Dirichlet-multinomial parameter learning, predictive probabilities,
//! marginal-likelihood scoring, greedy structure search, and forward sampling.

mod model;
mod sample;
mod search;
mod structure;

pub use model::{log_marginal_likelihood, BayesNetModel, DirichletTable};
pub use sample::random_model;
pub use search::learn_structure;
pub use structure::{naive_bayes_structure, parse_structure, write_structure, NetworkStructure};
