//! Distance metrics over context attributes, attribute-importance weighting,
//! k-best neighbor selection, and the neighborhood-quality rejection test.

mod metric;
mod neighbors;
mod weights;

pub use metric::{covariance_matrix, regularized_inverse, DistanceMetric};
pub use neighbors::{
    k_best_context, k_best_matches, neighborhood_quality, neighborhood_quality_context,
    NeighborhoodResult,
};
pub use weights::{rank_sum_weights, ImportanceWeights};
