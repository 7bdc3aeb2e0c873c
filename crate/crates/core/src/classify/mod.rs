//! Function classification: the minimum-distance decoder, PCA, LDA, the two
//! Fourier-feature pipelines and cross-validation.

mod decoder;
mod lda;
mod pca;
mod pipeline;
mod validation;

pub use decoder::min_distance_decode;
pub use lda::{lda_predict, lda_train, LdaModel, LdaPrediction, PriorMode, Ridge};
pub use pca::{pca_apply, pca_fit, PcaProjection};
pub use pipeline::{
    bjs_pipeline_features, bjs_coefficient_count, dataset_features, magnitude_only, pinsker_pipeline_features,
    pipeline_features, FeatureShrinkage, FeatureVector, PipelineConfig,
};
pub use validation::{
    contiguous_bands, cross_validate, cross_validate_features, grid_search, CvReport, CvScheme, GridResult,
    GridRow, GridSpec, MaskPattern,
};
