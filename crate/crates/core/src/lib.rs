//! Cooperative-game attribution over embedding sets.
//!
//! Exact and sampled Banzhaf/Shapley values and pairwise interaction indices
//! for arbitrary set functions, cosine-similarity games over frame and word
//! embeddings, and their use for query-guided frame scoring and threshold
//! based temporal moment localization.

pub mod alignment;
pub mod coalition;
pub mod embedding;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod game;
pub mod io;
pub mod localization;
pub mod metrics;
pub mod pipeline;
pub mod sampling;
pub mod synthetic;

pub use alignment::{
    aggregate_loss, contrastive_loss, enhance, game_distribution, kld_loss, matching_degree,
    video_score, word_alignment_loss, Distribution, EnhancedSequence, LossReport, LossWeights,
    MatchProfile, DEFAULT_TEMPERATURE,
};
pub use coalition::{Coalition, MAX_PLAYERS};
pub use embedding::{
    cross_modal_game, pairwise_interaction_grid, self_modal_game, sentence_level_interaction,
    CrossModalGame, CrossModalGameSpec, EmbeddingSequence, InteractionGrid, Modality, Mode,
    SelfModalGame,
};
pub use error::{Error, Result};
pub use exact::{
    exact_banzhaf, exact_interaction, exact_shapley, exact_value, exact_values, Enumerator,
    InteractionIndexResult, ValueVector, DEFAULT_ENUMERATION_CAP,
};
pub use game::{
    reduce_with_union, AdditiveGame, CharacteristicGame, FnGame, TableGame, UnanimityGame,
    UnionGame, ValueKind,
};
pub use localization::{localize, predictions_to_seconds, LocalizerConfig, Moment, TimedMoment};
pub use metrics::{recall_at, temporal_iou, EvalRecord, Interval};
pub use pipeline::{eval_record, run_pipeline, FeatureSource, Pipeline, PipelineOutput};
pub use sampling::{
    convergence_sweep, sampled_banzhaf, sampled_interaction, sampled_shapley, sampled_value,
    EstimateReport, SamplingPlan, SweepRow, SweepTarget, DEFAULT_SAMPLE_COUNT,
};
pub use synthetic::{generate, FrameSpan, GroundingCase, MomentPlacement, SyntheticConfig};
