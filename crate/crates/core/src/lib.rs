//! Temporal text classification over POS-annotated diachronic corpora.
//!
//! The pipeline: [`corpus`] reads vertical-format documents and maps their
//! years to time-period classes, [`composer`] samples balanced composite
//! documents from each class, [`features`] turns documents into word and
//! POS n-gram vectors, [`models`] trains multinomial Naive Bayes or
//! one-vs-rest linear SVMs, [`eval`] cross-validates them and [`analysis`]
//! ranks the SVM weights of each period.

pub mod analysis;
pub mod composer;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod modelfile;
pub mod models;
pub mod rng;
pub mod synth;

pub use analysis::{feature_report, render_feature_report, top_features, FeatureReport, RankedFeature};
pub use composer::{composite_stats, generate_composites, ComposerConfig, CompositeDocument, CompositeStats};
pub use corpus::{
    assign_class, load_corpus, parse_vertical, pool_by_class, AnnotatedToken, BinningSpec, Document, LabeledPool,
    Sentence, SourceDocument, TimeBinning,
};
pub use error::{Error, Result};
pub use eval::{
    cross_validate, majority_baseline, random_baseline, stratified_kfold, ConfusionMatrix, CvConfig, EvalReport,
    FoldAssignment,
};
pub use features::{
    build_vocabulary, extract_ngrams, vectorize, Channel, FeatureSpec, FeaturizerConfig, NgramKey, SparseVector,
    Vocabulary, Weighting,
};
pub use modelfile::ModelFile;
pub use models::{
    decision_values, mnb_scores, predict, train_mnb, train_svm_ovr, Classifier, Dataset, LinearModel, MnbModel,
    ModelKind, TrainConfig,
};
