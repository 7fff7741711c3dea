//! Gesture recognition: activity segmentation, wavelet features and three
//! interchangeable classifiers.

mod corpus;
mod features;
mod forest;
mod label;
mod model;
mod segment;
mod svm;

pub use corpus::{
    classification_segment, evaluation_set, load_gesture_corpus, read_gesture_manifest, training_samples, training_set,
    write_gesture_manifest, GestureManifestEntry, LabelledTrace, GESTURE_MANIFEST_HEADER,
};
pub use features::{extract_features, resample_linear, FeatureLayout, FeatureVector, BAND_STATS, LEVELS, RESAMPLED_LEN};
pub use forest::{ForestParams, Node, Tree};
pub use label::GestureLabel;
pub use model::{
    evaluate, train, ClassifierKind, ConfusionMatrix, ModelState, TrainConfig, TrainedModel, MODEL_FORMAT,
    MODEL_VERSION,
};
pub use segment::{active_runs, activity, interval_iou, preprocess, segment, GestureSegment, SegmentationConfig};
pub use svm::{LinearMachine, SvmParams};
