//! Ground-truth trace generators standing in for radio hardware.

pub mod corpora;
mod crossing;
mod fresnel;
mod gesture;
mod noise;
mod vitals;

pub use corpora::{make_corpora, make_corpora_with, Corpora, CorpusSpec};
pub use crossing::{crossing_channel, crossing_rss, simulate_crossing, CrossingModel, LinkGeometry, WalkPath};
pub use fresnel::{fresnel, knife_edge, strip_gain};
pub use gesture::{simulate_gesture, GestureTemplate, Jitter};
pub use noise::{NoiseModel, NoiseRealization};
pub use vitals::{simulate_vitals, simulate_vitals_with_noise, vitals_signal, VitalSignsProfile};
