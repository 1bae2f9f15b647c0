"""Vowel-based dialect identification from annotated speech.

Pipeline: Praat TextGrid annotations select vowel segments from WAV audio;
LPC formants, autocorrelation pitch, energy, intensity and duration build
a 33-value feature vector per vowel; a from-scratch random forest
classifies three dialect classes; evaluation runs on stratified splits.
A built-in source-filter synthesizer generates fully labelled corpora for
verification.
"""

from .acoustics import (
    AcousticSettings,
    energy_track,
    formant_track,
    intensity_mean,
    pitch_track,
)
from .audio import AudioSignal, read_wav, write_wav
from .evaluation import (
    accuracy,
    confusion_matrix,
    normalize_rows,
    stratified_k_fold,
    stratified_split,
)
from .features import (
    DIALECTS,
    Dataset,
    FeatureVector,
    VowelSegment,
    build_dataset,
    extract_vowel_features,
    read_features_csv,
    select_group,
    write_features_csv,
)
from .forest import (
    ForestParams,
    RandomForestModel,
    feature_importances,
    forest_predict,
    forest_predict_many,
    grid_search,
    load_model,
    save_model,
    train_forest,
)
from .synth import DialectSpec, VowelSpec, dialect_profile, generate_corpus, synthesize_vowel
from .textgrid import TextGrid, parse_textgrid, serialize_textgrid, vowel_intervals

__version__ = "0.1.0"

__all__ = [
    "AcousticSettings", "AudioSignal", "DIALECTS", "Dataset", "DialectSpec",
    "FeatureVector", "ForestParams", "RandomForestModel", "TextGrid",
    "VowelSegment", "VowelSpec", "accuracy", "build_dataset",
    "confusion_matrix", "dialect_profile", "energy_track",
    "extract_vowel_features", "feature_importances", "forest_predict",
    "forest_predict_many", "formant_track", "generate_corpus", "grid_search",
    "intensity_mean", "load_model", "normalize_rows", "parse_textgrid",
    "pitch_track", "read_features_csv", "read_wav", "save_model",
    "select_group", "serialize_textgrid", "stratified_k_fold",
    "stratified_split", "synthesize_vowel", "train_forest",
    "vowel_intervals", "write_features_csv", "write_wav",
]
