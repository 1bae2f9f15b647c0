import numpy as np
import pytest

from dialectid import features, synth
from dialectid.audio import AudioSignal
from dialectid.synth import VowelSpec, synthesize_vowel


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """18-file separated-profile corpus shared across module tests."""
    out = tmp_path_factory.mktemp("corpus")
    manifest = synth.generate_corpus(
        synth.dialect_profile("separated"), 2, 3, seed=11, out_dir=out)
    return out, manifest


@pytest.fixture(scope="session")
def tiny_dataset(tiny_corpus):
    _, manifest = tiny_corpus
    dataset, failures = features.build_dataset(manifest, "phoneme")
    assert not failures, failures
    assert len(dataset) == 18
    return dataset


@pytest.fixture(scope="session")
def steady_vowel():
    """One clean synthetic vowel with well-known parameters."""
    return synthesize_vowel(VowelSpec(
        f0=120.0, formants=(700.0, 1220.0, 2600.0), duration=0.3,
        amplitude_rms=0.1, sample_rate=16000))


def sine(freq: float, duration: float, rate: int, amplitude: float = 0.5) -> AudioSignal:
    t = np.arange(int(round(duration * rate))) / rate
    return AudioSignal(amplitude * np.sin(2.0 * np.pi * freq * t), rate)


@pytest.fixture
def sine_factory():
    return sine
