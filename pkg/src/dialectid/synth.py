"""Source-filter vowel synthesizer and seeded synthetic-corpus generator.

The synthesizer provides ground truth for the acoustic analyses: every
generated sample's true F0, formants and duration are written next to the
audio, so extraction accuracy is checkable without any licensed speech
data.

Voiced path: an impulse train at F0 is shaped by two real poles (the
glottal spectral rolloff; without it the excitation spectrum is flat and
order-12 LPC recovery of close formants degrades badly), then passed
through the cascade of two-pole resonators for F1-F3 plus a fixed
high-band anchor resonance, then differentiated once (lip radiation) and
scaled to the requested RMS.  The anchor resonance occupies the top of the
analysis band the way real speech's F4 does; without it the surplus LPC
poles wander and occasionally displace F3.

Whisper path (noise source): white noise drives the same cascade minus the
glottal shaping, with all bandwidths tripled, matching the broader
resonances of whispered vowels and keeping the output honestly aperiodic.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass

import numpy as np

from .audio import AudioSignal, write_wav
from .errors import SpecInvalid
from .rng import Stream, stream
from .textgrid import Interval, MONOPHTHONGS, TextGrid, Tier, serialize_textgrid

SOURCE_SHAPING_BANDWIDTH_HZ = 100.0   # two real poles on the voiced source
ANCHOR_FREQUENCY_HZ = 3500.0
ANCHOR_BANDWIDTH_HZ = 250.0
WHISPER_BANDWIDTH_FACTOR = 3.0
IR_DECAY = 1e-8                       # truncate impulse responses at this envelope

PAD_S = 0.100                         # silence on each side of the vowel
CORPUS_TIER = "phoneme"

# stream-derivation tags
_TAG_SPEAKER = 1
_TAG_SAMPLE = 2


@dataclass(frozen=True)
class VowelSpec:
    f0: float
    formants: tuple[float, float, float]
    duration: float
    amplitude_rms: float
    sample_rate: int
    bandwidths: tuple[float, float, float] = (60.0, 90.0, 120.0)
    source: str = "pulse"

    def __post_init__(self):
        f1, f2, f3 = self.formants
        if not (0 < f1 < f2 < f3 < self.sample_rate / 2):
            raise SpecInvalid(f"need 0 < F1 < F2 < F3 < Nyquist, got {self.formants}")
        if self.source == "pulse" and not (75.0 <= self.f0 <= 500.0):
            raise SpecInvalid(f"pulse f0 {self.f0} outside [75, 500]")
        if self.source not in ("pulse", "noise"):
            raise SpecInvalid(f"source must be pulse or noise, not {self.source!r}")
        if self.duration <= 0 or self.amplitude_rms <= 0:
            raise SpecInvalid("duration and amplitude_rms must be positive")
        if any(b <= 0 for b in self.bandwidths):
            raise SpecInvalid("bandwidths must be positive")


def _resonator_ir(freq: float, bandwidth: float, rate: float, n: int) -> np.ndarray:
    """Impulse response of a DC-normalized two-pole resonator.

    Poles at radius exp(-pi B / fs), angle +-2 pi F / fs; closed form
    h[k] = g r^k sin((k+1) theta) / sin(theta) with g = 1 - 2 r cos(theta) + r^2.
    """
    r = np.exp(-np.pi * bandwidth / rate)
    theta = 2.0 * np.pi * freq / rate
    gain = 1.0 - 2.0 * r * np.cos(theta) + r * r
    k = np.arange(n)
    return gain * r**k * np.sin((k + 1) * theta) / np.sin(theta)


def _real_pole_ir(bandwidth: float, rate: float, n: int) -> np.ndarray:
    """DC-normalized one-real-pole lowpass: h[k] = (1-r) r^k."""
    r = np.exp(-np.pi * bandwidth / rate)
    return (1.0 - r) * r ** np.arange(n)


def synthesize_vowel(spec: VowelSpec, rng: Stream | None = None) -> AudioSignal:
    """Render one steady vowel; length is round(duration * rate) samples."""
    rate = spec.sample_rate
    n = int(round(spec.duration * rate))
    if n < 1:
        raise SpecInvalid("duration too short for one sample")
    bandwidths = spec.bandwidths
    anchor_bw = ANCHOR_BANDWIDTH_HZ
    if spec.source == "noise":
        bandwidths = tuple(WHISPER_BANDWIDTH_FACTOR * b for b in bandwidths)
        anchor_bw *= WHISPER_BANDWIDTH_FACTOR
    ir_len = min(n, int(np.ceil(np.log(1.0 / IR_DECAY) / (np.pi * min(bandwidths) / rate))))
    ir_len = max(ir_len, 8)

    pairs = list(zip(spec.formants, bandwidths))
    anchor_f = max(ANCHOR_FREQUENCY_HZ, spec.formants[2] + 500.0)
    if anchor_f < 0.95 * rate / 2:
        pairs.append((anchor_f, anchor_bw))
    h = None
    for freq, bw in pairs:
        h_i = _resonator_ir(freq, bw, rate, ir_len)
        h = h_i if h is None else np.convolve(h, h_i)[:ir_len]

    if spec.source == "pulse":
        for _ in range(2):
            h = np.convolve(h, _real_pole_ir(SOURCE_SHAPING_BANDWIDTH_HZ, rate, ir_len))[:ir_len]
        excitation = np.zeros(n)
        k = 0
        while True:
            idx = int(round(k * rate / spec.f0))
            if idx >= n:
                break
            excitation[idx] = 1.0
            k += 1
    else:
        excitation = (rng or Stream(0)).normals(n)

    y = np.convolve(excitation, h)[:n]
    y = np.concatenate(([y[0]], np.diff(y)))  # radiation
    rms = float(np.sqrt(np.mean(y * y)))
    y = y * (spec.amplitude_rms / rms)
    return AudioSignal(np.clip(y, -1.0, 1.0), rate)


@dataclass(frozen=True)
class VowelTarget:
    """Means and standard deviations of the drawn parameters for one vowel."""

    f0_mean: float
    f0_sd: float
    f1_mean: float
    f1_sd: float
    f2_mean: float
    f2_sd: float
    f3_mean: float
    f3_sd: float
    duration_mean: float
    duration_sd: float


@dataclass(frozen=True)
class DialectSpec:
    name: str
    targets: dict[str, VowelTarget]
    vowel_mix: dict[str, float]

    def __post_init__(self):
        if set(self.targets) != set(MONOPHTHONGS):
            raise SpecInvalid("targets must cover all six monophthongs")
        if set(self.vowel_mix) != set(MONOPHTHONGS):
            raise SpecInvalid("vowel_mix must cover all six monophthongs")
        if abs(sum(self.vowel_mix.values()) - 1.0) > 1e-9:
            raise SpecInvalid("vowel_mix must sum to 1")


_BASE_FORMANTS = {
    # vowel: (F1, F2, F3)
    "ə": (500.0, 1400.0, 2550.0),
    "e": (440.0, 1900.0, 2650.0),
    "i": (320.0, 2150.0, 2850.0),
    "o": (460.0, 950.0, 2550.0),
    "u": (370.0, 900.0, 2650.0),
    "a": (750.0, 1300.0, 2500.0),
}
_SD = {"f0": 10.0, "f1": 40.0, "f2": 80.0, "f3": 100.0, "dur": 0.025}
_BASE_F0 = 120.0
_BASE_DURATION = 0.24

PROFILES = {"separated": 3.0, "overlapped": 1.0, "identical": 0.0}

FEMALE_F0_OFFSET = 30.0

_CLAMPS = {
    "f0": (85.0, 320.0),
    "f1": (240.0, 950.0),
    "dur": (0.12, 0.45),
}


def dialect_profile(profile: str) -> list[DialectSpec]:
    """Three DialectSpecs whose means differ by `profile` SDs per parameter.

    Separation is applied to F1 and F2 (spectral) and to F0 and duration
    (prosodic), so spectral-only and prosodic-only classifiers both have
    signal whenever the multiplier is nonzero.
    """
    if profile not in PROFILES:
        raise ValueError(f"profile must be one of {sorted(PROFILES)}")
    mult = PROFILES[profile]
    specs = []
    uniform_mix = {v: 1.0 / len(MONOPHTHONGS) for v in MONOPHTHONGS}
    from .features import DIALECTS  # local import avoids a cycle

    for d_idx, name in enumerate(DIALECTS):
        shift = (d_idx - 1) * mult
        targets = {}
        for vowel, (f1, f2, f3) in _BASE_FORMANTS.items():
            targets[vowel] = VowelTarget(
                f0_mean=_BASE_F0 + shift * _SD["f0"], f0_sd=_SD["f0"],
                f1_mean=f1 + shift * _SD["f1"], f1_sd=_SD["f1"],
                f2_mean=f2 + shift * _SD["f2"], f2_sd=_SD["f2"],
                f3_mean=f3, f3_sd=_SD["f3"],
                duration_mean=_BASE_DURATION + shift * _SD["dur"],
                duration_sd=_SD["dur"],
            )
        specs.append(DialectSpec(name, targets, dict(uniform_mix)))
    return specs


def _clamp(x: float, lo: float, hi: float) -> float:
    return min(max(x, lo), hi)


GROUND_TRUTH_HEADER = ("sample_id", "f0", "f1", "f2", "f3", "duration_ms")


def generate_corpus(specs: list[DialectSpec], speakers_per_dialect: int,
                    vowels_per_speaker: int, seed: int, out_dir: str | os.PathLike,
                    sample_rate: int = 16000) -> str:
    """Write a WAV + TextGrid pair per utterance plus manifest and ground truth.

    Fully determined by (specs, counts, seed): every sample draws from its
    own stream keyed on (seed, dialect, speaker, index), and per-speaker
    offsets (half an SD per parameter) come from per-speaker streams, so
    output bytes are independent of generation order.  Speakers alternate
    male/female; female speakers get a fixed F0 offset.  Returns the
    manifest path.
    """
    if speakers_per_dialect < 1 or vowels_per_speaker < 1:
        raise ValueError("need at least one speaker and one vowel per speaker")
    out = os.fspath(out_dir)
    os.makedirs(out, exist_ok=True)
    manifest_rows = []
    truth_rows = []
    for d_idx, spec in enumerate(specs):
        short = spec.name[:3].lower()
        for s_idx in range(speakers_per_dialect):
            speaker_id = f"{short}{s_idx:02d}"
            gender = "male" if s_idx % 2 == 0 else "female"
            spk = stream(seed, _TAG_SPEAKER, d_idx, s_idx)
            offsets = {
                "f0": spk.normal() * _SD["f0"] / 2.0,
                "f1": spk.normal() * _SD["f1"] / 2.0,
                "f2": spk.normal() * _SD["f2"] / 2.0,
                "f3": spk.normal() * _SD["f3"] / 2.0,
                "dur": spk.normal() * _SD["dur"] / 2.0,
            }
            if gender == "female":
                offsets["f0"] += FEMALE_F0_OFFSET
            for v_idx in range(vowels_per_speaker):
                rng = stream(seed, _TAG_SAMPLE, d_idx, s_idx, v_idx)
                vowel = MONOPHTHONGS[rng.weighted_choice(
                    [spec.vowel_mix[v] for v in MONOPHTHONGS])]
                t = spec.targets[vowel]
                f0 = _clamp(t.f0_mean + offsets["f0"] + rng.normal() * t.f0_sd,
                            *_CLAMPS["f0"])
                f1 = _clamp(t.f1_mean + offsets["f1"] + rng.normal() * t.f1_sd,
                            *_CLAMPS["f1"])
                f2 = _clamp(t.f2_mean + offsets["f2"] + rng.normal() * t.f2_sd,
                            f1 + 200.0, 2350.0)
                f3 = _clamp(t.f3_mean + offsets["f3"] + rng.normal() * t.f3_sd,
                            f2 + 300.0, 3100.0)
                dur = _clamp(t.duration_mean + offsets["dur"] + rng.normal() * t.duration_sd,
                             *_CLAMPS["dur"])
                rms = 0.06 + rng.uniform() * 0.12
                vowel_audio = synthesize_vowel(VowelSpec(
                    f0=f0, formants=(f1, f2, f3), duration=dur,
                    amplitude_rms=rms, sample_rate=sample_rate))
                pad = np.zeros(int(round(PAD_S * sample_rate)))
                samples = np.concatenate([pad, vowel_audio.samples, pad])
                utterance = AudioSignal(samples, sample_rate)

                realized = len(vowel_audio) / sample_rate
                t0 = len(pad) / sample_rate
                t1 = t0 + realized
                total = len(samples) / sample_rate
                grid = TextGrid(0.0, total, (Tier(CORPUS_TIER, 0.0, total, (
                    Interval(0.0, t0, ""),
                    Interval(t0, t1, vowel),
                    Interval(t1, total, ""),
                )),))

                stem = f"{speaker_id}_{v_idx:03d}"
                with open(os.path.join(out, stem + ".wav"), "wb") as fh:
                    fh.write(write_wav(utterance))
                with open(os.path.join(out, stem + ".TextGrid"), "wb") as fh:
                    fh.write(serialize_textgrid(grid))
                manifest_rows.append((stem + ".wav", stem + ".TextGrid",
                                      speaker_id, gender, spec.name))
                truth_rows.append((f"{stem}#0", f0, f1, f2, f3, realized * 1000.0))

    manifest_path = os.path.join(out, "manifest.csv")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("wav_path", "textgrid_path", "speaker_id", "gender", "dialect"))
    writer.writerows(manifest_rows)
    with open(manifest_path, "wb") as fh:
        fh.write(buf.getvalue().encode("utf-8"))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(GROUND_TRUTH_HEADER)
    for sample_id, f0, f1, f2, f3, dur_ms in truth_rows:
        writer.writerow([sample_id] + [f"{x:.6g}" for x in (f0, f1, f2, f3, dur_ms)])
    with open(os.path.join(out, "ground_truth.csv"), "wb") as fh:
        fh.write(buf.getvalue().encode("utf-8"))
    return manifest_path
