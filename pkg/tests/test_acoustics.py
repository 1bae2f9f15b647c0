import numpy as np
import pytest

from dialectid.acoustics import (
    autocorrelation,
    energy_track,
    formant_track,
    intensity_mean,
    levinson_durbin,
    lpc_roots,
    pitch_track,
    roots_to_formants,
)
from dialectid.audio import AudioSignal
from dialectid.errors import DegenerateFrame, EmptySignal
from dialectid.synth import VowelSpec, synthesize_vowel
from dialectid.rng import stream

from oracles import brute_autocorrelation, companion_roots, match_roots, toeplitz_lpc


# --- autocorrelation ---

def test_autocorrelation_zero_frame():
    assert np.array_equal(autocorrelation(np.zeros(8), 3), np.zeros(4))


def test_autocorrelation_hand_case():
    assert np.array_equal(autocorrelation(np.ones(4), 2), [4.0, 3.0, 2.0])


def test_autocorrelation_matches_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(8, 200))
        frame = rng.standard_normal(n)
        max_lag = int(rng.integers(0, n))
        got = autocorrelation(frame, max_lag)
        ref = brute_autocorrelation(frame, max_lag)
        assert np.allclose(got, ref, rtol=1e-9, atol=1e-12 * abs(ref[0]))


# --- levinson-durbin ---

def test_levinson_white_noise_case():
    a, err = levinson_durbin(np.array([1.0, 0.0, 0.0]), 2)
    assert np.array_equal(a, [0.0, 0.0])
    assert err == 1.0


def test_levinson_recovers_ar2():
    rng = np.random.default_rng(4)
    n = 10_000
    x = np.zeros(n)
    e = rng.standard_normal(n)
    for i in range(2, n):
        x[i] = 0.75 * x[i - 1] - 0.5 * x[i - 2] + e[i]
    r = autocorrelation(x, 2)
    a, _ = levinson_durbin(r, 2)
    assert abs(a[0] - 0.75) < 0.05
    assert abs(a[1] + 0.5) < 0.05


def test_levinson_matches_dense_solve():
    rng = np.random.default_rng(5)
    for _ in range(30):
        order = int(rng.integers(1, 17))
        x = rng.standard_normal(400)
        r = autocorrelation(x, order)
        a, err = levinson_durbin(r, order)
        assert np.allclose(a, toeplitz_lpc(r, order), atol=1e-8, rtol=1e-8)
        assert err >= 0.0


def test_levinson_error_nonincreasing_in_order():
    x = np.random.default_rng(6).standard_normal(500)
    r = autocorrelation(x, 16)
    errors = [levinson_durbin(r, m)[1] for m in range(1, 17)]
    assert all(e2 <= e1 + 1e-12 for e1, e2 in zip(errors, errors[1:]))


def test_levinson_degenerate_frame():
    with pytest.raises(DegenerateFrame):
        levinson_durbin(np.zeros(5), 2)


# --- roots ---

def test_lpc_roots_linear():
    roots = lpc_roots(np.array([1.0]))
    assert abs(roots[0] - 1.0) < 1e-10


def test_lpc_roots_known_conjugate_pair():
    z = 0.95 * np.exp(1j * 0.3)
    # z^2 - a1 z - a2 with roots z, conj(z)
    a1 = 2 * z.real
    a2 = -(abs(z) ** 2)
    roots = lpc_roots(np.array([a1, a2]))
    assert match_roots(roots, [z, np.conj(z)]) < 1e-8


def test_lpc_roots_match_companion_eigenvalues():
    rng = np.random.default_rng(7)
    for _ in range(30):
        poles = []
        for _ in range(6):
            radius = rng.uniform(0.3, 0.98)
            angle = rng.uniform(0.05, np.pi - 0.05)
            poles += [radius * np.exp(1j * angle), radius * np.exp(-1j * angle)]
        a = -np.real(np.poly(poles))[1:]
        got = lpc_roots(a)
        assert match_roots(got, companion_roots(a)) < 1e-6


def test_roots_residual_bound():
    a = -np.real(np.poly([0.9, -0.5, 0.3 + 0.4j, 0.3 - 0.4j]))[1:]
    roots = lpc_roots(a)
    coeffs = np.concatenate([[1.0], -a])
    for z in roots:
        assert abs(np.polyval(coeffs, z)) <= 1e-8 * np.max(np.abs(coeffs))


# --- roots -> formants ---

def test_roots_to_formants_formula():
    z = 0.98 * np.exp(1j * 2 * np.pi * 700 / 10000)
    cands = roots_to_formants(np.array([z]), 10000)
    assert len(cands) == 1
    freq, bw = cands[0]
    assert freq == pytest.approx(700.0, abs=1e-9)
    assert bw == pytest.approx(-(10000 / np.pi) * np.log(0.98), abs=1e-9)
    assert bw == pytest.approx(64.3, abs=0.1)


def test_roots_to_formants_gates():
    # real positive root: no candidate
    assert roots_to_formants(np.array([0.9 + 0j]), 10000) == []
    # |z| = 0.85 gives ~517 Hz bandwidth, above the 400 Hz gate
    z = 0.85 * np.exp(1j * 2 * np.pi * 1000 / 10000)
    assert -(10000 / np.pi) * np.log(0.85) > 400
    assert roots_to_formants(np.array([z]), 10000) == []
    # out-of-band frequencies rejected
    z = 0.98 * np.exp(1j * 2 * np.pi * 50 / 10000)
    assert roots_to_formants(np.array([z]), 10000) == []


def test_roots_to_formants_sorted():
    zs = [0.97 * np.exp(1j * 2 * np.pi * f / 10000) for f in (2500, 700, 1200)]
    freqs = [f for f, _ in roots_to_formants(np.array(zs), 10000)]
    assert freqs == sorted(freqs)


# --- tracks ---

def test_formant_track_recovers_synthetic_vowel():
    sig = synthesize_vowel(VowelSpec(
        f0=120.0, formants=(700.0, 1220.0, 2600.0), duration=0.3,
        amplitude_rms=0.1, sample_rate=16000))
    frames = formant_track(sig)
    valid = [f for f in frames if f.valid]
    assert len(valid) >= 0.8 * len(frames)
    hits = 0
    for f in valid:
        errs = [abs(f.f1 - 700) / 700, abs(f.f2 - 1220) / 1220, abs(f.f3 - 2600) / 2600]
        hits += all(e <= 0.05 for e in errs)
    assert hits >= 0.8 * len(valid)


def test_formant_track_ordering_invariant():
    sig = synthesize_vowel(VowelSpec(
        f0=110.0, formants=(300.0, 2300.0, 3000.0), duration=0.25,
        amplitude_rms=0.1, sample_rate=16000))
    for f in formant_track(sig):
        if f.valid:
            assert 0 < f.f1 < f.f2 < f.f3 < 5000


def test_formant_track_silence_invalid():
    sig = AudioSignal(np.zeros(8000), 16000)
    assert not any(f.valid for f in formant_track(sig))


def test_formant_track_empty_signal():
    with pytest.raises(EmptySignal):
        formant_track(AudioSignal(np.zeros(0), 16000))


def test_pitch_track_pure_tone(sine_factory):
    sig = sine_factory(200.0, 1.0, 16000)
    frames = pitch_track(sig)
    assert all(f.f0 > 0 for f in frames)
    for f in frames:
        assert abs(f.f0 - 200.0) <= 1.0
        assert 0.0 <= f.voicing_strength <= 1.0


@pytest.mark.parametrize("freq", [80.0, 150.0, 300.0, 450.0])
def test_pitch_track_tone_within_one_percent(sine_factory, freq):
    frames = pitch_track(sine_factory(freq, 0.8, 16000))
    interior = frames[1:-1]
    assert all(f.f0 > 0 for f in interior)
    assert all(abs(f.f0 - freq) <= 0.01 * freq for f in interior)


def test_pitch_track_white_noise_mostly_unvoiced():
    unvoiced = 0
    total = 0
    for seed in range(3):
        noise = 0.3 * stream(seed).normals(16000)
        frames = pitch_track(AudioSignal(noise, 16000))
        unvoiced += sum(1 for f in frames if f.f0 == 0.0)
        total += len(frames)
    assert unvoiced >= 0.9 * total


def test_pitch_track_zero_signal_unvoiced():
    frames = pitch_track(AudioSignal(np.zeros(16000), 16000))
    assert all(f.f0 == 0.0 for f in frames)


def test_pitch_f0_range_invariant(steady_vowel):
    for f in pitch_track(steady_vowel):
        assert f.f0 == 0.0 or 75.0 <= f.f0 <= 500.0


# --- energy and intensity ---

def test_energy_floor_and_constant():
    frames = energy_track(AudioSignal(np.zeros(4000), 16000))
    assert all(f.energy_db == pytest.approx(-120.0) for f in frames)
    frames = energy_track(AudioSignal(np.full(4000, 0.5), 16000))
    assert all(f.energy_db == pytest.approx(10 * np.log10(0.25), abs=1e-6)
               for f in frames)


def test_energy_scaling_law():
    rng = np.random.default_rng(8)
    x = 0.2 * rng.standard_normal(8000)
    base = energy_track(AudioSignal(x, 16000))
    doubled = energy_track(AudioSignal(2 * x, 16000))
    for a, b in zip(base, doubled):
        assert b.energy_db - a.energy_db == pytest.approx(20 * np.log10(2), abs=1e-3)


def test_intensity_values():
    rms01 = AudioSignal(np.full(1000, 0.1), 16000)
    assert intensity_mean(rms01) == pytest.approx(10 * np.log10(0.01 / 4e-10), abs=1e-3)
    assert intensity_mean(rms01) == pytest.approx(73.98, abs=0.01)
    silent = AudioSignal(np.zeros(1000), 16000)
    assert intensity_mean(silent) == pytest.approx(10 * np.log10(1e-12 / 4e-10), abs=1e-9)
    assert intensity_mean(silent) == pytest.approx(-26.02, abs=0.01)


def test_intensity_doubling_adds_six_db():
    rng = np.random.default_rng(9)
    x = 0.05 * rng.standard_normal(2000)
    a = intensity_mean(AudioSignal(x, 16000))
    b = intensity_mean(AudioSignal(2 * x, 16000))
    assert b - a == pytest.approx(20 * np.log10(2), abs=1e-3)
