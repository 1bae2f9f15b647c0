"""Raw acoustic measurements: formants, pitch, energy, intensity.

Formants come from autocorrelation-method LPC: each analysis frame is
resampled to a 10 kHz analysis rate, pre-emphasized, Hamming-windowed, fit
with an order-12 all-pole model (Levinson-Durbin on the frame
autocorrelation), and the model's complex pole angles/radii are converted
to candidate (frequency, bandwidth) pairs.  Candidates outside 90-4500 Hz
or wider than 400 Hz are discarded; a frame is valid when at least three
survive, and the three lowest become F1-F3.

Pitch is the classic normalized-autocorrelation picker over a 75-500 Hz
lag range with a voicing threshold and a relative-energy silence gate.
Energy and intensity are log-power measures floored by a small epsilon so
silence stays finite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import AudioSignal, frame_signal, pre_emphasize, resample
from .errors import DegenerateFrame, EmptySignal, NoConvergence

LOG_FLOOR = 1e-12
PRESSURE_REF = 2e-5


@dataclass(frozen=True)
class AcousticSettings:
    """Analysis parameters; defaults suit vowel segments at any supported rate."""

    formant_rate: int = 10000
    preemphasis_hz: float = 50.0
    formant_frame_ms: float = 25.0
    formant_hop_ms: float = 10.0
    lpc_order: int = 12
    formant_min_hz: float = 90.0
    formant_max_hz: float = 4500.0
    max_bandwidth_hz: float = 400.0
    pitch_frame_ms: float = 40.0
    pitch_hop_ms: float = 10.0
    pitch_min_hz: float = 75.0
    pitch_max_hz: float = 500.0
    voicing_threshold: float = 0.45
    silence_rms_fraction: float = 0.01
    energy_frame_ms: float = 25.0
    energy_hop_ms: float = 10.0


DEFAULT_SETTINGS = AcousticSettings()


@dataclass(frozen=True)
class FormantFrame:
    time: float
    f1: float
    f2: float
    f3: float
    bandwidths: tuple[float, float, float]
    valid: bool


@dataclass(frozen=True)
class PitchFrame:
    time: float
    f0: float                 # 0 when unvoiced
    voicing_strength: float   # peak normalized autocorrelation, clamped to [0, 1]


@dataclass(frozen=True)
class EnergyFrame:
    time: float
    energy_db: float


def autocorrelation(frame: np.ndarray, max_lag: int) -> np.ndarray:
    """r[t] = sum_n x[n] x[n+t] for t = 0..max_lag."""
    x = np.asarray(frame, dtype=np.float64)
    if not 0 <= max_lag < len(x):
        raise ValueError("max_lag must be in [0, len(frame))")
    return np.array([np.dot(x[: len(x) - t], x[t:]) for t in range(max_lag + 1)])


def _autocorr_batch(frames: np.ndarray, max_lag: int) -> np.ndarray:
    """FFT autocorrelation of each row; equals the direct sum to rounding."""
    n = frames.shape[1]
    nfft = 1
    while nfft < n + max_lag + 1:
        nfft <<= 1
    spec = np.fft.rfft(frames, nfft, axis=1)
    r = np.fft.irfft(spec * np.conj(spec), nfft, axis=1)
    return r[:, : max_lag + 1]


def _levinson_batch(r: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Levinson-Durbin per row of r (shape (F, order+1)).

    Returns (coefficients (F, order), prediction errors (F,), ok flags).
    Rows with r[0] <= 0 or a collapsing prediction error are flagged not-ok
    and frozen (reflection coefficient forced to 0 from that stage on).
    """
    r = np.asarray(r, dtype=np.float64)
    n_frames = r.shape[0]
    a = np.zeros((n_frames, order))
    e = r[:, 0].copy()
    ok = e > 0.0
    floor = np.abs(r[:, 0]) * 1e-14
    for m in range(1, order + 1):
        alive = ok & (e > floor)
        if m == 1:
            acc = r[:, 1].copy()
        else:
            acc = r[:, m] - np.sum(a[:, : m - 1] * r[:, m - 1:0:-1], axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            k = np.where(alive, acc / np.where(e == 0.0, 1.0, e), 0.0)
        head = a[:, : m - 1] - k[:, None] * a[:, : m - 1][:, ::-1]
        a[:, : m - 1] = head
        a[:, m - 1] = k
        e = e * (1.0 - k * k)
    ok &= e >= 0.0
    return a, e, ok


def levinson_durbin(r: np.ndarray, order: int) -> tuple[np.ndarray, float]:
    """Solve the Yule-Walker equations for one autocorrelation sequence.

    Coefficients a[1..order] predict x[n] ~ sum_i a[i] x[n-i].
    """
    r = np.asarray(r, dtype=np.float64)
    if order < 1 or order >= len(r):
        raise ValueError("need 1 <= order < len(r)")
    if r[0] <= 0.0:
        raise DegenerateFrame("zero-energy frame, r[0] <= 0")
    a, e, _ = _levinson_batch(r[None, :], order)
    return a[0], float(e[0])


ABERTH_MAX_ITER = 200
ABERTH_TOL = 1e-8


def _aberth_batch(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Roots of 1 - sum_k a[k] z^-k per row, by Aberth simultaneous iteration.

    Equivalent monic polynomial: z^m - a1 z^{m-1} - ... - am.  Initial
    guesses sit on a circle of radius |am|^(1/m) (clipped away from zero),
    with a small angular offset so no start lies on the real axis.
    Returns (roots (F, m), converged flags).
    """
    a = np.asarray(a, dtype=np.float64)
    n_frames, m = a.shape
    coeffs = np.concatenate([np.ones((n_frames, 1)), -a], axis=1)  # descending powers
    scale = np.max(np.abs(coeffs), axis=1)
    radius = np.clip(np.abs(a[:, -1]) ** (1.0 / m), 1e-3, 1e3)
    angles = 2.0 * np.pi * np.arange(m) / m + np.pi / (2 * m)
    z = radius[:, None] * np.exp(1j * angles)[None, :]
    dcoeffs = coeffs[:, :-1] * np.arange(m, 0, -1)[None, :]
    # polish well past the contract bound: the root error of a clustered
    # pole scales like residual / |p'(z)|, so stopping at the loose bound
    # would leave ill-conditioned roots orders of magnitude less accurate
    tight = 1e-15 * scale
    res = np.full(n_frames, np.inf)
    active = np.ones(n_frames, dtype=bool)
    for _ in range(ABERTH_MAX_ITER):
        p = np.zeros_like(z)
        for c in coeffs.T:
            p = p * z + c[:, None]
        res = np.max(np.abs(p), axis=1)
        active &= res > tight
        if not active.any():
            break
        dp = np.zeros_like(z)
        for c in dcoeffs.T:
            dp = dp * z + c[:, None]
        dp = np.where(dp == 0.0, 1e-300, dp)
        w = p / dp
        diff = z[:, :, None] - z[:, None, :]
        np.einsum("fkk->fk", diff)[:] = np.inf  # drop j == k terms
        s = np.sum(1.0 / diff, axis=2)
        denom = 1.0 - w * s
        denom = np.where(denom == 0.0, 1e-300, denom)
        step = w / denom
        z = np.where(active[:, None], z - step, z)
        # a frame whose roots stopped moving has hit its numerical floor
        moved = np.max(np.abs(step), axis=1)
        active &= moved > 1e-15 * (np.max(np.abs(z), axis=1) + 1.0)
    return z, res <= ABERTH_TOL * scale


def lpc_roots(a: np.ndarray) -> np.ndarray:
    """All roots of the LPC error polynomial 1 - sum_k a[k] z^-k."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1 or len(a) < 1:
        raise ValueError("need a 1-D coefficient vector of order >= 1")
    roots, ok = _aberth_batch(a[None, :])
    if not ok[0]:
        raise NoConvergence(f"no convergence after {ABERTH_MAX_ITER} iterations")
    return roots[0]


def roots_to_formants(roots: np.ndarray, analysis_rate: float,
                      settings: AcousticSettings = DEFAULT_SETTINGS) -> list[tuple[float, float]]:
    """Map upper-half-plane poles to (frequency, bandwidth) candidates.

    frequency = rate/(2 pi) * arg(z), bandwidth = -rate/pi * ln|z|; kept
    when frequency is inside the formant band and bandwidth is under the
    gate, sorted by ascending frequency.
    """
    if analysis_rate <= 0:
        raise ValueError("analysis_rate must be positive")
    out = []
    for z in np.asarray(roots, dtype=np.complex128):
        if z.imag <= 0.0:
            continue
        freq = analysis_rate / (2.0 * np.pi) * np.angle(z)
        bandwidth = -analysis_rate / np.pi * np.log(np.abs(z))
        if settings.formant_min_hz <= freq <= settings.formant_max_hz \
                and bandwidth < settings.max_bandwidth_hz:
            out.append((float(freq), float(bandwidth)))
    out.sort()
    return out


def formant_track(signal: AudioSignal,
                  settings: AcousticSettings = DEFAULT_SETTINGS) -> list[FormantFrame]:
    """Per-frame F1-F3 estimates; frames with under three candidates are invalid."""
    if len(signal) == 0:
        raise EmptySignal("cannot analyse an empty signal")
    work = signal
    if signal.sample_rate != settings.formant_rate:
        work = resample(signal, settings.formant_rate)
    work = pre_emphasize(work, settings.preemphasis_hz)
    frames = frame_signal(work, settings.formant_frame_ms, settings.formant_hop_ms, "hamming")
    order = settings.lpc_order
    r = _autocorr_batch(frames.frames, order)
    coeffs, _, lpc_ok = _levinson_batch(r, order)
    roots, root_ok = _aberth_batch(coeffs)
    out = []
    for i, t in enumerate(frames.frame_centers):
        if lpc_ok[i] and root_ok[i]:
            cands = roots_to_formants(roots[i], settings.formant_rate, settings)
            if len(cands) >= 3:
                (f1, b1), (f2, b2), (f3, b3) = cands[0], cands[1], cands[2]
                out.append(FormantFrame(float(t), f1, f2, f3, (b1, b2, b3), True))
                continue
        out.append(FormantFrame(float(t), 0.0, 0.0, 0.0, (0.0, 0.0, 0.0), False))
    return out


def pitch_track(signal: AudioSignal,
                settings: AcousticSettings = DEFAULT_SETTINGS) -> list[PitchFrame]:
    """Normalized-autocorrelation pitch with parabolic peak refinement.

    A frame is voiced when its peak normalized autocorrelation in the
    75-500 Hz lag range reaches the voicing threshold and its RMS is above
    silence_rms_fraction of the loudest frame.  The integer peak lag is
    refined by a parabola fitted to taper-corrected autocorrelation values
    (r[t]/(N-t) removes the linear shrinkage of the summation overlap); for
    long lags the fit points are spread lag//16 samples apart, which
    conditions the fit on the flat peaks of low-frequency periodicity.
    """
    if len(signal) == 0:
        raise EmptySignal("cannot analyse an empty signal")
    frames = frame_signal(signal, settings.pitch_frame_ms, settings.pitch_hop_ms, "rectangular")
    rate = signal.sample_rate
    flen = frames.frame_length
    lag_min = int(np.ceil(rate / settings.pitch_max_hz))
    lag_max = min(int(np.floor(rate / settings.pitch_min_hz)), flen - 2)
    if lag_min >= lag_max:
        return [PitchFrame(float(t), 0.0, 0.0) for t in frames.frame_centers]
    spread = max(1, lag_max // 16)
    r_len = min(lag_max + spread + 1, flen - 1)
    r = _autocorr_batch(frames.frames, r_len)
    rms = np.sqrt(np.mean(frames.frames**2, axis=1))
    rms_gate = settings.silence_rms_fraction * (rms.max() if len(rms) else 0.0)
    out = []
    for i, t in enumerate(frames.frame_centers):
        r0 = r[i, 0]
        if r0 <= 0.0 or rms[i] < rms_gate or rms.max() == 0.0:
            out.append(PitchFrame(float(t), 0.0, 0.0))
            continue
        rho = r[i] / r0
        peak = int(np.argmax(rho[lag_min : lag_max + 1])) + lag_min
        strength = float(min(max(rho[peak], 0.0), 1.0))
        if rho[peak] < settings.voicing_threshold:
            out.append(PitchFrame(float(t), 0.0, strength))
            continue
        d = max(1, peak // 16)
        if peak - d < 1 or peak + d >= r_len:
            d = 1
        y0 = r[i, peak - d] / (flen - (peak - d))
        y1 = r[i, peak] / (flen - peak)
        y2 = r[i, peak + d] / (flen - (peak + d))
        curv = y0 - 2.0 * y1 + y2
        delta = d * 0.5 * (y0 - y2) / curv if curv != 0.0 else 0.0
        delta = min(max(delta, -float(d)), float(d))
        f0 = rate / (peak + delta)
        f0 = min(max(f0, settings.pitch_min_hz), settings.pitch_max_hz)
        out.append(PitchFrame(float(t), float(f0), strength))
    return out


def energy_track(signal: AudioSignal,
                 settings: AcousticSettings = DEFAULT_SETTINGS) -> list[EnergyFrame]:
    """10 log10(mean square + 1e-12) per rectangular frame."""
    if len(signal) == 0:
        raise EmptySignal("cannot analyse an empty signal")
    frames = frame_signal(signal, settings.energy_frame_ms, settings.energy_hop_ms, "rectangular")
    power = np.mean(frames.frames**2, axis=1)
    db = 10.0 * np.log10(power + LOG_FLOOR)
    return [EnergyFrame(float(t), float(v)) for t, v in zip(frames.frame_centers, db)]


def intensity_mean(signal: AudioSignal) -> float:
    """Mean power in dB re 20 micropascal equivalent full scale."""
    if len(signal) == 0:
        raise EmptySignal("cannot analyse an empty signal")
    power = float(np.mean(signal.samples**2))
    return 10.0 * np.log10((power + LOG_FLOOR) / PRESSURE_REF**2)
