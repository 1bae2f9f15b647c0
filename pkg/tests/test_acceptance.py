"""Acceptance suite: one test per release criterion, one printed line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS/FAIL lines.
The heavyweight corpus benchmarks use fixed seeds, so results are exact
reruns of the recorded outcomes.
"""

import os
import time

import numpy as np

from dialectid import features, forest
from dialectid.acoustics import autocorrelation, levinson_durbin, lpc_roots, pitch_track
from dialectid.audio import AudioSignal
from dialectid.errors import DialectIdError
from dialectid.evaluation import ConfusionMatrix, normalize_rows, stratified_split
from dialectid.features import Dataset, FeatureVector, VowelSegment, extract_vowel_features
from dialectid.forest import ForestParams, best_split, feature_importances, grow_tree, train_forest
from dialectid.rng import stream
from dialectid.synth import VowelSpec, dialect_profile, generate_corpus, synthesize_vowel
from dialectid.textgrid import (
    Interval,
    PointTier,
    Point,
    TextGrid,
    Tier,
    parse_textgrid,
    serialize_textgrid,
)

from oracles import (
    brute_autocorrelation,
    brute_best_split,
    brute_tree,
    brute_tree_predict,
    companion_roots,
    match_roots,
    toeplitz_lpc,
)


def _verdict(number: int, name: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance] criterion {number} ({name}): {status} ({detail})", flush=True)
    assert ok, f"criterion {number} ({name}): {detail}"


def _pipeline_accuracy(dataset, params, split_seed, group="all"):
    grouped = features.select_group(dataset, group)
    split = stratified_split(grouped, 0.2, split_seed)
    train = Dataset(tuple(grouped.rows[i] for i in split.train_indices),
                    grouped.feature_names, grouped.class_names)
    model = train_forest(train, params)
    test_x = np.vstack([grouped.rows[i].values for i in split.test_indices])
    test_y = grouped.labels()[list(split.test_indices)]
    pred = forest.forest_predict_many(model, test_x)
    return float(np.mean(pred == test_y))


def test_criterion_1_formant_recovery():
    started = time.monotonic()
    rng = stream(101)
    good = 0
    total = 50
    for _ in range(total):
        f1 = 300.0 + 600.0 * rng.uniform()
        f2 = max(900.0, f1 + 150.0) + (2300.0 - max(900.0, f1 + 150.0)) * rng.uniform()
        f3 = 2400.0 + 600.0 * rng.uniform()
        f0 = 90.0 + 50.0 * rng.uniform()
        audio = synthesize_vowel(VowelSpec(
            f0=f0, formants=(f1, f2, f3), duration=0.3, amplitude_rms=0.1,
            sample_rate=16000))
        seg = VowelSegment(audio, "a", 0.0, 0.3, "spk", "male", "Imphal")
        vec = extract_vowel_features(seg)
        means = [np.mean(vec.values[k : k + 6]) for k in (0, 6, 12)]
        errs = [abs(m - t) / t for m, t in zip(means, (f1, f2, f3))]
        good += all(e <= 0.05 for e in errs)
    elapsed = time.monotonic() - started
    _verdict(1, "formant recovery", good >= 45 and elapsed < 30.0,
             f"{good}/{total} within 5%, {elapsed:.1f}s")


def test_criterion_2_pitch_recovery():
    worst = 0.0
    for f0 in (90.0, 120.0, 180.0, 250.0, 400.0):
        t = np.arange(16000) / 16000.0
        tone = AudioSignal(0.5 * np.sin(2 * np.pi * f0 * t), 16000)
        vowel = synthesize_vowel(VowelSpec(
            f0=f0, formants=(700.0, 1220.0, 2600.0), duration=0.4,
            amplitude_rms=0.1, sample_rate=16000))
        for signal in (tone, vowel):
            interior = pitch_track(signal)[1:-1]
            assert interior, "no interior frames"
            for frame in interior:
                assert frame.f0 > 0.0, f"unvoiced interior frame at F0 {f0}"
                worst = max(worst, abs(frame.f0 - f0) / f0)
    _verdict(2, "pitch recovery", worst <= 0.01, f"worst interior error {worst * 100:.3f}%")


def test_criterion_3_dsp_oracles():
    rng = np.random.default_rng(31)
    worst_ac = 0.0
    for _ in range(100):
        n = int(rng.integers(8, 300))
        frame = rng.standard_normal(n)
        max_lag = int(rng.integers(0, n))
        got = autocorrelation(frame, max_lag)
        ref = brute_autocorrelation(frame, max_lag)
        denom = np.maximum(np.abs(ref), abs(ref[0]))
        worst_ac = max(worst_ac, float(np.max(np.abs(got - ref) / denom)))
    assert worst_ac <= 1e-9

    worst_lpc = 0.0
    for _ in range(100):
        order = int(rng.integers(1, 17))
        x = rng.standard_normal(500)
        r = autocorrelation(x, order)
        a, _ = levinson_durbin(r, order)
        worst_lpc = max(worst_lpc, float(np.max(np.abs(a - toeplitz_lpc(r, order)))))
    assert worst_lpc <= 1e-8

    worst_roots = 0.0
    for _ in range(100):
        poles = []
        for _ in range(6):
            radius = rng.uniform(0.3, 0.98)
            angle = rng.uniform(0.05, np.pi - 0.05)
            poles += [radius * np.exp(1j * angle), radius * np.exp(-1j * angle)]
        a = -np.real(np.poly(poles))[1:]
        worst_roots = max(worst_roots, match_roots(lpc_roots(a), companion_roots(a)))
    assert worst_roots <= 1e-6
    _verdict(3, "dsp oracle suite",
             worst_ac <= 1e-9 and worst_lpc <= 1e-8 and worst_roots <= 1e-6,
             f"autocorr {worst_ac:.1e}, levinson {worst_lpc:.1e}, roots {worst_roots:.1e}")


def test_criterion_4_cart_oracle():
    rng = np.random.default_rng(41)
    split_mismatches = 0
    pred_mismatches = 0
    for _ in range(200):
        n = int(rng.integers(2, 31))
        d = int(rng.integers(1, 6))
        c = int(rng.integers(2, 5))
        x = rng.uniform(0.0, 1.0, (n, d))
        y = rng.integers(0, c, n).astype(np.int64)
        got = best_split(x, y, list(range(d)), c)
        ref = brute_best_split(x, y, range(d), c)
        if got != ref:
            split_mismatches += 1
        tree = grow_tree(x, y, ForestParams(max_features=d, bootstrap=False),
                         stream(9), c)
        oracle = brute_tree(x, y, c)
        for i in range(n):
            node = 0
            while tree.feature[node] >= 0:
                if x[i, tree.feature[node]] <= tree.threshold[node]:
                    node = tree.left[node]
                else:
                    node = tree.right[node]
            if int(tree.klass[node]) != brute_tree_predict(oracle, x[i]):
                pred_mismatches += 1
    _verdict(4, "cart oracle", split_mismatches == 0 and pred_mismatches == 0,
             f"{split_mismatches} split and {pred_mismatches} prediction mismatches in 200 datasets")


def test_criterion_5_end_to_end_benchmark(tmp_path):
    started = time.monotonic()
    params = ForestParams(n_estimators=400, max_features=12, seed=0)

    manifest = generate_corpus(dialect_profile("separated"), 15, 24, 2025,
                               tmp_path / "separated")
    dataset, failures = features.build_dataset(manifest, "phoneme")
    assert len(dataset) == 1080, f"expected 1080 samples, got {len(dataset)}"
    assert not failures, failures[:3]
    separated_acc = _pipeline_accuracy(dataset, params, split_seed=42)

    chance_accs = []
    for seed in range(5):
        manifest = generate_corpus(dialect_profile("identical"), 12, 6, 500 + seed,
                                   tmp_path / f"identical_{seed}")
        ident, _ = features.build_dataset(manifest, "phoneme")
        chance_accs.append(_pipeline_accuracy(
            ident, ForestParams(n_estimators=400, max_features=12, seed=seed),
            split_seed=42))
    chance_mean = float(np.mean(chance_accs))
    elapsed = time.monotonic() - started
    ok = separated_acc >= 0.90 and abs(chance_mean - 1 / 3) <= 0.10 and elapsed < 300.0
    _verdict(5, "end-to-end benchmark", ok,
             f"separated acc {separated_acc:.4f}, identical mean {chance_mean:.3f}, "
             f"{elapsed:.0f}s")


def test_criterion_6_phase_ordering(tmp_path):
    manifest = generate_corpus(dialect_profile("overlapped"), 8, 10, 77,
                               tmp_path / "overlapped")
    dataset, _ = features.build_dataset(manifest, "phoneme")
    means = {}
    for group in ("spectral", "prosodic", "all"):
        accs = [
            _pipeline_accuracy(dataset,
                               ForestParams(n_estimators=100, max_features=12,
                                            seed=2000 + s),
                               split_seed=1000 + s, group=group)
            for s in range(10)
        ]
        means[group] = float(np.mean(accs))
    margin = means["all"] - max(means["spectral"], means["prosodic"])
    _verdict(6, "phase ordering", margin >= -0.02,
             f"spectral {means['spectral']:.3f}, prosodic {means['prosodic']:.3f}, "
             f"combined {means['all']:.3f}, margin {margin * 100:+.1f}pp")


def test_criterion_7_determinism(tmp_path):
    from dialectid.cli import main

    digests = []
    for run in ("a", "b"):
        base = tmp_path / run
        corpus = base / "corpus"
        assert main(["synth-corpus", "--profile", "overlapped", "--speakers", "2",
                     "--vowels-per-speaker", "2", "--seed", "9",
                     "--out", str(corpus)]) == 0
        feats = base / "features.csv"
        assert main(["extract", "--manifest", str(corpus / "manifest.csv"),
                     "--tier", "phoneme", "--out", str(feats)]) == 0
        model = base / "model.json"
        assert main(["train", "--features", str(feats), "--group", "all",
                     "--n-estimators", "25", "--max-features", "6", "--seed", "4",
                     "--split-seed", "42", "--out", str(model)]) == 0
        report = base / "confusion.csv"
        assert main(["evaluate", "--model", str(model), "--features", str(feats),
                     "--out", str(report)]) == 0
        corpus_bytes = b"".join(
            (corpus / name).read_bytes() for name in sorted(os.listdir(corpus)))
        digests.append((corpus_bytes, feats.read_bytes(), model.read_bytes(),
                        report.read_bytes()))
    ok = digests[0] == digests[1]
    _verdict(7, "determinism", ok,
             "corpus, features, model and report bytes identical across runs")


def test_criterion_8_structural_checks():
    rng = np.random.default_rng(55)
    x = rng.uniform(0, 1, (60, 5))
    y = rng.integers(0, 3, 60).astype(np.int64)
    rows = tuple(FeatureVector(x[i], features.DIALECTS[int(y[i])], f"s{i}", "a", f"r{i}")
                 for i in range(60))
    model = train_forest(Dataset(rows, tuple(f"v{i}" for i in range(5))),
                         ForestParams(n_estimators=20, max_features=2, seed=1))
    imp_sum = float(feature_importances(model).sum())

    norm = normalize_rows(ConfusionMatrix(np.array([[5, 2, 1], [0, 7, 3], [2, 2, 2]])))
    row_sums = norm.sum(axis=1)

    sized = []
    for c, size in enumerate((320, 370, 390)):
        for i in range(size):
            sized.append(FeatureVector(np.zeros(33), features.DIALECTS[c],
                                       f"sp{c}_{i % 15}", "a", f"q{c}_{i}"))
    split = stratified_split(Dataset(tuple(sized)), 0.2, 42)
    labels = Dataset(tuple(sized)).labels()
    test_sizes = tuple(int(np.sum(labels[list(split.test_indices)] == c))
                       for c in range(3))

    ok = (abs(imp_sum - 1.0) <= 1e-9
          and np.all(np.abs(row_sums - 1.0) <= 1e-9)
          and test_sizes == (64, 74, 78))
    _verdict(8, "structural checks", ok,
             f"importance sum {imp_sum:.12f}, row sums max dev "
             f"{float(np.max(np.abs(row_sums - 1))):.1e}, test sizes {test_sizes}")


def _random_grid(rng) -> TextGrid:
    tiers = []
    n_tiers = 1 + rng.below(3)
    for t in range(n_tiers):
        name = f"tier{t}"
        if rng.below(4) == 0 and t > 0:
            times = sorted({rng.below(100000) / 100.0 for _ in range(rng.below(5))})
            tiers.append(PointTier(name, 0.0, 1001.0,
                                   tuple(Point(x, f"p{rng.below(10)}") for x in times)))
            continue
        bounds = sorted({rng.below(100000) / 100.0 for _ in range(2 * rng.below(7))})
        if len(bounds) % 2:
            bounds.pop()
        labels = ["a", "i", "", "sil", 'quo"te', "ə", "x y"]
        intervals = tuple(
            Interval(bounds[2 * i], bounds[2 * i + 1], labels[rng.below(len(labels))])
            for i in range(len(bounds) // 2))
        tiers.append(Tier(name, 0.0, 1001.0, intervals))
    return TextGrid(0.0, 1001.0, tuple(tiers))


MALFORMED_GRIDS = [
    b"",                                                   # empty file
    b"not a textgrid at all",                              # no header
    b'File type = "ooTextFile"\nObject class = "Pitch"\n', # wrong object class
    b'File type = "ooTextFile"\nObject class = "TextGrid"\nxmin = zero\n',
    b'File type = "ooTextFile"\nObject class = "TextGrid"\nxmin = 0\nxmax = 1\n',
    # short format (bare numbers, no key = value lines)
    b'File type = "ooTextFile"\nObject class = "TextGrid"\n\n0\n1\n<exists>\n1\n"IntervalTier"\n"t"\n0\n1\n1\n0\n1\n"a"\n',
    # declares 2 intervals, provides 1
    b'File type = "ooTextFile"\nObject class = "TextGrid"\n\nxmin = 0\nxmax = 1\n'
    b'tiers? <exists>\nsize = 1\nitem []:\nitem [1]:\nclass = "IntervalTier"\n'
    b'name = "t"\nxmin = 0\nxmax = 1\nintervals: size = 2\nintervals [1]:\n'
    b'xmin = 0\nxmax = 1\ntext = "a"\n',
    # overlapping intervals
    b'File type = "ooTextFile"\nObject class = "TextGrid"\n\nxmin = 0\nxmax = 2\n'
    b'tiers? <exists>\nsize = 1\nitem []:\nitem [1]:\nclass = "IntervalTier"\n'
    b'name = "t"\nxmin = 0\nxmax = 2\nintervals: size = 2\nintervals [1]:\n'
    b'xmin = 0\nxmax = 1.5\ntext = "a"\nintervals [2]:\nxmin = 1\nxmax = 2\ntext = "b"\n',
    # interval outside tier bounds
    b'File type = "ooTextFile"\nObject class = "TextGrid"\n\nxmin = 0\nxmax = 1\n'
    b'tiers? <exists>\nsize = 1\nitem []:\nitem [1]:\nclass = "IntervalTier"\n'
    b'name = "t"\nxmin = 0\nxmax = 1\nintervals: size = 1\nintervals [1]:\n'
    b'xmin = 0\nxmax = 5\ntext = "a"\n',
    b"\xff\x00\x99 undecodable \xfe",                      # bad encoding
]


def test_criterion_9_parser_suite():
    rng = stream(77)
    roundtrips = 0
    for _ in range(100):
        grid = _random_grid(rng)
        roundtrips += parse_textgrid(serialize_textgrid(grid)) == grid
    rejected = 0
    for raw in MALFORMED_GRIDS:
        try:
            parse_textgrid(raw)
        except DialectIdError:
            rejected += 1

    csv_ok = True
    for seed in range(5):
        r = stream(900 + seed)
        rows = tuple(
            FeatureVector(
                np.concatenate([300 + 2500 * r.uniforms(30),
                                [100 + 200 * r.uniform(), 40 + 40 * r.uniform(),
                                 float(r.below(2))]]),
                features.DIALECTS[r.below(3)], f"s{r.below(9)}", "a", f"id{i}")
            for i in range(15))
        dataset = Dataset(rows)
        raw = features.write_features_csv(dataset)
        back = features.read_features_csv(raw)
        csv_ok &= features.write_features_csv(back) == raw
        for row_a, row_b in zip(dataset.rows, back.rows):
            csv_ok &= all(f"{a:.6g}" == f"{b:.6g}"
                          for a, b in zip(row_a.values, row_b.values))

    ok = roundtrips == 100 and rejected == len(MALFORMED_GRIDS) and csv_ok
    _verdict(9, "parser suite", ok,
             f"{roundtrips}/100 roundtrips, {rejected}/{len(MALFORMED_GRIDS)} "
             f"malformed rejected, csv roundtrip {'ok' if csv_ok else 'broken'}")
