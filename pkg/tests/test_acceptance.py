"""Acceptance suite: one test per release criterion, each printing a PASS
line with its measured runtime. Run with `pytest -s tests/test_acceptance.py`
to see the lines."""

import json
import time

import numpy as np
import pytest
import requests

from hpl import classifier, dataset, imaging, service
from hpl.classifier import grad_check, metrics_from_confusion
from hpl.cli import main
from hpl.compiler import (
    Program,
    Rotate,
    Translate,
    classify_sheet,
    compile_program,
    mirror_program,
    parse_symbols,
)
from hpl.dataset import LabeledImage, SplitConfig, split
from hpl.features import fourier_descriptors, geometric_features, hellinger, uniform_centroids
from hpl.imaging import BinaryImage, Contour, GrayImage, trace_contours
from hpl.playground import EnergyModel, Pose, RunStatus, default_map, load_map, run, step
from hpl.symbols import NUM_CLASSES, SymbolClass

REFERENCE_CONFUSION = np.array(
    [
        [430, 3, 5, 5, 5, 3],
        [3, 427, 4, 4, 4, 3],
        [8, 2, 544, 8, 6, 0],
        [6, 3, 7, 573, 6, 0],
        [2, 2, 2, 3, 263, 55],
        [2, 3, 6, 10, 86, 263],
    ]
)
REFERENCE_PRF = [
    (0.95, 0.95, 0.95),
    (0.97, 0.96, 0.96),
    (0.96, 0.96, 0.96),
    (0.95, 0.96, 0.96),
    (0.71, 0.80, 0.75),
    (0.81, 0.71, 0.76),
]


def report_pass(name: str, started: float, budget_s: float, detail: str = "") -> None:
    elapsed = time.monotonic() - started
    assert elapsed < budget_s, f"{name} took {elapsed:.1f}s, budget {budget_s}s"
    suffix = f" ({detail})" if detail else ""
    print(f"\nPASS {name}: {elapsed:.2f}s < {budget_s:.0f}s{suffix}")


def test_reference_table_metric_arithmetic():
    t0 = time.monotonic()
    report = metrics_from_confusion(REFERENCE_CONFUSION)
    for cls, (p, r, f1) in enumerate(REFERENCE_PRF):
        assert abs(report.precision[cls] - p) <= 0.005, f"precision[{cls}]"
        assert abs(report.recall[cls] - r) <= 0.005, f"recall[{cls}]"
        assert abs(report.f1[cls] - f1) <= 0.005, f"f1[{cls}]"
    report_pass("table-metric-arithmetic", t0, 1.0, "18/18 printed values within 0.005")


def test_gradient_correctness(monkeypatch):
    t0 = time.monotonic()
    rng = np.random.default_rng(17)
    model = classifier.MlpModel(
        layer_sizes=(6, 8, 6),
        weights=[rng.normal(0, 0.5, (6, 8)), rng.normal(0, 0.5, (8, 6))],
        biases=[rng.normal(0, 0.1, 8), rng.normal(0, 0.1, 6)],
        feat_mean=np.zeros(6),
        feat_std=np.ones(6),
        centroids=uniform_centroids(),
    )
    assert model.n_params <= 500
    batch = [(rng.normal(0, 1, 6), SymbolClass(int(rng.integers(0, 6)))) for _ in range(16)]
    clean = grad_check(model, batch, epsilon=1e-5)
    assert clean < 1e-4, f"clean gradient error {clean}"

    real = classifier._loss_and_grads

    def corrupted(weights, biases, x, y):
        loss, gw, gb = real(weights, biases, x, y)
        gw = [g.copy() for g in gw]
        gw[0][0, 0] *= 2.0
        return loss, gw, gb

    monkeypatch.setattr(classifier, "_loss_and_grads", corrupted)
    broken = grad_check(model, batch, epsilon=1e-5)
    monkeypatch.undo()
    assert broken > 1e-1, f"corrupted gradient error {broken} not detected"
    report_pass("gradient-correctness", t0, 10.0, f"clean {clean:.2e}, corrupted {broken:.2e}")


def test_end_to_end_synthetic_benchmark(bench):
    t0 = time.monotonic()
    assert bench.n_train == 720 and bench.n_test == 480
    macro = bench.report.macro_f1
    assert macro >= 0.90, f"macro-F1 {macro:.4f} < 0.90"
    m = bench.report.confusion
    rr, rl = int(SymbolClass.ROTATE_RIGHT), int(SymbolClass.ROTATE_LEFT)
    masses = {
        (i, j): int(m[i, j] + m[j, i]) for i in range(NUM_CLASSES) for j in range(i + 1, NUM_CLASSES)
    }
    rotate_mass = masses[(rr, rl) if rr < rl else (rl, rr)]
    assert rotate_mass > 0, "no confusion at all; dominance undefined"
    others = [v for k, v in masses.items() if k != (min(rr, rl), max(rr, rl))]
    assert rotate_mass > max(others), f"rotate block {rotate_mass} not dominant over {max(others)}"
    assert bench.elapsed_s < 300, f"benchmark took {bench.elapsed_s:.0f}s"
    report_pass(
        "end-to-end-benchmark",
        t0,
        300.0,
        f"macro-F1 {macro:.4f}, rotate-pair confusion {rotate_mass} vs next {max(others)}; "
        f"pipeline {bench.elapsed_s:.0f}s",
    )


def test_feature_property_suite():
    t0 = time.monotonic()
    rng = np.random.default_rng(23)

    # Hellinger: symmetry, bounds, identity-of-indiscernibles on 1000 pairs
    for _ in range(1000):
        n = int(rng.integers(2, 48))
        p = rng.random(n) + 1e-12
        p /= p.sum()
        q = rng.random(n) + 1e-12
        q /= q.sum()
        d_pq = hellinger(p, q)
        d_qp = hellinger(q, p)
        assert abs(d_pq - d_qp) < 1e-12
        assert 0.0 <= d_pq <= 1.0
        assert hellinger(p, p) == 0.0

    # Fourier descriptors: translation/scale/start-point invariance, 200 polygons
    def poly():
        n = int(rng.integers(8, 40))
        ang = np.sort(rng.uniform(0, 2 * np.pi, n))
        rad = rng.uniform(0.5, 2.0, n)
        return np.column_stack([rad * np.cos(ang), rad * np.sin(ang)]) * 50 + 100

    def contour_of(pts):
        return Contour(points=pts, bbox=(0, 0, 1, 1), area_px=10, pixels=np.array([[0, 0], [1, 1]]))

    for _ in range(200):
        pts = poly()
        base = fourier_descriptors(contour_of(pts), 16)
        moved = fourier_descriptors(contour_of(pts + rng.uniform(-90, 90, 2)), 16)
        scaled = fourier_descriptors(contour_of(pts * 2.0), 16)
        rolled = fourier_descriptors(contour_of(np.roll(pts, int(rng.integers(1, len(pts))), axis=0)), 16)
        assert np.abs(base - moved).max() < 1e-9
        assert np.abs(base - scaled).max() < 1e-9
        assert np.abs(base - rolled).max() < 1e-9

    # circularity anchors
    r = 50
    yy, xx = np.mgrid[0 : 2 * r + 9, 0 : 2 * r + 9]
    disc = (xx - (r + 4)) ** 2 + (yy - (r + 4)) ** 2 <= r * r
    (disc_contour,) = trace_contours(BinaryImage.from_array(disc), 1)
    disc_circ = geometric_features(disc_contour)[0]
    assert abs(disc_circ - 1.0) < 0.1

    square = np.zeros((210, 210), bool)
    square[5:205, 5:205] = True
    (square_contour,) = trace_contours(BinaryImage.from_array(square), 1)
    square_circ = geometric_features(square_contour)[0]
    assert abs(square_circ - np.pi / 4) < 0.05

    report_pass(
        "feature-property-suite",
        t0,
        30.0,
        f"disc circ {disc_circ:.3f}, square circ {square_circ:.3f}",
    )


def test_split_contract():
    t0 = time.monotonic()
    stub = GrayImage.from_array(np.full((1, 1), 255, dtype=np.uint8))
    data = [
        LabeledImage(image=stub, label=cls, id=f"{cls.canonical_name}_{i}")
        for cls in SymbolClass
        for i in range(1148)
    ]
    assert len(data) == 6888
    cfg = SplitConfig(train_fraction=0.60, seed=42)
    train_a, test_a = split(data, cfg)
    per_class = {cls: sum(1 for i in train_a if i.label is cls) for cls in SymbolClass}
    assert all(n == 688 for n in per_class.values()), per_class
    assert len(train_a) == 6 * 688 and len(test_a) == 6888 - 6 * 688
    train_ids = {i.id for i in train_a}
    test_ids = {i.id for i in test_a}
    assert train_ids.isdisjoint(test_ids)
    assert len(train_ids | test_ids) == 6888
    train_b, test_b = split(data, cfg)
    assert [i.id for i in train_b] == [i.id for i in train_a]
    assert [i.id for i in test_b] == [i.id for i in test_a]
    report_pass("split-contract", t0, 5.0, "688 train per class, disjoint, repeatable")


def test_compiler_simulator_properties():
    t0 = time.monotonic()
    rng = np.random.default_rng(31)
    all_classes = list(SymbolClass)

    # compile: homomorphism and mirror negation on 500 random programs
    for _ in range(500):
        n = int(rng.integers(0, 20))
        cut = int(rng.integers(0, n + 1))
        syms = tuple(all_classes[i] for i in rng.integers(0, 6, n))
        p1, p2 = Program(symbols=syms[:cut]), Program(symbols=syms[cut:])
        whole = compile_program(Program(symbols=syms))
        assert whole == compile_program(p1) + compile_program(p2)
        mirrored = compile_program(mirror_program(Program(symbols=syms)))
        assert len(mirrored) == len(whole)
        for a, b in zip(whole, mirrored):
            if isinstance(a, Translate):
                assert b == a
            elif isinstance(a, Rotate):
                assert b.angle_deg == -a.angle_deg
            else:
                assert b.heading_change_deg == -a.heading_change_deg and b.chord_mm == a.chord_mm

    # up-then-down pose round trip within 1e-9
    pmap = load_map(
        json.dumps(
            {
                "nodes": [{"id": "a", "col": 0, "row": 0}, {"id": "b", "col": 0, "row": 1}],
                "segments": [{"a": "a", "b": "b", "darkness": 0.0}],
                "start": {"node": "a", "heading": 90},
            }
        )
    )
    rt = run(compile_program(parse_symbols("up, down")), pmap)
    assert rt.status is RunStatus.COMPLETED
    assert abs(rt.final_pose.x_mm) < 1e-9 and abs(rt.final_pose.y_mm) < 1e-9

    # 8 right rotations restore the heading
    spins = run(compile_program(parse_symbols(",".join(["rotate_right"] * 8))), default_map())
    assert spins.final_pose.heading_deg == 0.0

    # energy monotone over 500 random runs
    world = default_map()
    names = [c.canonical_name for c in SymbolClass]
    for _ in range(500):
        text = ",".join(names[i] for i in rng.integers(0, 6, rng.integers(0, 24)))
        result = run(compile_program(parse_symbols(text)), world)
        energies = [p.energy for p in result.trajectory]
        assert all(a >= b for a, b in zip(energies, energies[1:]))

    # darkness-0.5 single step drains exactly 5 under defaults
    half = load_map(
        json.dumps(
            {
                "nodes": [{"id": "a", "col": 0, "row": 0}, {"id": "b", "col": 1, "row": 0}],
                "segments": [{"a": "a", "b": "b", "darkness": 0.5}],
                "start": {"node": "a", "heading": 0},
            }
        )
    )
    _, energy, cost = step(Pose(0, 0, 0), Translate(110), half, EnergyModel(), 100.0)
    assert cost == 5.0 and energy == 95.0

    report_pass("compiler-simulator-properties", t0, 30.0)


def test_determinism(bench, tmp_path):
    t0 = time.monotonic()
    data_dir = tmp_path / "ds"
    assert main(["gen-dataset", "--out", str(data_dir), "--per-class", "20", "--seed", "9", "--size", "192"]) == 0
    model_a, model_b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["train", "--data", str(data_dir), "--model", str(model_a), "--seed", "4"]) == 0
    assert main(["train", "--data", str(data_dir), "--model", str(model_b), "--seed", "4"]) == 0
    assert model_a.read_bytes() == model_b.read_bytes(), "model files differ between identical runs"

    glyphs = [
        dataset.gen_arrow(SymbolClass.UP, 77, 300),
        dataset.gen_arrow(SymbolClass.ROTATE_LEFT, 77, 300),
        dataset.gen_arrow(SymbolClass.DOWN, 77, 300),
    ]
    sheet = dataset.compose_sheet([g.image for g in glyphs])
    first = classify_sheet(sheet, bench.model)
    second = classify_sheet(sheet, bench.model)
    assert first.program == second.program
    assert first.boxes == second.boxes
    report_pass("determinism", t0, 120.0, "byte-identical models, identical programs")


def test_service_contract(bench):
    t0 = time.monotonic()
    srv = service.create_server(bench.model, host="127.0.0.1", port=0)  # no webui build
    service.serve_in_thread(srv)
    base = f"http://127.0.0.1:{srv.server_address[1]}"
    try:
        health = requests.get(f"{base}/api/health")
        assert health.status_code == 200
        assert health.json()["status"] == "ok"

        labels = (SymbolClass.UP, SymbolClass.FORWARD_LEFT, SymbolClass.ROTATE_RIGHT)
        sheet = dataset.compose_sheet([dataset.gen_arrow(c, seed=123, size=300).image for c in labels])
        ok = requests.post(f"{base}/api/classify", data=imaging.encode_pgm(sheet))
        assert ok.status_code == 200
        assert ok.json()["symbols"] == [c.canonical_name for c in labels]

        assert requests.post(f"{base}/api/classify", data=b"").status_code == 400
        blank = GrayImage.from_array(np.full((128, 128), 255, dtype=np.uint8))
        blank_resp = requests.post(f"{base}/api/classify", data=imaging.encode_pgm(blank))
        assert blank_resp.status_code == 422
        assert blank_resp.json()["code"] == "no_symbols"

        compiled = requests.post(f"{base}/api/compile", json={"symbols": ["up", "rotate_right"]})
        assert compiled.status_code == 200
        assert compiled.json() == [
            {"kind": "translate", "distance_mm": 110.0},
            {"kind": "rotate", "angle_deg": -45.0},
        ]
        assert requests.post(f"{base}/api/compile", json={"symbols": ["warp"]}).status_code == 400

        sim = requests.post(f"{base}/api/simulate", json={"program": {"symbols": ["up", "up"]}})
        assert sim.status_code == 200
        assert sim.json()["status"] == "completed"
        off = requests.post(f"{base}/api/simulate", json={"program": {"symbols": ["down"]}})
        assert off.status_code == 200 and off.json()["status"] == "off_map"
        assert requests.post(f"{base}/api/simulate", data=b"!").status_code == 400

        root = requests.get(f"{base}/")
        assert root.status_code == 200  # runnable with no webui build present
    finally:
        srv.shutdown()
    report_pass("service-contract", t0, 60.0, "documented codes on all endpoints")
