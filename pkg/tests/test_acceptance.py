"""Acceptance suite: one test per release criterion.

Criterion 5 runs the full LaFAN1 protocol when INBETWEEN_LAFAN1_DIR points at
the BVH files; otherwise it falls back to the synthetic-corpus check. The
toy-training criteria (6, 7) share one session-scoped training run.
"""
import os
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from inbetween import engine, quat
from inbetween.benchmark import InterpolationMethod, ModelMethod, run_benchmark
from inbetween.engine import FeedForward, Linear, LSTMCell, Tensor, gradient_check
from inbetween.engine import tensor as T
from inbetween.metrics import l2p, l2q, npss
from inbetween.model import (
    GeneratorConfig,
    TrainingParams,
    TransitionGenerator,
    init_trainer,
    noise_schedule,
    rollout,
    rollout_frames,
    train,
    tta_embedding,
)
from inbetween.model.config import CurriculumState
from inbetween.model.fk_graph import fk_positions_flat
from inbetween.service import create_app
from inbetween.skeleton import FrameState, Skeleton, fk, fk_positions
from inbetween.synthetic import make_gait_corpus, split_corpus, toy_run_config
from inbetween.weightsio import container_from_trainer
from inbetween.windows import NormStats, TransitionWindow, WindowSpec, compute_norm_stats, make_windows

from conftest import identity_frame, make_chain_skeleton, random_frame
from test_metrics import brute_force_npss
from test_skeleton import fk_matrix_oracle


@contextmanager
def float32_mode():
    engine.set_default_dtype(np.float32)
    try:
        yield
    finally:
        engine.set_default_dtype(np.float64)


@pytest.fixture(scope="session")
def toy_model():
    """One desk-scale training run shared by criteria 6 and 7."""
    config, params, critic_hidden = toy_run_config(iterations=5000, seed=1)
    clips = make_gait_corpus(200, seed=0)
    train_clips, test_clips = split_corpus(clips)
    train_windows, _ = make_windows(train_clips, WindowSpec(50, 20), future_frames=10)
    test_windows, _ = make_windows(test_clips, WindowSpec(41, 40))
    stats = compute_norm_stats(train_windows)
    started = time.time()
    engine.set_default_dtype(np.float32)
    try:
        state = train(config, train_windows, params, critic_hidden=critic_hidden)
    finally:
        engine.set_default_dtype(np.float64)
    return {
        "state": state,
        "config": config,
        "stats": stats,
        "test_windows": test_windows,
        "skeleton": test_clips[0].skeleton,
        "train_seconds": time.time() - started,
        "iterations": params.iterations,
    }


def test_criterion_01_noise_schedule_exact():
    """Eq.-3 schedule matches the piecewise definition exactly on 0..60."""
    for tta in range(0, 61):
        if tta >= 30:
            expected = 1.0
        elif tta >= 5:
            expected = (tta - 5) / 25
        else:
            expected = 0.0
        assert noise_schedule(tta) == expected
    assert noise_schedule(30) == 1.0
    assert noise_schedule(10) == 0.2
    assert noise_schedule(4) == 0.0


def test_criterion_02_tta_embedding():
    """Sinusoidal embedding: bounded, injective in range, clamped beyond."""
    t_max = GeneratorConfig(p_max=30, t_past=10).t_max_tta
    assert t_max == 35
    embeddings = [tta_embedding(t, d=256, t_max_tta=t_max) for t in range(1, t_max + 1)]
    for z in embeddings:
        assert np.all(z >= -1.0) and np.all(z <= 1.0)
    for i in range(len(embeddings)):
        for k in range(i + 1, len(embeddings)):
            assert np.abs(embeddings[i] - embeddings[k]).max() > 1e-6
    beyond = tta_embedding(t_max + 7, d=256, t_max_tta=t_max)
    np.testing.assert_array_equal(beyond, embeddings[-1])
    spot = tta_embedding(1, d=2)
    assert abs(spot[0] - np.sin(1.0)) < 1e-12
    assert abs(spot[1] - np.cos(1.0)) < 1e-12


def test_criterion_03_gradient_suite():
    """Finite-difference checks on every layer and a full generator step."""
    started = time.time()
    rng = np.random.default_rng(0)

    layer = Linear("lin", 5, 4, rng)
    x = Tensor(rng.normal(size=(3, 5)))
    assert gradient_check(lambda: T.mean(T.square(layer(x))), layer.parameters()).passed

    for activation in ("plu", "relu", "tanh", "sigmoid"):
        net = FeedForward(f"ffn_{activation}", [4, 7, 3], rng, activation)
        xin = Tensor(rng.normal(size=(2, 4)))
        report = gradient_check(lambda: T.mean(T.abs_(net(xin))), net.parameters())
        assert report.passed, f"{activation}: {report}"

    cell = LSTMCell("lstm", 3, 4, rng)
    xs = [Tensor(rng.normal(size=(2, 3))) for _ in range(3)]

    def lstm_loss():
        state = cell.initial_state(2)
        out = None
        for xt in xs:
            out, state = cell(xt, state)
        return T.mean(T.square(out))

    assert gradient_check(lstm_loss, cell.parameters()).passed

    cfg = GeneratorConfig(joint_count=2, encoder_hidden=6, encoder_out=4,
                          lstm_hidden=5, decoder_hidden=6, decoder_hidden2=5)
    gen = TransitionGenerator(cfg, rng)
    skel = make_chain_skeleton(2, rng)
    q = rng.normal(size=(2, 10, 2, 4))
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    root = rng.normal(size=(2, 10, 3))
    contacts = (rng.random(size=(2, 10, 4)) > 0.5).astype(float)
    tq, troot = q[:, -1], root[:, -1]
    z = rng.normal(size=(2, cfg.z_target_dim))
    truth_q = rng.normal(size=(2, 2, 8))
    truth_root = rng.normal(size=(2, 2, 3))

    def generator_loss():
        res = rollout(gen, q, root, contacts, tq, troot, 1, z_target=z, predict_target=True)
        loss = None
        for k in range(2):
            term = T.mean(T.abs_(T.reshape(res.q[k], (2, 8)) - truth_q[:, k]))
            term = term + T.mean(T.abs_(res.root[k] - truth_root[:, k]))
            term = term + T.scale(T.mean(T.abs_(fk_positions_flat(skel, res.q[k], res.root[k]))), 0.5)
            term = term + T.scale(T.mean(T.square(res.contacts[k])), 0.1)
            loss = term if loss is None else loss + term
        return loss

    report = gradient_check(generator_loss, gen.parameters(), max_entries=30, rng=rng)
    assert report.passed, str(report)

    elapsed = time.time() - started
    assert elapsed < 300, f"gradient suite took {elapsed:.0f}s (budget 5 min)"


def test_criterion_04_fk_oracle():
    """1000 random chains/frames vs homogeneous-matrix composition, < 1e-9."""
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 11))
        skel = make_chain_skeleton(n, rng)
        frame = random_frame(skel, rng)
        got = fk(skel, frame).positions
        expected = fk_matrix_oracle(skel, frame)
        worst = max(worst, float(np.abs(got - expected).max()))
    assert worst < 1e-9, f"max FK error {worst:.2e}"


TABLE3_INTERPOLATION = {
    "l2q": {5: 0.22, 15: 0.62, 30: 0.98, 45: 1.25},
    "l2p": {5: 0.37, 15: 1.25, 30: 2.32, 45: 3.45},
    "npss": {5: 0.0023, 15: 0.0391, 30: 0.2013, 45: 0.4493},
}


def test_criterion_05_interpolation_baseline():
    """LaFAN1 interpolation rows within 5% (dataset present), else synthetic check."""
    lafan_dir = os.environ.get("INBETWEEN_LAFAN1_DIR", "")
    if lafan_dir and Path(lafan_dir).is_dir():
        _lafan1_protocol(Path(lafan_dir))
    else:
        _synthetic_interpolation_check()


def _lafan1_protocol(data_dir):
    from inbetween.cli import load_bvh_dir, split_train_test

    started = time.time()
    clips, _ = load_bvh_dir(data_dir)
    train_clips, test_clips = split_train_test(clips, "subject5")
    if not test_clips:  # LaFAN1 files are named subject<k>_<action>.bvh
        pytest.fail("no subject5 clips found in LaFAN1 directory")
    test_windows, _ = make_windows(test_clips, WindowSpec(56, 40))
    assert len(test_windows) == 2232, f"expected 2232 test windows, got {len(test_windows)}"
    train_windows, _ = make_windows(train_clips, WindowSpec(50, 20), future_frames=10)
    stats = compute_norm_stats(train_windows)
    report = run_benchmark(InterpolationMethod(), test_windows, stats)
    for metric, table in TABLE3_INTERPOLATION.items():
        got = getattr(report, metric)
        for length, expected in table.items():
            assert abs(got[length] - expected) <= 0.05 * expected, (
                f"{metric}@{length}: {got[length]:.4f} vs published {expected}"
            )
    assert time.time() - started < 1200


def _synthetic_interpolation_check():
    # constant-angular-velocity clips: a turning walk on a circular arc; the
    # linear root interpolation cuts the chord, so error strictly grows with L
    skel = make_chain_skeleton(4, bone_length=0.4)
    stats = NormStats(np.zeros(skel.joint_count * 3), np.ones(skel.joint_count * 3))
    for radius, rate_deg in ((3.0, 3.0), (2.0, 2.0), (5.0, 1.5)):
        omega = np.deg2rad(rate_deg)
        frames = []
        for t in range(60):
            a = omega * t
            f = identity_frame(skel, root=(radius * np.cos(a), 1.2, radius * np.sin(a)))
            f.q[0] = quat.yaw_about_y(-a)
            frames.append(f)
        w = TransitionWindow(skel, frames[:10], frames[10:56], frames[56], [])
        report = run_benchmark(InterpolationMethod(), [w], stats)
        values = [report.l2p[L] for L in (5, 15, 30, 45)]
        assert all(b > a for a, b in zip(values, values[1:])), values


def test_criterion_06_toy_training(toy_model):
    """Desk-scale training beats interpolation by >= 20% and lands on target."""
    state = toy_model["state"]
    stats = toy_model["stats"]
    test_windows = toy_model["test_windows"]
    skeleton = toy_model["skeleton"]
    height = skeleton.height()

    assert toy_model["iterations"] <= 20000
    assert toy_model["train_seconds"] < 1800, (
        f"training took {toy_model['train_seconds']:.0f}s (budget 30 min)"
    )

    with float32_mode():
        model = ModelMethod(state.generator)
        model_report = run_benchmark(model, test_windows, stats, lengths=(30,))
        interp_report = run_benchmark(InterpolationMethod(), test_windows, stats, lengths=(30,))
        ratio = model_report.l2p[30] / interp_report.l2p[30]
        assert ratio <= 0.8, (
            f"model L2P {model_report.l2p[30]:.4f} vs interpolation "
            f"{interp_report.l2p[30]:.4f} (ratio {ratio:.3f}, needs <= 0.8)"
        )

        worst_landing = 0.0
        for w in test_windows:
            v = w.clipped(30)
            frames, _ = rollout_frames(state.generator, skeleton, v.seed, v.target, 30)
            worst_landing = max(worst_landing, float(np.linalg.norm(frames[-1].root - v.target.root)))
        assert worst_landing <= 0.1 * height, (
            f"final-frame root distance {worst_landing:.4f} exceeds 10% of height {height:.3f}"
        )

        v = test_windows[0].clipped(30)
        a, _ = rollout_frames(state.generator, skeleton, v.seed, v.target, 30)
        b, _ = rollout_frames(state.generator, skeleton, v.seed, v.target, 30)
        for fa, fb in zip(a, b):
            np.testing.assert_array_equal(fa.q, fb.q)
            np.testing.assert_array_equal(fa.root, fb.root)


def test_criterion_07_variation_property(toy_model):
    """Variation 1.0: mid-transition poses differ, endings stay on target."""
    state = toy_model["state"]
    skeleton = toy_model["skeleton"]
    height = skeleton.height()
    config = toy_model["config"]
    v = toy_model["test_windows"][0].clipped(30)
    sigma = 1.0 * config.sigma_target

    with float32_mode():
        rollouts = []
        for seed in range(10):
            rng = np.random.default_rng(seed)
            z = rng.normal(0.0, sigma, size=(1, config.z_target_dim))
            frames, _ = rollout_frames(state.generator, skeleton, v.seed, v.target, 30, z_target=z)
            rollouts.append(frames)

        mid = 15
        displacements = []
        for i in range(10):
            for k in range(i + 1, 10):
                pa = fk_positions(skeleton, [rollouts[i][mid]])[0]
                pb = fk_positions(skeleton, [rollouts[k][mid]])[0]
                displacements.append(float(np.linalg.norm(pa - pb, axis=1).mean()))
        assert min(displacements) > 0.0, "noise draws produced identical mid-transition poses"

        for frames in rollouts:
            landing = float(np.linalg.norm(frames[-1].root - v.target.root))
            assert landing <= 0.1 * height, f"noisy rollout landed {landing:.4f} from target"


def test_criterion_08_curriculum():
    """Length cap: 5 at epoch 0, saturates at p_max, samples stay in range."""
    cs = CurriculumState(p_max=30, p_min=5, n_ep_max=3)
    assert cs.max_length(0) == 5
    for epoch in range(3, 12):
        assert cs.max_length(epoch) == 30
    trace = [cs.max_length(e) for e in range(12)]
    assert all(b >= a for a, b in zip(trace, trace[1:]))
    rng = np.random.default_rng(0)
    for epoch in range(12):
        cap = cs.max_length(epoch)
        for _ in range(200):
            length = cs.sample_length(rng, epoch)
            assert 5 <= length <= cap


def test_criterion_09_metric_sanity():
    """Zero on identical inputs; NPSS matches the brute-force spectrum oracle."""
    rng = np.random.default_rng(3)
    skel = make_chain_skeleton(4, rng)
    frames = [random_frame(skel, rng) for _ in range(16)]
    stats = NormStats(np.zeros(skel.joint_count * 3), np.ones(skel.joint_count * 3))
    assert l2q(frames, frames, skel) == 0.0
    assert l2p(frames, frames, skel, stats) == 0.0
    seq = rng.normal(size=(16, 4))
    assert npss(seq, seq) < 1e-15

    t = np.arange(16)
    for ka, kb in ((3, 4), (2, 7), (1, 5)):
        truth = np.sin(2 * np.pi * ka * t / 16)[:, None]
        pred = np.sin(2 * np.pi * kb * t / 16)[:, None]
        assert abs(npss(pred, truth) - brute_force_npss(pred, truth)) < 1e-9


def test_criterion_10_service_contract():
    """Exact frame count, byte-identical determinism, 400s, latency budget."""
    cfg = GeneratorConfig(joint_count=22)
    state = init_trainer(cfg, TrainingParams(seed=2), critic_hidden=(8, 6))
    skeleton = make_chain_skeleton(22)
    container = container_from_trainer(state, skeleton, None)
    container.fingerprint = "b" * 64
    client = TestClient(create_app(container))

    frame = {
        "quaternions": [[1.0, 0.0, 0.0, 0.0]] * 22,
        "root_position": [0.0, 1.0, 0.0],
    }
    body = {
        "past": [dict(frame, root_position=[0.02 * t, 1.0, 0.0]) for t in range(10)],
        "target": dict(frame, root_position=[1.0, 1.0, 0.0]),
        "length": 30,
        "variation": 0.0,
        "seed": 12,
        "apply_ik": False,
    }

    first = client.post("/generate", json=body)
    assert first.status_code == 200
    assert len(first.json()["frames"]) == 30
    second = client.post("/generate", json=body)
    assert first.content == second.content

    bad = dict(body)
    del bad["past"]
    r = client.post("/generate", json=bad)
    assert r.status_code == 400
    assert any("past" in e["field"] for e in r.json()["errors"])

    started = time.perf_counter()
    client.post("/generate", json=body)
    elapsed_ms = (time.perf_counter() - started) * 1000
    assert elapsed_ms < 500, f"L=30 inference took {elapsed_ms:.0f} ms"
