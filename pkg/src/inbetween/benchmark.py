"""Benchmark runner: evaluate a transition method over a test-window set."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .baselines import interpolate_baseline, zero_velocity_baseline
from .metrics import l2p_per_frame, l2q_per_frame, npss_components, quaternion_features
from .windows import NormStats, TransitionWindow

DEFAULT_LENGTHS = (5, 15, 30, 45)


class InterpolationMethod:
    name = "interpolation"
    variation = 0.0

    def generate(self, seed_frames, target, length):
        return interpolate_baseline(seed_frames[-1], target, length)


class ZeroVelocityMethod:
    name = "zero_velocity"
    variation = 0.0

    def generate(self, seed_frames, target, length):
        return zero_velocity_baseline(seed_frames[-1], length)


class ModelMethod:
    """Trained generator as a benchmark method (deterministic, noise off)."""

    def __init__(self, generator, name="model", variation=0.0):
        from .model.generator import rollout_frames

        self._rollout_frames = rollout_frames
        self.generator = generator
        self.name = name
        self.variation = variation

    def generate(self, seed_frames, target, length):
        skeleton = getattr(self, "skeleton", None)
        frames, _ = self._rollout_frames(self.generator, skeleton, seed_frames, target, length)
        return frames


@dataclass
class BenchmarkReport:
    method: str
    lengths: tuple
    l2q: dict = field(default_factory=dict)
    l2p: dict = field(default_factory=dict)
    npss: dict = field(default_factory=dict)
    window_count: int = 0
    fingerprint: str = ""

    def validate(self):
        for table in (self.l2q, self.l2p, self.npss):
            for v in table.values():
                if v < 0:
                    raise ValueError("metrics must be nonnegative")

    def to_tsv(self) -> str:
        header = "metric\t" + "\t".join(str(n) for n in self.lengths)
        rows = [
            f"# method: {self.method}",
            f"# windows: {self.window_count}",
            f"# fingerprint: {self.fingerprint}",
            header,
        ]
        for name, table in (("L2Q", self.l2q), ("L2P", self.l2p), ("NPSS", self.npss)):
            rows.append(name + "\t" + "\t".join(f"{table[n]:.4f}" for n in self.lengths))
        return "\n".join(rows) + "\n"

    def to_table(self) -> str:
        """Human-readable layout mirroring the published benchmark tables."""
        width = max(len(self.method), 14)
        out = [f"Transition benchmark ({self.window_count} windows)"]
        header = "Length (frames)".ljust(width + 2) + "".join(f"{n:>9}" for n in self.lengths)
        for name, table in (("L2Q", self.l2q), ("L2P", self.l2p), ("NPSS", self.npss)):
            out.append(name)
            out.append(header)
            row = self.method.ljust(width + 2)
            row += "".join(f"{table[n]:>9.4f}" for n in self.lengths)
            out.append(row)
            out.append("")
        out.append(f"fingerprint: {self.fingerprint}")
        return "\n".join(out) + "\n"


def run_benchmark(method, windows: list[TransitionWindow], stats: NormStats,
                  lengths=DEFAULT_LENGTHS, hemisphere: bool = True) -> BenchmarkReport:
    """Generate transitions for every window at every length and score them.

    Deterministic for baselines and for models with variation 0; methods with
    scheduled noise enabled are refused (noise is turned off for quantitative
    evaluation).
    """
    if getattr(method, "variation", 0.0) != 0.0:
        raise ValueError("quantitative evaluation requires variation 0 (noise off)")
    if not windows:
        raise ValueError("no evaluation windows")
    max_len = max(lengths)
    for w in windows:
        if w.max_length < max_len:
            raise ValueError(f"window transition {w.max_length} shorter than requested {max_len}")
    skeleton = windows[0].skeleton
    if isinstance(method, ModelMethod):
        method.skeleton = skeleton
    report = BenchmarkReport(
        method=method.name,
        lengths=tuple(lengths),
        window_count=len(windows),
        fingerprint=f"hemisphere_align={'on' if hemisphere else 'off'};centering=truth_root_xz",
    )
    for length in lengths:
        q_norms, p_norms = [], []
        emd_acc, weight_acc = 0.0, 0.0
        for w in windows:
            v = w.clipped(length)
            pred = method.generate(v.seed, v.target, length)
            if len(pred) != length:
                raise RuntimeError(f"method returned {len(pred)} frames, expected {length}")
            truth = v.transition
            q_norms.append(l2q_per_frame(pred, truth, skeleton, hemisphere))
            p_norms.append(l2p_per_frame(pred, truth, skeleton, stats))
            emd, weights = npss_components(
                quaternion_features(skeleton, pred), quaternion_features(skeleton, truth)
            )
            emd_acc += float((emd * weights).sum())
            weight_acc += float(weights.sum())
        report.l2q[length] = float(np.concatenate(q_norms).mean())
        report.l2p[length] = float(np.concatenate(p_norms).mean())
        report.npss[length] = emd_acc / weight_acc if weight_acc > 0 else 0.0
    report.validate()
    return report
