"""Finite-difference gradient verification.

Requires 64-bit mode: the central-difference step (1e-5) drowns in float32
rounding noise otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import default_dtype


@dataclass
class GradCheckReport:
    relative_errors: dict = field(default_factory=dict)
    threshold: float = 1e-4

    @property
    def passed(self) -> bool:
        return all(e < self.threshold for e in self.relative_errors.values())

    def __str__(self):
        lines = [
            f"  {name}: rel_err={err:.3e} {'ok' if err < self.threshold else 'FAIL'}"
            for name, err in self.relative_errors.items()
        ]
        return "gradient check ({}):\n{}".format("pass" if self.passed else "FAIL", "\n".join(lines))


def gradient_check(build_loss, params, step=1e-5, threshold=1e-4, max_entries=None, rng=None):
    """Compare reverse-mode gradients against central finite differences.

    build_loss() must rebuild the loss graph from the current parameter
    values. Per block the relative error is
    ||g_analytic - g_fd||_inf / (||g_analytic||_inf + ||g_fd||_inf + 1e-12).
    `max_entries` limits the number of perturbed entries per block (all by
    default); entries are then sampled with `rng`.
    """
    if default_dtype() != np.float64:
        raise RuntimeError("gradient_check requires 64-bit mode")
    for p in params:
        p.zero_grad()
    loss = build_loss()
    loss.backward()
    analytic = {p.name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.values)) for p in params}

    report = GradCheckReport(threshold=threshold)
    for p in params:
        flat = p.values.reshape(-1)
        n = flat.size
        if max_entries is not None and n > max_entries:
            idx = (rng or np.random.default_rng(0)).choice(n, size=max_entries, replace=False)
        else:
            idx = np.arange(n)
        fd = np.zeros(len(idx))
        for out_i, i in enumerate(idx):
            original = flat[i]
            flat[i] = original + step
            up = float(build_loss().values)
            flat[i] = original - step
            down = float(build_loss().values)
            flat[i] = original
            fd[out_i] = (up - down) / (2.0 * step)
        ga = analytic[p.name].reshape(-1)[idx]
        denom = np.abs(ga).max(initial=0.0) + np.abs(fd).max(initial=0.0) + 1e-12
        report.relative_errors[p.name] = float(np.abs(ga - fd).max(initial=0.0) / denom)
    return report
