"""AMSgrad optimizer."""
from __future__ import annotations

import numpy as np


class AmsGrad:
    """AMSgrad: Adam with a non-decreasing second-moment maximum.

    m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;  vhat <- max(vhat, v);
    theta <- theta - lr * m / (sqrt(vhat) + eps). No bias correction.
    """

    def __init__(self, params, lr=0.001, beta1=0.5, beta2=0.9, eps=1e-8):
        self.params = list(params)
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ValueError("parameter names must be unique")
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = {p.name: np.zeros_like(p.values) for p in self.params}
        self.v = {p.name: np.zeros_like(p.values) for p in self.params}
        self.vhat = {p.name: np.zeros_like(p.values) for p in self.params}

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def step(self):
        self.step_count += 1
        for p in self.params:
            g = p.grad
            if g is None:
                continue
            m = self.m[p.name]
            v = self.v[p.name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            np.maximum(self.vhat[p.name], v, out=self.vhat[p.name])
            p.values -= self.lr * m / (np.sqrt(self.vhat[p.name]) + self.eps)

    def state_dict(self):
        return {
            "step_count": self.step_count,
            "m": {k: v.copy() for k, v in self.m.items()},
            "v": {k: v.copy() for k, v in self.v.items()},
            "vhat": {k: v.copy() for k, v in self.vhat.items()},
        }

    def load_state_dict(self, state):
        self.step_count = int(state["step_count"])
        for name in self.m:
            self.m[name][...] = state["m"][name]
            self.v[name][...] = state["v"][name]
            self.vhat[name][...] = state["vhat"][name]
