"""Two-hidden-layer tanh MLPs with hand-written backpropagation.

Training runs in float32; a float64 mode exists so analytic gradients can be
verified against central finite differences.
"""

from __future__ import annotations

import numpy as np

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0


def _orthogonal(rng: np.random.Generator, shape, gain: float, dtype) -> np.ndarray:
    a = rng.normal(size=shape)
    q, r = np.linalg.qr(a if shape[0] >= shape[1] else a.T)
    q = q * np.sign(np.diag(r))
    if shape[0] < shape[1]:
        q = q.T
    return (gain * q[: shape[0], : shape[1]]).astype(dtype)


class Mlp:
    """Dense tanh-tanh-linear network; caches activations for backward."""

    def __init__(self, sizes, rng: np.random.Generator, dtype=np.float32,
                 out_scale: float = 0.0):
        self.dtype = dtype
        self.weights = []
        self.biases = []
        n_layers = len(sizes) - 1
        for k in range(n_layers):
            gain = np.sqrt(2.0) if k < n_layers - 1 else out_scale
            if gain == 0.0:
                w = np.zeros((sizes[k], sizes[k + 1]), dtype=dtype)
            else:
                w = _orthogonal(rng, (sizes[k], sizes[k + 1]), gain, dtype)
            self.weights.append(w)
            self.biases.append(np.zeros(sizes[k + 1], dtype=dtype))
        self._cache = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        acts = [x.astype(self.dtype, copy=False)]
        n = len(self.weights)
        for k in range(n):
            z = acts[-1] @ self.weights[k] + self.biases[k]
            acts.append(np.tanh(z) if k < n - 1 else z)
        self._cache = acts
        return acts[-1]

    def backward(self, dout: np.ndarray):
        """Gradients of a scalar loss given dL/d(output); forward() must have run."""
        acts = self._cache
        n = len(self.weights)
        dw = [None] * n
        db = [None] * n
        delta = dout.astype(self.dtype, copy=False)
        for k in range(n - 1, -1, -1):
            dw[k] = acts[k].T @ delta
            db[k] = delta.sum(axis=0)
            if k > 0:
                delta = (delta @ self.weights[k].T) * (1.0 - acts[k] * acts[k])
        return dw, db

    def parameters(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out


class ActorCritic:
    """Gaussian policy head (mean + state-independent log-std) and value net."""

    def __init__(self, obs_dim: int, hidden: int, rng: np.random.Generator,
                 dtype=np.float32, log_std_init: float = -2.5):
        self.obs_dim = obs_dim
        self.hidden = hidden
        self.dtype = dtype
        self.actor = Mlp((obs_dim, hidden, hidden, 1), rng, dtype)
        self.critic = Mlp((obs_dim, hidden, hidden, 1), rng, dtype)
        self.log_std = np.array([log_std_init], dtype=dtype)

    def forward(self, obs: np.ndarray):
        """Returns (mean, log_std, value) for a batch of observations."""
        obs = np.atleast_2d(obs)
        mean = self.actor.forward(obs)[:, 0]
        value = self.critic.forward(obs)[:, 0]
        ls = float(np.clip(self.log_std[0], LOG_STD_MIN, LOG_STD_MAX))
        return mean, ls, value

    def parameters(self):
        return self.actor.parameters() + self.critic.parameters() + [self.log_std]

    def log_std_grad_mask(self) -> float:
        """Zero at the clamp bounds, where the clipped value is constant."""
        return 1.0 if LOG_STD_MIN < self.log_std[0] < LOG_STD_MAX else 0.0

    def flat_parameters(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.parameters()]).astype(np.float64)

    def set_flat_parameters(self, flat: np.ndarray) -> None:
        i = 0
        for p in self.parameters():
            n = p.size
            p[...] = flat[i : i + n].reshape(p.shape).astype(self.dtype)
            i += n
        if i != flat.size:
            raise ValueError(f"flat vector has {flat.size} entries, expected {i}")


class Adam:
    """Adaptive-moment gradient step over a list of parameter arrays."""

    def __init__(self, params, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p, dtype=np.float64) for p in params]
        self.v = [np.zeros_like(p, dtype=np.float64) for p in params]
        self.t = 0

    def step(self, params, grads) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            g = g.astype(np.float64, copy=False)
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            update = self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)
            p -= update.astype(p.dtype)


def global_norm_clip(grads, max_norm: float) -> float:
    """Scale gradients in place to a global L2 norm bound; returns the norm."""
    total = np.sqrt(sum(float(np.sum(g.astype(np.float64) ** 2)) for g in grads))
    if max_norm > 0 and total > max_norm:
        scale = max_norm / total
        for g in grads:
            g *= scale
    return total
