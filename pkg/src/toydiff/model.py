"""Small fully-connected networks with analytic backpropagation.

One architecture serves two roles: the noise predictor eps_hat(x_t, t[, y])
with a linear output head, and the noisy-input classifier p(y | x_t, t)
with a log-softmax head.  No autodiff framework is used; gradients are
hand-derived and verified against finite differences in the test suite.

Input features are the state x concatenated with a 4-feature time encoding
(t/T, sin(2 pi t/T), cos(2 pi t/T), sqrt(1 - abar_t)) and, for conditional
models, a one-hot label block with a dedicated null slot.
"""

import numpy as np

from .rng import RngState

N_TIME_FEATURES = 4


def time_features(t, sched):
    """(t/T, sin, cos, noise level) encoding; t scalar or (N,) array."""
    t = np.asarray(t, dtype=np.float64)
    frac = t / sched.T
    lvl = np.sqrt(1.0 - sched.alpha_bar[np.asarray(t, dtype=np.int64)])
    return np.stack([frac, np.sin(2.0 * np.pi * frac),
                     np.cos(2.0 * np.pi * frac), lvl], axis=-1)


class _Network:
    """Shared MLP core: tanh hidden layers, head chosen by subclass."""

    def __init__(self, data_dim, hidden, out_dim, conditioning, params):
        if data_dim < 1 or out_dim < 1 or any(w < 1 for w in hidden):
            raise ValueError("all layer widths must be >= 1")
        self.data_dim = int(data_dim)
        self.hidden = tuple(int(w) for w in hidden)
        self.out_dim = int(out_dim)
        self.conditioning = None if conditioning is None else int(conditioning)
        self.in_features = (self.data_dim + N_TIME_FEATURES
                            + (0 if self.conditioning is None else self.conditioning + 1))
        widths = (self.in_features,) + self.hidden + (self.out_dim,)
        self._widths = widths
        self.n_params = sum(widths[i] * widths[i + 1] + widths[i + 1]
                            for i in range(len(widths) - 1))
        params = np.asarray(params, dtype=np.float64)
        if params.shape != (self.n_params,):
            raise ValueError(f"params must be a flat array of length {self.n_params}")
        if not np.all(np.isfinite(params)):
            raise ValueError("params must be finite")
        self.params = params

    def _layers(self, params=None):
        """Views (W, b) per layer into the flat parameter array."""
        p = self.params if params is None else params
        out, off = [], 0
        w = self._widths
        for i in range(len(w) - 1):
            n_w, n_b = w[i] * w[i + 1], w[i + 1]
            W = p[off:off + n_w].reshape(w[i], w[i + 1])
            b = p[off + n_w:off + n_w + n_b]
            out.append((W, b))
            off += n_w + n_b
        return out

    def _features(self, x, t, y, sched):
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        xb = np.atleast_2d(x)
        if xb.shape[1] != self.data_dim:
            raise ValueError("dimension mismatch between x and model")
        n = xb.shape[0]
        ts = np.broadcast_to(np.asarray(t, dtype=np.int64), (n,))
        if np.any(ts < 1) or np.any(ts > sched.T):
            raise ValueError("t out of range [1, T]")
        cols = [xb, time_features(ts, sched)]
        if self.conditioning is None:
            if y is not None:
                raise ValueError("unconditional model: y must be None")
        else:
            k = self.conditioning
            ys = np.full(n, -1, dtype=np.int64) if y is None else \
                np.broadcast_to(np.asarray(y, dtype=np.int64), (n,))
            if np.any(ys >= k) or np.any(ys < -1):
                raise ValueError(f"label out of range [0, {k})")
            onehot = np.zeros((n, k + 1))
            onehot[np.arange(n), np.where(ys < 0, k, ys)] = 1.0  # slot k = null
            cols.append(onehot)
        return np.concatenate(cols, axis=1), squeeze

    def _forward(self, feats):
        """Forward pass; returns raw output and activation cache."""
        acts = [feats]
        a = feats
        layers = self._layers()
        for i, (W, b) in enumerate(layers):
            z = a @ W + b
            a = z if i == len(layers) - 1 else np.tanh(z)
            acts.append(a)
        return a, acts

    def _backward(self, acts, d_out):
        """Backprop d_out through the cached pass.

        Returns (flat parameter gradient, gradient w.r.t. the feature row).
        """
        layers = self._layers()
        grads = [None] * len(layers)
        delta = d_out
        for i in range(len(layers) - 1, -1, -1):
            W, _ = layers[i]
            a_in = acts[i]
            grads[i] = (a_in.T @ delta, delta.sum(axis=0))
            delta = delta @ W.T
            if i > 0:
                delta = delta * (1.0 - acts[i] ** 2)  # tanh'
        flat = np.concatenate([np.concatenate([gW.ravel(), gb]) for gW, gb in grads])
        return flat, delta


class NoisePredictor(_Network):
    """eps_hat(x_t, t[, y]): linear output head of width data_dim.

    With ``skip`` enabled the prediction is mlp(features) plus the
    parameter-free baseline sqrt(1 - abar_t) * x.  A plain tanh net
    saturates for large |x| and cannot track eps ~ x in the tails, which
    wrecks deterministic sampling; the baseline restores linear
    extrapolation while leaving the parameter gradient untouched.
    """

    def __init__(self, data_dim, hidden, conditioning, params, skip=False):
        super().__init__(data_dim, hidden, data_dim, conditioning, params)
        self.skip = bool(skip)

    def _baseline(self, x, t, sched):
        if not self.skip:
            return 0.0
        lvl = np.sqrt(1.0 - sched.alpha_bar[np.asarray(t, dtype=np.int64)])
        return np.reshape(lvl, (-1, 1)) * np.atleast_2d(x)

    def predict(self, x, t, y=None, sched=None):
        feats, squeeze = self._features(x, t, y, sched)
        out, _ = self._forward(feats)
        out = out + self._baseline(x, t, sched)
        return out[0] if squeeze else out

    def loss_and_grad(self, x_t, t, y, eps, sched):
        """Mean squared noise-prediction error and its parameter gradient."""
        eps = np.atleast_2d(np.asarray(eps, dtype=np.float64))
        if eps.shape[0] == 0:
            raise ValueError("empty batch")
        feats, _ = self._features(x_t, t, y, sched)
        if feats.shape[0] != eps.shape[0] or eps.shape[1] != self.data_dim:
            raise ValueError("batch shape mismatch")
        out, acts = self._forward(feats)
        resid = out + self._baseline(x_t, t, sched) - eps
        loss = float(np.mean(np.sum(resid ** 2, axis=1)))
        grad, _ = self._backward(acts, 2.0 * resid / resid.shape[0])
        return loss, grad


class Classifier(_Network):
    """p(y | x_t, t): K-way log-softmax head over noisy inputs."""

    def __init__(self, data_dim, hidden, n_classes, params):
        if n_classes < 2:
            raise ValueError("classifier needs at least 2 classes")
        super().__init__(data_dim, hidden, n_classes, None, params)
        self.n_classes = int(n_classes)

    def log_probs(self, x, t, sched):
        feats, squeeze = self._features(x, t, None, sched)
        logits, _ = self._forward(feats)
        m = logits.max(axis=1, keepdims=True)
        logz = m + np.log(np.sum(np.exp(logits - m), axis=1, keepdims=True))
        lp = logits - logz
        return lp[0] if squeeze else lp

    def grad_x(self, x, t, y, sched):
        """Analytic gradient of log p(y | x, t) with respect to x."""
        if not 0 <= y < self.n_classes:
            raise ValueError("invalid class id")
        feats, squeeze = self._features(x, t, None, sched)
        logits, acts = self._forward(feats)
        m = logits.max(axis=1, keepdims=True)
        p = np.exp(logits - m)
        p /= p.sum(axis=1, keepdims=True)
        d_logits = -p
        d_logits[:, y] += 1.0
        _, d_feats = self._backward(acts, d_logits)
        gx = d_feats[:, :self.data_dim]
        return gx[0] if squeeze else gx

    def nll_and_grad(self, x_t, t, y, sched):
        """Mean negative log-likelihood and its parameter gradient."""
        y = np.atleast_1d(np.asarray(y, dtype=np.int64))
        feats, _ = self._features(x_t, t, None, sched)
        n = feats.shape[0]
        if y.shape != (n,) or np.any(y < 0) or np.any(y >= self.n_classes):
            raise ValueError("labels out of range")
        logits, acts = self._forward(feats)
        m = logits.max(axis=1, keepdims=True)
        logz = m + np.log(np.sum(np.exp(logits - m), axis=1, keepdims=True))
        lp = logits - logz
        loss = float(-np.mean(lp[np.arange(n), y]))
        p = np.exp(lp)
        d_logits = p
        d_logits[np.arange(n), y] -= 1.0
        grad, _ = self._backward(acts, d_logits / n)
        return loss, grad


def init_noise_predictor(data_dim, hidden=(64, 64), conditioning=None, rng=None,
                         skip=True):
    """Fresh noise predictor: uniform(+-1/sqrt(fan_in)) weights, zero biases."""
    rng = rng if rng is not None else RngState(0)
    shell = NoisePredictor(data_dim, hidden, conditioning, _zeros_for(
        data_dim, hidden, data_dim, conditioning), skip=skip)
    _fill(shell, rng)
    return shell


def init_classifier(data_dim, n_classes, hidden=(64, 64), rng=None):
    """Fresh classifier with the same initialization scheme."""
    rng = rng if rng is not None else RngState(0)
    shell = Classifier(data_dim, hidden, n_classes, _zeros_for(
        data_dim, hidden, n_classes, None))
    _fill(shell, rng)
    return shell


def _zeros_for(data_dim, hidden, out_dim, conditioning):
    in_features = data_dim + N_TIME_FEATURES + (0 if conditioning is None else conditioning + 1)
    widths = (in_features,) + tuple(hidden) + (out_dim,)
    n = sum(widths[i] * widths[i + 1] + widths[i + 1] for i in range(len(widths) - 1))
    return np.zeros(n)


def _fill(net, rng):
    for W, b in net._layers():
        W[...] = rng.uniform(-1.0, 1.0, W.shape) / np.sqrt(W.shape[0])
        b[...] = 0.0
