"""Loss family: eps/x0 conversions, weighted losses, and the variational bound.

The weighted losses carry the exact per-step coefficients from the KL
reduction; training itself uses the unweighted simple loss.  t = 1 is
rejected by the weighted forms because beta_tilde_1 = 0 makes the weight
undefined; the training path never hits that singularity.
"""

from dataclasses import dataclass

import numpy as np

from . import forward
from .gaussian import DiagGaussian, kl_closed_form, log_pdf


def _check_t(t, sched, lo=1):
    if not lo <= t <= sched.T:
        raise ValueError(f"t={t} out of range [{lo}, {sched.T}]")


def x0_from_eps(x_t, eps, t, sched):
    """Invert the direct-sampling identity: x0 = (x_t - sqrt(1-abar) eps) / sqrt(abar)."""
    _check_t(t, sched)
    ab = sched.alpha_bar[t]
    return (np.asarray(x_t, dtype=np.float64)
            - np.sqrt(1.0 - ab) * np.asarray(eps)) / np.sqrt(ab)


def mu_tilde_from_eps(x_t, eps, t, sched):
    """Posterior mean in eps form: (x_t - (1-alpha)/sqrt(1-abar) eps) / sqrt(alpha)."""
    _check_t(t, sched)
    a, ab = sched.alpha[t], sched.alpha_bar[t]
    return (np.asarray(x_t, dtype=np.float64)
            - (1.0 - a) / np.sqrt(1.0 - ab) * np.asarray(eps)) / np.sqrt(a)


def loss_simple(eps_hat, eps):
    """Unweighted squared residual norm, the training objective."""
    eps_hat = np.asarray(eps_hat, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if eps_hat.shape != eps.shape:
        raise ValueError("dimension mismatch")
    return float(np.sum((eps_hat - eps) ** 2))

def _weighted(resid_sq, w):
    return float(w * resid_sq)


def loss_x0_weighted(x0_hat, x0, t, sched):
    """KL-derived loss on the x0 prediction, weight abar_{t-1} beta^2 / (2 bt (1-abar)^2)."""
    if t < 2:
        raise ValueError("t=1 has beta_tilde=0; weighted loss undefined")
    _check_t(t, sched)
    bt, b, ab, ab_prev = (sched.beta_tilde[t], sched.beta[t],
                          sched.alpha_bar[t], sched.alpha_bar[t - 1])
    w = (1.0 / (2.0 * bt)) * (ab_prev * b ** 2) / (1.0 - ab) ** 2
    return _weighted(np.sum((np.asarray(x0_hat) - np.asarray(x0)) ** 2), w)


def loss_eps_weighted(eps_hat, eps, t, sched):
    """KL-derived loss on the noise prediction, weight (1-alpha)^2 / (2 bt alpha (1-abar))."""
    if t < 2:
        raise ValueError("t=1 has beta_tilde=0; weighted loss undefined")
    _check_t(t, sched)
    bt, a, ab = sched.beta_tilde[t], sched.alpha[t], sched.alpha_bar[t]
    w = (1.0 / (2.0 * bt)) * (1.0 - a) ** 2 / (a * (1.0 - ab))
    return _weighted(np.sum((np.asarray(eps_hat) - np.asarray(eps)) ** 2), w)


@dataclass(frozen=True)
class VlbReport:
    """Per-term variational bound in nats: total = L0 + sum(Lt) + LT."""
    L0: float
    Lt: np.ndarray  # terms for t = 2..T, index 0 <-> t=2
    LT: float
    total: float

    def __post_init__(self):
        if abs(self.total - (self.L0 + float(np.sum(self.Lt)) + self.LT)) > 1e-12:
            raise ValueError("total must equal the sum of the terms")
        if self.LT < 0 or np.any(self.Lt < 0):
            raise ValueError("KL terms must be nonnegative")


def vlb_estimate(m, x0, sched, M, rng, eps_fn=None):
    """Monte-Carlo estimate of the variational bound for one data point.

    For each t in 2..T averages, over M draws x_t ~ q(x_t | x0), the KL
    between the true posterior and the model's Gaussian reverse kernel
    (mean from the eps prediction, variance beta_tilde_t).  L0 uses a
    Gaussian decoder N(predicted x0 at t=1, beta_1 I).  LT is the exact
    prior-matching KL.  ``eps_fn(x_t, t)`` overrides the model's
    prediction (test hook for oracle predictors).
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    predict = eps_fn if eps_fn is not None else (lambda x, t: m.predict(x, t, sched=sched))

    Lt = np.zeros(max(sched.T - 1, 0))
    for t in range(2, sched.T + 1):
        acc = 0.0
        for _ in range(M):
            x_t, _ = forward.sample_xt(x0, t, sched, rng)
            post = forward.posterior_q(x_t, x0, t, sched)
            mu_p = mu_tilde_from_eps(x_t, predict(x_t, t), t, sched)
            p = DiagGaussian(mu_p, np.full_like(mu_p, sched.beta_tilde[t]))
            acc += kl_closed_form(post, p)
        Lt[t - 2] = acc / M

    acc0 = 0.0
    for _ in range(M):
        x1, _ = forward.sample_xt(x0, 1, sched, rng)
        x0_hat = mu_tilde_from_eps(x1, predict(x1, 1), 1, sched)
        dec = DiagGaussian(x0_hat, np.full_like(x0_hat, sched.beta[1]))
        acc0 += -float(log_pdf(dec, x0))
    L0 = acc0 / M

    LT = kl_closed_form(forward.marginal_q(x0, sched.T, sched),
                        DiagGaussian(np.zeros_like(x0), np.ones_like(x0)))
    return VlbReport(L0=L0, Lt=Lt, LT=LT, total=L0 + float(np.sum(Lt)) + LT)
