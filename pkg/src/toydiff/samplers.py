"""Reverse processes: the stochastic DDPM step and the sigma-family DDIM step.

Both samplers share the trained noise predictor.  DDIM with the
DDPM-equivalent sigma reproduces the DDPM step distribution; sigma = 0
gives fully deterministic generation.  The noise term is gated off at
t = 1 in both samplers.

States may carry a leading batch axis; one chain is strictly sequential,
but a batch of chains advances in lock-step from a single stream.
"""

from dataclasses import dataclass, field

import numpy as np

from .forward import Trajectory
from .losses import mu_tilde_from_eps


@dataclass(frozen=True)
class SamplerConfig:
    kind: str = "ddpm"             # "ddpm" | "ddim"
    sigma_policy: str = "zero"     # ddim only: "zero" | "ddpm" | "explicit"
    sigmas: np.ndarray | None = None  # explicit per-t values, index t in 1..T
    n_chains: int = 1
    record: bool = False

    def __post_init__(self):
        if self.kind not in ("ddpm", "ddim"):
            raise ValueError("kind must be 'ddpm' or 'ddim'")
        if self.sigma_policy not in ("zero", "ddpm", "explicit"):
            raise ValueError("sigma_policy must be 'zero', 'ddpm' or 'explicit'")
        if self.sigma_policy == "explicit" and self.sigmas is None:
            raise ValueError("explicit sigma policy needs a sigmas array")
        if self.n_chains < 1:
            raise ValueError("n_chains must be >= 1")


def _check_t(t, sched):
    if not 1 <= t <= sched.T:
        raise ValueError(f"t={t} out of range [1, {sched.T}]")


def ddpm_step(m, x_t, t, sched, y=None, rng=None, eps_fn=None):
    """One stochastic denoising step x_t -> x_{t-1}.

    Mean is the eps-form posterior mean; noise sqrt(beta_tilde_t) z is
    added for t > 1 and gated off at t = 1.
    """
    _check_t(t, sched)
    x_t = np.asarray(x_t, dtype=np.float64)
    eps_hat = eps_fn(x_t, t) if eps_fn is not None else m.predict(x_t, t, y, sched)
    mean = mu_tilde_from_eps(x_t, eps_hat, t, sched)
    if t == 1:
        return mean
    z = rng.standard_normal(x_t.shape)
    return mean + np.sqrt(sched.beta_tilde[t]) * z


def ddim_sigma_ddpm_equiv(t, sched):
    """The sigma_t that makes the DDIM family coincide with DDPM.

    Equals sqrt((1-abar_{t-1})/(1-abar_t)) * sqrt(1 - abar_t/abar_{t-1}),
    whose square is beta_tilde_t.
    """
    _check_t(t, sched)
    if t == 1:
        return 0.0
    ab_prev, ab = sched.alpha_bar[t - 1], sched.alpha_bar[t]
    return float(np.sqrt((1.0 - ab_prev) / (1.0 - ab)) * np.sqrt(1.0 - ab / ab_prev))


def ddim_step(m, x_t, t, sigma_t, sched, y=None, rng=None, eps_fn=None):
    """One step of the sigma-parameterised family.

    x_{t-1} = predicted-x0 term + direction term + sigma_t z, with the
    noise drawn only when sigma_t > 0 and t > 1.
    """
    _check_t(t, sched)
    ab_prev = sched.alpha_bar[t - 1]
    if sigma_t < 0.0 or sigma_t ** 2 > 1.0 - ab_prev:
        raise ValueError("sigma_t^2 must lie in [0, 1 - abar_{t-1}]")
    x_t = np.asarray(x_t, dtype=np.float64)
    eps_hat = eps_fn(x_t, t) if eps_fn is not None else m.predict(x_t, t, y, sched)
    ab = sched.alpha_bar[t]
    out = ((x_t - np.sqrt(1.0 - ab) * eps_hat) / np.sqrt(sched.alpha[t])
           + np.sqrt(1.0 - ab_prev - sigma_t ** 2) * eps_hat)
    if sigma_t > 0.0 and t > 1:
        out = out + sigma_t * rng.standard_normal(x_t.shape)
    return out


def _sigma_for(cfg, t, sched):
    if cfg.sigma_policy == "zero":
        return 0.0
    if cfg.sigma_policy == "ddpm":
        return ddim_sigma_ddpm_equiv(t, sched)
    return float(cfg.sigmas[t])


def sample_reverse(m, cfg, sched, y=None, rng=None, eps_fn=None, x_T=None):
    """Run full reverse chains from x_T ~ N(0, I) down to x_0.

    Returns a list of Trajectory, one per chain, with times T..0.  When
    cfg.record is off only the two endpoints are kept.  ``x_T`` overrides
    the initial draw (shape (n_chains, d)); ``eps_fn(x, t)`` replaces the
    model's prediction.
    """
    d = m.data_dim
    n = cfg.n_chains
    x = rng.standard_normal((n, d)) if x_T is None else \
        np.array(x_T, dtype=np.float64).reshape(n, d)
    recorded = [x.copy()]
    for t in range(sched.T, 0, -1):
        if cfg.kind == "ddpm":
            x = ddpm_step(m, x, t, sched, y=y, rng=rng, eps_fn=eps_fn)
        else:
            x = ddim_step(m, x, t, _sigma_for(cfg, t, sched), sched,
                          y=y, rng=rng, eps_fn=eps_fn)
        if cfg.record or t == 1:
            recorded.append(x.copy())
    states = np.stack(recorded)  # (L, n, d)
    times = np.arange(sched.T, -1, -1) if cfg.record else np.array([sched.T, 0])
    return [Trajectory(times=times, states=states[:, i, :]) for i in range(n)]


def final_states(trajectories):
    """Stack the x_0 endpoints of a list of reverse trajectories."""
    return np.stack([tr.states[-1] for tr in trajectories])
