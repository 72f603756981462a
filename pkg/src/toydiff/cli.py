"""Command-line surface for reproducible desk-scale experiments.

Subcommands: train, sample, forward, vlb, kl-demo, reparam-demo, hist.
Every command requires --seed and identical invocations produce
byte-identical output files.  Flags override key=value config files,
which override built-in defaults; the defaults are the canonical
1000-step linear [1e-4, 0.02] schedule, with --desk switching to the
desk-scale T=100 profile.

Exit codes: 0 success, 1 usage error, 2 domain error.
"""

import argparse
import sys

import numpy as np

from . import estimators, evaluation, forward, gaussian, guidance, losses, persistence, samplers, schedules, training
from .model import init_classifier, init_noise_predictor
from .persistence import FORMAT_VERSION, write_csv
from .rng import RngState


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _read_config(path):
    cfg = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise _UsageError(f"bad config line: {line!r}")
            k, v = line.split("=", 1)
            cfg[k.strip()] = v.strip()
    return cfg


def _resolve(args, name, default, cast=float):
    """Flag > config-file value > default."""
    val = getattr(args, name.replace("-", "_"), None)
    if val is not None:
        return val
    cfgfile = getattr(args, "config", None)
    if cfgfile:
        cfg = _read_config(cfgfile)
        if name in cfg:
            return cast(cfg[name])
    return default


def _schedule_from(args):
    desk = getattr(args, "desk", False)
    T = int(_resolve(args, "T", 100 if desk else 1000, int))
    kind = _resolve(args, "schedule", "linear", str)
    if kind == "linear":
        return schedules.make_linear_schedule(
            T, _resolve(args, "beta-start", 1e-4), _resolve(args, "beta-end", 0.02))
    if kind == "cosine":
        return schedules.make_cosine_schedule(T, _resolve(args, "offset", 0.008))
    raise _UsageError(f"unknown schedule kind: {kind}")


def _meta(args, extra=None):
    flags = {k: v for k, v in sorted(vars(args).items())
             if k not in ("func",) and v is not None}
    meta = {"format_version": FORMAT_VERSION}
    meta.update({f"flag_{k}": v for k, v in flags.items()})
    if extra:
        meta.update(extra)
    return meta


def _parse_vec(s):
    return np.array([float(v) for v in s.split(",")])


def _cmd_train(args):
    sched = _schedule_from(args)
    data = forward.default_mixture()
    rng = RngState(args.seed)
    steps = int(_resolve(args, "steps", 5000, int))
    cfg = training.TrainConfig(
        steps=steps,
        batch_size=int(_resolve(args, "batch", 64, int)),
        eta=_resolve(args, "eta", 1e-2),
        p_drop=_resolve(args, "p-drop", 0.1),
    )
    hidden = tuple(int(w) for w in _resolve(args, "hidden", "64,64", str).split(","))
    if args.classifier:
        m = init_classifier(data.dim, data.n_components, hidden, rng.spawn(1))
        report = training.train_classifier(m, data, sched, cfg, rng.spawn(2))
    else:
        cond = data.n_components if args.conditional else None
        m = init_noise_predictor(data.dim, hidden, cond, rng.spawn(1))
        report = training.train(m, data, sched, cfg, rng.spawn(2))
    persistence.save_checkpoint(m, sched, args.out, seed_note=f"seed={args.seed}")
    if args.loss_csv:
        write_csv(args.loss_csv, ["step", "loss"],
                  [(s, l) for s, l in report.loss_curve], _meta(args, {"seed": args.seed}))
    return 0


def _cmd_sample(args):
    m, sched = persistence.load_checkpoint(args.checkpoint)
    rng = RngState(args.seed)
    cfg = samplers.SamplerConfig(kind=args.sampler, sigma_policy=args.sigma,
                                 n_chains=args.n)
    if args.guidance == "none":
        trajs = samplers.sample_reverse(m, cfg, sched, y=args.label, rng=rng)
    elif args.guidance == "cfg":
        g = guidance.GuidanceConfig(mode="classifier-free", scale=args.scale,
                                    target=args.label)
        trajs = guidance.guided_sample(m, cfg, g, sched, rng)
    else:
        c, _ = persistence.load_checkpoint(args.classifier)
        g = guidance.GuidanceConfig(mode="classifier", scale=args.scale,
                                    target=args.label, classifier=c)
        trajs = guidance.guided_sample(m, cfg, g, sched, rng)
    x0 = samplers.final_states(trajs)
    cols = ["chain", "t"] + [f"dim{i}" for i in range(m.data_dim)]
    rows = [(i, 0, *x0[i]) for i in range(len(x0))]
    if args.label is not None:
        cols.append("label")
        rows = [r + (args.label,) for r in rows]
    if args.guidance != "none":
        cols.append("guidance_scale")
        rows = [r + (float(args.scale),) for r in rows]
    write_csv(args.out or sys.stdout, cols, rows, _meta(args, {"seed": args.seed}))
    return 0


def _cmd_forward(args):
    sched = _schedule_from(args)
    rng = RngState(args.seed)
    x0 = _parse_vec(args.x0)
    rows, cols = [], None
    for chain in range(args.n):
        tr = forward.simulate_forward(x0, sched, rng.spawn(chain))
        cols = ["chain", "t"] + [f"dim{i}" for i in range(tr.states.shape[1])]
        rows.extend((chain, int(t), *s) for t, s in zip(tr.times, tr.states))
    write_csv(args.out or sys.stdout, cols, rows, _meta(args, {"seed": args.seed}))
    return 0


def _cmd_vlb(args):
    m, sched = persistence.load_checkpoint(args.checkpoint)
    rng = RngState(args.seed)
    rep = losses.vlb_estimate(m, _parse_vec(args.x0), sched, args.M, rng)
    rows = [("L0", 1, rep.L0)]
    rows += [("Lt", t, rep.Lt[t - 2]) for t in range(2, sched.T + 1)]
    rows += [("LT", sched.T, rep.LT), ("total", -1, rep.total)]
    write_csv(args.out or sys.stdout, ["term", "t", "nats"], rows,
              _meta(args, {"seed": args.seed}))
    return 0


def _cmd_kl_demo(args):
    mq, vq = _parse_vec(args.q)
    mp, vp = _parse_vec(args.p)
    q = gaussian.DiagGaussian([mq], [vq])
    p = gaussian.DiagGaussian([mp], [vp])
    closed = gaussian.kl_closed_form(q, p)
    rng = RngState(args.seed)
    rows = []
    for M in (10, 100, 1000, 10000, args.M):
        rows.append((M, closed, gaussian.kl_mc(q, p, M, rng)))
    write_csv(args.out or sys.stdout, ["M", "closed_form", "mc_estimate"], rows,
              _meta(args, {"seed": args.seed}))
    return 0


def _cmd_reparam_demo(args):
    theta = _parse_vec(args.theta)
    rng = RngState(args.seed)
    rows = []
    for M in (100, 1000, 10000, args.M):
        g = estimators.reparam_grad(theta, M, rng.spawn(M))
        rows.append((M, g[0], g[1]))
    write_csv(args.out or sys.stdout, ["M", "grad_theta1", "grad_theta2"], rows,
              _meta(args, {"seed": args.seed}))
    return 0


def _cmd_hist(args):
    with open(args.input) as fh:
        lines = [l for l in fh.read().splitlines() if l and not l.startswith("#")]
    header = lines[0].split(",")
    col = header.index("dim0")
    vals = np.array([float(l.split(",")[col]) for l in lines[1:]])
    edges = np.linspace(vals.min(), vals.max(), args.bins + 1)
    counts, edges = np.histogram(vals, bins=edges)
    rows = [(float(edges[i]), float(edges[i + 1]), int(counts[i]))
            for i in range(len(counts))]
    write_csv(args.out or sys.stdout, ["lo", "hi", "count"], rows,
              _meta(args, {"seed": args.seed}))
    return 0


def _add_schedule_flags(p):
    p.add_argument("--T", type=int, default=None)
    p.add_argument("--schedule", choices=["linear", "cosine"], default=None)
    p.add_argument("--beta-start", type=float, default=None)
    p.add_argument("--beta-end", type=float, default=None)
    p.add_argument("--offset", type=float, default=None)
    p.add_argument("--desk", action="store_true",
                   help="desk-scale profile: T=100 unless --T is given")
    p.add_argument("--config", default=None, help="key=value config file")


def build_parser():
    ap = _Parser(prog="toydiff", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn):
        p = sub.add_parser(name)
        p.add_argument("--seed", type=int, required=True)
        p.set_defaults(func=fn)
        return p

    p = add("train", _cmd_train)
    _add_schedule_flags(p)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--p-drop", type=float, default=None)
    p.add_argument("--hidden", default=None)
    p.add_argument("--conditional", action="store_true")
    p.add_argument("--classifier", action="store_true",
                   help="train the class predictor instead of the noise predictor")
    p.add_argument("--out", required=True)
    p.add_argument("--loss-csv", default=None)

    p = add("sample", _cmd_sample)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--sampler", choices=["ddpm", "ddim"], default="ddpm")
    p.add_argument("--sigma", choices=["zero", "ddpm"], default="zero")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--label", type=int, default=None)
    p.add_argument("--guidance", choices=["none", "cfg", "classifier"], default="none")
    p.add_argument("--scale", type=float, default=0.0)
    p.add_argument("--classifier", default=None, help="classifier checkpoint path")
    p.add_argument("--out", default=None)

    p = add("forward", _cmd_forward)
    _add_schedule_flags(p)
    p.add_argument("--x0", required=True, help="comma-separated start vector")
    p.add_argument("--n", type=int, default=1, help="number of trajectories")
    p.add_argument("--out", default=None)

    p = add("vlb", _cmd_vlb)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--x0", required=True)
    p.add_argument("--M", type=int, default=1)
    p.add_argument("--out", default=None)

    p = add("kl-demo", _cmd_kl_demo)
    p.add_argument("--q", required=True, help="mean,var of q")
    p.add_argument("--p", required=True, help="mean,var of p")
    p.add_argument("--M", type=int, default=100000)
    p.add_argument("--out", default=None)

    p = add("reparam-demo", _cmd_reparam_demo)
    p.add_argument("--theta", default="0.5,1.5")
    p.add_argument("--M", type=int, default=100000)
    p.add_argument("--out", default=None)

    p = add("hist", _cmd_hist)
    p.add_argument("--input", required=True)
    p.add_argument("--bins", type=int, default=40)
    p.add_argument("--out", default=None)

    return ap


def run_cli(argv):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        ap.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except (ValueError, FloatingPointError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main():
    sys.exit(run_cli(sys.argv[1:]))
