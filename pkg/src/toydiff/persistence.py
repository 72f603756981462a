"""Text checkpoints and CSV output.

Checkpoints are diff-able key=value text with one parameter per line,
printed with 17 significant digits so 64-bit floats round-trip exactly.
Schedules are stored by construction arguments, not arrays, and are
rebuilt and revalidated on load.  CSV files start with a '#'-prefixed
metadata comment block sufficient to reproduce them.
"""

import numpy as np

from . import schedules
from .model import Classifier, NoisePredictor

FORMAT_VERSION = 1


def _fmt(v):
    return format(float(v), ".17g")


def save_checkpoint(m, sched, path, seed_note=""):
    """Write model + schedule construction args; bit-exact round trip."""
    kind = "classifier" if isinstance(m, Classifier) else "noise_predictor"
    lines = [
        "# toydiff-checkpoint",
        f"version={FORMAT_VERSION}",
        f"kind={kind}",
        f"data_dim={m.data_dim}",
        "hidden=" + ",".join(str(w) for w in m.hidden),
        ("conditioning=" + ("none" if m.conditioning is None else str(m.conditioning))
         + f"\nskip={int(m.skip)}")
        if kind == "noise_predictor" else f"n_classes={m.n_classes}",
        f"schedule_kind={sched.kind}",
        f"schedule_T={sched.T}",
    ]
    for k, v in sorted(sched.args.items()):
        lines.append(f"schedule_{k}={_fmt(v)}")
    lines.append(f"seed_provenance={seed_note}")
    lines.append(f"n_params={m.n_params}")
    lines.append("params:")
    lines.extend(_fmt(p) for p in m.params)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_checkpoint(path):
    """Read a checkpoint back into (model, schedule)."""
    with open(path) as fh:
        raw = fh.read().splitlines()
    meta, params, in_params = {}, [], False
    for i, line in enumerate(raw, start=1):
        if not line or line.startswith("#"):
            continue
        if in_params:
            try:
                params.append(float(line))
            except ValueError:
                raise ValueError(f"checkpoint parse error at line {i}: {line!r}")
            continue
        if line == "params:":
            in_params = True
            continue
        if "=" not in line:
            raise ValueError(f"checkpoint parse error at line {i}: {line!r}")
        k, v = line.split("=", 1)
        meta[k] = v
    if int(meta.get("version", -1)) != FORMAT_VERSION:
        raise ValueError(f"unknown checkpoint version: {meta.get('version')}")
    n = int(meta["n_params"])
    if len(params) != n:
        raise ValueError(f"checkpoint truncated: expected {n} parameters, "
                         f"got {len(params)} (file ends at line {len(raw)})")

    skind = meta["schedule_kind"]
    T = int(meta["schedule_T"])
    if skind == "linear":
        sched = schedules.make_linear_schedule(
            T, float(meta["schedule_beta_start"]), float(meta["schedule_beta_end"]))
    elif skind == "cosine":
        sched = schedules.make_cosine_schedule(T, float(meta["schedule_offset"]))
    else:
        raise ValueError(f"unknown schedule kind: {skind}")
    schedules.validate_schedule(sched)

    hidden = tuple(int(w) for w in meta["hidden"].split(",")) if meta["hidden"] else ()
    p = np.asarray(params)
    if meta["kind"] == "classifier":
        m = Classifier(int(meta["data_dim"]), hidden, int(meta["n_classes"]), p)
    else:
        cond = meta["conditioning"]
        m = NoisePredictor(int(meta["data_dim"]), hidden,
                           None if cond == "none" else int(cond), p,
                           skip=bool(int(meta.get("skip", 0))))
    return m, sched


def write_csv(path, columns, rows, meta):
    """CSV with '#' metadata block; period decimals, no locale surprises."""
    lines = [f"# {k}={v}" for k, v in meta.items()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, (float, np.floating))
                              else str(v) for v in row))
    out = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(out)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(out)
