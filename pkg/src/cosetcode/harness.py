"""Seeded Monte Carlo runner for the coding schemes.

Each trial derives its own seed from the master seed, so results are
byte-identical regardless of thread count or scheduling.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from . import schemes as sc
from .matrices import derive_seed, rng_from_seed
from .types_lab import Distribution

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["problem", "n", "trials", "seed", "scheme"],
    "properties": {
        "problem": {"enum": list(sc.PROBLEMS) + ["channel"]},
        "n": {"type": "array", "items": {"type": "integer", "minimum": 1},
              "minItems": 1},
        "trials": {"type": "integer", "minimum": 1},
        "best_of": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "ensemble": {"enum": ["mackay", "uniform"]},
        "tau": {"type": "integer", "minimum": 1},
        "out": {"type": "string"},
        "scheme": {"type": "object"},
    },
}

SCHEME_KEYS = {
    "sw": {"joint", "rate_x", "rate_y"},
    "ch": {"mu_x", "channel", "eps_a", "eps_b"},
    "gp": {"mu_z", "mu_xw_z", "channel", "eps_a", "eps_b", "eps_ahat"},
    "lossy": {"mu_x", "test_channel", "rho", "eps_a", "eps_b"},
    "wz": {"mu_xz", "test_channel", "f", "rho", "eps_a", "eps_b"},
    "oho": {"mu_xy", "channel", "eps_a", "eps_b", "eps_bhat"},
}


@dataclass
class ExperimentConfig:
    """Validated experiment description."""

    problem: str
    n_list: list
    trials: int
    seed: int
    scheme: dict
    best_of: int = 8
    ensemble: str = "mackay"
    tau: object = None
    out: object = None

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        jsonschema.validate(doc, CONFIG_SCHEMA)
        problem = doc["problem"]
        if problem == "channel":
            problem = "ch"
        extra = set(doc["scheme"]) - SCHEME_KEYS[problem]
        if extra:
            raise ValueError(f"unknown scheme keys for {problem}: {sorted(extra)}")
        missing = SCHEME_KEYS[problem] - set(doc["scheme"])
        if missing:
            raise ValueError(f"missing scheme keys for {problem}: {sorted(missing)}")
        return cls(
            problem=problem,
            n_list=list(doc["n"]),
            trials=doc["trials"],
            seed=doc["seed"],
            scheme=doc["scheme"],
            best_of=doc.get("best_of", 8),
            ensemble=doc.get("ensemble", "mackay"),
            tau=doc.get("tau"),
            out=doc.get("out"),
        )

    def scheme_params(self, warn: bool = False) -> sc.SchemeParams:
        s = self.scheme
        if self.problem == "sw":
            return sc.sw_params(Distribution(s["joint"]), s["rate_x"], s["rate_y"])
        if self.problem == "ch":
            return sc.ch_params(s["mu_x"], s["channel"], s["eps_a"], s["eps_b"],
                                warn=warn)
        if self.problem == "gp":
            return sc.gp_params(s["mu_z"], s["mu_xw_z"], s["channel"],
                                s["eps_a"], s["eps_b"], s["eps_ahat"], warn=warn)
        if self.problem == "lossy":
            return sc.lossy_params(s["mu_x"], s["test_channel"], s["rho"],
                                   s["eps_a"], s["eps_b"], warn=warn)
        if self.problem == "wz":
            return sc.wz_params(Distribution(s["mu_xz"]), s["test_channel"],
                                s["f"], s["rho"], s["eps_a"], s["eps_b"],
                                warn=warn)
        return sc.oho_params(Distribution(s["mu_xy"]), s["channel"],
                             s["eps_a"], s["eps_b"], s["eps_bhat"], warn=warn)


@dataclass
class TrialRecord:
    """Outcome of one simulated block."""

    n: int
    draw: int
    trial: int
    seed: int
    ok: object  # bool for error-probability problems, None otherwise
    distortion: object  # float for distortion problems, None otherwise
    encoder_failure: bool
    seconds: float = 0.0

    def __post_init__(self):
        if self.encoder_failure and self.ok:
            raise ValueError("an encoder failure cannot be a success")


def sample_source(mu, n: int, seed) -> np.ndarray:
    """i.i.d. sampling by inverse CDF; joint pmfs yield index tuples."""
    p = np.asarray(getattr(mu, "p", mu), dtype=float)
    flat = p.ravel()
    cdf = np.cumsum(flat)
    u = rng_from_seed(seed).random(n)
    idx = np.searchsorted(cdf, u, side="right")
    idx = np.minimum(idx, flat.size - 1)
    if p.ndim == 1:
        return idx.astype(np.int64)
    return tuple(a.astype(np.int64) for a in np.unravel_index(idx, p.shape))


def sample_channel(cond, inputs, seed) -> np.ndarray:
    """Memoryless channel: cond indexed [input..., output]."""
    cond = np.asarray(cond, dtype=float)
    if not isinstance(inputs, tuple):
        inputs = (inputs,)
    inputs = tuple(np.asarray(v, dtype=np.int64) for v in inputs)
    n = inputs[0].size
    rows = cond[inputs]  # (n, q_out)
    cdf = np.cumsum(rows, axis=1)
    u = rng_from_seed(seed).random(n)
    out = (u[:, None] > cdf).sum(axis=1)
    return np.minimum(out, cond.shape[-1] - 1).astype(np.int64)


def distortion_of(x, w, rho) -> float:
    """Average per-symbol distortion of a reproduction."""
    x = np.asarray(x, dtype=np.int64)
    w = np.asarray(w, dtype=np.int64)
    if x.shape != w.shape:
        raise ValueError("length mismatch")
    rho = np.asarray(rho, dtype=float)
    return float(rho[x, w].mean())


def wilson_interval(successes: int, total: int, z: float = 1.959963984540054):
    """Wilson score interval for a binomial proportion."""
    if total == 0:
        return (0.0, 1.0)
    phat = successes / total
    denom = 1 + z * z / total
    center = (phat + z * z / (2 * total)) / denom
    half = z * math.sqrt(phat * (1 - phat) / total + z * z / (4 * total * total)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def run_trial(problem: str, params: sc.SchemeParams, inst: sc.SchemeInstance,
              seed: int):
    """One block: sample, encode, transmit, decode.

    Returns (ok, distortion, encoder_failure); decoder outputs are checked
    against their syndrome contracts and violations raise AssertionError.
    """
    n = inst.n
    try:
        if problem == "sw":
            x, y = sample_source(params.joint, n, derive_seed(seed, "src"))
            bx, by = sc.sw_encode_x(inst, x), sc.sw_encode_y(inst, y)
            xh, yh = sc.sw_decode(inst, params, bx, by)
            assert np.array_equal(inst.matrices["A"].matvec(xh), bx)
            assert np.array_equal(inst.matrices["B"].matvec(yh), by)
            return (bool(np.array_equal(xh, x) and np.array_equal(yh, y)),
                    None, False)
        if problem == "ch":
            m = sc.sample_message(inst, derive_seed(seed, "msg"))
            x = sc.ch_encode(inst, params, m)
            assert np.array_equal(inst.matrices["B"].matvec(x), m)
            y = sample_channel(params.cond("y", "x"), x, derive_seed(seed, "chan"))
            mh = sc.ch_decode(inst, params, y)
            return bool(np.array_equal(mh, m)), None, False
        if problem == "gp":
            m = sc.sample_message(inst, derive_seed(seed, "msg"))
            z = sample_source(params.marg("z"), n, derive_seed(seed, "side"))
            x = sc.gp_encode(inst, params, m, z)
            y = sample_channel(params.cond("y", "xz"), (x, z),
                               derive_seed(seed, "chan"))
            mh = sc.gp_decode(inst, params, y)
            return bool(np.array_equal(mh, m)), None, False
        if problem == "lossy":
            x = sample_source(params.marg("x"), n, derive_seed(seed, "src"))
            b = sc.lossy_encode(inst, params, x)
            y = sc.lossy_decode(inst, params, b)
            assert np.array_equal(inst.matrices["B"].matvec(y), b)
            return None, distortion_of(x, y, params.rho), False
        if problem == "wz":
            x, z = sample_source(params.joint.marginal(
                (params.axis("x"), params.axis("z"))), n, derive_seed(seed, "src"))
            b = sc.wz_encode(inst, params, x)
            w = sc.wz_decode(inst, params, b, z)
            return None, distortion_of(x, w, params.rho), False
        if problem == "oho":
            x, y = sample_source(params.joint.marginal(
                (params.axis("x"), params.axis("y"))), n, derive_seed(seed, "src"))
            bx, by = sc.oho_encode_x(inst, x), sc.oho_encode_y(inst, params, y)
            xh = sc.oho_decode(inst, params, bx, by)
            assert np.array_equal(inst.matrices["Bhat"].matvec(xh), bx)
            return bool(np.array_equal(xh, x)), None, False
        raise ValueError(f"unknown problem {problem!r}")
    except sc.EncoderFailure:
        rho_max = float(np.max(params.rho)) if params.rho is not None else None
        if problem in ("lossy", "wz"):
            return None, rho_max, True
        return False, None, True


def _rate_fields(problem: str, inst: sc.SchemeInstance) -> dict:
    if problem == "sw":
        return {"rate_x": sc.rate_of(inst.matrices["A"], inst.n),
                "rate_y": sc.rate_of(inst.matrices["B"], inst.n)}
    if problem == "oho":
        return {"rate_x": sc.rate_of(inst.matrices["Bhat"], inst.n),
                "rate_y": sc.rate_of(inst.matrices["B"], inst.n)}
    return {"rate": sc.rate_of(inst.matrices["B"], inst.n)}


def run_experiment(cfg: ExperimentConfig, threads: int = 1):
    """Run all (n, draw, trial) cells; returns (summary dict, records).

    Per code draw the trial outcomes are aggregated; the per-n row reports
    the best draw and the mean over draws.
    """
    params = cfg.scheme_params()
    records = []
    rows = []
    started = time.monotonic()
    for n in cfg.n_list:
        draws = []
        rate_fields = None
        for k in range(cfg.best_of):
            inst = sc.build_instance(params, n, derive_seed(cfg.seed, "inst", n, k),
                                     ensemble=cfg.ensemble, tau=cfg.tau)
            if rate_fields is None:
                rate_fields = _rate_fields(cfg.problem, inst)
            seeds = [derive_seed(cfg.seed, "trial", n, k, t)
                     for t in range(cfg.trials)]

            def one(args):
                t, s = args
                t0 = time.monotonic()
                ok, dist, fail = run_trial(cfg.problem, params, inst, s)
                return TrialRecord(n=n, draw=k, trial=t, seed=s, ok=ok,
                                   distortion=dist, encoder_failure=fail,
                                   seconds=time.monotonic() - t0)

            if threads > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    recs = list(pool.map(one, enumerate(seeds)))
            else:
                recs = [one(a) for a in enumerate(seeds)]
            records.extend(recs)
            if cfg.problem in ("lossy", "wz"):
                vals = [r.distortion for r in recs]
                metric = float(np.mean(vals))
                sd = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
                half = 1.959963984540054 * sd / math.sqrt(len(vals))
                ci = (metric - half, metric + half)
            else:
                errs = sum(1 for r in recs if not r.ok)
                metric = errs / len(recs)
                ci = wilson_interval(errs, len(recs))
            fails = sum(1 for r in recs if r.encoder_failure)
            draws.append({"draw": k, "metric": metric, "ci": ci,
                          "encoder_failures": fails})
        best = min(draws, key=lambda d: (d["metric"], d["draw"]))
        row = {"n": n, **rate_fields,
               "best_metric": best["metric"],
               "mean_metric": float(np.mean([d["metric"] for d in draws])),
               "best_ci_lo": best["ci"][0], "best_ci_hi": best["ci"][1],
               "encoder_failures": sum(d["encoder_failures"] for d in draws)}
        rows.append(row)
    summary = {
        "problem": cfg.problem,
        "trials": cfg.trials,
        "best_of": cfg.best_of,
        "seed": cfg.seed,
        "metric": "distortion" if cfg.problem in ("lossy", "wz") else "block_error",
        "rows": rows,
        "wall_seconds": time.monotonic() - started,
    }
    return summary, records


def summary_csv(summary: dict) -> str:
    """Deterministic CSV of the per-n rows (no timing fields)."""
    rows = summary["rows"]
    cols = list(rows[0].keys())
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in cols))
    return "\n".join(lines) + "\n"


def records_csv(records) -> str:
    cols = ["n", "draw", "trial", "seed", "ok", "distortion", "encoder_failure"]
    lines = [",".join(cols)]
    for r in records:
        lines.append(",".join(_fmt(getattr(r, c)) for c in cols))
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


PLOT_SCRIPT = """set datafile separator ','
set key autotitle columnhead
set xlabel 'n'
set ylabel '{metric}'
plot '{csv}' using 1:{col} with linespoints title 'best', \\
     '{csv}' using 1:{mcol} with linespoints title 'mean'
"""


def write_outputs(summary: dict, records, prefix: str):
    """Persist CSV + JSON summary + a companion gnuplot script."""
    csv_path = f"{prefix}.csv"
    with open(csv_path, "w") as fh:
        fh.write(summary_csv(summary))
    with open(f"{prefix}_records.csv", "w") as fh:
        fh.write(records_csv(records))
    with open(f"{prefix}.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    cols = list(summary["rows"][0].keys())
    with open(f"{prefix}.gp", "w") as fh:
        fh.write(PLOT_SCRIPT.format(
            metric=summary["metric"], csv=csv_path,
            col=cols.index("best_metric") + 1,
            mcol=cols.index("mean_metric") + 1))
    return csv_path
