"""Command-line interface: generation, diagnostics, checks, experiments."""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys

import jsonschema
import numpy as np

from . import diagnostics as dg
from . import harness as hn
from . import types_lab as tl
from .matrices import (
    EnsembleParams,
    SparseMatrix,
    generate_mackay,
    generate_uniform,
    rng_from_seed,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


def _out_path(args, default_name: str) -> str:
    if args.out:
        return args.out
    base = os.environ.get("COSETCODE_OUT", ".")
    return os.path.join(base, default_name)


def cmd_gen_matrix(args) -> int:
    params = EnsembleParams(q=args.q, l=args.l, n=args.n, tau=args.tau)
    if args.ensemble == "mackay":
        m = generate_mackay(params, args.seed)
    else:
        m = generate_uniform(args.q, args.l, args.n, args.seed)
    text = m.to_text()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_diag(args) -> int:
    params = EnsembleParams(q=args.q, l=args.l, n=args.n, tau=args.tau,
                            xi=args.xi)
    d = dg.alpha_beta(params, args.n, ensemble=args.ensemble)
    lines = [
        f"# alpha,{float(d.alpha)!r}",
        f"# beta,{float(d.beta)!r}",
        f"# im_ratio,{float(d.im_ratio)!r}",
        "w,p_Aw,C_w,S",
    ]
    for w in range(1, args.n + 1):
        p, cw = d.per_weight[w]
        lines.append(f"{w},{float(p)!r},{cw},{float(p) * cw!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def types_check_report(q: int, n: int, gamma: float, gamma2: float):
    """Run the six type-lemma suites; returns [(name, ok, margin), ...]."""
    mu = tl.Distribution.uniform(q) if q == 2 else tl.Distribution(
        np.array([0.5, 0.3, 0.2][:q] if q == 3 else [1 / q] * q))
    mu_biased = tl.Distribution([0.7, 0.3]) if q == 2 else mu
    joint = tl.Distribution(
        np.outer(mu_biased.p, mu.p) * 0.5
        + np.eye(q)[:mu_biased.p.size, :q] * 0.5 / q)
    results = []
    results.append(("exprob",) + tl.check_exprob(mu_biased, n))
    results.append(("typical-trans",) + tl.check_typical_trans(
        joint, min(n, 8), gamma, gamma2))
    results.append(("type",) + tl.check_type_lemma(mu_biased, n, gamma))
    results.append(("typical-aep",) + tl.check_typical_aep(
        mu_biased, n, min(gamma, 0.125)))
    results.append(("typical-prob",) + tl.check_typical_prob(mu_biased, n, gamma))
    results.append(("typical-number",) + tl.check_typical_number(mu_biased, n, gamma))
    return results


def cmd_types_check(args) -> int:
    results = types_check_report(args.q, args.n, args.gamma, args.gamma2)
    ok_all = True
    for name, ok, margin in results:
        print(f"{'PASS' if ok else 'FAIL'} {name} worst-margin={margin:+.3e}")
        ok_all = ok_all and ok
    return EXIT_OK if ok_all else EXIT_CHECK_FAILED


def cmd_hash_check(args) -> int:
    params = EnsembleParams(q=args.q, l=args.l, n=args.n, tau=args.tau,
                            xi=args.xi)
    diag = dg.alpha_beta(params, args.n)
    mats = dg.enumerate_mackay(params)
    rng = rng_from_seed(args.seed)
    space = list(itertools.product(range(args.q), repeat=args.n))
    failures = 0
    cases = 0
    for _ in range(args.cases):
        size_t = int(rng.integers(1, min(5, len(space)) + 1))
        size_tp = int(rng.integers(1, min(5, len(space)) + 1))
        T = [space[i] for i in rng.choice(len(space), size_t, replace=False)]
        Tp = [space[i] for i in rng.choice(len(space), size_tp, replace=False)]
        lhs, rhs = dg.hash_sum_exhaustive(mats, T, Tp, diag)
        cases += 1
        if lhs > rhs:
            failures += 1
        u = space[int(rng.integers(len(space)))]
        lhs, rhs = dg.collision_bound_check(mats, T, u, diag)
        cases += 1
        if lhs > rhs:
            failures += 1
        lhs, rhs = dg.saturation_bound_check(
            mats, T, diag, dg.ensemble_im_set(args.q, args.l, args.tau))
        cases += 1
        if lhs > rhs:
            failures += 1
    print(f"{'PASS' if failures == 0 else 'FAIL'} hash-check "
          f"cases={cases} violations={failures}")
    return EXIT_OK if failures == 0 else EXIT_CHECK_FAILED


def cmd_run(args) -> int:
    with open(args.config) as fh:
        doc = json.load(fh)
    if args.seed is not None:
        doc["seed"] = args.seed
    cfg = hn.ExperimentConfig.from_dict(doc)
    summary, records = hn.run_experiment(cfg, threads=args.threads)
    prefix = args.out or cfg.out or _out_path(args, f"{cfg.problem}_run")
    csv_path = hn.write_outputs(summary, records, prefix)
    sys.stdout.write(hn.summary_csv(summary))
    print(f"# written: {csv_path}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    """Brute-force cross-checks of the closed forms."""
    ok_all = True
    # kernel-weight probability against full ensemble enumeration
    params = EnsembleParams(q=args.q, l=args.l, n=args.n, tau=args.tau)
    mats = dg.enumerate_mackay(params)
    for w in range(1, args.n + 1):
        u = [1] * w + [0] * (args.n - w)
        closed = dg.return_prob(args.q, args.l, args.tau, w)
        exact = dg.return_prob_exhaustive(mats, u, args.q)
        ok = closed == exact
        ok_all = ok_all and ok
        print(f"{'PASS' if ok else 'FAIL'} return-prob w={w} "
              f"closed={closed} exhaustive={exact}")
    # walk closed form against the weight-class recursion
    worst = 0.0
    for steps in range(args.steps + 1):
        for w in range(args.l + 1):
            a = dg.walk_dist_closed(args.q, args.l, steps, w)
            b = dg.walk_pointwise_recursive(args.q, args.l, steps, w)
            worst = max(worst, abs(float(a - b)))
    ok = worst <= 1e-12
    ok_all = ok_all and ok
    print(f"{'PASS' if ok else 'FAIL'} walk-dist worst-diff={worst:.3e}")
    return EXIT_OK if ok_all else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cosetcode",
        description="Sparse-matrix coset coding: diagnostics, checks, simulators.")
    sub = p.add_subparsers(dest="command")

    def common(sp, with_xi=False):
        sp.add_argument("--q", type=int, default=2)
        sp.add_argument("--l", type=int, default=2)
        sp.add_argument("--n", type=int, default=4)
        sp.add_argument("--tau", type=int, default=2)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", type=str, default=None)
        if with_xi:
            sp.add_argument("--xi", type=float, default=0.25)

    sp = sub.add_parser("gen-matrix", help="draw a matrix and emit its text form")
    common(sp)
    sp.add_argument("--ensemble", choices=["mackay", "uniform"], default="mackay")

    sp = sub.add_parser("diag", help="ensemble diagnostics CSV")
    common(sp, with_xi=True)
    sp.add_argument("--ensemble", choices=["mackay", "uniform"], default="mackay")

    sp = sub.add_parser("types-check", help="run the type-lemma suites")
    sp.add_argument("--q", type=int, default=2)
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--gamma", type=float, default=0.1)
    sp.add_argument("--gamma2", type=float, default=0.1)

    sp = sub.add_parser("hash-check", help="collision-bound suites on a tiny ensemble")
    common(sp, with_xi=True)
    sp.add_argument("--cases", type=int, default=70)

    sp = sub.add_parser("run", help="run a Monte Carlo experiment from a config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--out", type=str, default=None)

    sp = sub.add_parser("oracle", help="brute-force closed-form cross-checks")
    common(sp)
    sp.add_argument("--steps", type=int, default=8)
    return p


COMMANDS = {
    "gen-matrix": cmd_gen_matrix,
    "diag": cmd_diag,
    "types-check": cmd_types_check,
    "hash-check": cmd_hash_check,
    "run": cmd_run,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError, json.JSONDecodeError,
            jsonschema.ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
