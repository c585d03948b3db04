"""Ensemble diagnostics: kernel-weight probabilities, walk law, alpha/beta.

All closed forms are alternating sums; the default path uses exact rational
arithmetic and falls back to signed log-domain floats for large parameters.
"""

from __future__ import annotations

import itertools
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .matrices import EnsembleParams

# exact rational arithmetic is used within these limits
EXACT_L_LIMIT = 64
EXACT_POWER_LIMIT = 4096

ENUM_BUDGET = 1 << 20


def _use_exact(l: int, power: int, mode: str) -> bool:
    if mode == "exact":
        if l > EXACT_L_LIMIT or power > EXACT_POWER_LIMIT:
            raise OverflowError(
                "exact mode infeasible here; request mode='float'")
        return True
    if mode == "float":
        return False
    if mode != "auto":
        raise ValueError(f"unknown mode {mode!r}")
    return l <= EXACT_L_LIMIT and power <= EXACT_POWER_LIMIT


def _signed_log_sum(terms):
    """Sum of sign*2^... style terms given as (sign, log_magnitude) pairs.

    Returns (value, cancellation_flag); the flag trips when the result is
    smaller than 1e-6 times the largest magnitude involved.
    """
    terms = [(s, lm) for s, lm in terms if s != 0]
    if not terms:
        return 0.0, False
    top = max(lm for _, lm in terms)
    vals = [s * math.exp(lm - top) for s, lm in terms]
    total = math.fsum(vals)
    cancel = abs(total) < 1e-6 * math.fsum(abs(v) for v in vals)
    return total * math.exp(top), cancel


def return_prob(q: int, l: int, tau: int, w: int, mode: str = "auto"):
    """Probability that a sparse-ensemble matrix maps a fixed weight-w
    vector to zero: (1/q^l) sum_k (1 - qk/((q-1)l))^{w tau} C(l,k)(q-1)^k."""
    if w < 1 or l < 1 or tau < 1:
        raise ValueError("need w >= 1, l >= 1, tau >= 1")
    power = w * tau
    if _use_exact(l, power, mode):
        total = Fraction(0)
        for k in range(l + 1):
            base = 1 - Fraction(q * k, (q - 1) * l)
            total += base**power * math.comb(l, k) * (q - 1) ** k
        return total / q**l
    terms = []
    for k in range(l + 1):
        base = 1.0 - (q * k) / ((q - 1) * l)
        coef = math.lgamma(l + 1) - math.lgamma(k + 1) - math.lgamma(l - k + 1)
        coef += k * math.log(q - 1)
        if base == 0.0:
            continue
        sign = 1 if base > 0 or power % 2 == 0 else -1
        terms.append((sign, power * math.log(abs(base)) + coef))
    total, cancel = _signed_log_sum(terms)
    if cancel:
        warnings.warn("severe cancellation in return_prob; value unreliable")
    return total / q**l


def _sign_pattern(l: int, w: int, k: int):
    """sum_{k'} C(w,k') C(l-w,k-k') (-1)^{k'} (q-1)^{k-k'} as exact integer
    coefficients of (q-1)^j; evaluated by the caller."""
    for kp in range(max(0, k - (l - w)), min(w, k) + 1):
        yield kp, math.comb(w, kp) * math.comb(l - w, k - kp)


def walk_dist_closed(q: int, l: int, steps: int, w_c: int, mode: str = "auto"):
    """Probability that the coordinate walk sits at a fixed vector of weight
    w_c after `steps` uniform single-coordinate nonzero additions."""
    if not (0 <= w_c <= l):
        raise ValueError("w_c must be in [0, l]")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if _use_exact(l, steps, mode):
        total = Fraction(0)
        for k in range(l + 1):
            base = 1 - Fraction(q * k, (q - 1) * l)
            kraw = sum(
                coef * (-1) ** kp * (q - 1) ** (k - kp)
                for kp, coef in _sign_pattern(l, w_c, k)
            )
            total += base**steps * kraw
        return total / q**l
    total = 0.0
    for k in range(l + 1):
        base = 1.0 - (q * k) / ((q - 1) * l)
        kraw = sum(
            coef * (-1) ** kp * (q - 1) ** (k - kp)
            for kp, coef in _sign_pattern(l, w_c, k)
        )
        total += base**steps * kraw
    return total / q**l


def walk_dist_recursive(q: int, l: int, steps: int):
    """Exact distribution over weight classes of the coordinate walk.

    Dynamic programming over weights: each step picks a coordinate uniformly
    and adds a uniform nonzero field element.  Returns mass[w] for w=0..l.
    """
    if q**l > ENUM_BUDGET:
        raise ValueError("state space exceeds enumeration budget")
    mass = [Fraction(0)] * (l + 1)
    mass[0] = Fraction(1)
    down = Fraction(1, q - 1)
    stay = Fraction(q - 2, q - 1)
    for _ in range(steps):
        nxt = [Fraction(0)] * (l + 1)
        for w, m in enumerate(mass):
            if m == 0:
                continue
            hit_nz = Fraction(w, l)
            nxt[w] += m * hit_nz * stay
            if w > 0:
                nxt[w - 1] += m * hit_nz * down
            if w < l:
                nxt[w + 1] += m * Fraction(l - w, l)
        mass = nxt
    return mass


def walk_pointwise_recursive(q: int, l: int, steps: int, w_c: int) -> Fraction:
    """Per-vector probability from the weight-class recursion (oracle for
    walk_dist_closed); all vectors of equal weight are equiprobable."""
    mass = walk_dist_recursive(q, l, steps)
    return mass[w_c] / (math.comb(l, w_c) * (q - 1) ** w_c)


def spectrum(q: int, n: int, l: int, tau: int, w: int, mode: str = "auto"):
    """Expected number of kernel vectors of weight w: C(n,w)(q-1)^w p_{A,w}."""
    if not (1 <= w <= n):
        raise ValueError("w must be in [1, n]")
    size = math.comb(n, w) * (q - 1) ** w
    return size * return_prob(q, l, tau, w, mode=mode)


def ensemble_im_size(q: int, l: int, tau: int | None = None,
                     ensemble: str = "mackay") -> int:
    """Size of the union of ranges over the ensemble.

    For the sparse ensemble with q=2 and even tau every output has even
    weight, halving the reachable space; otherwise the full space."""
    if ensemble == "uniform":
        return q**l
    if ensemble != "mackay":
        raise ValueError(f"unknown ensemble {ensemble!r}")
    if q == 2 and tau is not None and tau % 2 == 0:
        return q**l // 2
    return q**l


def ensemble_im_set(q: int, l: int, tau: int | None = None,
                    ensemble: str = "mackay"):
    """Explicit union-of-ranges vectors (desk scale only)."""
    out = []
    for c in itertools.product(range(q), repeat=l):
        if (
            ensemble == "mackay"
            and q == 2
            and tau is not None
            and tau % 2 == 0
            and sum(c) % 2 != 0
        ):
            continue
        out.append(c)
    return out


@dataclass
class HashDiagnostics:
    """Collision/low-weight diagnostics of one matrix ensemble."""

    q: int
    l: int
    n: int
    xi: float
    alpha: object
    beta: object
    im_size: int
    im_ratio: object
    per_weight: dict
    mode: str

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")
        if self.im_size > self.q**self.l:
            raise ValueError("image cannot exceed the full space")


def alpha_beta(params: EnsembleParams, n: int, ensemble: str = "mackay",
               mode: str = "auto") -> HashDiagnostics:
    """alpha = |Im| max_{w > xi l} p_{A,w}; beta = sum_{w <= xi l} |C_w| p_{A,w}."""
    q, l, tau, xi = params.q, params.l, params.tau, params.xi
    im = ensemble_im_size(q, l, tau, ensemble)
    per_weight = {}
    for w in range(1, n + 1):
        if ensemble == "uniform":
            p = Fraction(1, q**l) if mode != "float" else q ** (-float(l))
        else:
            p = return_prob(q, l, tau, w, mode=mode)
        per_weight[w] = (p, math.comb(n, w) * (q - 1) ** w)
    cutoff = xi * l
    high = [per_weight[w][0] for w in range(1, n + 1) if w > cutoff]
    alpha = im * max(high) if high else (Fraction(0) if mode != "float" else 0.0)
    beta = sum(
        per_weight[w][0] * per_weight[w][1]
        for w in range(1, n + 1)
        if w <= cutoff
    )
    if not isinstance(beta, (Fraction, float)):
        beta = Fraction(beta)
    used_exact = isinstance(alpha, Fraction) or isinstance(beta, Fraction)
    im_ratio = Fraction(im, q**l) if used_exact else im / q**l
    return HashDiagnostics(
        q=q, l=l, n=n, xi=xi, alpha=alpha, beta=beta, im_size=im,
        im_ratio=im_ratio, per_weight=per_weight,
        mode="exact" if used_exact else "float",
    )


@dataclass(frozen=True)
class ProductDiagnostics:
    """alpha/beta for a combination of two independent ensembles."""

    alpha: object
    beta: object
    im_size: int


def stacked_diagnostics(da: HashDiagnostics, db: HashDiagnostics) -> ProductDiagnostics:
    """u -> (Au, Bu): alpha multiplies, beta takes the smaller ensemble's."""
    return ProductDiagnostics(
        alpha=da.alpha * db.alpha,
        beta=min(da.beta, db.beta),
        im_size=da.im_size * db.im_size,
    )


def paired_diagnostics(da: HashDiagnostics, db: HashDiagnostics) -> ProductDiagnostics:
    """(u,v) -> (Au, Bv): cross terms enter beta."""
    beta = (
        da.alpha * db.beta / Fraction(da.im_size)
        + db.alpha * da.beta / Fraction(db.im_size)
        + da.beta * db.beta
    )
    return ProductDiagnostics(
        alpha=da.alpha * db.alpha, beta=beta,
        im_size=da.im_size * db.im_size,
    )


def xi_feasible(q: int, rate: float, xi: float) -> bool:
    """Low-weight cutoff admissibility: h(xi R)/R + xi ln(q-1) < 1/3,
    with h the natural-log binary entropy."""
    if xi <= 0 or rate <= 0:
        raise ValueError("xi and rate must be positive")
    x = xi * rate
    if x > 1:
        raise ValueError("xi * rate must be <= 1")
    if x in (0.0, 1.0):
        h = 0.0
    else:
        h = -x * math.log(x) - (1 - x) * math.log(1 - x)
    return h / rate + xi * math.log(q - 1) < 1 / 3


def default_xi(q: int, rate: float) -> float:
    """Smallest feasible cutoff on the grid 0.005, 0.010, ..., 0.5."""
    for i in range(1, 101):
        xi = i * 0.005
        if xi * rate <= 1 and xi_feasible(q, rate, xi):
            return xi
    raise ValueError(f"no feasible xi on the grid for q={q}, rate={rate}")


# -- exhaustive tiny-ensemble oracles ----------------------------------------

def enumerate_column_outcomes(q: int, l: int, tau: int):
    """Distribution over single columns induced by tau uniform draws of
    (row, nonzero value); returns {column tuple: Fraction probability}."""
    options = [(j, a) for j in range(l) for a in range(1, q)]
    n_out = len(options) ** tau
    if n_out > ENUM_BUDGET:
        raise ValueError("column outcome space exceeds enumeration budget")
    dist = Counter()
    p = Fraction(1, n_out)
    for seq in itertools.product(options, repeat=tau):
        col = [0] * l
        for j, a in seq:
            col[j] = (col[j] + a) % q
        dist[tuple(col)] += p
    return dict(dist)


def enumerate_mackay(params: EnsembleParams, budget: int = ENUM_BUDGET):
    """All matrices of the tiny sparse ensemble with exact probabilities."""
    q, l, n, tau = params.q, params.l, params.n, params.tau
    if (l * (q - 1)) ** (tau * n) > budget:
        raise ValueError("generation outcome space exceeds enumeration budget")
    col_dist = enumerate_column_outcomes(q, l, tau)
    items = sorted(col_dist.items())
    out = []
    for cols in itertools.product(items, repeat=n):
        dense = np.array([c for c, _ in cols], dtype=np.int64).T.reshape(l, n)
        prob = math.prod((p for _, p in cols), start=Fraction(1))
        out.append((dense, prob))
    return out


def enumerate_uniform(q: int, l: int, n: int, budget: int = ENUM_BUDGET):
    """All l x n matrices over GF(q), equiprobable."""
    count = q ** (l * n)
    if count > budget:
        raise ValueError("matrix space exceeds enumeration budget")
    p = Fraction(1, count)
    out = []
    for flat in itertools.product(range(q), repeat=l * n):
        out.append((np.array(flat, dtype=np.int64).reshape(l, n), p))
    return out


def return_prob_exhaustive(matrices, u, q: int) -> Fraction:
    """Exact ensemble probability of A u = 0 by full enumeration."""
    u = np.asarray(u, dtype=np.int64)
    total = Fraction(0)
    for dense, prob in matrices:
        if not np.any((dense @ u) % q):
            total += prob
    return total


def hash_sum_exhaustive(matrices, T, Tp, diag):
    """Exact collision sum over T x T' versus the ensemble bound.

    Returns (lhs, rhs); lhs = sum over pairs of the probability of a
    syndrome collision, rhs = |T cap T'| + |T||T'| alpha/|Im| + min beta.
    """
    q = diag.q
    T = [tuple(int(x) % q for x in u) for u in T]
    Tp = [tuple(int(x) % q for x in u) for u in Tp]
    lhs = Fraction(0)
    for dense, prob in matrices:
        syn_t = Counter(tuple((dense @ np.array(u)) % q) for u in T)
        syn_tp = Counter(tuple((dense @ np.array(u)) % q) for u in Tp)
        hits = sum(c * syn_tp.get(s, 0) for s, c in syn_t.items())
        lhs += prob * hits
    inter = len(set(T) & set(Tp))
    rhs = (
        inter
        + Fraction(len(T) * len(Tp)) * diag.alpha / diag.im_size
        + min(len(T), len(Tp)) * diag.beta
    )
    return lhs, rhs


def collision_bound_check(matrices, G, u, diag):
    """Probability that some other member of G shares u's bin, versus the
    bound |G| alpha/|Im| + beta.  Returns (lhs, rhs)."""
    q = diag.q
    u = np.asarray(u, dtype=np.int64) % q
    others = [np.array(g, dtype=np.int64) % q for g in G
              if tuple(int(x) % q for x in g) != tuple(u)]
    lhs = Fraction(0)
    for dense, prob in matrices:
        su = tuple((dense @ u) % q)
        if any(tuple((dense @ g) % q) == su for g in others):
            lhs += prob
    rhs = Fraction(len(G)) * diag.alpha / diag.im_size + diag.beta
    return lhs, rhs


def saturation_bound_check(matrices, T, diag, im_set):
    """Probability over (A, c uniform on the ensemble image) that bin c
    misses T, versus alpha - 1 + |Im|(beta+1)/|T|.  Returns (lhs, rhs)."""
    if not T:
        raise ValueError("T must be nonempty")
    q = diag.q
    T = [np.array(u, dtype=np.int64) % q for u in T]
    im_list = [tuple(c) for c in im_set]
    lhs = Fraction(0)
    for dense, prob in matrices:
        reached = {tuple((dense @ u) % q) for u in T}
        missing = sum(1 for c in im_list if c not in reached)
        lhs += prob * Fraction(missing, len(im_list))
    rhs = diag.alpha - 1 + Fraction(diag.im_size) * (diag.beta + 1) / len(T)
    return lhs, rhs
