"""Six coset-coding constructions: fixed matrices + shared vectors, with
pure encode/decode functions and dimension/rate bookkeeping.

Problems: sw (two correlated sources), ch (point-to-point channel),
gp (channel with encoder side information), lossy (rate-distortion),
wz (lossy with decoder side information), oho (one source helped by a
rate-limited second source).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cosets import (
    EmptyCosetError,
    log_table,
    ml_code_cond_iid,
    ml_code_iid,
    ml_code_product,
    solve_coset,
)
from .matrices import (
    EnsembleParams,
    SparseMatrix,
    derive_seed,
    generate_mackay,
    generate_uniform,
    recommended_tau,
    rng_from_seed,
    sample_image_point,
)
from .cosets import _argbest_lex
from .types_lab import Distribution, entropy

PROBLEMS = ("sw", "ch", "gp", "lossy", "wz", "oho")


class EncoderFailure(Exception):
    """A constrained search came up empty; counted as a block error."""


def _joint_entropy(p: np.ndarray, axes) -> float:
    keep = tuple(axes)
    drop = tuple(a for a in range(p.ndim) if a not in keep)
    m = p.sum(axis=drop) if drop else p
    return entropy(m)


def _cond_h(p: np.ndarray, out_axes, given_axes) -> float:
    """H(out | given) = H(out+given) - H(given), in bits."""
    return _joint_entropy(p, tuple(out_axes) + tuple(given_axes)) - (
        _joint_entropy(p, given_axes) if given_axes else 0.0
    )


def _mutual(p: np.ndarray, axes_a, axes_b) -> float:
    return (
        _joint_entropy(p, axes_a)
        + _joint_entropy(p, axes_b)
        - _joint_entropy(p, tuple(axes_a) + tuple(axes_b))
    )


def _zeta(size: int, gamma: float) -> float:
    s = math.sqrt(2 * gamma)
    return gamma - s * math.log2(s / size)


@dataclass
class SchemeParams:
    """One problem setup: joint law over the named variables plus tuning.

    `joint` axes follow `axes` ordering; epsilons drive the dimension
    formulas; `rho` and `f` are tables for the distortion problems.
    """

    problem: str
    joint: Distribution
    axes: tuple
    eps: dict = field(default_factory=dict)
    gamma: float = 0.05
    rho: object = None
    f: object = None
    rate_x: object = None
    rate_y: object = None
    warn: bool = True

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}")
        self.validate()

    def axis(self, name: str) -> int:
        return self.axes.index(name)

    def card(self, name: str) -> int:
        return self.joint.p.shape[self.axis(name)]

    def cond(self, out: str, given: str) -> np.ndarray:
        """Conditional table indexed [given..., out...]."""
        keep = tuple(self.axis(a) for a in given + out)
        marg = self.joint.p.sum(
            axis=tuple(a for a in range(self.joint.p.ndim) if a not in keep)
        )
        # reorder to (given..., out...) then condition on the leading axes
        order = sorted(keep)
        wanted = [self.axis(a) for a in given + out]
        d = Distribution(np.transpose(marg, _perm_of(order, wanted)))
        return d.conditional(tuple(range(len(given))))

    def marg(self, names: str) -> np.ndarray:
        keep = tuple(self.axis(a) for a in names)
        m = self.joint.p.sum(
            axis=tuple(a for a in range(self.joint.p.ndim) if a not in keep)
        )
        return np.transpose(m, _perm_of(sorted(keep), [self.axis(a) for a in names]))

    def validate(self):
        """Check the problem's epsilon admissibility conditions; warn only."""
        issues = []
        ea = self.eps.get("a")
        eb = self.eps.get("b")
        if self.problem == "sw":
            self.eps_warnings = issues
            return issues
        if self.problem in ("ch", "gp"):
            if self.problem == "ch":
                sizes = self.card("x")
            else:
                sizes = self.card("z") * self.card("w")
            if eb - ea < 0:
                issues.append("need eps_b >= eps_a for the sqrt condition")
            else:
                mid = math.sqrt(6 * (eb - ea)) * math.log2(sizes) if sizes > 1 else 0.0
                if not (eb - ea <= mid < ea):
                    issues.append(
                        f"eps condition violated: {eb - ea:.4g} <= {mid:.4g} < {ea:.4g}")
            if self.problem == "gp":
                eah = self.eps.get("ahat")
                bound = 2 * _zeta(self.card("y") * self.card("w"), 6 * eah)
                if not bound < ea:
                    issues.append(
                        f"stage-2 condition violated: {bound:.4g} >= eps_a")
        elif self.problem == "lossy":
            bound = ea + 2 * _zeta(self.card("y"), 3 * ea)
            if not bound < eb:
                issues.append(f"need eps_a + 2*zeta_Y(3 eps_a) = {bound:.4g} < eps_b")
        elif self.problem == "wz":
            bound = ea + 2 * _zeta(self.card("y") * self.card("z"), 3 * ea)
            if not bound < eb:
                issues.append(f"need eps_a + 2*zeta_YZ(3 eps_a) = {bound:.4g} < eps_b")
        elif self.problem == "oho":
            b1 = ea + _zeta(self.card("z"), 3 * ea)
            if not eb > b1:
                issues.append(f"need eps_b > {b1:.4g}")
            b2 = 2 * _zeta(self.card("x") * self.card("z"), 3 * ea)
            if not self.eps.get("bhat") > b2:
                issues.append(f"need eps_bhat > {b2:.4g}")
        self.eps_warnings = issues
        if issues and self.warn:
            for msg in issues:
                warnings.warn(f"{self.problem}: {msg}")
        return issues


def _perm_of(current_order, wanted_order):
    """Permutation taking axes listed in `current_order` to `wanted_order`."""
    return tuple(current_order.index(a) for a in wanted_order)


# -- constructors -------------------------------------------------------------

def sw_params(mu_xy: Distribution, rate_x: float, rate_y: float) -> SchemeParams:
    return SchemeParams("sw", mu_xy, ("x", "y"),
                        eps={}, rate_x=rate_x, rate_y=rate_y)


def ch_params(mu_x, chan_y_x, eps_a: float, eps_b: float,
              warn: bool = True) -> SchemeParams:
    mu_x = np.asarray(getattr(mu_x, "p", mu_x), dtype=float)
    chan = np.asarray(chan_y_x, dtype=float)  # [x, y]
    joint = Distribution(mu_x[:, None] * chan)
    return SchemeParams("ch", joint, ("x", "y"),
                        eps={"a": eps_a, "b": eps_b}, warn=warn)


def gp_params(mu_z, mu_xw_z, chan_y_xz, eps_a: float, eps_b: float,
              eps_ahat: float, warn: bool = True) -> SchemeParams:
    """mu_xw_z indexed [z, x, w]; chan_y_xz indexed [x, z, y]."""
    mu_z = np.asarray(getattr(mu_z, "p", mu_z), dtype=float)
    mu_xw_z = np.asarray(mu_xw_z, dtype=float)
    chan = np.asarray(chan_y_xz, dtype=float)
    qz, qx, qw = mu_xw_z.shape
    qy = chan.shape[2]
    p = np.zeros((qx, qy, qz, qw))
    for z in range(qz):
        for x in range(qx):
            for w in range(qw):
                p[x, :, z, w] = mu_z[z] * mu_xw_z[z, x, w] * chan[x, z, :]
    return SchemeParams("gp", Distribution(p), ("x", "y", "z", "w"),
                        eps={"a": eps_a, "b": eps_b, "ahat": eps_ahat},
                        warn=warn)


def lossy_params(mu_x, test_chan_y_x, rho, eps_a: float, eps_b: float,
                 warn: bool = True) -> SchemeParams:
    mu_x = np.asarray(getattr(mu_x, "p", mu_x), dtype=float)
    chan = np.asarray(test_chan_y_x, dtype=float)  # [x, y]
    joint = Distribution(mu_x[:, None] * chan)
    return SchemeParams("lossy", joint, ("x", "y"),
                        eps={"a": eps_a, "b": eps_b},
                        rho=np.asarray(rho, dtype=float), warn=warn)


def wz_params(mu_xz: Distribution, test_chan_y_x, f, rho,
              eps_a: float, eps_b: float, warn: bool = True) -> SchemeParams:
    """mu_xz over (x, z); test channel [x, y]; f indexed [y, z]; rho [x, w]."""
    pxz = np.asarray(getattr(mu_xz, "p", mu_xz), dtype=float)
    chan = np.asarray(test_chan_y_x, dtype=float)
    p = pxz[:, None, :] * chan[:, :, None]  # (x, y, z)
    return SchemeParams("wz", Distribution(p), ("x", "y", "z"),
                        eps={"a": eps_a, "b": eps_b},
                        rho=np.asarray(rho, dtype=float),
                        f=np.asarray(f, dtype=np.int64), warn=warn)


def oho_params(mu_xy: Distribution, chan_z_y, eps_a: float, eps_b: float,
               eps_bhat: float, warn: bool = True) -> SchemeParams:
    pxy = np.asarray(getattr(mu_xy, "p", mu_xy), dtype=float)
    chan = np.asarray(chan_z_y, dtype=float)  # [y, z]
    p = pxy[:, :, None] * chan[None, :, :]  # (x, y, z)
    return SchemeParams("oho", Distribution(p), ("x", "y", "z"),
                        eps={"a": eps_a, "b": eps_b, "bhat": eps_bhat},
                        warn=warn)


# -- dimensions ---------------------------------------------------------------

@dataclass(frozen=True)
class DimReport:
    """Real-valued and rounded row counts for each matrix."""

    real: dict
    rounded: dict
    clamped: dict


def dims_for(params: SchemeParams, n: int) -> DimReport:
    """Row counts from the per-problem rate formulas, rounded to the nearest
    integer and clamped into [1, n] (clamping is reported, not fatal)."""
    p = params.joint.p
    ax = params.axis
    ea = params.eps.get("a", 0.0)
    eb = params.eps.get("b", 0.0)
    real = {}
    if params.problem == "sw":
        real["A"] = n * params.rate_x / math.log2(params.card("x"))
        real["B"] = n * params.rate_y / math.log2(params.card("y"))
    elif params.problem == "ch":
        lx = math.log2(params.card("x"))
        real["A"] = n * (_cond_h(p, (ax("x"),), (ax("y"),)) + ea) / lx
        real["B"] = n * (_mutual(p, (ax("x"),), (ax("y"),)) - eb) / lx
    elif params.problem == "gp":
        lw = math.log2(params.card("w"))
        real["A"] = n * (_cond_h(p, (ax("w"),), (ax("y"),)) + ea) / lw
        real["B"] = n * (
            _mutual(p, (ax("w"),), (ax("y"),))
            - _mutual(p, (ax("w"),), (ax("z"),))
            - eb
        ) / lw
        real["Ahat"] = n * (
            _cond_h(p, (ax("x"),), (ax("z"), ax("w"))) - params.eps["ahat"]
        ) / math.log2(params.card("x"))
    elif params.problem == "lossy":
        ly = math.log2(params.card("y"))
        real["A"] = n * (_cond_h(p, (ax("y"),), (ax("x"),)) - ea) / ly
        real["B"] = n * (_mutual(p, (ax("x"),), (ax("y"),)) + eb) / ly
    elif params.problem == "wz":
        ly = math.log2(params.card("y"))
        real["A"] = n * (_cond_h(p, (ax("y"),), (ax("x"),)) - ea) / ly
        real["B"] = n * (
            _cond_h(p, (ax("y"),), (ax("z"),))
            - _cond_h(p, (ax("y"),), (ax("x"),))
            + eb
        ) / ly
    elif params.problem == "oho":
        real["Bhat"] = n * (
            _cond_h(p, (ax("x"),), (ax("z"),)) + params.eps["bhat"]
        ) / math.log2(params.card("x"))
        lz = math.log2(params.card("z"))
        real["A"] = n * (_cond_h(p, (ax("z"),), (ax("y"),)) - ea) / lz
        real["B"] = n * (_mutual(p, (ax("y"),), (ax("z"),)) + eb) / lz
    rounded, clamped = {}, {}
    for k, v in real.items():
        r = int(round(v))
        c = min(max(r, 1), n)
        rounded[k] = c
        clamped[k] = c != r
        if c != r and params.warn:
            warnings.warn(f"dimension {k} clamped from {r} to {c}")
    return DimReport(real=real, rounded=rounded, clamped=clamped)


# -- instances ----------------------------------------------------------------

MATRIX_ALPHABET = {
    "sw": {"A": "x", "B": "y"},
    "ch": {"A": "x", "B": "x"},
    "gp": {"A": "w", "B": "w", "Ahat": "x"},
    "lossy": {"A": "y", "B": "y"},
    "wz": {"A": "y", "B": "y"},
    "oho": {"A": "z", "B": "z", "Bhat": "x"},
}


@dataclass
class SchemeInstance:
    """One drawn code: matrices plus the shared image vectors."""

    problem: str
    n: int
    matrices: dict
    vectors: dict
    dims: DimReport

    def __post_init__(self):
        for name, vec in self.vectors.items():
            m = self.matrices[name]
            # shared vectors must be solvable targets
            if solve_coset([(m, vec)]).is_empty:
                raise ValueError(f"shared vector for {name} is not in the image")


def _is_identity_cond(cond_x_zw: np.ndarray) -> bool:
    """True when mu_{X|ZW} forces x = w (same alphabet)."""
    qz, qw, qx = cond_x_zw.shape
    if qw != qx:
        return False
    eye = np.eye(qx)
    return all(np.array_equal(cond_x_zw[z], eye) for z in range(qz))


def build_instance(params: SchemeParams, n: int, seed,
                   ensemble: str = "mackay", tau: int | None = None) -> SchemeInstance:
    """Draw matrices (and shared vectors where the scheme needs them)."""
    from .gf import is_prime

    dims = dims_for(params, n)
    matrices = {}
    for name, var in MATRIX_ALPHABET[params.problem].items():
        q = params.card(var)
        if not is_prime(q):
            raise ValueError(f"alphabet size {q} for {var!r} is not prime")
        l = dims.rounded[name]
        if params.problem == "gp" and name == "Ahat" and _is_identity_cond(
                params.cond("x", "zw")):
            # deterministic stage 2: a zero matrix leaves the full space,
            # whose indicator-argmax is the forced reproduction
            matrices[name] = SparseMatrix(q, 1, n, [[] for _ in range(n)])
            continue
        t = tau if tau is not None else recommended_tau(l, l * math.log2(q) / n)
        if ensemble == "mackay":
            if q == 2 and t % 2:
                t += 1
            ep = EnsembleParams(q=q, l=l, n=n, tau=t)
            matrices[name] = generate_mackay(ep, derive_seed(seed, "mat", name))
        elif ensemble == "uniform":
            matrices[name] = generate_uniform(q, l, n, derive_seed(seed, "mat", name))
        else:
            raise ValueError(f"unknown ensemble {ensemble!r}")
    vectors = {}
    if params.problem in ("ch", "gp", "lossy", "wz", "oho"):
        vectors["A"] = sample_image_point(matrices["A"], derive_seed(seed, "vec", "A"))
    if params.problem == "gp":
        vectors["Ahat"] = sample_image_point(
            matrices["Ahat"], derive_seed(seed, "vec", "Ahat"))
    return SchemeInstance(params.problem, n, matrices, vectors, dims)


def sample_message(inst: SchemeInstance, seed, name: str = "B") -> np.ndarray:
    """Uniform point of Im B, the message law for the channel problems."""
    return sample_image_point(inst.matrices[name], seed)


def rate_of(matrix: SparseMatrix, n: int) -> float:
    """log |Im B| / n in bits, via the rank."""
    rank, _ = matrix.rank_and_image()
    return rank * math.log2(matrix.q) / n


# -- encode/decode ------------------------------------------------------------

def sw_encode_x(inst: SchemeInstance, x) -> np.ndarray:
    return inst.matrices["A"].matvec(x)


def sw_encode_y(inst: SchemeInstance, y) -> np.ndarray:
    return inst.matrices["B"].matvec(y)


def sw_decode(inst: SchemeInstance, params: SchemeParams, b_x, b_y):
    coset_x = solve_coset([(inst.matrices["A"], b_x)])
    coset_y = solve_coset([(inst.matrices["B"], b_y)])
    return ml_code_product(coset_x, coset_y, log_table(params.marg("xy")))


def ch_encode(inst: SchemeInstance, params: SchemeParams, m) -> np.ndarray:
    coset = solve_coset([(inst.matrices["A"], inst.vectors["A"]),
                         (inst.matrices["B"], m)])
    if coset.is_empty:
        raise EncoderFailure("no channel input matches (c, m)")
    return ml_code_iid(coset, log_table(params.marg("x")))


def ch_decode(inst: SchemeInstance, params: SchemeParams, y) -> np.ndarray:
    coset = solve_coset([(inst.matrices["A"], inst.vectors["A"])])
    # argmax of mu_{XY}(x|y): the joint table indexed [y, x] has the same argmax
    x_hat = ml_code_cond_iid(coset, y, log_table(params.marg("yx")))
    return inst.matrices["B"].matvec(x_hat)


def gp_encode(inst: SchemeInstance, params: SchemeParams, m, z) -> np.ndarray:
    coset = solve_coset([(inst.matrices["A"], inst.vectors["A"]),
                         (inst.matrices["B"], m)])
    if coset.is_empty:
        raise EncoderFailure("no auxiliary sequence matches (c, m)")
    w = ml_code_cond_iid(coset, z, log_table(params.cond("w", "z")))
    cond_x = params.cond("x", "zw")  # [z, w, x]
    if _is_identity_cond(cond_x) and inst.matrices["Ahat"].columns == tuple(
            () for _ in range(inst.n)):
        return w.copy()
    coset2 = solve_coset([(inst.matrices["Ahat"], inst.vectors["Ahat"])])
    if coset2.is_empty:
        raise EncoderFailure("no channel input matches c-hat")
    z = np.asarray(z, dtype=np.int64)
    elems = coset2.elements()
    logc = log_table(cond_x)
    scores = logc[z[None, :], w[None, :], elems].sum(axis=1)
    return _argbest_lex(elems, scores)


def gp_decode(inst: SchemeInstance, params: SchemeParams, y) -> np.ndarray:
    coset = solve_coset([(inst.matrices["A"], inst.vectors["A"])])
    w_hat = ml_code_cond_iid(coset, y, log_table(params.cond("w", "y")))
    return inst.matrices["B"].matvec(w_hat)


def lossy_encode(inst: SchemeInstance, params: SchemeParams, x) -> np.ndarray:
    coset = solve_coset([(inst.matrices["A"], inst.vectors["A"])])
    y = ml_code_cond_iid(coset, x, log_table(params.cond("y", "x")))
    return inst.matrices["B"].matvec(y)


def lossy_decode(inst: SchemeInstance, params: SchemeParams, b) -> np.ndarray:
    coset = solve_coset([(inst.matrices["A"], inst.vectors["A"]),
                         (inst.matrices["B"], b)])
    if coset.is_empty:
        raise EncoderFailure("codeword does not address a bin")
    return ml_code_iid(coset, log_table(params.marg("y")))


def wz_encode(inst: SchemeInstance, params: SchemeParams, x) -> np.ndarray:
    coset = solve_coset([(inst.matrices["A"], inst.vectors["A"])])
    y = ml_code_cond_iid(coset, x, log_table(params.cond("y", "x")))
    return inst.matrices["B"].matvec(y)


def wz_decode(inst: SchemeInstance, params: SchemeParams, b, z) -> np.ndarray:
    coset = solve_coset([(inst.matrices["A"], inst.vectors["A"]),
                         (inst.matrices["B"], b)])
    if coset.is_empty:
        raise EncoderFailure("codeword does not address a bin")
    y_hat = ml_code_cond_iid(coset, z, log_table(params.cond("y", "z")))
    z = np.asarray(z, dtype=np.int64)
    return params.f[y_hat, z]


def oho_encode_x(inst: SchemeInstance, x) -> np.ndarray:
    return inst.matrices["Bhat"].matvec(x)


def oho_encode_y(inst: SchemeInstance, params: SchemeParams, y) -> np.ndarray:
    coset = solve_coset([(inst.matrices["A"], inst.vectors["A"])])
    z = ml_code_cond_iid(coset, y, log_table(params.cond("z", "y")))
    return inst.matrices["B"].matvec(z)


def oho_decode(inst: SchemeInstance, params: SchemeParams, b_x, b_y) -> np.ndarray:
    coset = solve_coset([(inst.matrices["A"], inst.vectors["A"]),
                         (inst.matrices["B"], b_y)])
    if coset.is_empty:
        raise EncoderFailure("helper codeword does not address a bin")
    z_hat = ml_code_iid(coset, log_table(params.marg("z")))
    coset_x = solve_coset([(inst.matrices["Bhat"], b_x)])
    if coset_x.is_empty:
        raise EncoderFailure("primary codeword does not address a bin")
    return ml_code_cond_iid(coset_x, z_hat, log_table(params.cond("x", "z")))
