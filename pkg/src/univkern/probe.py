"""Numerical probes that corroborate or falsify classifier verdicts.

All fits are ridge-regularised least squares on a dense evaluation grid;
the reported number is always the sup-grid error of the fitted function.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import linalg

from .classify import classify_characteristic
from .errors import GapContainsZero, GapIntersectsSupport, ProbeError, SingularSystem
from .kernels import (
    KernelSpec,
    SpectralMeasure,
    TranslationInvariant,
    embed,
    kernel_matrix,
    mmd2,
)
from .measures import (
    Density,
    SignedMeasure,
    fourier,
    to_probability_pair,
    total_mass,
    total_variation,
)
from .tristate import Tri

DEFAULT_RIDGE = 1e-10
DEFAULT_GRID = 401
WITNESS_TRUNCATION = 1500.0
WITNESS_GRID = 6001
BUMP_NODES = 4001
PLATEAU_RELATIVE = 0.05
PLATEAU_FACTOR = 10.0
MONOTONE_SLACK = 1e-10
CSV_COLUMNS = ("basis_size", "target_name", "sup_error")


# --------------------------------------------------------------------------
# targets


@dataclass(frozen=True)
class Target:
    """A named scalar target function, e.g. ``"sin:3"`` or ``"poly:0,0,1"``."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray] = field(compare=False, repr=False)

    def __call__(self, x) -> np.ndarray:
        return np.broadcast_to(self.fn(np.asarray(x, dtype=float)), np.shape(x)).astype(float)


def _poly(coeffs):
    c = np.asarray(coeffs, dtype=float)
    return lambda x: np.polynomial.polynomial.polyval(x, c)


_TARGET_KINDS = {
    "sin": lambda k: (lambda x: np.sin(k * x)),
    "cos": lambda k: (lambda x: np.cos(k * x)),
    "sinsq": lambda k: (lambda x: np.sin(k * x) ** 2),
    "monomial": lambda n: (lambda x: x ** int(n)),
    "const": lambda c: (lambda x: np.full_like(x, c)),
    "abs": lambda _: np.abs,
}


def parse_target(name: str) -> Target:
    """Parse ``kind:arg``; ``poly`` takes comma-separated ascending coefficients."""
    kind, _, arg = name.partition(":")
    try:
        if kind == "poly":
            return Target(name, _poly([float(c) for c in arg.split(",")]))
        if kind == "monomial" and (not arg.isdigit()):
            raise ValueError
        if kind in _TARGET_KINDS:
            return Target(name, _TARGET_KINDS[kind](float(arg) if arg else 1.0))
    except ValueError:
        raise ProbeError(f"malformed target {name!r}") from None
    raise ProbeError(f"unknown target kind {kind!r}; known: poly, {', '.join(_TARGET_KINDS)}")


def _as_target(t) -> Target:
    return t if isinstance(t, Target) else parse_target(t)


# --------------------------------------------------------------------------
# fitting helpers


def nested_centers(a: float, b: float, n: int) -> np.ndarray:
    """First ``n`` points of the dyadic order ``a, b, mid, quarters, eighths, ...``.

    Every prefix extends the previous one and is equispaced when
    ``n = 2^k + 1``. Within a level points follow the van der Corput order.
    """
    if n < 1:
        raise ProbeError("need at least one center")
    t = [0.0, 1.0]
    k = 1
    while len(t) < n:
        # van der Corput radical inverse in base 2
        r, q, bit = 0.0, k, 0.5
        while q:
            r += bit * (q & 1)
            q >>= 1
            bit /= 2
        t.append(r)
        k += 1
    t = np.array(t[:n])
    return a + (b - a) * t


def symmetric_grid(a: float, b: float, n: int) -> np.ndarray:
    """``linspace(a, b, n)`` made exactly mirror-symmetric when ``a = -b``."""
    g = np.linspace(a, b, n)
    if a == -b:
        g = 0.5 * (g - g[::-1])
    return g


def _cond(M: np.ndarray) -> float:
    # relative singular-value cut-off of numpy's lstsq; scipy's default (eps) keeps round-off
    return max(M.shape) * np.finfo(float).eps


def _solve(A: np.ndarray, f: np.ndarray, ridge: float, penalty_root: np.ndarray) -> np.ndarray:
    """Minimise ``||A c - f||^2 + ridge ||R c||^2`` via a stacked least-squares solve."""
    if ridge < 0:
        raise ProbeError("ridge must be >= 0")
    if ridge == 0:
        c, _, rank, _ = linalg.lstsq(A, f, cond=_cond(A))
        if rank < A.shape[1]:
            raise SingularSystem(f"design of {A.shape[1]} columns has numerical rank {rank}; "
                                 "use ridge > 0")
        return c
    M = np.vstack([A, math.sqrt(ridge) * penalty_root])
    r = np.concatenate([f, np.zeros(penalty_root.shape[0])])
    c, *_ = linalg.lstsq(M, r, cond=_cond(M))
    if not np.all(np.isfinite(c)):
        raise SingularSystem("regularised system produced non-finite coefficients")
    return c


def _psd_root(G: np.ndarray) -> np.ndarray:
    """``R`` with ``R^T R = G`` after clipping round-off negative eigenvalues."""
    w, V = np.linalg.eigh(G)
    # same cut-off numpy uses for matrix_rank
    cut = w.max(initial=0.0) * G.shape[0] * np.finfo(float).eps
    return (V * np.sqrt(np.where(w > cut, w, 0.0))).T


def plateaus(errors: Sequence[float], tolerance: float) -> bool:
    """Last three errors agree within 5% relative and sit above 10x ``tolerance``."""
    if len(errors) < 3:
        return False
    last = np.asarray(errors[-3:], dtype=float)
    if last.min() <= PLATEAU_FACTOR * tolerance:
        return False
    return bool((last.max() - last.min()) / last.max() < PLATEAU_RELATIVE)


# --------------------------------------------------------------------------
# report


@dataclass
class CurvePoint:
    basis_size: int
    error: float
    sup_error: float


@dataclass
class ProbeReport:
    """Outcome of one probe.

    ``curves`` map target names to points whose ``sup_error`` is the running
    minimum of the raw ``error`` (nested bases can only help; the raw value
    exposes solver round-off). ``flags`` are derived from recorded numbers only.
    """

    kind: str
    curves: dict[str, list[CurvePoint]] = field(default_factory=dict)
    table: list[dict] = field(default_factory=list)
    residuals: dict[str, float] = field(default_factory=dict)
    flags: dict[str, bool] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def add_point(self, target: str, size: int, error: float) -> None:
        pts = self.curves.setdefault(target, [])
        best = min([error] + [p.sup_error for p in pts])
        pts.append(CurvePoint(int(size), float(error), float(best)))

    def errors(self, target: str) -> list[float]:
        return [p.sup_error for p in self.curves[target]]

    def final_error(self, target: str) -> float:
        return self.curves[target][-1].sup_error

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "curves": {t: [{"basis_size": p.basis_size, "error": p.error,
                            "sup_error": p.sup_error} for p in pts]
                       for t, pts in self.curves.items()},
            "table": self.table,
            "residuals": self.residuals,
            "flags": self.flags,
            "metadata": self.metadata,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for t, pts in self.curves.items():
            for p in pts:
                w.writerow([p.basis_size, t, repr(p.sup_error)])
        return buf.getvalue()


def _curve_flags(report: ProbeReport, tolerance: float) -> None:
    for t in report.curves:
        errs = report.errors(t)
        report.flags[f"{t}:converged"] = errs[-1] <= tolerance
        report.flags[f"{t}:plateau"] = plateaus(errs, tolerance)


# --------------------------------------------------------------------------
# denseness


@dataclass(frozen=True)
class DensenessProbeConfig:
    kernel: KernelSpec
    interval: tuple[float, float] = (-1.0, 1.0)
    targets: tuple = ("sin:3",)
    center_counts: tuple[int, ...] = (5, 9, 17, 25)
    evaluation_grid_size: int = DEFAULT_GRID
    ridge: float = DEFAULT_RIDGE
    tolerance: float = 1e-3

    def __post_init__(self):
        a, b = self.interval
        if not a < b:
            raise ProbeError("interval needs a < b")
        counts = list(self.center_counts)
        if not counts or counts[0] < 1 or any(y <= x for x, y in zip(counts, counts[1:])):
            raise ProbeError("center_counts must be positive and strictly increasing")
        if self.ridge < 0:
            raise ProbeError("ridge must be >= 0")
        if self.evaluation_grid_size < 2:
            raise ProbeError("evaluation grid needs at least 2 points")


def denseness_probe(cfg: DensenessProbeConfig) -> ProbeReport:
    """Sup-grid distance from each target to ``span{K(x_j, .)}`` as centers grow.

    Coefficients minimise ``||A c - f||^2 + ridge c^T G c`` where ``A`` holds
    the sections on the grid and ``G`` is the center Gram matrix, i.e. the
    RKHS-norm penalty of kernel ridge regression.
    """
    a, b = cfg.interval
    x = symmetric_grid(a, b, cfg.evaluation_grid_size)
    centers = nested_centers(a, b, cfg.center_counts[-1])
    A_full = kernel_matrix(cfg.kernel, x, centers)
    G_full = kernel_matrix(cfg.kernel, centers, centers)
    G_full = 0.5 * (G_full + G_full.T)
    report = ProbeReport("denseness", metadata={
        "interval": [a, b], "ridge": cfg.ridge, "grid_size": cfg.evaluation_grid_size,
        "tolerance": cfg.tolerance, "center_counts": list(cfg.center_counts)})
    targets = [_as_target(t) for t in cfg.targets]
    for n in cfg.center_counts:
        A = A_full[:, :n]
        R = _psd_root(G_full[:n, :n])
        for t in targets:
            f = t(x)
            c = _solve(A, f, cfg.ridge, R)
            report.add_point(t.name, n, float(np.max(np.abs(A @ c - f))))
    _curve_flags(report, cfg.tolerance)
    return report


# --------------------------------------------------------------------------
# witness measures


def _bump(u: np.ndarray) -> np.ndarray:
    inside = np.abs(u) < 1
    out = np.zeros_like(u)
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


def witness_gap_measure(nu: SpectralMeasure, gap: tuple[float, float],
                        truncation: float = WITNESS_TRUNCATION, grid_size: int = WITNESS_GRID,
                        bump_nodes: int = BUMP_NODES) -> SignedMeasure:
    """Zero-mass measure whose transform vanishes on ``supp nu``.

    The even bump ``phi(xi) = exp(-1/(1-u^2))``, ``u = (2|xi|-(a+b))/(b-a)``,
    lives on ``a < |xi| < b``; the returned density is its inverse transform
    ``f(x) = (2/sqrt(2 pi)) int_a^b phi(eta) cos(x eta) d eta`` sampled by the
    trapezoid rule on ``[-truncation, truncation]``.

    On a uniform grid of step ``h`` the discrete transform equals the
    ``2 pi / h``-periodisation of the truncated ``phi``, so the only error on
    ``supp nu`` comes from the window. ``f`` decays like ``exp(-sqrt(c|x|))``,
    hence the wide default window.
    """
    a, b = map(float, gap)
    if not a > 0:
        raise GapContainsZero(f"gap ({a:g}, {b:g}) must satisfy 0 < a; the witness needs phi(0) = 0")
    if not a < b:
        raise ProbeError(f"gap ({a:g}, {b:g}) needs a < b")
    if nu.support.meets_open_interval(a, b) is Tri.YES:
        raise GapIntersectsSupport(f"+-({a:g}, {b:g}) meets supp nu ({nu.support.kind})")
    if nu.is_numeric and nu.numeric_meets_open_interval(a, b):
        raise GapIntersectsSupport(f"+-({a:g}, {b:g}) meets the numeric support of nu")
    if grid_size < 3 or truncation <= 0:
        raise ProbeError("witness grid needs truncation > 0 and at least 3 nodes")
    x = np.linspace(-truncation, truncation, grid_size)
    h = x[1] - x[0]
    period = 2 * math.pi / h
    if nu.is_numeric:
        # aliases of the bump band must stay clear of the support as well
        reach = max([abs(p) for p in nu.locations]
                    + [max(abs(lo), abs(hi)) for lo, hi in nu.positive_segments()] + [0.0])
        if period - b < reach:
            raise ProbeError(f"witness grid step {h:g} aliases the bump onto supp nu; "
                             "increase grid_size")
    eta = np.linspace(a, b, bump_nodes)
    weta = np.full(eta.size, eta[1] - eta[0])
    weta[[0, -1]] /= 2
    amp = weta * _bump((2 * eta - (a + b)) / (b - a))
    f = np.empty(x.size)
    step = max(1, (1 << 22) // eta.size)
    for i in range(0, x.size, step):
        f[i:i + step] = np.cos(np.outer(x[i:i + step], eta)) @ amp
    f *= 2 / math.sqrt(2 * math.pi)
    return SignedMeasure(density=Density(x, f))


def witness_residuals(K: TranslationInvariant, mu: SignedMeasure, n_xi: int = 100,
                      n_x: int = 41, x_range: float = 5.0, seed: int = 0) -> dict[str, float]:
    """Total mass, ``max |mu_hat|`` on sampled support points and ``max |embed|``."""
    rng = np.random.default_rng(seed)
    xi = K.spectral.sample_support(n_xi, rng)
    x = np.linspace(-x_range, x_range, n_x)
    return {
        "total_mass": abs(total_mass(mu)),
        "max_fourier_on_support": float(np.max(np.abs(fourier(mu, xi)))),
        "max_embed": float(np.max(np.abs(embed(K, mu, x)))),
        "total_variation": total_variation(mu),
    }


# --------------------------------------------------------------------------
# MMD tables


@dataclass(frozen=True)
class MeasurePair:
    name: str
    P: SignedMeasure
    Q: SignedMeasure
    role: str = "generic"

    def __post_init__(self):
        if self.role not in ("generic", "witness"):
            raise ProbeError(f"unknown pair role {self.role!r}")


def witness_pair(mu: SignedMeasure, name: str = "witness") -> MeasurePair:
    """Hahn-Jordan probability pair of a zero-mass witness measure."""
    _, P, Q = to_probability_pair(mu)
    return MeasurePair(name, P, Q, "witness")


def mmd_injectivity_probe(K: KernelSpec, pairs: Sequence[MeasurePair], tolerance: float = 1e-8,
                          tv_threshold: float = 0.1) -> ProbeReport:
    """Tabulate ``(MMD^2, TV)`` for each pair and check injectivity claims.

    Witness pairs must show ``MMD^2 <= tolerance`` with ``TV >= tv_threshold``;
    for a kernel classified characteristic every generic pair with
    ``TV > tv_threshold`` must show ``MMD^2 > tolerance``.
    """
    char = classify_characteristic(K).status
    report = ProbeReport("mmd", metadata={"tolerance": tolerance, "tv_threshold": tv_threshold,
                                          "characteristic": char.value})
    for p in pairs:
        m = mmd2(K, p.P, p.Q)
        tv = total_variation(p.P.as_signed() - p.Q.as_signed())
        report.table.append({"name": p.name, "role": p.role, "mmd2": m, "total_variation": tv})
        report.flags[f"{p.name}:nonnegative"] = m >= -1e-10
        if p.role == "witness":
            report.flags[f"{p.name}:annihilated"] = m <= tolerance and tv >= tv_threshold
        elif char is Tri.YES and tv > tv_threshold:
            report.flags[f"{p.name}:separated"] = m > tolerance
    return report


# --------------------------------------------------------------------------
# exponential systems and Muntz sweeps


def _mean_fit_error(A: np.ndarray, f: np.ndarray, ridge: float) -> float:
    """Sup error of ``min (1/m)||A c - f||^2 + ridge ||c||^2``."""
    s = 1 / math.sqrt(A.shape[0])
    c = _solve(A * s, f * s, ridge, np.eye(A.shape[1]))
    return float(np.max(np.abs(A @ c - f)))


def _prefix_sweep(kind: str, columns: Callable[[int], np.ndarray], sizes: Sequence[int],
                  x: np.ndarray, targets, ridge: float, tolerance: float,
                  metadata: dict) -> ProbeReport:
    report = ProbeReport(kind, metadata={**metadata, "ridge": ridge, "tolerance": tolerance,
                                         "grid_size": int(x.size)})
    ts = [_as_target(t) for t in targets]
    for k in sizes:
        A = columns(k)
        for t in ts:
            report.add_point(t.name, k, _mean_fit_error(A, t(x), ridge))
    _curve_flags(report, tolerance)
    return report


def exponential_completeness_probe(lambdas: Sequence[float], radius: float, targets,
                                   grid_size: int = DEFAULT_GRID, ridge: float = DEFAULT_RIDGE,
                                   tolerance: float = 1e-2,
                                   counts: Sequence[int] | None = None) -> ProbeReport:
    """Sup error on ``[-radius, radius]`` of ``span{cos(l x), sin(l x)}`` over prefixes of ``lambdas``.

    A zero frequency contributes the constant only.
    """
    lam = np.asarray(lambdas, dtype=float)
    if np.unique(lam).size != lam.size:
        raise ProbeError("lambdas must be distinct")
    if radius <= 0:
        raise ProbeError("radius must be > 0")
    x = symmetric_grid(-radius, radius, grid_size)
    cols = []
    for v in lam:
        cols.append(np.cos(v * x))
        if v != 0:
            cols.append(np.sin(v * x))
    ends = np.cumsum([1 if v == 0 else 2 for v in lam])
    B = np.column_stack(cols)
    sizes = list(counts) if counts is not None else list(range(1, lam.size + 1))
    rep = _prefix_sweep("exponential", lambda k: B[:, :ends[k - 1]], sizes, x, targets, ridge,
                        tolerance, {"radius": radius, "n_lambdas": int(lam.size)})
    return rep


def muntz_probe(support, horizon: int, targets, ridge: float = DEFAULT_RIDGE,
                grid_size: int = DEFAULT_GRID, tolerance: float = 1e-2,
                horizons: Sequence[int] | None = None) -> ProbeReport:
    """Sup error on ``[-1, 1]`` of ``span{x^n : n in support, n <= h}`` as ``h`` grows.

    ``support`` is an :class:`~univkern.kernels.IndexSupport` (or anything with
    ``members_upto``). Curve points are keyed by the horizon ``h``.
    """
    if horizon < 1:
        raise ProbeError("horizon must be >= 1")
    x = symmetric_grid(-1.0, 1.0, grid_size)
    members = support.members_upto(horizon)
    if members.size == 0:
        raise ProbeError("support has no members up to the horizon")
    V = np.column_stack([x ** int(n) for n in members])
    hs = list(horizons) if horizons is not None else sorted(
        {h for h in (1, 2, 4, 8, 16, 20, 32, 64, 128) if h <= horizon} | {horizon})
    hs = [h for h in hs if np.any(members <= h)]

    def columns(h):
        return V[:, members <= h]

    return _prefix_sweep("muntz", columns, hs, x, targets, ridge, tolerance,
                         {"support": support.to_dict(), "horizon": horizon})
