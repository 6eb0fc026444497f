"""Reproducing kernels on the real line.

Four families are supported:

* :class:`TranslationInvariant` -- ``K(x, y) = int cos((x - y) xi) dnu(xi)`` for a
  symmetric finite spectral measure ``nu`` (atoms plus trapezoid density);
* :class:`HilbertSchmidt` -- ``K(x, y) = sum_n phi_n(x) phi_n(y)``;
* :class:`Polynomial` -- ``K(x, y) = sum_n alpha_n x^n y^n``;
* :class:`WeightedPolynomial` -- ``K(x, y) = sum_n alpha_n w(x) x^n w(y) y^n``.

Series kernels are summed to their truncation order and report a bound on
the omitted tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import AsymmetricSpectralMeasure, DuplicatePoints, KernelError, NotSeriesKernel
from .measures import (
    Density,
    MeasureError,
    SignedMeasure,
    _merge_atoms,
    total_mass,
)
from .tristate import Tri

TRUNCATION_DEFAULT = 40
OUTSIDE_MASS_TOL = 1e-6
SYMMETRY_RTOL = 1e-12
_TAIL_TERMS = 4000
_CHUNK = 1 << 22


# --------------------------------------------------------------------------
# spectral supports

SUPPORT_KINDS = ("full-space", "interval-union", "finite-set", "sequence-family")
SEQUENCE_FAMILIES = ("linear", "power-law", "n-over-log", "declared")


def _sequence_flags(family: str, params: dict) -> tuple[Tri, Tri]:
    """(has_finite_accumulation_point, limsup n/|lambda_n| = inf) for named families."""
    if family == "linear":
        if params.get("step", 1.0) <= 0:
            raise KernelError("linear sequence needs step > 0")
        return Tri.NO, Tri.NO
    if family == "power-law":
        p = params.get("exponent")
        if p is None or not 0 < p < 1:
            raise KernelError("power-law sequence needs exponent in (0, 1)")
        return Tri.NO, Tri.YES
    if family == "n-over-log":
        return Tri.NO, Tri.YES
    if family == "declared":
        return Tri.UNKNOWN, Tri.UNKNOWN
    raise KernelError(f"unknown sequence family {family!r}")


def sequence_values(family: str, params: dict, n_terms: int) -> np.ndarray:
    """lambda_1 .. lambda_{n_terms} of a named frequency sequence."""
    n = np.arange(1, n_terms + 1, dtype=float)
    if family == "linear":
        return params.get("step", 1.0) * n
    if family == "power-law":
        return n ** params["exponent"]
    if family == "n-over-log":
        return n / np.log(n + 1)
    raise KernelError(f"sequence family {family!r} has no generator")


@dataclass(frozen=True)
class SupportDescriptor:
    """Symbolic description of ``supp nu``.

    The flags are derived for every kind except ``sequence-family`` with
    family ``"declared"``, where the caller supplies them.
    """

    kind: str
    dim: int = 1
    intervals: tuple = ()
    points: tuple = ()
    family: str | None = None
    params: dict = field(default_factory=dict, compare=False)
    has_finite_accumulation_point: Tri = Tri.UNKNOWN
    limsup_n_over_lambda_infinite: Tri = Tri.UNKNOWN
    contains_zero: bool = False

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        acc = Tri.coerce(self.has_finite_accumulation_point)
        lim = Tri.coerce(self.limsup_n_over_lambda_infinite)

        def derive(name, declared, derived):
            if declared is not Tri.UNKNOWN and derived is not Tri.UNKNOWN and declared is not derived:
                raise KernelError(f"{self.kind}: declared {name}={declared.value} "
                                  f"contradicts derived value {derived.value}")
            return derived if derived is not Tri.UNKNOWN else declared

        if self.kind not in SUPPORT_KINDS:
            raise KernelError(f"unknown support kind {self.kind!r}")
        if self.dim < 1:
            raise KernelError("dimension must be >= 1")
        if self.kind != "full-space" and self.dim != 1:
            raise KernelError(f"{self.kind} supports are one-dimensional")

        if self.kind == "full-space":
            acc = derive("has_finite_accumulation_point", acc, Tri.YES)
            lim = derive("limsup_n_over_lambda_infinite", lim, Tri.YES)
            set_("contains_zero", True)
        elif self.kind == "finite-set":
            pts = tuple(sorted(float(p) for p in self.points))
            set_("points", pts)
            acc = derive("has_finite_accumulation_point", acc, Tri.NO)
            lim = derive("limsup_n_over_lambda_infinite", lim, Tri.NO)
            set_("contains_zero", 0.0 in pts)
        elif self.kind == "interval-union":
            ivs = tuple(sorted((float(lo), float(hi)) for lo, hi in self.intervals))
            if not ivs or any(lo > hi for lo, hi in ivs):
                raise KernelError("interval-union needs intervals with lo <= hi")
            set_("intervals", ivs)
            fat = any(hi > lo for lo, hi in ivs)
            acc = derive("has_finite_accumulation_point", acc, Tri.YES if fat else Tri.NO)
            set_("contains_zero", any(lo <= 0.0 <= hi for lo, hi in ivs))
        else:
            if self.family not in SEQUENCE_FAMILIES:
                raise KernelError(f"unknown sequence family {self.family!r}")
            d_acc, d_lim = _sequence_flags(self.family, self.params)
            acc = derive("has_finite_accumulation_point", acc, d_acc)
            lim = derive("limsup_n_over_lambda_infinite", lim, d_lim)
        set_("has_finite_accumulation_point", acc)
        set_("limsup_n_over_lambda_infinite", lim)

    @classmethod
    def full_space(cls, dim: int = 1):
        return cls("full-space", dim=dim)

    @classmethod
    def interval_union(cls, intervals):
        return cls("interval-union", intervals=tuple(tuple(iv) for iv in intervals))

    @classmethod
    def finite_set(cls, points):
        return cls("finite-set", points=tuple(points))

    @classmethod
    def sequence(cls, family: str, **params):
        flags = {k: params.pop(k) for k in ("has_finite_accumulation_point",
                                            "limsup_n_over_lambda_infinite") if k in params}
        return cls("sequence-family", family=family, params=params, **flags)

    def meets_open_interval(self, a: float, b: float) -> Tri:
        """Whether ``supp nu`` meets ``(a, b)`` or ``(-b, -a)``."""
        def meets(lo, hi):
            return hi > a and lo < b or hi > -b and lo < -a

        if self.kind == "full-space":
            return Tri.YES
        if self.kind == "interval-union":
            return Tri.YES if any(meets(lo, hi) for lo, hi in self.intervals) else Tri.NO
        if self.kind == "finite-set":
            return Tri.YES if any(meets(p, p) for p in self.points) else Tri.NO
        if self.family == "declared":
            return Tri.UNKNOWN
        # named sequences are increasing and unbounded, so a finite prefix decides it
        n = 16
        while True:
            lam = sequence_values(self.family, self.params, n)
            if lam[-1] >= b:
                break
            n *= 2
        return Tri.YES if any(meets(v, v) for v in lam) else Tri.NO

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "dim": self.dim,
             "has_finite_accumulation_point": self.has_finite_accumulation_point.value,
             "limsup_n_over_lambda_infinite": self.limsup_n_over_lambda_infinite.value,
             "contains_zero": self.contains_zero}
        if self.intervals:
            d["intervals"] = [list(iv) for iv in self.intervals]
        if self.points:
            d["points"] = list(self.points)
        if self.family:
            d["family"] = self.family
            d["params"] = dict(self.params)
        return d


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Finite nonnegative measure ``nu`` of a translation-invariant kernel.

    ``outside_mass`` is the (analytically declared) mass of the exact
    measure lying outside the density grid; it must not exceed
    ``OUTSIDE_MASS_TOL`` of the total.
    """

    support: SupportDescriptor
    locations: np.ndarray = field(default_factory=lambda: np.zeros(0))
    masses: np.ndarray = field(default_factory=lambda: np.zeros(0))
    density: Density | None = None
    outside_mass: float = 0.0

    def __post_init__(self):
        loc, mass = _merge_atoms(self.locations, self.masses)
        loc.setflags(write=False)
        mass.setflags(write=False)
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "masses", mass)
        if self.density is not None and not isinstance(self.density, Density):
            object.__setattr__(self, "density", Density(*self.density))
        numeric = loc.size > 0 or self.density is not None
        if self.support.dim > 1 and numeric:
            raise KernelError("numeric spectral data is limited to dimension 1")
        if np.any(mass < 0) or (self.density is not None and np.any(self.density.values < 0)):
            raise KernelError("spectral measure must be nonnegative")
        total = self.total_mass
        if self.outside_mass > OUTSIDE_MASS_TOL * max(total, 0.0):
            raise KernelError(f"density window drops mass {self.outside_mass:.2e}, "
                              f"more than {OUTSIDE_MASS_TOL:g} of the total {total:.3g}")

    @property
    def dim(self) -> int:
        return self.support.dim

    @property
    def is_numeric(self) -> bool:
        return self.locations.size > 0 or self.density is not None

    @property
    def total_mass(self) -> float:
        return total_mass(self.as_measure()) if self.dim == 1 else math.nan

    def as_measure(self) -> SignedMeasure:
        return SignedMeasure(self.locations, self.masses, self.density)

    @cached_property
    def is_symmetric(self) -> bool:
        loc, mass = self.locations, self.masses
        scale = max(1.0, float(np.max(np.abs(loc)))) if loc.size else 1.0
        if not (np.allclose(loc, -loc[::-1], rtol=0, atol=1e-12 * scale)
                and np.allclose(mass, mass[::-1], rtol=SYMMETRY_RTOL, atol=0)):
            return False
        if self.density is not None:
            g, v = self.density.grid, self.density.values
            gs = max(1.0, float(np.max(np.abs(g))))
            if not np.allclose(g, -g[::-1], rtol=0, atol=1e-12 * gs):
                return False
            vs = float(np.max(np.abs(v))) if v.size else 0.0
            if not np.allclose(v, v[::-1], rtol=0, atol=SYMMETRY_RTOL * max(vs, 1e-300)):
                return False
        return True

    @cached_property
    def cosine_nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Nonnegative frequencies and weights with K(s) = sum w cos(s xi)."""
        if self.dim != 1:
            raise KernelError("numeric kernel evaluation is limited to dimension 1")
        if not self.is_numeric:
            raise KernelError("spectral measure has no numeric content")
        if not self.is_symmetric:
            raise AsymmetricSpectralMeasure(
                "spectral measure is not symmetric under negation; the kernel would be complex")
        t, w = self.as_measure().nodes()
        keep = (t >= 0) & (w != 0)
        t, w = t[keep], np.where(t[keep] > 0, 2.0, 1.0) * w[keep]
        return t, w

    def positive_segments(self) -> list[tuple[float, float]]:
        """Closed intervals where the interpolated density is positive (ignoring atoms)."""
        if self.density is None:
            return []
        g, v = self.density.grid, self.density.values
        segs = []
        for i in range(g.size - 1):
            if v[i] > 0 or v[i + 1] > 0:
                lo, hi = g[i], g[i + 1]
                if segs and segs[-1][1] == lo:
                    segs[-1] = (segs[-1][0], hi)
                else:
                    segs.append((lo, hi))
        return [(float(a), float(b)) for a, b in segs]

    def numeric_meets_open_interval(self, a: float, b: float) -> bool:
        for lo, hi in [(p, p) for p in self.locations] + self.positive_segments():
            if hi > a and lo < b or hi > -b and lo < -a:
                return True
        return False

    def sample_support(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Draw points of the numeric support: atoms and positive density segments."""
        segs = [(lo, hi) for lo, hi in self.positive_segments()]
        if self.density is not None:
            # segments whose both endpoints are positive lie inside the support
            g, v = self.density.grid, self.density.values
            inner = [(g[i], g[i + 1]) for i in range(g.size - 1) if v[i] > 0 and v[i + 1] > 0]
            segs = inner or segs
        atoms = self.locations
        out = np.empty(n)
        use_atoms = np.zeros(n, dtype=bool)
        if atoms.size and segs:
            use_atoms = rng.random(n) < 0.5
        elif atoms.size:
            use_atoms[:] = True
        elif not segs:
            raise KernelError("spectral measure has empty numeric support")
        k = int(use_atoms.sum())
        if k:
            out[use_atoms] = rng.choice(atoms, size=k)
        if n - k:
            lengths = np.array([hi - lo for lo, hi in segs])
            idx = rng.choice(len(segs), size=n - k, p=lengths / lengths.sum())
            lo = np.array([segs[i][0] for i in idx])
            hi = np.array([segs[i][1] for i in idx])
            out[~use_atoms] = lo + rng.random(n - k) * (hi - lo)
        return out


def cosine_transform(nu: SpectralMeasure, s) -> np.ndarray:
    """``sum_k w_k cos(s xi_k)``, the Bochner integral at lags ``s``."""
    xi, w = nu.cosine_nodes
    s = np.asarray(s, dtype=float)
    flat = s.ravel()
    out = np.empty(flat.size)
    step = max(1, _CHUNK // max(xi.size, 1))
    for i in range(0, flat.size, step):
        out[i:i + step] = np.cos(np.outer(flat[i:i + step], xi)) @ w
    return out.reshape(s.shape)


# --------------------------------------------------------------------------
# coefficient sequences over Z_+

INDEX_SUPPORT_KINDS = ("full", "finite-complement", "even", "odd", "explicit", "lacunary")


@dataclass(frozen=True)
class IndexSupport:
    """A subset of the nonnegative integers described symbolically."""

    kind: str = "full"
    excluded: tuple = ()
    members: tuple = ()
    base: int = 2
    include_zero: bool = False

    def __post_init__(self):
        if self.kind not in INDEX_SUPPORT_KINDS:
            raise KernelError(f"unknown index support kind {self.kind!r}")
        object.__setattr__(self, "excluded", tuple(sorted({int(n) for n in self.excluded})))
        object.__setattr__(self, "members", tuple(sorted({int(n) for n in self.members})))
        if any(n < 0 for n in self.excluded + self.members):
            raise KernelError("indices must be nonnegative")
        if self.kind == "lacunary" and self.base < 2:
            raise KernelError("lacunary base must be >= 2")

    @property
    def is_finite(self) -> bool:
        return self.kind == "explicit"

    def contains(self, n) -> np.ndarray:
        n = np.asarray(n)
        if self.kind == "full":
            return np.ones(n.shape, dtype=bool)
        if self.kind == "finite-complement":
            return ~np.isin(n, self.excluded)
        if self.kind == "even":
            return n % 2 == 0
        if self.kind == "odd":
            return n % 2 == 1
        if self.kind == "explicit":
            return np.isin(n, self.members)
        # lacunary: powers of base (1, b, b^2, ...) plus optionally 0
        out = np.zeros(n.shape, dtype=bool)
        p = 1
        top = int(n.max()) if n.size else 0
        while p <= top:
            out |= n == p
            p *= self.base
        if self.include_zero:
            out |= n == 0
        return out

    def members_upto(self, horizon: int) -> np.ndarray:
        n = np.arange(horizon + 1)
        return n[self.contains(n)]

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "finite-complement":
            d["excluded"] = list(self.excluded)
        if self.kind == "explicit":
            d["members"] = list(self.members)
        if self.kind == "lacunary":
            d["base"] = self.base
            d["include_zero"] = self.include_zero
        return d


COEFFICIENT_FAMILIES = ("exponential", "geometric")


@dataclass(frozen=True)
class CoefficientSequence:
    """Nonnegative coefficients ``alpha_n``, zero off ``support``.

    ``exponential`` (``alpha_n = scale^n / n!``) is entire on any support;
    ``geometric`` (``alpha_n = ratio^n``) is only accepted on finite supports.
    """

    family: str
    params: dict = field(default_factory=dict, compare=False)
    support: IndexSupport = field(default_factory=IndexSupport)
    truncation: int = TRUNCATION_DEFAULT

    def __post_init__(self):
        if self.family not in COEFFICIENT_FAMILIES:
            raise KernelError(f"unknown coefficient family {self.family!r}")
        key = "scale" if self.family == "exponential" else "ratio"
        value = float(self.params.get(key, 1.0))
        if not value > 0:
            raise KernelError(f"{self.family} coefficients need {key} > 0")
        if self.family == "geometric" and not self.support.is_finite:
            raise KernelError("geometric coefficients have a finite radius of convergence; "
                              "use an explicit finite support")
        if self.truncation < 0:
            raise KernelError("truncation order must be >= 0")

    def log_alpha_full(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        if self.family == "exponential":
            return n * math.log(self.params.get("scale", 1.0)) - gammaln(n + 1)
        return n * math.log(self.params.get("ratio", 1.0))

    def log_alpha(self, n) -> np.ndarray:
        n = np.asarray(n)
        return np.where(self.support.contains(n), self.log_alpha_full(n), -np.inf)

    def alpha(self, n) -> np.ndarray:
        return np.exp(self.log_alpha(n))

    @property
    def alpha0(self) -> float:
        return float(self.alpha(0))

    def tail(self, z) -> np.ndarray:
        """``sum_{n > N, n in supp} alpha_n z^n`` for ``z >= 0``."""
        z = np.asarray(z, dtype=float)
        n = np.arange(self.truncation + 1, self.truncation + 1 + _TAIL_TERMS)
        if self.support.is_finite:
            n = np.array([m for m in self.support.members if m > self.truncation], dtype=int)
            if n.size == 0:
                return np.zeros(z.shape)
        else:
            n = n[self.support.contains(n)]
        la = self.log_alpha_full(n)
        with np.errstate(divide="ignore"):
            logz = np.log(z)[..., None]
        terms = la + n * logz
        terms = np.where(np.isneginf(logz), -np.inf, terms)
        out = np.exp(logsumexp(terms, axis=-1))
        if not self.support.is_finite:
            # terms must have died out inside the summation window
            unresolved = terms[..., -1] > np.log(np.maximum(out, 1e-300)) - 40
            out = np.where(unresolved, np.inf, out)
        return out

    def to_dict(self) -> dict:
        return {"family": self.family, **dict(self.params), "support": self.support.to_dict(),
                "truncation": self.truncation}


# --------------------------------------------------------------------------
# weights


def _gaussian_log(x, scale=1.0):
    return -scale * np.square(x)


def _gaussian_sup(n, scale=1.0):
    n = np.asarray(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = 0.5 * n * (np.log(n / (2 * scale)) - 1)
    return np.where(n == 0, 0.0, v)


def _expabs_log(x, scale=1.0):
    return -scale * np.abs(x)


def _expabs_sup(n, scale=1.0):
    n = np.asarray(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = n * (np.log(n / scale) - 1)
    return np.where(n == 0, 0.0, v)


def _bump_log(x, radius=1.0):
    u2 = np.square(np.asarray(x, dtype=float) / radius)
    with np.errstate(divide="ignore"):
        return np.where(u2 < 1, -1.0 / (1.0 - np.minimum(u2, 1.0)), -np.inf)


def _bump_sup(n, radius=1.0):
    # omega <= e^{-1} and |x| < radius on the support
    return np.asarray(n, dtype=float) * math.log(radius) - 1.0


def _rational_log(x):
    return -np.log1p(np.square(x))


def _rational_sup(n):
    n = np.asarray(n, dtype=float)
    return np.select([n == 0, n == 1, n == 2], [0.0, math.log(0.5), 0.0], np.inf)


def _gaussian_taylor_log(n, x, scale=1.0):
    """log of p_n(x) w(x) with p_n = sum_{k<=n} (scale x^2)^k / k!."""
    k = np.arange(n + 1)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        lz = np.log(scale * np.square(x))[..., None]
        terms = np.where(k == 0, 0.0, k * lz) - gammaln(k + 1)
    return logsumexp(terms, axis=-1) - scale * np.square(x)


def _rational_exact_log(n, x):
    return np.zeros(np.shape(x))


# name -> (log w, log sup w|x|^n, param names, default flags, witness family)
WEIGHT_FAMILIES = {
    "gaussian": (_gaussian_log, _gaussian_sup, ("scale",),
                 dict(positive_everywhere=True, log_integral_diverges=Tri.YES,
                      bounded_inverse_poly_approx=Tri.YES, even_nonincreasing=True),
                 "gaussian-taylor"),
    "exp-abs": (_expabs_log, _expabs_sup, ("scale",),
                dict(positive_everywhere=True, log_integral_diverges=Tri.YES,
                     bounded_inverse_poly_approx=Tri.UNKNOWN, even_nonincreasing=True),
                None),
    "compact-bump": (_bump_log, _bump_sup, ("radius",),
                     dict(positive_everywhere=False, log_integral_diverges=Tri.YES,
                          bounded_inverse_poly_approx=Tri.NO, even_nonincreasing=True),
                     None),
    "rational-decay": (_rational_log, _rational_sup, (),
                       dict(positive_everywhere=True, log_integral_diverges=Tri.NO,
                            bounded_inverse_poly_approx=Tri.YES, even_nonincreasing=True),
                       "rational-exact"),
}

WITNESS_FAMILIES = {
    "gaussian-taylor": _gaussian_taylor_log,
    "rational-exact": _rational_exact_log,
}


@dataclass(frozen=True)
class WeightSpec:
    """A named weight ``w >= 0`` together with its declared Pollard flags."""

    family: str
    params: dict = field(default_factory=dict, compare=False)
    positive_everywhere: bool = True
    log_integral_diverges: Tri = Tri.UNKNOWN
    bounded_inverse_poly_approx: Tri = Tri.UNKNOWN
    witness: str | None = None
    even_nonincreasing: bool = False

    def __post_init__(self):
        if self.family not in WEIGHT_FAMILIES:
            raise KernelError(f"unknown weight family {self.family!r}")
        allowed = WEIGHT_FAMILIES[self.family][2]
        extra = set(self.params) - set(allowed)
        if extra:
            raise KernelError(f"weight {self.family!r} takes no parameter(s) {sorted(extra)}")
        for k in ("scale", "radius"):
            if k in self.params and not self.params[k] > 0:
                raise KernelError(f"weight {k} must be > 0")
        object.__setattr__(self, "log_integral_diverges", Tri.coerce(self.log_integral_diverges))
        object.__setattr__(self, "bounded_inverse_poly_approx",
                           Tri.coerce(self.bounded_inverse_poly_approx))
        if self.witness is not None and self.witness not in WITNESS_FAMILIES:
            raise KernelError(f"unknown witness family {self.witness!r}")

    @classmethod
    def named(cls, family: str, params: dict | None = None, **flags):
        if family not in WEIGHT_FAMILIES:
            raise KernelError(f"unknown weight family {family!r}")
        defaults = dict(WEIGHT_FAMILIES[family][3])
        defaults["witness"] = WEIGHT_FAMILIES[family][4]
        defaults.update(flags)
        return cls(family, dict(params or {}), **defaults)

    def log_value(self, x) -> np.ndarray:
        return WEIGHT_FAMILIES[self.family][0](np.asarray(x, dtype=float), **self.params)

    def __call__(self, x) -> np.ndarray:
        return np.exp(self.log_value(x))

    def log_sup_moment(self, n) -> np.ndarray:
        """``log sup_x w(x) |x|^n`` (an upper bound for compact-bump)."""
        return WEIGHT_FAMILIES[self.family][1](n, **self.params)

    def witness_product(self, n: int, x) -> np.ndarray:
        """``p_n(x) w(x)`` for the declared witness polynomials."""
        if self.witness is None:
            raise KernelError(f"weight {self.family!r} declares no witness polynomials")
        fn = WITNESS_FAMILIES[self.witness]
        kw = {"scale": self.params["scale"]} if "scale" in self.params else {}
        return np.exp(fn(n, x, **kw))

    def to_dict(self) -> dict:
        return {"family": self.family, **dict(self.params),
                "positive_everywhere": self.positive_everywhere,
                "log_integral_diverges": self.log_integral_diverges.value,
                "bounded_inverse_poly_approx": self.bounded_inverse_poly_approx.value,
                "witness": self.witness, "even_nonincreasing": self.even_nonincreasing}


# --------------------------------------------------------------------------
# feature sequences


@dataclass(frozen=True, eq=False)
class FeatureSequence:
    """Features ``phi_0 .. phi_N`` with sup bounds ``|phi_n| <= bounds[n]``.

    ``tail_bound`` is ``sum_{n > N} bounds_n^2`` for the omitted features,
    declared by whoever builds the sequence.
    """

    features: tuple
    bounds: np.ndarray
    tail_bound: float = 0.0
    summable: Tri = Tri.UNKNOWN
    name: str = "custom"

    def __post_init__(self):
        b = np.asarray(self.bounds, dtype=float)
        if b.shape != (len(self.features),):
            raise KernelError("need exactly one bound per feature")
        if np.any(b < 0):
            raise KernelError("feature bounds must be >= 0")
        b.setflags(write=False)
        object.__setattr__(self, "bounds", b)
        object.__setattr__(self, "summable", Tri.coerce(self.summable))

    @property
    def partial_sum(self) -> float:
        return float(self.bounds.sum())

    def matrix(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        return np.column_stack([np.broadcast_to(f(x), x.shape) for f in self.features])


def trig_series(ratio: float, n_terms: int = 20) -> FeatureSequence:
    """Features 1, r^{n/2} cos(nx), r^{n/2} sin(nx): K = 1 + sum r^n cos(n(x-y))."""
    if not 0 < ratio < 1:
        raise KernelError("trig-series ratio must lie in (0, 1)")
    feats: list[Callable] = [lambda x: np.ones_like(x)]
    bounds = [1.0]
    for n in range(1, n_terms + 1):
        c = ratio ** (n / 2)
        feats.append(lambda x, n=n, c=c: c * np.cos(n * x))
        feats.append(lambda x, n=n, c=c: c * np.sin(n * x))
        bounds += [c, c]
    tail = 2 * ratio ** (n_terms + 1) / (1 - ratio)
    return FeatureSequence(tuple(feats), np.array(bounds), tail, Tri.YES, "trig-series")


# --------------------------------------------------------------------------
# kernel specs


@dataclass(frozen=True, eq=False)
class TranslationInvariant:
    spectral: SpectralMeasure
    label: str = "translation-invariant"


@dataclass(frozen=True, eq=False)
class HilbertSchmidt:
    features: FeatureSequence
    label: str = "hilbert-schmidt"


@dataclass(frozen=True, eq=False)
class Polynomial:
    coeffs: CoefficientSequence
    label: str = "polynomial"


@dataclass(frozen=True, eq=False)
class WeightedPolynomial:
    coeffs: CoefficientSequence
    weight: WeightSpec
    label: str = "weighted-polynomial"

    def log_feature_bounds(self, n) -> np.ndarray:
        """``log lambda_n`` with ``sqrt(alpha_n) w(x)|x|^n <= lambda_n``."""
        n = np.asarray(n)
        return 0.5 * self.coeffs.log_alpha(n) + self.weight.log_sup_moment(n)

    @cached_property
    def summable(self) -> Tri:
        """Whether ``sum lambda_n`` converges, by a ratio test far out."""
        if self.coeffs.support.is_finite:
            n = np.array(self.coeffs.support.members)
            return Tri.YES if np.all(np.isfinite(self.log_feature_bounds(n))) else Tri.NO
        far = np.array([10_000, 10_001, 100_000, 100_001])
        lam = 0.5 * self.coeffs.log_alpha_full(far) + self.weight.log_sup_moment(far)
        if not np.all(np.isfinite(lam)):
            return Tri.NO if np.any(lam == np.inf) else Tri.YES
        log_ratio = max(lam[1] - lam[0], lam[3] - lam[2])
        if log_ratio < -1e-3:
            return Tri.YES
        if log_ratio > 1e-3 and self.coeffs.support.kind != "lacunary":
            return Tri.NO
        return Tri.UNKNOWN

    def feature_tail(self) -> float:
        """``sum_{n > N} lambda_n^2``, the uniform truncation error."""
        if self.summable is not Tri.YES:
            return math.inf
        c = self.coeffs
        if c.support.is_finite:
            n = np.array([m for m in c.support.members if m > c.truncation], dtype=int)
        else:
            n = np.arange(c.truncation + 1, c.truncation + 1 + _TAIL_TERMS)
            n = n[c.support.contains(n)]
        if n.size == 0:
            return 0.0
        return float(np.exp(logsumexp(2 * self.log_feature_bounds(n))))


KernelSpec = Union[TranslationInvariant, HilbertSchmidt, Polynomial, WeightedPolynomial]
SERIES_KERNELS = (HilbertSchmidt, Polynomial, WeightedPolynomial)


def truncation_order(K: KernelSpec) -> int:
    if isinstance(K, HilbertSchmidt):
        return len(K.features.features) - 1
    if isinstance(K, (Polynomial, WeightedPolynomial)):
        return K.coeffs.truncation
    raise NotSeriesKernel("translation-invariant kernels have no feature expansion")


def feature_matrix(K: KernelSpec, x) -> np.ndarray:
    """Rows ``(phi_0(x), ..., phi_N(x))`` for each point of ``x``."""
    x = np.asarray(x, dtype=float).ravel()
    if isinstance(K, HilbertSchmidt):
        return K.features.matrix(x)
    if not isinstance(K, (Polynomial, WeightedPolynomial)):
        raise NotSeriesKernel("translation-invariant kernels have no feature expansion")
    n = np.arange(K.coeffs.truncation + 1)
    half_log_alpha = 0.5 * K.coeffs.log_alpha(n)
    if isinstance(K, Polynomial):
        with np.errstate(over="ignore", invalid="ignore"):
            phi = np.exp(half_log_alpha) * np.power.outer(x, n)
        return phi
    with np.errstate(divide="ignore"):
        logx = np.log(np.abs(x))
    logw = K.weight.log_value(x)
    with np.errstate(invalid="ignore"):
        lp = half_log_alpha + np.where(n == 0, 0.0, np.outer(logx, n)) + logw[:, None]
    sign = np.where((x[:, None] < 0) & (n % 2 == 1), -1.0, 1.0)
    return sign * np.exp(lp)


def _series_tail(K: KernelSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if isinstance(K, HilbertSchmidt):
        return np.full(x.shape, K.features.tail_bound)
    if isinstance(K, WeightedPolynomial):
        return np.full(x.shape, K.feature_tail())
    return K.coeffs.tail(np.abs(x * y))


def evaluate(K: KernelSpec, x, y, return_tail: bool = False):
    """Kernel values ``K(x, y)`` (broadcasting); optionally with a tail bound.

    For series kernels the value is the partial sum to the truncation order
    and the tail bounds ``|K - K_N|``. Translation-invariant kernels are
    exact quadratures of their spectral data and report a zero tail.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if isinstance(K, TranslationInvariant):
        val = cosine_transform(K.spectral, x - y)
        tail = np.zeros(val.shape)
    else:
        fx = feature_matrix(K, x)
        fy = feature_matrix(K, y)
        val = np.sum(fx * fy, axis=1).reshape(x.shape)
        tail = _series_tail(K, x, y) if return_tail else None
    if val.ndim == 0:
        val = float(val)
        tail = None if tail is None else float(tail)
    return (val, tail) if return_tail else val


def kernel_matrix(K: KernelSpec, xs, ts) -> np.ndarray:
    """``[K(x_i, t_j)]`` for arbitrary point lists."""
    xs = np.asarray(xs, dtype=float).ravel()
    ts = np.asarray(ts, dtype=float).ravel()
    if isinstance(K, TranslationInvariant):
        return cosine_transform(K.spectral, xs[:, None] - ts[None, :])
    return feature_matrix(K, xs) @ feature_matrix(K, ts).T


def gram(K: KernelSpec, points) -> np.ndarray:
    p = np.asarray(points, dtype=float).ravel()
    if np.unique(p).size != p.size:
        raise DuplicatePoints("gram matrix points must be pairwise distinct")
    G = kernel_matrix(K, p, p)
    upper = np.triu(G)
    return upper + np.triu(G, 1).T


def embed(K: KernelSpec, mu: SignedMeasure, x):
    """Kernel mean embedding ``int K(x, t) dmu(t)`` at the points ``x``."""
    x_arr = np.asarray(x, dtype=float)
    t, w = mu.nodes()
    flat = x_arr.ravel()
    out = np.zeros(flat.size)
    if t.size:
        step = max(1, _CHUNK // (t.size * (1 if not isinstance(K, TranslationInvariant)
                                            else max(K.spectral.cosine_nodes[0].size, 1))))
        for i in range(0, flat.size, step):
            out[i:i + step] = kernel_matrix(K, flat[i:i + step], t) @ w
    out = out.reshape(x_arr.shape)
    return float(out) if out.ndim == 0 else out


def feature_embed(K: KernelSpec, mu: SignedMeasure) -> np.ndarray:
    """``(int phi_n dmu)_{n=0..N}`` for a series kernel."""
    if not isinstance(K, SERIES_KERNELS):
        raise NotSeriesKernel("feature_embed needs a series kernel")
    t, w = mu.nodes()
    if t.size == 0:
        return np.zeros(truncation_order(K) + 1)
    return feature_matrix(K, t).T @ w


def _bilinear(K: KernelSpec, mu: SignedMeasure, nu: SignedMeasure) -> float:
    t, w = mu.nodes()
    s, v = nu.nodes()
    if t.size == 0 or s.size == 0:
        return 0.0
    return float(w @ embed(K, nu, t))


def _quadratic_ti(K: TranslationInvariant, mu: SignedMeasure) -> float:
    """``int int K d mu d mu`` using lags when the density grid is uniform."""
    d = mu.density
    if d is None or d.step is None:
        return _bilinear(K, mu, mu)
    a = d.weights * d.values
    lags = np.arange(-(a.size - 1), a.size)
    corr = np.correlate(a, a, mode="full")
    dd = float(corr @ cosine_transform(K.spectral, d.step * lags))
    atoms = SignedMeasure(mu.locations, mu.masses)
    if atoms.locations.size == 0:
        return dd
    dens_only = SignedMeasure(density=d)
    return dd + 2 * _bilinear(K, atoms, dens_only) + _bilinear(K, atoms, atoms)


def mmd2(K: KernelSpec, P: SignedMeasure, Q: SignedMeasure) -> float:
    """Squared maximum mean discrepancy ``int int K d(P-Q) d(P-Q)``."""
    if isinstance(K, SERIES_KERNELS):
        diff = feature_embed(K, P) - feature_embed(K, Q)
        return float(diff @ diff)
    try:
        D = P.as_signed() - Q.as_signed()
    except MeasureError:
        return (_quadratic_ti(K, P) + _quadratic_ti(K, Q) - 2 * _bilinear(K, P, Q))
    return _quadratic_ti(K, D)


def describe(K: KernelSpec) -> dict:
    """JSON-friendly summary used in reports."""
    if isinstance(K, TranslationInvariant):
        nu = K.spectral
        d = {"type": "translation-invariant", "label": K.label,
             "support": nu.support.to_dict()}
        if nu.dim == 1 and nu.is_numeric:
            d["n_atoms"] = int(nu.locations.size)
            d["density_nodes"] = 0 if nu.density is None else int(nu.density.grid.size)
            d["spectral_mass"] = nu.total_mass
        return d
    if isinstance(K, HilbertSchmidt):
        return {"type": "hilbert-schmidt", "label": K.label, "n_features": len(K.features.features),
                "tail_bound": K.features.tail_bound, "summable": K.features.summable.value}
    if isinstance(K, Polynomial):
        return {"type": "polynomial", "label": K.label, "coefficients": K.coeffs.to_dict()}
    return {"type": "weighted-polynomial", "label": K.label, "coefficients": K.coeffs.to_dict(),
            "weight": K.weight.to_dict(), "summable_bounds": K.summable.value,
            "tail_bound": K.feature_tail()}
