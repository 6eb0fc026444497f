"""Named kernel families and their config-table schemas.

Every family maps a validated parameter table to a :data:`KernelSpec`.
The registry is the single source of truth for the config parser.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidValue, KernelError, UnknownFamily
from .kernels import (
    COEFFICIENT_FAMILIES,
    INDEX_SUPPORT_KINDS,
    WEIGHT_FAMILIES,
    WITNESS_FAMILIES,
    CoefficientSequence,
    HilbertSchmidt,
    IndexSupport,
    Polynomial,
    SpectralMeasure,
    SupportDescriptor,
    TranslationInvariant,
    WeightedPolynomial,
    WeightSpec,
    sequence_values,
    trig_series,
)
from .measures import Density
from .schema import Field, validate
from .tristate import Tri

_pos = dict(check=lambda v: v > 0, why="must be > 0")
_unit = dict(check=lambda v: 0 < v < 1, why="must lie in (0, 1)")
_grid = dict(check=lambda v: v >= 3, why="needs at least 3 nodes")


def _symmetric_grid(half_width: float, n: int) -> np.ndarray:
    if n % 2 == 0:
        n += 1  # keep 0 on the grid
    g = np.linspace(-half_width, half_width, n)
    return 0.5 * (g - g[::-1])


def gaussian_ti(bandwidth=1.0, window=8.0, grid=801):
    """``K(x, y) = exp(-(x - y)^2 / (2 bandwidth^2))``; nu is N(0, 1/bandwidth^2)."""
    sd = 1.0 / bandwidth
    xi = _symmetric_grid(window * sd, grid)
    dens = np.exp(-0.5 * (xi / sd) ** 2) / (sd * math.sqrt(2 * math.pi))
    nu = SpectralMeasure(SupportDescriptor.full_space(), density=Density(xi, dens),
                         outside_mass=math.erfc(window / math.sqrt(2)))
    return TranslationInvariant(nu, f"gaussian-ti(bandwidth={bandwidth:g})")


def sinc_ti(cutoff=1.0, height=1.0, grid=801):
    """nu = height * Lebesgue on [-cutoff, cutoff]; K(s) = 2 height sin(cutoff s) / s."""
    xi = _symmetric_grid(cutoff, grid)
    nu = SpectralMeasure(SupportDescriptor.interval_union([(-cutoff, cutoff)]),
                         density=Density(xi, np.full(xi.size, float(height))))
    return TranslationInvariant(nu, f"sinc-ti(cutoff={cutoff:g})")


def band_ti(low=1.0, high=2.0, height=1.0, grid=201):
    """nu = height * Lebesgue on [-high, -low] and [low, high]."""
    if not 0 < low < high:
        raise KernelError("band-ti needs 0 < low < high")
    side = np.linspace(low, high, grid)
    # zero nodes just inside the gap so the trapezoid rule does not bridge it
    edge = low - 1e-9 * high
    pos = np.concatenate([[edge], side])
    xi = np.concatenate([-pos[::-1], pos])
    vals = np.concatenate([[0.0], np.full(side.size, float(height))])
    vals = np.concatenate([vals[::-1], vals])
    nu = SpectralMeasure(SupportDescriptor.interval_union([(-high, -low), (low, high)]),
                         density=Density(xi, vals))
    return TranslationInvariant(nu, f"band-ti([{low:g}, {high:g}])")


def cosine_ti(frequency=1.0, mass=1.0):
    """nu = mass/2 (delta_f + delta_{-f}); K(s) = mass cos(f s)."""
    nu = SpectralMeasure(SupportDescriptor.finite_set([-frequency, frequency]),
                         [-frequency, frequency], [mass / 2, mass / 2])
    return TranslationInvariant(nu, f"cosine-ti(frequency={frequency:g})")


def constant_ti(mass=1.0):
    nu = SpectralMeasure(SupportDescriptor.finite_set([0.0]), [0.0], [mass])
    return TranslationInvariant(nu, "constant-ti")


def atomic_ti(atoms):
    loc = [a[0] for a in atoms]
    mass = [a[1] for a in atoms]
    nu = SpectralMeasure(SupportDescriptor.finite_set(loc), loc, mass)
    return TranslationInvariant(nu, f"atomic-ti({len(atoms)} atoms)")


def sequence_ti(family: str, n_terms=200, **params):
    """Atoms at +-lambda_n, n = 1..n_terms, of a named frequency sequence.

    ``n-over-log`` uses nu(lambda_n) = 1 / (n^2 log(n + 1)); the others use
    1 / n^2. Each mass is split evenly between +lambda_n and -lambda_n.
    """
    lam = sequence_values(family, params, n_terms)
    n = np.arange(1, n_terms + 1, dtype=float)
    mass = 1.0 / n**2
    if family == "n-over-log":
        mass = mass / np.log(n + 1)
    nu = SpectralMeasure(SupportDescriptor.sequence(family, **params),
                         np.concatenate([-lam, lam]), np.concatenate([mass, mass]) / 2)
    return TranslationInvariant(nu, f"{family}-ti(n_terms={n_terms})")


COEFF_FIELDS = {
    "family": Field("str", "exponential", choices=COEFFICIENT_FAMILIES),
    "scale": Field("float", None, **_pos),
    "ratio": Field("float", None, **_pos),
}
SUPPORT_FIELDS = {
    "kind": Field("str", "full", choices=INDEX_SUPPORT_KINDS),
    "excluded": Field("ints", None),
    "members": Field("ints", None),
    "base": Field("int", None, check=lambda v: v >= 2, why="must be >= 2"),
    "include_zero": Field("bool", None),
}
_tri_choices = tuple(t.value for t in Tri)
WEIGHT_FIELDS = {
    "family": Field("str", "gaussian", choices=tuple(WEIGHT_FAMILIES)),
    "scale": Field("float", None, **_pos),
    "radius": Field("float", None, **_pos),
    "positive_everywhere": Field("bool", None),
    "log_integral_diverges": Field("str", None, choices=_tri_choices),
    "bounded_inverse_poly_approx": Field("str", None, choices=_tri_choices),
    "even_nonincreasing": Field("bool", None),
    "witness": Field("str", None, choices=tuple(WITNESS_FAMILIES)),
}


def build_index_support(table: dict, path: str = "kernel.support") -> IndexSupport:
    s = validate(table, SUPPORT_FIELDS, path)
    return IndexSupport(s["kind"], tuple(s.get("excluded", ())), tuple(s.get("members", ())),
                        s.get("base", 2), s.get("include_zero", False))


def build_coefficients(table: dict, support: dict, truncation: int) -> CoefficientSequence:
    c = validate(table, COEFF_FIELDS, "kernel.coefficients")
    params = {k: c[k] for k in ("scale", "ratio") if k in c}
    return CoefficientSequence(c["family"], params, build_index_support(support), truncation)


def build_weight(table: dict) -> WeightSpec:
    w = validate(table, WEIGHT_FIELDS, "kernel.weight")
    params = {k: w.pop(k) for k in ("scale", "radius") if k in w}
    family = w.pop("family")
    return WeightSpec.named(family, params, **w)


def _polynomial(truncation=40, coefficients=None, support=None):
    coeffs = build_coefficients(coefficients or {}, support or {}, truncation)
    return Polynomial(coeffs, f"polynomial({coeffs.family}, support={coeffs.support.kind})")


def _weighted(truncation=40, coefficients=None, support=None, weight=None):
    coeffs = build_coefficients(coefficients or {}, support or {}, truncation)
    w = build_weight(weight or {})
    return WeightedPolynomial(coeffs, w, f"weighted-polynomial({w.family}, "
                                         f"support={coeffs.support.kind})")


def _trig(ratio=0.5, n_terms=20):
    return HilbertSchmidt(trig_series(ratio, n_terms), f"trig-series(ratio={ratio:g})")


_int_pos = dict(check=lambda v: v >= 1, why="must be >= 1")
_trunc = Field("int", 40, check=lambda v: v >= 0, why="must be >= 0")

# family -> (builder, fields)
KERNEL_FAMILIES = {
    "gaussian-ti": (gaussian_ti, {"bandwidth": Field("float", 1.0, **_pos),
                                  "window": Field("float", 8.0, **_pos),
                                  "grid": Field("int", 801, **_grid)}),
    "sinc-ti": (sinc_ti, {"cutoff": Field("float", 1.0, **_pos),
                          "height": Field("float", 1.0, **_pos),
                          "grid": Field("int", 801, **_grid)}),
    "band-ti": (band_ti, {"low": Field("float", 1.0, **_pos),
                          "high": Field("float", 2.0, **_pos),
                          "height": Field("float", 1.0, **_pos),
                          "grid": Field("int", 201, **_grid)}),
    "cosine-ti": (cosine_ti, {"frequency": Field("float", 1.0, **_pos),
                              "mass": Field("float", 1.0, **_pos)}),
    "constant-ti": (constant_ti, {"mass": Field("float", 1.0, **_pos)}),
    "atomic-ti": (atomic_ti, {"atoms": Field("pairs")}),
    "n-over-log-ti": (lambda n_terms: sequence_ti("n-over-log", n_terms),
                      {"n_terms": Field("int", 200, **_int_pos)}),
    "power-law-ti": (lambda exponent, n_terms: sequence_ti("power-law", n_terms,
                                                           exponent=exponent),
                     {"exponent": Field("float", 0.5, **_unit),
                      "n_terms": Field("int", 200, **_int_pos)}),
    "linear-ti": (lambda step, n_terms: sequence_ti("linear", n_terms, step=step),
                  {"step": Field("float", 1.0, **_pos),
                   "n_terms": Field("int", 200, **_int_pos)}),
    "polynomial": (_polynomial, {"truncation": _trunc,
                                 "coefficients": Field("table", None),
                                 "support": Field("table", None)}),
    "weighted-polynomial": (_weighted, {"truncation": _trunc,
                                        "coefficients": Field("table", None),
                                        "support": Field("table", None),
                                        "weight": Field("table", None)}),
    "trig-series": (_trig, {"ratio": Field("float", 0.5, **_unit),
                            "n_terms": Field("int", 20, **_int_pos)}),
}


def kernel_fields(family: str) -> dict:
    if family not in KERNEL_FAMILIES:
        raise UnknownFamily(f"unknown kernel family {family!r}; "
                            f"known: {', '.join(sorted(KERNEL_FAMILIES))}")
    return KERNEL_FAMILIES[family][1]


def validate_kernel_section(section: dict) -> dict:
    """Validate a ``[kernel]`` table, filling defaults (nested tables included)."""
    section = dict(section)
    family = section.pop("family", None)
    if family is None:
        raise InvalidValue("kernel.family", "missing required key")
    fields = kernel_fields(family)
    out = validate(section, fields, "kernel")
    if "coefficients" in fields:
        out["coefficients"] = validate(out.get("coefficients", {}), COEFF_FIELDS,
                                       "kernel.coefficients")
        out["support"] = validate(out.get("support", {}), SUPPORT_FIELDS, "kernel.support")
    if "weight" in fields:
        out["weight"] = validate(out.get("weight", {}), WEIGHT_FIELDS, "kernel.weight")
    return {"family": family, **out}


def build_kernel(section: dict):
    """Build a kernel from a (possibly unvalidated) ``[kernel]`` table."""
    section = validate_kernel_section(section)
    params = {k: v for k, v in section.items() if k != "family"}
    builder = KERNEL_FAMILIES[section["family"]][0]
    return builder(**params)
