"""Rule engine deciding universality, characteristicness and C0-universality.

Verdicts are tri-state. ``YES``/``NO`` verdicts always name a rule from
:data:`RULEBOOK`; ``UNKNOWN`` means no rule could certify the hypotheses
and carries no rule id. Declared flags decide; numeric checks
(:func:`check_pollard`, :func:`muntz_gap_analysis`) only corroborate or
raise :class:`FlagContradiction`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import FlagContradiction
from .kernels import (
    CoefficientSequence,
    IndexSupport,
    KernelSpec,
    Polynomial,
    TranslationInvariant,
    WeightedPolynomial,
    WeightSpec,
)
from .tristate import Tri

# rule id -> (citation, derived-from-a-stated-result?)
RULEBOOK: dict[str, tuple[str, bool]] = {
    "accumulation-point-uniqueness": (
        "Weierstrass factorization: a support with a finite accumulation point is a "
        "uniqueness set for entire functions, so the translation-invariant kernel is universal",
        False),
    "limsup-redheffer": (
        "Redheffer completeness-radius lemma: limsup n/|lambda_n| = +inf gives R(nu) = +inf, "
        "and R(nu) = +inf characterises universality", False),
    "finite-support-span": (
        "Finitely many exponentials span a finite-dimensional space, which is not dense in "
        "C(Z) for infinite compact Z", True),
    "muntz-parity": (
        "Muntz theorem applied to the even and odd parts: universal iff alpha_0 > 0 and both "
        "parity reciprocal sums over supp alpha diverge", False),
    "muntz-constant-term": (
        "Muntz theorem requires the constant monomial: alpha_0 = 0 rules out universality",
        False),
    "wp-muntz-positive-weight": (
        "A weight with no zeros is bounded away from 0 on compacts, so the weighted span is "
        "dense iff the Muntz parity criterion holds for supp alpha", True),
    "wp-weight-zeros": (
        "Every kernel section vanishes where the weight does, so point masses there are "
        "annihilated and no density property holds", True),
    "c0-implies-universal": (
        "C0-universality implies universality (continuous functions on compacts extend to C0)",
        False),
    "c0-implies-characteristic": (
        "C0-universality implies characteristicness (no annihilating measure exists at all)",
        False),
    "ti-char-full-support": (
        "Bochner support theorem: a translation-invariant kernel is characteristic iff "
        "supp nu is the whole space", False),
    "ti-char-proper-support": (
        "Bochner support theorem: a proper support admits a compactly supported bump in the "
        "spectral gap whose inverse transform is an annihilating zero-mass measure", False),
    "ti-c0-full-support": (
        "A translation-invariant kernel is C0-universal iff supp nu is the whole space", False),
    "ti-c0-proper-support": (
        "A translation-invariant kernel is C0-universal iff supp nu is the whole space", False),
    "wp-finite-complement": (
        "Weighted polynomial theorem: an even weight non-increasing on [0, inf) satisfying "
        "Pollard's three conditions, with Z_+ minus supp alpha finite, gives a characteristic "
        "kernel", False),
    "wp-finite-complement-c0": (
        "Weighted polynomial theorem: with additionally alpha_0 > 0 the kernel is "
        "C0-universal", False),
    "wp-pollard-necessity": (
        "Pollard's criterion: if one of its conditions fails the weighted monomials are not "
        "dense in C0, so neither is the feature span", False),
}


@dataclass(frozen=True)
class Verdict:
    status: Tri
    rule_id: str | None
    citation: str
    explanation: str

    def __post_init__(self):
        if self.status is Tri.UNKNOWN:
            assert self.rule_id is None
        else:
            assert self.rule_id in RULEBOOK, self.rule_id

    def to_dict(self) -> dict:
        return {"status": self.status.value, "rule_id": self.rule_id,
                "citation": self.citation, "explanation": self.explanation}


def _rule(status: Tri, rule_id: str, explanation: str) -> Verdict:
    return Verdict(status, rule_id, RULEBOOK[rule_id][0], explanation)


def _unknown(explanation: str) -> Verdict:
    return Verdict(Tri.UNKNOWN, None, "", explanation)


# --------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class MuntzReport:
    horizon: int
    even_partial_sum: float
    odd_partial_sum: float
    even_diverges: Tri
    odd_diverges: Tri

    def to_dict(self) -> dict:
        return {"horizon": self.horizon, "even_partial_sum": self.even_partial_sum,
                "odd_partial_sum": self.odd_partial_sum,
                "even_diverges": self.even_diverges.value,
                "odd_diverges": self.odd_diverges.value}


_PARITY_DIVERGENCE = {
    "full": (Tri.YES, Tri.YES),
    "finite-complement": (Tri.YES, Tri.YES),
    "even": (Tri.YES, Tri.NO),
    "odd": (Tri.NO, Tri.YES),
    "explicit": (Tri.NO, Tri.NO),
    "lacunary": (Tri.NO, Tri.NO),
}


def muntz_gap_analysis(coeffs: CoefficientSequence | IndexSupport, horizon: int) -> MuntzReport:
    """Reciprocal sums of supp alpha split by parity, up to ``horizon``.

    Divergence is read off the support kind; the partial sums are diagnostics.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    support = coeffs.support if isinstance(coeffs, CoefficientSequence) else coeffs
    n = support.members_upto(horizon)
    n = n[n >= 1]
    even = float(np.sum(1.0 / n[n % 2 == 0]))
    odd = float(np.sum(1.0 / n[n % 2 == 1]))
    ed, od = _PARITY_DIVERGENCE[support.kind]
    return MuntzReport(horizon, even, odd, ed, od)


@dataclass(frozen=True)
class PollardReport:
    condition1: bool
    condition2: Tri
    condition3: Tri
    partial_integrals: list = field(default_factory=list)
    witness: str | None = None
    witness_bound: float = math.nan
    witness_residual: float = math.nan

    @property
    def overall(self) -> Tri:
        if not self.condition1 or Tri.NO in (self.condition2, self.condition3):
            return Tri.NO
        if self.condition2 is self.condition3 is Tri.YES:
            return Tri.YES
        return Tri.UNKNOWN

    def to_dict(self) -> dict:
        return {"condition1": self.condition1, "condition2": self.condition2.value,
                "condition3": self.condition3.value, "overall": self.overall.value,
                "partial_integrals": [[t, v] for t, v in self.partial_integrals],
                "witness": self.witness, "witness_bound": self.witness_bound,
                "witness_residual": self.witness_residual}


def _log_integral(w: WeightSpec, T: float) -> float:
    f = lambda x: float(w.log_value(x)) / (1 + x * x)  # noqa: E731
    if not np.isfinite(w.log_value(np.array([-T, T]))).all():
        # log w = -inf on a set of positive measure near the ends
        return -math.inf
    total = 0.0
    for lo, hi in ((-T, 0.0), (0.0, T)):
        val, _ = integrate.quad(f, lo, hi, limit=400)
        total += val
    return total


def check_pollard(w: WeightSpec, window: float = 1000.0, n_terms: int = 60,
                  convergence_window: float = 3.0, grid_size: int = 2001) -> PollardReport:
    """Cross-check the declared Pollard flags of ``w`` numerically.

    Condition 1 is a sign scan over ``[-window, window]`` (in log space).
    Condition 2 records partial integrals of ``log w / (1 + x^2)`` over
    ``[-T, T]`` for ``T`` doubling up to ``window``; a divergent flag needs a
    strictly decreasing trace whose per-doubling decrements do not shrink.
    Condition 3 evaluates the declared witness ``p_n w`` for ``n <= n_terms``:
    it must stay uniformly bounded and reach 1 on ``[-convergence_window,
    convergence_window]``.
    """
    if window <= 0:
        raise ValueError("window must be > 0")
    x = np.linspace(-window, window, grid_size)
    logw = w.log_value(x)

    # condition 1
    zeros = ~np.isfinite(logw)
    if w.positive_everywhere and zeros.any():
        raise FlagContradiction(f"weight declared positive but vanishes at x = {x[zeros][0]:g}")
    c1 = bool(w.positive_everywhere)

    # condition 2
    Ts = []
    T = 1.0
    while T < window:
        Ts.append(T)
        T *= 2
    Ts.append(float(window))
    trace = [(t, _log_integral(w, t)) for t in Ts]
    vals = np.array([v for _, v in trace])
    if np.isneginf(vals).any():
        looks_divergent = True
    else:
        steps = -np.diff(vals)
        decreasing = bool(np.all(steps > 0))
        # convergent integrals have per-doubling decrements that shrink geometrically
        persistent = steps.size >= 2 and steps[-2] > 0 and steps[-1] / steps[-2] >= 0.75
        looks_divergent = decreasing and persistent
    declared = w.log_integral_diverges
    if declared is Tri.YES and not looks_divergent:
        raise FlagContradiction("log-integral declared divergent but partial integrals settle")
    if declared is Tri.NO and looks_divergent:
        raise FlagContradiction("log-integral declared convergent but partial integrals "
                                "keep decreasing")
    c2 = declared

    # condition 3
    declared3 = w.bounded_inverse_poly_approx
    bound = residual = math.nan
    if w.witness is not None:
        prods = np.array([w.witness_product(n, x) for n in range(n_terms + 1)])
        bound = float(np.max(np.abs(prods)))
        inner = np.abs(x) <= convergence_window
        residual = float(np.max(np.abs(prods[-1][inner] - 1.0)))
        ok = residual <= 1e-6 and bound < math.inf
        if declared3 is Tri.YES and not ok:
            raise FlagContradiction(f"witness {w.witness!r} does not converge to 1 "
                                    f"(residual {residual:.2e}, bound {bound:.3g})")
        c3 = declared3 if declared3 is not Tri.UNKNOWN or not ok else Tri.UNKNOWN
    else:
        if declared3 is Tri.YES:
            raise FlagContradiction("condition 3 declared but no witness polynomials given")
        c3 = declared3
    return PollardReport(c1, c2, c3, trace, w.witness, bound, residual)


# --------------------------------------------------------------------------
# rules


def _muntz_verdict(coeffs: CoefficientSequence, rule_id: str) -> Verdict:
    if coeffs.alpha0 <= 0:
        return _rule(Tri.NO, "muntz-constant-term" if rule_id == "muntz-parity" else rule_id,
                     "alpha_0 = 0, so constants are not approximable")
    rep = muntz_gap_analysis(coeffs, 64)
    if rep.even_diverges is Tri.YES and rep.odd_diverges is Tri.YES:
        return _rule(Tri.YES, rule_id, "alpha_0 > 0 and both parity reciprocal sums diverge")
    if Tri.NO in (rep.even_diverges, rep.odd_diverges):
        which = "even" if rep.even_diverges is Tri.NO else "odd"
        return _rule(Tri.NO, rule_id, f"the {which} reciprocal sum over supp alpha converges")
    return _unknown("parity reciprocal sums could not be decided for this support")


def _universal_primary(K: KernelSpec) -> Verdict:
    if isinstance(K, TranslationInvariant):
        s = K.spectral.support
        if s.has_finite_accumulation_point is Tri.YES:
            return _rule(Tri.YES, "accumulation-point-uniqueness",
                         f"supp nu ({s.kind}) has a finite accumulation point")
        if s.limsup_n_over_lambda_infinite is Tri.YES:
            return _rule(Tri.YES, "limsup-redheffer",
                         f"supp nu is the {s.family} sequence with limsup n/|lambda_n| = inf")
        if s.kind == "finite-set" or (s.kind == "interval-union"
                                      and s.has_finite_accumulation_point is Tri.NO):
            return _rule(Tri.NO, "finite-support-span",
                         "supp nu is finite, so the kernel sections span a finite-dimensional space")
        return _unknown("supp nu has no finite accumulation point and the Beurling-Malliavin "
                        "density branch is not computed")
    if isinstance(K, Polynomial):
        return _muntz_verdict(K.coeffs, "muntz-parity")
    if isinstance(K, WeightedPolynomial):
        if not K.weight.positive_everywhere:
            return _rule(Tri.NO, "wp-weight-zeros", "the weight has zeros")
        return _muntz_verdict(K.coeffs, "wp-muntz-positive-weight")
    return _unknown("no universality rule for Hilbert-Schmidt kernels given by features alone")


def _pollard_declared(w: WeightSpec) -> Tri:
    c1 = Tri.YES if w.positive_everywhere else Tri.NO
    if Tri.NO in (c1, w.log_integral_diverges, w.bounded_inverse_poly_approx):
        return Tri.NO
    if c1 is w.log_integral_diverges is w.bounded_inverse_poly_approx is Tri.YES:
        return Tri.YES
    return Tri.UNKNOWN


def _wp_hypotheses(K: WeightedPolynomial) -> tuple[bool, str]:
    """Whether the weighted-polynomial theorem applies; otherwise the missing hypothesis."""
    if K.summable is not Tri.YES:
        return False, "summable feature bounds sqrt(alpha_n) w|x|^n <= lambda_n are not certified"
    pollard = _pollard_declared(K.weight)
    if pollard is not Tri.YES:
        return False, "Pollard's three conditions are not all affirmed for the weight"
    if not K.weight.even_nonincreasing:
        return False, "the weight is not declared even and non-increasing on [0, inf)"
    if K.coeffs.support.kind not in ("full", "finite-complement"):
        return False, "Z_+ minus supp alpha is not finite"
    return True, ""


# weight families known to vanish on a set with more than one point
_VANISHING_ON_SETS = ("compact-bump",)


def classify_c0_universal(K: KernelSpec) -> Verdict:
    if isinstance(K, TranslationInvariant):
        s = K.spectral.support
        if s.kind == "full-space":
            return _rule(Tri.YES, "ti-c0-full-support", f"supp nu = R^{s.dim}")
        return _rule(Tri.NO, "ti-c0-proper-support", f"supp nu ({s.kind}) is a proper subset")
    if isinstance(K, WeightedPolynomial):
        if not K.weight.positive_everywhere:
            return _rule(Tri.NO, "wp-weight-zeros", "the weight has zeros")
        ok, missing = _wp_hypotheses(K)
        if ok and K.coeffs.alpha0 > 0:
            return _rule(Tri.YES, "wp-finite-complement-c0",
                         "Pollard weight, finite complement of supp alpha and alpha_0 > 0")
        if K.summable is Tri.YES and _pollard_declared(K.weight) is Tri.NO:
            return _rule(Tri.NO, "wp-pollard-necessity", "a Pollard condition fails for the weight")
        return _unknown(missing or "alpha_0 = 0, so the C0 statement does not apply")
    if isinstance(K, Polynomial):
        return _unknown("polynomial kernel sections do not vanish at infinity")
    return _unknown("no C0-universality rule for Hilbert-Schmidt kernels given by features alone")


def classify_characteristic(K: KernelSpec) -> Verdict:
    if isinstance(K, TranslationInvariant):
        s = K.spectral.support
        if s.kind == "full-space":
            return _rule(Tri.YES, "ti-char-full-support", f"supp nu = R^{s.dim}")
        return _rule(Tri.NO, "ti-char-proper-support", f"supp nu ({s.kind}) is a proper subset")
    if isinstance(K, WeightedPolynomial):
        if not K.weight.positive_everywhere:
            if K.weight.family in _VANISHING_ON_SETS:
                return _rule(Tri.NO, "wp-weight-zeros",
                             "the weight vanishes at two points x0, x1, so delta_x0 - delta_x1 "
                             "embeds to zero")
            return _unknown("the weight has zeros but two distinct zeros are not certified")
        ok, missing = _wp_hypotheses(K)
        if ok:
            return _rule(Tri.YES, "wp-finite-complement",
                         "Pollard weight that is even and non-increasing, finite complement of "
                         "supp alpha")
        if classify_c0_universal(K).status is Tri.YES:
            return _rule(Tri.YES, "c0-implies-characteristic", "the kernel is C0-universal")
        return _unknown(missing)
    if isinstance(K, Polynomial):
        return _unknown("polynomial kernel sections do not vanish at infinity")
    return _unknown("no characteristic rule for Hilbert-Schmidt kernels given by features alone")


def classify_universal(K: KernelSpec) -> Verdict:
    v = _universal_primary(K)
    c0 = classify_c0_universal(K)
    if c0.status is Tri.YES:
        if v.status is Tri.NO:
            raise AssertionError(f"rulebook inconsistency: {v.rule_id} contradicts {c0.rule_id}")
        if v.status is Tri.UNKNOWN:
            return _rule(Tri.YES, "c0-implies-universal", "the kernel is C0-universal")
    return v


def classify_all(K: KernelSpec) -> dict[str, Verdict]:
    return {"universal": classify_universal(K),
            "characteristic": classify_characteristic(K),
            "c0_universal": classify_c0_universal(K)}
