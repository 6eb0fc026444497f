"""Finite signed Borel measures on the real line.

A measure is a finite set of point masses plus an optional absolutely
continuous part sampled on a grid. The density is integrated with the
composite trapezoid rule, so every integral against a measure reduces to
a weighted sum over *quadrature nodes* (atoms and grid nodes).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import MeasureError, NonzeroTotalMass, ZeroMeasure

ATOM_MERGE_TOL = 1e-12
ZERO_MASS_TOL = 1e-8
PROBABILITY_TOL = 1e-9

# bounds the size of temporary (n_freq x n_nodes) matrices
_CHUNK = 1 << 22


def trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    h = np.diff(grid)
    w = np.zeros_like(grid)
    w[:-1] += h / 2
    w[1:] += h / 2
    return w


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Density:
    """Piecewise-linear density given by its values on a strictly increasing grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = _frozen(self.grid).ravel()
        values = _frozen(self.values).ravel()
        if grid.size < 2:
            raise MeasureError("density grid needs at least 2 nodes")
        if grid.shape != values.shape:
            raise MeasureError(
                f"grid has {grid.size} nodes but {values.size} values were given")
        if not np.all(np.isfinite(grid)) or not np.all(np.isfinite(values)):
            raise MeasureError("density grid and values must be finite")
        if np.any(np.diff(grid) <= 0):
            raise MeasureError("density grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.grid)

    @property
    def step(self) -> float | None:
        """Common spacing if the grid is uniform, else None."""
        h = np.diff(self.grid)
        if np.allclose(h, h[0], rtol=1e-12, atol=0.0):
            return float(h[0])
        return None

    def with_values(self, values) -> "Density":
        return Density(self.grid, values)


def _merge_atoms(locations, masses):
    locations = np.asarray(locations, dtype=float).ravel()
    masses = np.asarray(masses, dtype=float).ravel()
    if locations.shape != masses.shape:
        raise MeasureError("atom locations and masses differ in length")
    if not (np.all(np.isfinite(locations)) and np.all(np.isfinite(masses))):
        raise MeasureError("atoms must be finite")
    if locations.size == 0:
        return locations, masses
    order = np.argsort(locations, kind="stable")
    locations, masses = locations[order], masses[order]
    # start a new group whenever the gap to the previous atom exceeds the tolerance
    starts = np.concatenate([[True], np.diff(locations) > ATOM_MERGE_TOL])
    group = np.cumsum(starts) - 1
    merged_loc = locations[starts]
    merged_mass = np.zeros(merged_loc.size)
    np.add.at(merged_mass, group, masses)
    keep = merged_mass != 0.0
    return merged_loc[keep], merged_mass[keep]


@dataclass(frozen=True, eq=False)
class SignedMeasure:
    """Atoms ``sum_i m_i delta_{t_i}`` plus an optional gridded density.

    Atoms closer than ``ATOM_MERGE_TOL`` are merged and zero-mass atoms are
    dropped, so locations are sorted and pairwise distinct.
    """

    locations: np.ndarray = field(default_factory=lambda: np.zeros(0))
    masses: np.ndarray = field(default_factory=lambda: np.zeros(0))
    density: Density | None = None

    def __post_init__(self):
        loc, mass = _merge_atoms(self.locations, self.masses)
        object.__setattr__(self, "locations", _frozen(loc))
        object.__setattr__(self, "masses", _frozen(mass))
        if self.density is not None and not isinstance(self.density, Density):
            grid, values = self.density
            object.__setattr__(self, "density", Density(grid, values))

    @classmethod
    def from_atoms(cls, atoms, density=None):
        atoms = list(atoms)
        loc = [float(t) for t, _ in atoms]
        mass = [float(m) for _, m in atoms]
        return cls(loc, mass, density)

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.locations.tolist(), self.masses.tolist()))

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Quadrature nodes and weights: integral of f = sum(w * f(t))."""
        if self.density is None:
            return self.locations, self.masses
        d = self.density
        return (np.concatenate([self.locations, d.grid]),
                np.concatenate([self.masses, d.weights * d.values]))

    def _combine(self, other: "SignedMeasure", sign: float) -> "SignedMeasure":
        loc = np.concatenate([self.locations, other.locations])
        mass = np.concatenate([self.masses, sign * other.masses])
        a, b = self.density, other.density
        if a is None and b is None:
            dens = None
        elif b is None:
            dens = a
        elif a is None:
            dens = b.with_values(sign * b.values)
        elif a.grid.shape == b.grid.shape and np.array_equal(a.grid, b.grid):
            dens = a.with_values(a.values + sign * b.values)
        else:
            raise MeasureError("cannot combine densities sampled on different grids")
        return SignedMeasure(loc, mass, dens)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, c):
        c = float(c)
        dens = None if self.density is None else self.density.with_values(c * self.density.values)
        return SignedMeasure(self.locations, c * self.masses, dens)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1.0 / float(c))

    def __neg__(self):
        return self * -1.0

    def as_signed(self) -> "SignedMeasure":
        return SignedMeasure(self.locations, self.masses, self.density)


@dataclass(frozen=True, eq=False)
class ProbabilityMeasure(SignedMeasure):
    """Nonnegative measure of total mass one (within ``mass_tolerance``)."""

    mass_tolerance: float = field(default=PROBABILITY_TOL, repr=False)

    def __post_init__(self):
        super().__post_init__()
        if np.any(self.masses < 0):
            raise MeasureError("probability measure has a negative atom")
        if self.density is not None and np.any(self.density.values < 0):
            raise MeasureError("probability measure has negative density values")
        m = total_mass(self)
        if abs(m - 1.0) > self.mass_tolerance:
            raise MeasureError(f"probability measure has total mass {m!r}")

    @classmethod
    def from_signed(cls, mu: SignedMeasure, mass_tolerance: float = PROBABILITY_TOL):
        return cls(mu.locations, mu.masses, mu.density, mass_tolerance)


def dirac(t: float, mass: float = 1.0) -> SignedMeasure:
    return SignedMeasure([t], [mass])


def zero_measure() -> SignedMeasure:
    return SignedMeasure()


def total_mass(mu: SignedMeasure) -> float:
    m = float(np.sum(mu.masses))
    if mu.density is not None:
        m += float(np.dot(mu.density.weights, mu.density.values))
    return m


def total_variation(mu: SignedMeasure) -> float:
    tv = float(np.sum(np.abs(mu.masses)))
    if mu.density is not None:
        tv += float(np.dot(mu.density.weights, np.abs(mu.density.values)))
    return tv


def hahn_jordan(mu: SignedMeasure) -> tuple[SignedMeasure, SignedMeasure]:
    """Split into positive and negative parts, atom-wise and node-wise."""
    pos_atoms = np.maximum(mu.masses, 0.0)
    neg_atoms = np.maximum(-mu.masses, 0.0)
    if mu.density is None:
        dp = dn = None
    else:
        v = mu.density.values
        dp = mu.density.with_values(np.maximum(v, 0.0))
        dn = mu.density.with_values(np.maximum(-v, 0.0))
    return (SignedMeasure(mu.locations, pos_atoms, dp),
            SignedMeasure(mu.locations, neg_atoms, dn))


def to_probability_pair(mu: SignedMeasure, tol: float = ZERO_MASS_TOL):
    """Write a zero-mass measure as ``C * (P - Q)`` with P, Q probability measures.

    Returns ``(C, P, Q)`` with ``C`` the mass of the positive part.
    """
    m = total_mass(mu)
    if abs(m) > tol:
        raise NonzeroTotalMass(f"total mass {m:.3e} exceeds tolerance {tol:.1e}")
    if total_variation(mu) == 0.0:
        raise ZeroMeasure("measure is zero")
    pos, neg = hahn_jordan(mu)
    c = total_mass(pos)
    # Q has mass 1 - m/C exactly; C * (P - Q) must reproduce mu, so Q is not renormalised
    q_tol = max(PROBABILITY_TOL, 2 * tol / c)
    return (c, ProbabilityMeasure.from_signed(pos / c),
            ProbabilityMeasure.from_signed(neg / c, q_tol))


def fourier(mu: SignedMeasure, xi):
    """Fourier-Stieltjes transform ``int exp(-i x xi) dmu(x)``.

    Exact on atoms, trapezoid on the density. Accepts scalar or array ``xi``.
    """
    xi_arr = np.asarray(xi, dtype=float)
    t, w = mu.nodes()
    flat = xi_arr.ravel()
    out = np.zeros(flat.size, dtype=complex)
    if t.size:
        step = max(1, _CHUNK // t.size)
        for i in range(0, flat.size, step):
            out[i:i + step] = np.exp(-1j * np.outer(flat[i:i + step], t)) @ w
    out = out.reshape(xi_arr.shape)
    return complex(out) if out.ndim == 0 else out
