"""Scalar interaction potentials and the matrix of pairwise kernels.

Every potential is an even, continuously differentiable function of a scalar
displacement ``z`` with derivative vanishing at the origin.  Evenness is
bit-exact because all evaluations go through ``z*z`` or ``abs(z)``, so
``value(z) == value(-z)`` holds for every float ``z``.  The derivative is
consequently bit-exact odd.

A :class:`PotentialMatrix` collects the n-by-n grid of kernels together with
declared semiconvexity moduli (``kappa``), optional quadratic-growth
constants, and an optional tail-convexity declaration used by the confinement
analysis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline


def _maybe_scalar(out: np.ndarray, z) -> "np.ndarray | float":
    if np.ndim(z) == 0:
        return float(out)
    return out


class ScalarPotential:
    """Base class: an even C1 kernel of a scalar displacement.

    Subclasses implement ``_value`` and ``_deriv`` on float arrays; both are
    vectorized.  ``deriv`` must be odd with ``deriv(0) == 0``.
    """

    def value(self, z):
        """Evaluate the potential at displacement(s) z."""
        za = np.asarray(z, dtype=float)
        return _maybe_scalar(self._value(za), z)

    def deriv(self, z):
        """Evaluate the derivative at displacement(s) z (odd function)."""
        za = np.asarray(z, dtype=float)
        return _maybe_scalar(self._deriv(za), z)

    def _value(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _deriv(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def is_identically_zero(self) -> bool:
        """Structural test: does the kernel vanish everywhere?"""
        return False

    def nonzero_on_tail(self, radius: float) -> bool:
        """Does the derivative take nonzero values somewhere on (radius, inf)?

        Decided structurally for analytic kinds; by dense sampling for
        tabulated ones.
        """
        return not self.is_identically_zero()


@dataclass(frozen=True)
class Zero(ScalarPotential):
    """The identically vanishing kernel (no interaction)."""

    def _value(self, z):
        return np.zeros_like(z)

    def _deriv(self, z):
        return np.zeros_like(z)

    def is_identically_zero(self):
        return True


@dataclass(frozen=True)
class Quadratic(ScalarPotential):
    """W(z) = (a/2) z^2.  Attractive for a > 0, repulsive for a < 0."""

    a: float

    def _value(self, z):
        return 0.5 * self.a * (z * z)

    def _deriv(self, z):
        return self.a * z

    def is_identically_zero(self):
        return self.a == 0.0


@dataclass(frozen=True)
class Power(ScalarPotential):
    """W(z) = a |z|^q with q > 1 (q > 1 keeps the kernel C1 at the origin)."""

    q: float
    a: float

    def __post_init__(self):
        if not self.q > 1.0:
            raise ValueError(f"Power exponent must exceed 1 for C1 regularity, got q={self.q}")

    def _value(self, z):
        return self.a * np.abs(z) ** self.q

    def _deriv(self, z):
        return self.a * self.q * np.abs(z) ** (self.q - 1.0) * np.sign(z)

    def is_identically_zero(self):
        return self.a == 0.0


@dataclass(frozen=True)
class Morse(ScalarPotential):
    """Smoothed attractive-repulsive kernel -ca e^{-s/la} + cr e^{-s/lr}.

    The classical version uses s = |z|, which has a kink at the origin; this
    implementation requires a smoothing length eps > 0 and evaluates at
    s = sqrt(z^2 + eps^2) so the kernel is C1 everywhere.
    """

    ca: float
    la: float
    cr: float
    lr: float
    eps: float = 0.0

    def __post_init__(self):
        if not self.eps > 0.0:
            raise ValueError(
                "Morse kernel has a derivative jump at the origin; "
                "pass a smoothing length eps > 0"
            )
        if self.la <= 0.0 or self.lr <= 0.0:
            raise ValueError("Morse length scales la, lr must be positive")

    def _smoothed_radius(self, z):
        return np.sqrt(z * z + self.eps * self.eps)

    def _value(self, z):
        s = self._smoothed_radius(z)
        return -self.ca * np.exp(-s / self.la) + self.cr * np.exp(-s / self.lr)

    def _deriv(self, z):
        s = self._smoothed_radius(z)
        radial = self.ca / self.la * np.exp(-s / self.la) - self.cr / self.lr * np.exp(-s / self.lr)
        return z / s * radial

    def is_identically_zero(self):
        return self.ca == 0.0 and self.cr == 0.0


@dataclass(frozen=True)
class GaussianAR(ScalarPotential):
    """Gaussian attractive-repulsive kernel -ca e^{-z^2/la} + cr e^{-z^2/lr}."""

    ca: float
    la: float
    cr: float
    lr: float

    def __post_init__(self):
        if self.la <= 0.0 or self.lr <= 0.0:
            raise ValueError("GaussianAR length scales la, lr must be positive")

    def _value(self, z):
        z2 = z * z
        return -self.ca * np.exp(-z2 / self.la) + self.cr * np.exp(-z2 / self.lr)

    def _deriv(self, z):
        z2 = z * z
        radial = 2.0 * self.ca / self.la * np.exp(-z2 / self.la) \
            - 2.0 * self.cr / self.lr * np.exp(-z2 / self.lr)
        return z * radial

    def is_identically_zero(self):
        return self.ca == 0.0 and self.cr == 0.0


@dataclass(frozen=True)
class DoubleWell(ScalarPotential):
    """W(z) = a z^4 - b z^2: repulsive near the origin, attractive far out."""

    a: float
    b: float

    def _value(self, z):
        z2 = z * z
        return self.a * z2 * z2 - self.b * z2

    def _deriv(self, z):
        z2 = z * z
        return z * (4.0 * self.a * z2 - 2.0 * self.b)

    def is_identically_zero(self):
        return self.a == 0.0 and self.b == 0.0


@dataclass(frozen=True)
class Tabulated(ScalarPotential):
    """Cubic-Hermite kernel from (knot, value, derivative) samples at z >= 0.

    Only the nonnegative half-line is stored; negative displacements are
    evaluated by reflection, which makes evenness exact by construction.
    Beyond the last knot the kernel continues linearly with the last
    derivative, so the growth stays at most quadratic.
    """

    knots: tuple
    values: tuple
    derivs: tuple

    def __post_init__(self):
        knots = tuple(float(k) for k in self.knots)
        values = tuple(float(v) for v in self.values)
        derivs = tuple(float(d) for d in self.derivs)
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "derivs", derivs)
        if len(knots) < 2 or not (len(knots) == len(values) == len(derivs)):
            raise ValueError("Tabulated needs >= 2 knots with matching values and derivs")
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise ValueError("Tabulated knots must be strictly increasing")
        if knots[0] != 0.0:
            raise ValueError("Tabulated knots must start at 0")
        if derivs[0] != 0.0:
            raise ValueError("Tabulated derivative at the origin must be 0 (C1 even kernel)")
        spline = CubicHermiteSpline(np.array(knots), np.array(values), np.array(derivs))
        object.__setattr__(self, "_spline", spline)

    def _value(self, z):
        s = np.abs(z)
        kmax = self.knots[-1]
        inside = self._spline(np.minimum(s, kmax))
        outside = self.values[-1] + self.derivs[-1] * (s - kmax)
        return np.where(s <= kmax, inside, outside)

    def _deriv(self, z):
        s = np.abs(z)
        kmax = self.knots[-1]
        inside = self._spline.derivative()(np.minimum(s, kmax))
        radial = np.where(s <= kmax, inside, self.derivs[-1])
        return radial * np.sign(z)

    def is_identically_zero(self):
        s = np.linspace(0.0, self.knots[-1], 1001)
        return bool(np.all(self._spline(s) == 0.0) and np.all(self._spline.derivative()(s) == 0.0))

    def nonzero_on_tail(self, radius):
        hi = max(self.knots[-1], radius + 1.0) + 1.0
        s = np.linspace(radius + 1e-9, hi, 1001)
        return bool(np.any(self.deriv(s) != 0.0))


@dataclass(frozen=True)
class ConfiningSpec:
    """Tail-convexity declaration: each kernel is tail_kappa-convex beyond radius."""

    radius: float
    tail_kappa: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tail_kappa", np.asarray(self.tail_kappa, dtype=float))
        if not self.radius > 0.0:
            raise ValueError("confining radius must be positive")
        c = self.tail_kappa
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("tail convexity matrix must be square")
        if not np.array_equal(c, c.T):
            raise ValueError("tail convexity matrix must be symmetric")


@dataclass(eq=False)
class PotentialMatrix:
    """n-by-n grid of interaction kernels with declared convexity data.

    ``kappa[i, j]`` is a declared semiconvexity modulus of entry (i, j): the
    map z -> W_ij(z) - kappa_ij z^2 / 2 is convex.  A modulus smaller than
    the true one is still valid; ``validate`` cross-checks declarations
    numerically.  ``growth`` optionally declares constants g_ij with
    |W_ij(z)| <= g_ij (1 + z^2).

    Entry symmetry (W_ij == W_ji) is expected but deliberately not enforced
    here, so that ``validate`` can report it on hand-built matrices; ``kappa``
    asymmetry is rejected outright because every downstream formula assumes it.
    Instances are immutable in practice and safe for concurrent reads.
    """

    entries: tuple
    kappa: np.ndarray
    growth: Optional[np.ndarray] = None
    confining: Optional[ConfiningSpec] = None

    def __post_init__(self):
        entries = tuple(tuple(row) for row in self.entries)
        self.entries = entries
        n = len(entries)
        if n == 0 or any(len(row) != n for row in entries):
            raise ValueError("entries must form a square grid")
        for row in entries:
            for pot in row:
                if not isinstance(pot, ScalarPotential):
                    raise TypeError(f"matrix entries must be ScalarPotential, got {type(pot)!r}")
        self.kappa = np.asarray(self.kappa, dtype=float)
        if self.kappa.shape != (n, n):
            raise ValueError(f"kappa must be {n}x{n}, got shape {self.kappa.shape}")
        if not np.array_equal(self.kappa, self.kappa.T):
            raise ValueError("kappa must be symmetric")
        if self.growth is not None:
            self.growth = np.asarray(self.growth, dtype=float)
            if self.growth.shape != (n, n):
                raise ValueError(f"growth must be {n}x{n}, got shape {self.growth.shape}")
        if self.confining is not None and self.confining.tail_kappa.shape != (n, n):
            raise ValueError("confining tail matrix shape does not match entry grid")

    @property
    def n(self) -> int:
        return len(self.entries)

    def _check_indices(self, i: int, j: int):
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"species indices ({i}, {j}) out of range for n={self.n}")

    def eval(self, i: int, j: int, z):
        """Pointwise kernel value W_ij(z); z may be an array."""
        self._check_indices(i, j)
        if not np.all(np.isfinite(z)):
            raise ValueError(f"potential evaluated at non-finite displacement z={z!r}")
        return self.entries[i][j].value(z)

    def grad(self, i: int, j: int, z):
        """Kernel derivative W'_ij(z); odd in z with grad(0) = 0."""
        self._check_indices(i, j)
        if not np.all(np.isfinite(z)):
            raise ValueError(f"potential gradient at non-finite displacement z={z!r}")
        return self.entries[i][j].deriv(z)


def matrix_from_entries(entries: Sequence[Sequence[ScalarPotential]], kappa,
                        growth=None, confining: Optional[ConfiningSpec] = None) -> PotentialMatrix:
    """Build a PotentialMatrix, mirroring the upper triangle onto the lower."""
    n = len(entries)
    grid = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            grid[i][j] = entries[i][j]
            grid[j][i] = entries[i][j]
    return PotentialMatrix(tuple(tuple(row) for row in grid), kappa, growth, confining)


def _sample_grid(interval, samples: int) -> tuple[np.ndarray, float]:
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError(f"interval must satisfy lo < hi, got ({lo}, {hi})")
    if samples < 3:
        raise ValueError(f"need at least 3 samples, got {samples}")
    z = np.linspace(lo, hi, int(samples))
    return z, z[1] - z[0]


def estimate_semiconvexity(pot: ScalarPotential, interval, samples: int) -> float:
    """Smallest second difference of the kernel on a uniform grid.

    For a kernel that is kappa-convex the sampled second differences are
    >= kappa (up to roundoff), so the estimate never understates a valid
    declared modulus.
    """
    z, h = _sample_grid(interval, samples)
    w = pot.value(z)
    d2 = (w[2:] - 2.0 * w[1:-1] + w[:-2]) / (h * h)
    return float(d2.min())


def estimate_growth_bound(pot: ScalarPotential, interval, samples: int = 1001) -> float:
    """Smallest sampled constant c with |W'(z)| <= c (|z| + 1) on the interval."""
    z, _ = _sample_grid(interval, samples)
    ratio = np.abs(pot.deriv(z)) / (np.abs(z) + 1.0)
    return float(ratio.max())


def estimate_gradient_lipschitz(pot: ScalarPotential, interval, samples: int = 1001) -> float:
    """Largest sampled difference quotient of W' (a Lipschitz constant estimate)."""
    z, h = _sample_grid(interval, samples)
    g = pot.deriv(z)
    return float(np.abs(np.diff(g)).max() / h)


@dataclass
class ValidationIssue:
    """One violated (or doubtful) structural assumption, with a witness."""

    assumption: str
    i: int
    j: int
    z: Optional[float]
    detail: str


@dataclass
class ValidationReport:
    violations: list
    warnings: list

    @property
    def all_passed(self) -> bool:
        return not self.violations

    def flagged(self, assumption: str) -> bool:
        return any(v.assumption == assumption for v in self.violations + self.warnings)


def validate(pm: PotentialMatrix, interval=(-10.0, 10.0), samples: int = 1001) -> ValidationReport:
    """Check the structural assumptions of the kernel matrix on a sample grid.

    Checks per entry: symmetry of the grid (structural), bit-exact evenness,
    oddness of the derivative, derivative vanishing at the origin, declared
    quadratic growth, and declared semiconvexity.  Violations are report
    entries, never exceptions.  An overstated kappa declaration is reported
    as a warning since a smaller declared modulus would still be valid.
    """
    violations: list[ValidationIssue] = []
    warnings: list[ValidationIssue] = []
    z, _ = _sample_grid(interval, samples)
    n = pm.n
    for i in range(n):
        for j in range(i, n):
            pot = pm.entries[i][j]
            if pm.entries[j][i] != pot:
                violations.append(ValidationIssue(
                    "W1", i, j, None,
                    f"entries[{i}][{j}] != entries[{j}][{i}]"))
            w_pos = pot.value(z)
            w_neg = pot.value(-z)
            if not np.array_equal(w_pos, w_neg):
                worst = int(np.argmax(np.abs(w_pos - w_neg)))
                violations.append(ValidationIssue(
                    "W3", i, j, float(z[worst]),
                    f"value not even, |value(z)-value(-z)|={abs(w_pos[worst]-w_neg[worst]):.3e}"))
            g_pos = pot.deriv(z)
            g_neg = pot.deriv(-z)
            if not np.array_equal(g_pos, -g_neg):
                worst = int(np.argmax(np.abs(g_pos + g_neg)))
                violations.append(ValidationIssue(
                    "W3", i, j, float(z[worst]), "derivative not odd"))
            if pot.deriv(0.0) != 0.0:
                violations.append(ValidationIssue(
                    "W2", i, j, 0.0, f"derivative at origin is {pot.deriv(0.0):.3e}, not 0"))
            if pm.growth is not None:
                bound = pm.growth[i, j] * (1.0 + z * z)
                excess = np.abs(w_pos) - bound
                if np.any(excess > 0.0):
                    worst = int(np.argmax(excess))
                    violations.append(ValidationIssue(
                        "W4", i, j, float(z[worst]),
                        f"|W(z)|={abs(w_pos[worst]):.6g} exceeds declared "
                        f"{pm.growth[i, j]:.6g}*(1+z^2)={bound[worst]:.6g}"))
            kappa_ij = pm.kappa[i, j]
            h = z[1] - z[0]
            d2 = (w_pos[2:] - 2.0 * w_pos[1:-1] + w_pos[:-2]) / (h * h)
            tol = 1e-8 * (1.0 + abs(kappa_ij))
            if d2.min() < kappa_ij - tol:
                worst = int(np.argmin(d2))
                warnings.append(ValidationIssue(
                    "W5", i, j, float(z[worst + 1]),
                    f"sampled curvature {d2.min():.6g} below declared kappa={kappa_ij:.6g}"))
    return ValidationReport(violations, warnings)
