"""
Hermite-Gauss and Laguerre-Gauss paraxial modes in dimensionless coordinates.

Transverse coordinates are rescaled so that the beam waist is ``w = sqrt(2)``;
HG modes then factor into 1D harmonic-oscillator functions

.. math::

    u_m(X) = \\pi^{-1/4} (2^m m!)^{-1/2} H_m(X) e^{-X^2/2}

and every mode is unit-normalized on the (X, Y) plane.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import OrderTooLargeError, VortexBellError

MAX_ORDER = 30


class Family(str, enum.Enum):
    HG = "HG"
    LG = "LG"


def _check_order(k: int, name: str = "order") -> None:
    if k < 0:
        raise ValueError(f"{name} must be non-negative, got {k}")
    if k > MAX_ORDER:
        raise OrderTooLargeError(f"{name} {k} exceeds the supported maximum {MAX_ORDER}")


def hermite_poly(m: int, x):
    """Physicists' Hermite polynomial ``H_m(x)``, evaluated by upward recurrence.

    Accepts scalars or arrays (real or complex).
    """
    _check_order(m)
    x = np.asarray(x)
    h_prev = np.ones_like(x, dtype=np.result_type(x, float))
    if m == 0:
        return h_prev if h_prev.ndim else h_prev[()]
    h = 2.0 * x
    for k in range(1, m):
        h, h_prev = 2.0 * x * h - 2.0 * k * h_prev, h
    return h if np.ndim(h) else h[()]


def laguerre_poly(p: int, alpha: int, x):
    """Generalized Laguerre polynomial ``L_p^alpha(x)`` by three-term recurrence."""
    _check_order(p)
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    x = np.asarray(x)
    l_prev = np.ones_like(x, dtype=np.result_type(x, float))
    if p == 0:
        return l_prev if l_prev.ndim else l_prev[()]
    l_cur = 1.0 + alpha - x
    for k in range(1, p):
        l_cur, l_prev = ((2 * k + 1 + alpha - x) * l_cur - (k + alpha) * l_prev) / (k + 1), l_cur
    return l_cur if np.ndim(l_cur) else l_cur[()]


def oscillator_norm(m: int) -> float:
    return math.pi ** -0.25 / math.sqrt(2.0 ** m * math.factorial(m))


def oscillator(m: int, x):
    """1D oscillator eigenfunction ``u_m(x)``; unit L2 norm on the real line."""
    x = np.asarray(x)
    return oscillator_norm(m) * hermite_poly(m, x) * np.exp(-x * x / 2.0)


def eval_hg(m: int, n: int, X, Y):
    """Unit-normalized HG_mn amplitude at (X, Y)."""
    _check_order(m, "m")
    _check_order(n, "n")
    return (oscillator(m, X) * oscillator(n, Y)).astype(complex)


def eval_lg(m: int, n: int, X, Y):
    """Unit-normalized LG_mn amplitude at (X, Y).

    Carries the vortex phase ``exp(i (m - n) phi)`` and the ``(-1)**min(m, n)``
    sign, so that LG_mn equals its Hermite-Gauss expansion term by term.
    """
    _check_order(m, "m")
    _check_order(n, "n")
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    p, ell = min(m, n), m - n
    r2 = X * X + Y * Y
    norm = math.factorial(p) / math.sqrt(math.pi * math.factorial(m) * math.factorial(n))
    # (X + iY)^ell == R^|ell| e^{i ell phi} without a branch cut at the origin
    z = X + 1j * np.sign(ell) * Y if ell else np.ones_like(r2, dtype=complex)
    vortex = z ** abs(ell)
    radial = laguerre_poly(p, abs(ell), r2) * np.exp(-r2 / 2.0)
    return (-1) ** p * norm * vortex * radial


@dataclass(frozen=True)
class ModeIndex:
    family: Family
    m: int
    n: int

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.m < 0 or self.n < 0:
            raise ValueError(f"mode indices must be non-negative: ({self.m}, {self.n})")

    @property
    def ell(self) -> int:
        """Topological charge ``m - n``."""
        return self.m - self.n

    @property
    def p(self) -> int:
        """Radial index ``min(m, n)``."""
        return min(self.m, self.n)

    def evaluate(self, X, Y):
        if self.family is Family.HG:
            return eval_hg(self.m, self.n, X, Y)
        return eval_lg(self.m, self.n, X, Y)

    def __str__(self) -> str:
        return f"{self.family.value.lower()}:{self.m},{self.n}"


def hg(m: int, n: int) -> ModeIndex:
    return ModeIndex(Family.HG, m, n)


def lg(m: int, n: int) -> ModeIndex:
    return ModeIndex(Family.LG, m, n)


@dataclass(frozen=True)
class BeamSpec:
    """Normalized coherent superposition of modes.

    Coefficients are rescaled on construction so that ``sum |c|**2 == 1``.
    """

    terms: tuple[tuple[complex, ModeIndex], ...]

    def __post_init__(self):
        terms = tuple((complex(c), mode) for c, mode in self.terms)
        if not terms:
            raise VortexBellError("a beam needs at least one term")
        norm2 = sum(abs(c) ** 2 for c, _ in terms)
        if not np.isfinite(norm2) or norm2 <= 0.0:
            raise VortexBellError("beam coefficients cannot be normalized (all zero)")
        scale = 1.0 / math.sqrt(norm2)
        object.__setattr__(self, "terms", tuple((c * scale, mode) for c, mode in terms))

    @classmethod
    def single(cls, mode: ModeIndex) -> "BeamSpec":
        return cls(((1.0, mode),))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[complex, ModeIndex]]) -> "BeamSpec":
        return cls(tuple(pairs))

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms])

    @property
    def modes(self) -> list[ModeIndex]:
        return [mode for _, mode in self.terms]

    def single_lg(self) -> ModeIndex | None:
        """The LG mode when the beam is exactly one LG term, else None."""
        if len(self.terms) == 1 and self.terms[0][1].family is Family.LG:
            return self.terms[0][1]
        return None

    def describe(self) -> str:
        return " + ".join(f"({c.real:.6g}{c.imag:+.6g}j)*{mode}" for c, mode in self.terms)


def eval_beam(beam: BeamSpec, X, Y):
    total = 0j
    for c, mode in beam.terms:
        total = total + c * mode.evaluate(X, Y)
    return total


@dataclass(frozen=True)
class GridSpec:
    """Uniform square grid ``X_i = -L + 2 L i / (N - 1)``; ``N`` must be odd."""

    half_extent: float = 6.0
    samples_per_axis: int = 241

    def __post_init__(self):
        if self.half_extent <= 0:
            raise ValueError("half_extent must be positive")
        if self.samples_per_axis < 3 or self.samples_per_axis % 2 == 0:
            raise ValueError(f"samples_per_axis must be an odd integer >= 3, got {self.samples_per_axis}")

    @property
    def coords(self) -> np.ndarray:
        return np.linspace(-self.half_extent, self.half_extent, self.samples_per_axis)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_extent / (self.samples_per_axis - 1)

    @property
    def pixel_area(self) -> float:
        return self.spacing ** 2

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) arrays indexed ``[row=y, col=x]``."""
        c = self.coords
        return np.meshgrid(c, c, indexing="xy")

    def refined(self) -> "GridSpec":
        """Same extent with the spacing halved."""
        return GridSpec(self.half_extent, 2 * (self.samples_per_axis - 1) + 1)


DEFAULT_GRID = GridSpec(6.0, 241)


@dataclass(frozen=True)
class FieldGrid:
    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.grid.samples_per_axis
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (n, n):
            raise ValueError(f"field shape {values.shape} does not match grid {n}x{n}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def total_power(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.pixel_area)

    def inner(self, other: "FieldGrid") -> complex:
        """Grid inner product ``<self, other>``."""
        return complex(np.sum(np.conj(self.values) * other.values) * self.grid.pixel_area)


def sample_grid(beam: BeamSpec, grid: GridSpec = DEFAULT_GRID) -> FieldGrid:
    X, Y = grid.mesh()
    return FieldGrid(grid, eval_beam(beam, X, Y))


def sample_mode(mode: ModeIndex, grid: GridSpec = DEFAULT_GRID) -> FieldGrid:
    X, Y = grid.mesh()
    return FieldGrid(grid, mode.evaluate(X, Y))
