"""
Four-dimensional Wigner functions of coherent beams.

Conventions: rescaled coordinates (X, P_X, Y, P_Y) with ``hbar -> 1``, so that
``pi**2 * W`` is the displaced-parity expectation and lies in [-1, 1].  The
kernel is

.. math::

    W(x, p) = \\frac{1}{\\pi^2} \\int d^2y\\, e^{-2 i p \\cdot y}
              E^*(x - y) E(x + y)

and the phase-space volume element is ``dX dP_X dY dP_Y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .errors import QuadratureNotConvergedError
from .modes import BeamSpec, Family, _check_order, hermite_poly, laguerre_poly, oscillator, oscillator_norm
from .schmidt import decompose_lg

COORD_LIMIT = 10.0
QUADRATURE_ORDERS = (32, 64, 128)
DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class PhaseSpacePoint:
    X: float = 0.0
    P_X: float = 0.0
    Y: float = 0.0
    P_Y: float = 0.0

    def __post_init__(self):
        for name in ("X", "P_X", "Y", "P_Y"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or abs(v) > COORD_LIMIT:
                raise ValueError(f"{name}={v} outside the supported range [-{COORD_LIMIT}, {COORD_LIMIT}]")
            object.__setattr__(self, name, v)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.X, self.P_X, self.Y, self.P_Y)

    @property
    def q0(self) -> float:
        return (self.X ** 2 + self.Y ** 2 + self.P_X ** 2 + self.P_Y ** 2) / 4.0

    @property
    def q2(self) -> float:
        return (self.X * self.P_Y - self.Y * self.P_X) / 2.0


ORIGIN = PhaseSpacePoint()


def pi2w_lg(m: int, n: int, X, P_X, Y, P_Y):
    """Vectorized ``pi**2 * W`` of LG_mn from the closed Laguerre form."""
    _check_order(m, "m")
    _check_order(n, "n")
    X, P_X, Y, P_Y = (np.asarray(a, dtype=float) for a in (X, P_X, Y, P_Y))
    q0 = (X * X + Y * Y + P_X * P_X + P_Y * P_Y) / 4.0
    q2 = (X * P_Y - Y * P_X) / 2.0
    lag = laguerre_poly(m, 0, 4.0 * (q0 + q2)) * laguerre_poly(n, 0, 4.0 * (q0 - q2))
    val = (-1) ** (m + n) * np.exp(-4.0 * q0) * lag
    return val if val.ndim else float(val)


def wigner_lg(m: int, n: int, pt: PhaseSpacePoint) -> float:
    return float(pi2w_lg(m, n, *pt.as_tuple())) / math.pi ** 2


def wigner_lg10_closed(pt: PhaseSpacePoint) -> float:
    X, PX, Y, PY = pt.as_tuple()
    bracket = (PX - Y) ** 2 + (PY + X) ** 2 - 1.0
    return math.exp(-PX * PX - PY * PY - X * X - Y * Y) * bracket / math.pi ** 2


def cross_wigner_1d(j: int, k: int, x, p, order: int = 64):
    """``(1/pi) * int u_j(x - y) u_k(x + y) exp(-2 i p y) dy`` by Gauss-Hermite.

    The integrand is a polynomial times ``exp(-y**2 - 2 i p y)``; the contour is
    shifted to ``y = t - i p`` so the oscillation folds into the Gaussian weight.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    t, w = _nodes(order)
    shift = (x + 1j * p)[..., None]
    z_minus = shift - t
    z_plus = np.conj(shift) + t
    s = np.sum(w * hermite_poly(j, z_minus) * hermite_poly(k, z_plus), axis=-1)
    return oscillator_norm(j) * oscillator_norm(k) * np.exp(-x * x - p * p) * s / math.pi


@lru_cache(maxsize=None)
def _nodes(order: int):
    return hermgauss(order)


def _converged_cross_1d(j, k, x, p, tol):
    prev = None
    for order in QUADRATURE_ORDERS:
        cur = cross_wigner_1d(j, k, x, p, order)
        if prev is not None and np.max(np.abs(cur - prev), initial=0.0) <= tol:
            return cur
        prev = cur
    raise QuadratureNotConvergedError(
        f"cross-Wigner ({j},{k}) did not settle across orders {QUADRATURE_ORDERS} at tol={tol}"
    )


def hg_expansion(beam: BeamSpec) -> dict[tuple[int, int], complex]:
    """Collect the beam on the HG basis: ``{(a, b): coefficient}``."""
    coeffs: dict[tuple[int, int], complex] = {}
    for c, mode in beam.terms:
        if mode.family is Family.HG:
            parts = [(1.0, mode)]
        else:
            parts = decompose_lg(mode.m, mode.n).terms
        for ck, hmode in parts:
            key = (hmode.m, hmode.n)
            coeffs[key] = coeffs.get(key, 0j) + c * ck
    return {key: c for key, c in coeffs.items() if c != 0}


def pi2w_numeric(beam: BeamSpec, X, P_X, Y, P_Y, tol: float = DEFAULT_TOL):
    """Vectorized ``pi**2 * W`` by bilinear assembly of 1D cross-Wigner quadratures."""
    X, P_X, Y, P_Y = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (X, P_X, Y, P_Y)))
    terms = list(hg_expansion(beam).items())
    cache_x: dict[tuple[int, int], np.ndarray] = {}
    cache_y: dict[tuple[int, int], np.ndarray] = {}
    total = np.zeros(X.shape, dtype=complex)
    for (a1, b1), c1 in terms:
        for (a2, b2), c2 in terms:
            if (a1, a2) not in cache_x:
                cache_x[(a1, a2)] = _converged_cross_1d(a1, a2, X, P_X, tol)
            if (b1, b2) not in cache_y:
                cache_y[(b1, b2)] = _converged_cross_1d(b1, b2, Y, P_Y, tol)
            total += np.conj(c1) * c2 * cache_x[(a1, a2)] * cache_y[(b1, b2)]
    total *= math.pi ** 2
    residue = np.max(np.abs(total.imag), initial=0.0)
    if residue > 1e-8:
        raise QuadratureNotConvergedError(f"Wigner value has imaginary residue {residue:.3g}")
    real = total.real
    return real if real.ndim else float(real)


def wigner_numeric(beam: BeamSpec, pt: PhaseSpacePoint, tol: float = DEFAULT_TOL) -> float:
    return float(pi2w_numeric(beam, *pt.as_tuple(), tol=tol)) / math.pi ** 2


def wigner_numeric_complex(beam: BeamSpec, pt: PhaseSpacePoint) -> complex:
    """Unprojected quadrature value, exposing the imaginary residue."""
    total = 0j
    terms = list(hg_expansion(beam).items())
    for (a1, b1), c1 in terms:
        for (a2, b2), c2 in terms:
            wx = _converged_cross_1d(a1, a2, pt.X, pt.P_X, DEFAULT_TOL)
            wy = _converged_cross_1d(b1, b2, pt.Y, pt.P_Y, DEFAULT_TOL)
            total += np.conj(c1) * c2 * complex(wx) * complex(wy)
    return total


def momentum_amplitude(beam: BeamSpec, P_X, P_Y):
    """Fourier-domain amplitude ``(1/2pi) int E(x) exp(-i p.x) d^2x``.

    HG modes are eigenfunctions of this transform with eigenvalue ``(-i)**(a+b)``.
    """
    total = 0j
    for (a, b), c in hg_expansion(beam).items():
        total = total + c * (-1j) ** (a + b) * oscillator(a, P_X) * oscillator(b, P_Y)
    return total


def _gh_marginal(fn, order):
    t, w = _nodes(order)
    T1, T2 = np.meshgrid(t, t, indexing="ij")
    W1, W2 = np.meshgrid(w, w, indexing="ij")
    weights = W1 * W2 * np.exp(T1 ** 2 + T2 ** 2)
    return float(np.sum(weights * fn(T1, T2)))


def _marginal(fn, tol):
    prev = None
    for order in (24, 48):
        cur = _gh_marginal(fn, order)
        if prev is not None and abs(cur - prev) <= tol:
            return cur
        prev = cur
    raise QuadratureNotConvergedError("marginal quadrature did not converge")


def marginal_x(beam: BeamSpec, X: float, Y: float, tol: float = 1e-9) -> float:
    """Integral of W over both momenta; equals the intensity ``|E(X, Y)|**2``."""
    return _marginal(lambda px, py: pi2w_numeric(beam, X, px, Y, py) / math.pi ** 2, tol)


def marginal_p(beam: BeamSpec, P_X: float, P_Y: float, tol: float = 1e-9) -> float:
    """Integral of W over both positions; equals ``|momentum_amplitude|**2``."""
    return _marginal(lambda x, y: pi2w_numeric(beam, x, P_X, y, P_Y) / math.pi ** 2, tol)
