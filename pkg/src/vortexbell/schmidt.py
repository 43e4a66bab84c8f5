"""Schmidt decomposition of Laguerre-Gauss modes over Hermite-Gauss pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRangeError
from .modes import MAX_ORDER, BeamSpec, ModeIndex, _check_order, hg, lg


def _binomial_product_coeffs(m: int, n: int) -> list[int]:
    """Integer coefficients of ``(1 - t)**m (1 + t)**n`` in ascending powers of t."""
    a = [(-1) ** j * math.comb(m, j) for j in range(m + 1)]
    b = [math.comb(n, j) for j in range(n + 1)]
    out = [0] * (m + n + 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def schmidt_coeff(m: int, n: int, k: int) -> complex:
    """Weight of ``HG_{m+n-k, k}`` in the expansion of ``LG_mn``.

    The k-th derivative at t = 0 is ``k!`` times the k-th polynomial
    coefficient, so the ``1/k!`` prefactor cancels exactly.
    """
    if m < 0 or n < 0 or m + n > MAX_ORDER:
        raise IndexOutOfRangeError(f"m + n must lie in [0, {MAX_ORDER}], got m={m}, n={n}")
    if not 0 <= k <= m + n:
        raise IndexOutOfRangeError(f"k={k} outside 0..{m + n}")
    poly_k = _binomial_product_coeffs(m, n)[k]
    # integer ratio kept exact before the square root
    ratio = math.factorial(k) * math.factorial(m + n - k) / (math.factorial(m) * math.factorial(n) * 2 ** (m + n))
    return math.sqrt(ratio) * (-1j) ** k * poly_k


@dataclass(frozen=True)
class SchmidtDecomposition:
    source: ModeIndex
    coefficients: tuple[complex, ...]

    @property
    def weights(self) -> np.ndarray:
        """Schmidt weights ``|B_k|**2``."""
        return np.abs(np.asarray(self.coefficients)) ** 2

    def partner(self, k: int) -> ModeIndex:
        """HG mode multiplied by coefficient k."""
        total = self.source.m + self.source.n
        return hg(total - k, k)


def schmidt_decomposition(m: int, n: int) -> SchmidtDecomposition:
    _check_order(m + n, "m + n")
    coeffs = tuple(schmidt_coeff(m, n, k) for k in range(m + n + 1))
    return SchmidtDecomposition(lg(m, n), coeffs)


def decompose_lg(m: int, n: int) -> BeamSpec:
    """LG_mn rewritten as a BeamSpec of HG terms (zero weights dropped)."""
    d = schmidt_decomposition(m, n)
    terms = [(c, d.partner(k)) for k, c in enumerate(d.coefficients) if c != 0]
    return BeamSpec(tuple(terms))


def schmidt_entropy(d: SchmidtDecomposition) -> tuple[float, float]:
    """Entanglement entropy (natural log) and Schmidt number ``1 / sum(lambda**2)``."""
    lam = d.weights
    nz = lam[lam > 0]
    entropy = float(-np.sum(nz * np.log(nz)))
    return max(entropy, 0.0), float(1.0 / np.sum(lam ** 2))
