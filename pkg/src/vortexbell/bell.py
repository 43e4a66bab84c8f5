"""
CHSH Bell sums built from displaced-parity (Wigner) values, and a
derivative-free search for the settings that maximize the violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import orthogonal_procrustes
from scipy.stats import qmc

from .modes import BeamSpec, lg
from .wigner import PhaseSpacePoint, pi2w_lg, pi2w_numeric

SEARCH_BOX = 2.0
CLASSICAL_BOUND = 2.0
SPACES = ("diag2", "full8")


@dataclass(frozen=True)
class BellSettings:
    """Two settings per side: ``alpha = (X, P_X)`` and ``beta = (Y, P_Y)``."""

    alpha: tuple[float, float] = (0.0, 0.0)
    alpha_prime: tuple[float, float] = (0.0, 0.0)
    beta: tuple[float, float] = (0.0, 0.0)
    beta_prime: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        for name in ("alpha", "alpha_prime", "beta", "beta_prime"):
            pair = tuple(float(v) for v in getattr(self, name))
            if len(pair) != 2:
                raise ValueError(f"{name} needs two coordinates")
            if any(not math.isfinite(v) or abs(v) > SEARCH_BOX + 1e-12 for v in pair):
                raise ValueError(f"{name}={pair} outside the search box [-{SEARCH_BOX}, {SEARCH_BOX}]")
            object.__setattr__(self, name, pair)

    @classmethod
    def from_vector(cls, v) -> "BellSettings":
        """From ``(X, P_X, X', P_X', Y, P_Y, Y', P_Y')``."""
        v = [float(a) for a in v]
        return cls((v[0], v[1]), (v[2], v[3]), (v[4], v[5]), (v[6], v[7]))

    @classmethod
    def diagonal(cls, x: float, p_y: float) -> "BellSettings":
        """alpha = beta = origin, alpha' = (x, 0), beta' = (0, p_y)."""
        return cls((0.0, 0.0), (x, 0.0), (0.0, 0.0), (0.0, p_y))

    def to_vector(self) -> np.ndarray:
        return np.array([*self.alpha, *self.alpha_prime, *self.beta, *self.beta_prime])

    def points(self) -> list[PhaseSpacePoint]:
        """Phase-space points for (a,b), (a,b'), (a',b), (a',b') in sum order."""
        return [
            PhaseSpacePoint(*a, *b)
            for a, b in (
                (self.alpha, self.beta),
                (self.alpha, self.beta_prime),
                (self.alpha_prime, self.beta),
                (self.alpha_prime, self.beta_prime),
            )
        ]

    def to_dict(self) -> dict:
        return {k: list(getattr(self, k)) for k in ("alpha", "alpha_prime", "beta", "beta_prime")}


# settings used for every beam in the measured suite
EXPERIMENT_SETTINGS = BellSettings.diagonal(-0.45, -0.45)


def parity(beam: BeamSpec, X, P_X, Y, P_Y):
    """Vectorized displaced parity ``pi**2 W``; closed form for single LG beams."""
    mode = beam.single_lg()
    if mode is not None:
        return pi2w_lg(mode.m, mode.n, X, P_X, Y, P_Y)
    return pi2w_numeric(beam, X, P_X, Y, P_Y)


def bell_kernel(beam: BeamSpec, pt: PhaseSpacePoint) -> float:
    return float(parity(beam, *pt.as_tuple()))


def _bell_sum_vec(beam: BeamSpec, v: np.ndarray) -> np.ndarray:
    """Bell sum for a stack of 8-vectors, shape ``(..., 8)``."""
    v = np.asarray(v, dtype=float)
    x, px, xp, pxp, y, py, yp, pyp = np.moveaxis(v, -1, 0)
    X = np.stack([x, x, xp, xp])
    PX = np.stack([px, px, pxp, pxp])
    Y = np.stack([y, yp, y, yp])
    PY = np.stack([py, pyp, py, pyp])
    pi = parity(beam, X, PX, Y, PY)
    return pi[0] + pi[1] + pi[2] - pi[3]


def bell_sum(beam: BeamSpec, s: BellSettings) -> float:
    return float(_bell_sum_vec(beam, s.to_vector()))


def bell_sum_lg10_closed(x: float, p_y: float) -> float:
    ey, ex = math.exp(-p_y * p_y), math.exp(-x * x)
    return ey * (p_y * p_y - 1.0) + ex * (x * x - 1.0) - ey * ex * ((p_y + x) ** 2 - 1.0) - 1.0


@dataclass(frozen=True)
class OptimizationResult:
    settings: BellSettings
    bell_abs: float
    evaluations: int
    converged: bool
    bell: float = float("nan")
    scan_best: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "settings": self.settings.to_dict(),
            "B": self.bell,
            "abs_B": self.bell_abs,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "scan_best": self.scan_best,
        }


def _embed(space: str, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if space == "full8":
        return u
    out = np.zeros(u.shape[:-1] + (8,))
    out[..., 2] = u[..., 0]
    out[..., 7] = u[..., 1]
    return out


def _scan_points(space: str, seed: int) -> np.ndarray:
    if space == "diag2":
        axis = np.round(np.arange(-20, 21) * 0.1, 10)
        a, b = np.meshgrid(axis, axis, indexing="ij")
        return np.column_stack([a.ravel(), b.ravel()])
    # a 0.1-step lattice in eight dimensions is out of reach; use a scrambled Sobol cloud
    sampler = qmc.Sobol(d=8, scramble=True, seed=seed)
    return SEARCH_BOX * (2.0 * sampler.random_base2(13) - 1.0)


class _BudgetSpent(Exception):
    pass


def _nm_loop(f, simplex, values, lo, hi, coeffs, xtol):
    """Iterate in place on ``simplex``/``values``; True once the diameter is below xtol."""
    rho, chi, psi, sigma = coeffs
    while True:
        order = np.argsort(values, kind="stable")
        simplex[:], values[:] = simplex[order], values[order]
        diam = max(np.max(np.linalg.norm(simplex - v, axis=1)) for v in simplex)
        if diam < xtol:
            return True
        centroid = simplex[:-1].mean(axis=0)
        xr = np.clip(centroid + rho * (centroid - simplex[-1]), lo, hi)
        fr = f(xr)
        if fr < values[0]:
            xe = np.clip(centroid + chi * (xr - centroid), lo, hi)
            fe = f(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-1]:
            xc = np.clip(centroid + psi * (xr - centroid), lo, hi)
            fc = f(xc)
            if fc <= fr:
                simplex[-1], values[-1] = xc, fc
                continue
        else:
            xc = centroid + psi * (simplex[-1] - centroid)
            fc = f(xc)
            if fc < values[-1]:
                simplex[-1], values[-1] = xc, fc
                continue
        for i in range(1, len(simplex)):
            shrunk = simplex[0] + sigma * (simplex[i] - simplex[0])
            values[i] = f(shrunk)
            simplex[i] = shrunk


def nelder_mead(fun, x0, step=0.1, bounds=(-SEARCH_BOX, SEARCH_BOX), xtol=1e-6, max_evals=5000):
    """Minimize ``fun`` with a box-clipped Nelder-Mead simplex.

    Uses dimension-adaptive coefficients (Gao & Han).  Stops when the simplex
    diameter drops below ``xtol`` or the evaluation budget is spent.

    Returns
    -------
    x_best, f_best, evaluations, converged
    """
    lo, hi = bounds
    x0 = np.clip(np.asarray(x0, dtype=float), lo, hi)
    dim = x0.size
    rho, chi = 1.0, 1.0 + 2.0 / dim
    psi, sigma = 0.75 - 1.0 / (2.0 * dim), 1.0 - 1.0 / dim

    evals = 0

    def f(x):
        nonlocal evals
        if evals >= max_evals:
            raise _BudgetSpent
        evals += 1
        return float(fun(x))

    simplex = [x0]
    for i in range(dim):
        v = x0.copy()
        v[i] = v[i] + step if v[i] + step <= hi else v[i] - step
        simplex.append(v)
    simplex = np.array(simplex)
    values = np.full(dim + 1, np.inf)
    converged = False
    try:
        for i, v in enumerate(simplex):
            values[i] = f(v)
        converged = _nm_loop(f, simplex, values, lo, hi, (rho, chi, psi, sigma), xtol)
    except _BudgetSpent:
        pass

    best = int(np.argmin(values))
    return simplex[best], float(values[best]), evals, converged


def optimize_settings(
    beam: BeamSpec,
    space: str = "diag2",
    budget: int = 60000,
    seed: int = 0,
    n_starts: int = 5,
) -> OptimizationResult:
    """Maximize ``|B|`` by a coarse scan followed by multi-start simplex refinement.

    ``diag2`` searches ``alpha' = (X, 0)``, ``beta' = (0, P_Y)`` with the other
    settings at the origin; ``full8`` frees all eight coordinates.  Scan points
    count against ``budget``; if it runs out the best point so far is returned
    with ``converged=False``.
    """
    if space not in SPACES:
        raise ValueError(f"unknown search space {space!r}; expected one of {SPACES}")
    scan = _scan_points(space, seed)
    scan = scan[: max(budget, 1)]
    scan_vals = np.abs(_bell_sum_vec(beam, _embed(space, scan)))
    evaluations = len(scan)
    # stable sort: ties resolved by scan index
    top = np.argsort(-scan_vals, kind="stable")[:n_starts]
    best_u, best_val = scan[top[0]], float(scan_vals[top[0]])
    scan_best = best_val

    objective = lambda u: -abs(float(_bell_sum_vec(beam, _embed(space, u))))
    all_converged = True
    for idx in top:
        remaining = budget - evaluations
        if remaining <= len(scan[idx]) + 1:
            all_converged = False
            break
        u, fval, used, ok = nelder_mead(objective, scan[idx], max_evals=remaining)
        evaluations += used
        all_converged &= ok
        if -fval > best_val:
            best_u, best_val = u, -fval

    settings = BellSettings.from_vector(_embed(space, best_u))
    b = bell_sum(beam, settings)
    return OptimizationResult(settings, abs(b), evaluations, bool(all_converged), b, scan_best)


def violation_curve(n_max: int, space: str = "diag2", budget: int = 60000, seed: int = 0) -> list[tuple[int, float]]:
    """Optimized ``|B|`` for ``LG_{n,0}``, ``n = 1..n_max``."""
    if not 1 <= n_max <= 6:
        raise ValueError("n_max must lie in 1..6")
    return [
        (n, optimize_settings(BeamSpec.single(lg(n, 0)), space, budget, seed).bell_abs)
        for n in range(1, n_max + 1)
    ]


def _side_vectors(s: BellSettings) -> np.ndarray:
    """Rows ``alpha, alpha', (P_Y, -Y), (P_Y', -Y')`` on which the symmetry acts."""
    (y, py), (yp, pyp) = s.beta, s.beta_prime
    return np.array([s.alpha, s.alpha_prime, (py, -y), (pyp, -yp)], dtype=float)


def _from_side_vectors(rows: np.ndarray) -> BellSettings:
    a, ap, b, bp = (tuple(r) for r in rows)
    return BellSettings(a, ap, (-b[1], b[0]), (-bp[1], bp[0]))


def align_settings(s: BellSettings, reference: BellSettings) -> tuple[BellSettings, float]:
    """Map ``s`` onto ``reference`` through the LG-mode symmetries.

    A single LG Wigner function depends only on ``X^2 + P_X^2 + Y^2 + P_Y^2``
    and ``X P_Y - Y P_X``, so applying one orthogonal 2x2 matrix to every
    ``(X, P_X)`` and every ``(P_Y, -Y)`` leaves all four parities unchanged;
    so does exchanging the two sides.  Returns the closest image and its
    largest coordinate deviation from ``reference``.
    """
    target = _side_vectors(reference)
    best = None
    source = _side_vectors(s)
    for rows in (source, source[[2, 3, 0, 1]]):
        rot, _ = orthogonal_procrustes(rows, target)
        image = rows @ rot
        dev = float(np.max(np.abs(image - target)))
        if best is None or dev < best[1]:
            best = (image, dev)
    image, dev = best
    return _from_side_vectors(np.clip(image, -SEARCH_BOX, SEARCH_BOX)), dev
