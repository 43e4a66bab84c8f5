"""Acceptance checks, one test per criterion.

Run standalone with ``python3 tests/test_acceptance.py``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""

import math
import subprocess
import sys

import numpy as np
import pytest

from vortexbell.bell import (
    EXPERIMENT_SETTINGS,
    BellSettings,
    align_settings,
    bell_kernel,
    bell_sum,
    bell_sum_lg10_closed,
    optimize_settings,
    violation_curve,
)
from vortexbell.interferometer import NoiseModel, measure_parity, run_bell_experiment
from vortexbell.modes import DEFAULT_GRID, BeamSpec, eval_beam, eval_lg, hg, lg
from vortexbell.schmidt import decompose_lg, schmidt_decomposition
from vortexbell.wigner import ORIGIN, PhaseSpacePoint, marginal_x, wigner_lg, wigner_numeric

LG10 = BeamSpec.single(lg(1, 0))
LG20 = BeamSpec.single(lg(2, 0))
HG10 = BeamSpec.single(hg(1, 0))

# rounded full 8-parameter optimum for LG10, order (X, P_X, X', P_X', Y, P_Y, Y', P_Y')
REFERENCE_FULL8 = BellSettings.from_vector([-0.07, 0.05, 0.4, -0.26, -0.05, -0.07, 0.26, 0.4])


def suite_beam(a, b):
    return BeamSpec(((a, hg(1, 0)), (1j * b, hg(0, 1))))


@pytest.mark.criterion(1, "Schmidt reconstruction of LG modes, m+n <= 5")
def test_schmidt_reconstruction(record_property):
    axis = np.linspace(-5, 5, 101)
    X, Y = np.meshgrid(axis, axis)
    worst_err, worst_norm = 0.0, 0.0
    for s in range(6):
        for m in range(s + 1):
            n = s - m
            err = np.max(np.abs(eval_beam(decompose_lg(m, n), X, Y) - eval_lg(m, n, X, Y)))
            norm = abs(np.sum(schmidt_decomposition(m, n).weights) - 1)
            worst_err, worst_norm = max(worst_err, err), max(worst_norm, norm)
    record_property("detail", f"max pointwise {worst_err:.2e}, max |sum|B|^2-1| {worst_norm:.2e}")
    assert worst_err < 1e-9
    assert worst_norm < 1e-12


@pytest.mark.criterion(2, "Wigner anchors at the origin: LG10 -> -1, LG20 -> +1")
def test_wigner_anchors(record_property):
    a10 = math.pi ** 2 * wigner_lg(1, 0, ORIGIN)
    a20 = math.pi ** 2 * wigner_lg(2, 0, ORIGIN)
    n10 = math.pi ** 2 * wigner_numeric(LG10, ORIGIN)
    n20 = math.pi ** 2 * wigner_numeric(LG20, ORIGIN)
    record_property("detail", f"analytic {a10:+.0f}/{a20:+.0f}, numeric {n10:+.9f}/{n20:+.9f}")
    assert a10 == -1.0 and a20 == 1.0
    assert abs(n10 + 1) < 1e-6 and abs(n20 - 1) < 1e-6


@pytest.mark.criterion(3, "LG10 closed-form Bell sum and diag2 optimum")
def test_closed_form_and_diag2(record_property):
    closed = bell_sum_lg10_closed(0.45, 0.45)
    res = optimize_settings(LG10, "diag2")
    x, p_y = res.settings.alpha_prime[0], res.settings.beta_prime[1]
    record_property("detail", f"B(0.45,0.45)={closed:.5f}, |B|max={res.bell_abs:.5f} at ({x:+.4f}, {p_y:+.4f})")
    assert abs(closed + 2.176) <= 0.001
    assert 2.17 <= res.bell_abs <= 2.18
    # the diagonal family is symmetric under the sign flip of either coordinate pair
    assert abs(abs(x) - 0.45) <= 0.01 and abs(abs(p_y) - 0.45) <= 0.01


@pytest.mark.criterion(4, "LG10 full 8-parameter optimum")
def test_full8(record_property):
    res = optimize_settings(LG10, "full8")
    aligned, dev = align_settings(res.settings, REFERENCE_FULL8)
    record_property("detail", f"|B|={res.bell_abs:.5f}, coordinate deviation after alignment {dev:.4f}")
    assert 2.23 <= res.bell_abs <= 2.25
    assert dev <= 0.05
    assert bell_sum(LG10, aligned) == pytest.approx(bell_sum(LG10, res.settings), abs=1e-9)


@pytest.mark.criterion(5, "Beam-suite Bell sums, theory and simulated interferometer")
def test_beam_suite(record_property):
    targets = {(1.0, 0.0): -1.91, (0.4, 0.6): -2.15, (0.5, 0.5): -2.17}
    parts = []
    for (a, b), target in targets.items():
        beam = suite_beam(a, b)
        theory = bell_sum(beam, EXPERIMENT_SETTINGS)
        simulated = run_bell_experiment(beam, EXPERIMENT_SETTINGS, 1, noise=None).mean
        parts.append(f"{theory:.4f}/{simulated:.4f}")
        assert abs(theory - target) <= 0.02
        assert abs(simulated - target) <= 0.02
    record_property("detail", "theory/simulated " + ", ".join(parts))


@pytest.mark.criterion(6, "LG20 diag2 optimum and increasing violation curve")
def test_lg20_and_curve(record_property):
    lg20 = optimize_settings(LG20, "diag2").bell_abs
    curve = [v for _, v in violation_curve(3)]
    record_property("detail", f"LG20 |B|={lg20:.4f}, curve {[round(v, 4) for v in curve]}")
    assert abs(lg20 - 2.24) <= 0.01
    assert all(b > a for a, b in zip(curve, curve[1:]))


@pytest.mark.criterion(7, "Interferometer parity vs analytic, and refinement")
def test_interferometer_fidelity(record_property):
    rng = np.random.default_rng(2024)
    points = [PhaseSpacePoint(*p) for p in rng.uniform(-1, 1, (20, 4))]
    fine = DEFAULT_GRID.refined()
    coarse_err, fine_err = 0.0, 0.0
    for beam in (HG10, LG10, LG20):
        for pt in points:
            exact = bell_kernel(beam, pt)
            coarse_err = max(coarse_err, abs(measure_parity(beam, pt) - exact))
            fine_err = max(fine_err, abs(measure_parity(beam, pt, fine) - exact))
    record_property("detail", f"max error N={DEFAULT_GRID.samples_per_axis}: {coarse_err:.2e}, "
                              f"N={fine.samples_per_axis}: {fine_err:.2e}")
    assert coarse_err < 2e-3
    assert fine_err <= coarse_err / 2


@pytest.mark.criterion(8, "Momentum marginal of the Wigner function equals intensity")
def test_marginal(record_property):
    rng = np.random.default_rng(8)
    worst = 0.0
    for x, y in rng.uniform(-2, 2, (10, 2)):
        worst = max(worst, abs(marginal_x(LG10, x, y) - abs(eval_beam(LG10, x, y)) ** 2))
    record_property("detail", f"max deviation {worst:.2e}")
    assert worst < 1e-5


@pytest.mark.criterion(9, "LG20 spread exceeds LG10 under default noise")
def test_noise_spread(record_property):
    noise = NoiseModel(seed=0)
    r10 = run_bell_experiment(LG10, EXPERIMENT_SETTINGS, 500, noise=noise)
    r20 = run_bell_experiment(LG20, EXPERIMENT_SETTINGS, 500, noise=noise)
    record_property("detail", f"IQR LG10 {r10.iqr:.4f}, LG20 {r20.iqr:.4f}")
    assert r20.iqr > r10.iqr


@pytest.mark.criterion(10, "Repeated CLI runs are byte-identical")
def test_cli_determinism(tmp_path, record_property):
    commands = [
        ["experiment", "--beam", "lg:2,0", "--trials", "20", "--seed", "5", "--out", "{d}"],
        ["bell", "--beam", "lg:1,0", "--optimize", "diag2", "--seed", "1", "--out", "{d}/bell.json"],
        ["wigner", "--beam", "hg:1,0+i*hg:0,1", "--weights", "0.4,0.6", "--slice", "X,PY",
         "--span=-1:1:9", "--out", "{d}/w.csv"],
        ["modes", "--beam", "lg:2,1", "--grid", "5:101", "--out", "{d}/m.pgm"],
    ]
    snapshots = []
    for name in ("first", "second"):
        d = tmp_path / name
        d.mkdir()
        for cmd in commands:
            proc = subprocess.run([sys.executable, "-m", "vortexbell", *(c.format(d=d) for c in cmd)],
                                  capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
        snapshots.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
    record_property("detail", f"{len(snapshots[0])} files compared")
    assert snapshots[0] == snapshots[1]


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
