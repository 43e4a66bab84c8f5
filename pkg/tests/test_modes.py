import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import hermite as H

from vortexbell.errors import OrderTooLargeError, VortexBellError
from vortexbell.modes import (
    BeamSpec,
    FieldGrid,
    GridSpec,
    eval_beam,
    eval_hg,
    eval_lg,
    hermite_poly,
    hg,
    laguerre_poly,
    lg,
    sample_grid,
    sample_mode,
)


def laguerre_series(p, alpha, x):
    """Brute-force explicit sum for L_p^alpha."""
    return sum((-1) ** i * math.comb(p + alpha, p - i) * x ** i / math.factorial(i) for i in range(p + 1))


class TestPolynomials:
    def test_hermite_examples(self):
        assert hermite_poly(0, 1.7) == 1
        assert hermite_poly(1, 0.5) == pytest.approx(1.0)
        x = 0.5
        assert hermite_poly(3, x) == pytest.approx(8 * x ** 3 - 12 * x)
        assert hermite_poly(3, x) == pytest.approx(-5.0)

    @pytest.mark.parametrize("m", [0, 1, 2, 5, 11, 20])
    def test_hermite_matches_numpy_series(self, m):
        x = np.linspace(-3, 3, 13)
        coef = np.zeros(m + 1)
        coef[m] = 1
        np.testing.assert_allclose(hermite_poly(m, x), H.hermval(x, coef), rtol=1e-10, atol=1e-10)

    def test_laguerre_examples(self):
        assert laguerre_poly(0, 2, 3.3) == 1
        assert laguerre_poly(1, 0, 0.0) == 1
        x = 1.0
        assert laguerre_series(2, 1, x) == pytest.approx((x * x - 6 * x + 6) / 2)
        assert laguerre_poly(2, 1, x) == pytest.approx(0.5)

    @pytest.mark.parametrize("p,alpha", [(3, 0), (4, 2), (7, 1), (10, 3)])
    def test_laguerre_matches_series(self, p, alpha):
        for x in (0.0, 0.3, 1.7, 4.2):
            assert laguerre_poly(p, alpha, x) == pytest.approx(laguerre_series(p, alpha, x), rel=1e-10, abs=1e-12)

    def test_order_guard(self):
        hermite_poly(30, 0.1)
        with pytest.raises(OrderTooLargeError):
            hermite_poly(31, 0.1)
        with pytest.raises(OrderTooLargeError):
            laguerre_poly(31, 0, 0.1)
        with pytest.raises(OrderTooLargeError):
            eval_lg(31, 0, 0.0, 0.0)


class TestModeValues:
    def test_hg_examples(self):
        assert eval_hg(0, 0, 0, 0) == pytest.approx(1 / math.sqrt(math.pi))
        assert eval_hg(1, 0, 0, 0) == 0
        # sympy evaluation of the waist-sqrt(2) HG formula
        assert eval_hg(2, 2, 0.7, -0.3) == pytest.approx(0.0034617325867240946, rel=1e-12)

    @pytest.mark.parametrize(
        "m,n,expected",
        [
            # sympy evaluation of the LG formula (w = sqrt 2) at (0.7, -0.3)
            (2, 1, -0.29672289014715770777 + 0.12716695292021044619j),
            (1, 3, -0.16683201529692890225 - 0.17517361606177534736j),
            (3, 0, 0.026541456979056870812 - 0.071351709021620418936j),
        ],
    )
    def test_lg_matches_symbolic(self, m, n, expected):
        assert eval_lg(m, n, 0.7, -0.3) == pytest.approx(expected, rel=1e-12)

    def test_lg_examples(self):
        X, Y = np.meshgrid(np.linspace(-2, 2, 9), np.linspace(-2, 2, 9))
        np.testing.assert_allclose(eval_lg(0, 0, X, Y), eval_hg(0, 0, X, Y), atol=1e-15)
        assert eval_lg(1, 0, 0, 0) == 0
        expected = (eval_hg(1, 0, 1, 0) + 1j * eval_hg(0, 1, 1, 0)) / math.sqrt(2)
        assert eval_lg(1, 0, 1, 0) == pytest.approx(expected)
        assert eval_lg(1, 0, 1, 0) == pytest.approx(0.34219828031221653318)


class TestBeams:
    def test_zero_beam_rejected(self):
        with pytest.raises(VortexBellError):
            BeamSpec(((0.0, hg(1, 0)),))

    def test_normalization(self):
        beam = BeamSpec(((0.4, hg(1, 0)), (0.6j, hg(0, 1))))
        assert sum(abs(c) ** 2 for c in beam.coefficients) == pytest.approx(1.0, abs=1e-12)
        c = beam.coefficients
        assert c[0] == pytest.approx(0.4 / math.sqrt(0.52))
        assert c[1] == pytest.approx(0.6j / math.sqrt(0.52))

    def test_eval_beam_examples(self):
        assert eval_beam(BeamSpec.single(hg(1, 0)), 0, 0) == 0
        axis = np.linspace(-3, 3, 41)
        X, Y = np.meshgrid(axis, axis)
        vortex = BeamSpec(((1 / math.sqrt(2), hg(1, 0)), (1j / math.sqrt(2), hg(0, 1))))
        np.testing.assert_allclose(eval_beam(vortex, X, Y), eval_lg(1, 0, X, Y), atol=1e-14)
        mixed = BeamSpec(((0.4, hg(1, 0)), (0.6j, hg(0, 1))))
        a, b = 0.4 / math.sqrt(0.52), 0.6 / math.sqrt(0.52)
        by_hand = a * eval_hg(1, 0, 0.5, 0.5) + 1j * b * eval_hg(0, 1, 0.5, 0.5)
        assert eval_beam(mixed, 0.5, 0.5) == pytest.approx(by_hand)

    @given(
        st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), min_size=3, max_size=3),
        st.lists(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False), min_size=3, max_size=3),
    )
    @settings(max_examples=30, deadline=None)
    def test_linearity(self, c1, c2):
        modes = [hg(1, 0), lg(1, 1), hg(0, 2)]
        x, y = 0.3, -0.8
        raw = lambda cs: sum(c * m.evaluate(x, y) for c, m in zip(cs, modes))
        # BeamSpec rescales, so compare against the raw superposition divided by the norm
        for cs in (c1, c2, [a + b for a, b in zip(c1, c2)]):
            norm = math.sqrt(sum(abs(c) ** 2 for c in cs))
            if norm < 1e-6:
                continue
            beam = BeamSpec(tuple(zip(cs, modes)))
            assert eval_beam(beam, x, y) == pytest.approx(raw(cs) / norm, abs=1e-12)


class TestGrid:
    def test_even_grid_rejected(self):
        with pytest.raises(ValueError):
            GridSpec(6.0, 240)

    def test_coords(self):
        g = GridSpec(6.0, 121)
        c = g.coords
        assert c[0] == -6.0 and c[-1] == 6.0 and c[60] == 0.0
        assert g.spacing == pytest.approx(0.1)

    def test_sample_grid_power(self):
        g = GridSpec(6.0, 121)
        assert sample_grid(BeamSpec.single(lg(1, 0)), g).total_power() == pytest.approx(1.0, abs=1e-4)
        assert sample_grid(BeamSpec.single(hg(0, 0)), g).total_power() == pytest.approx(1.0, abs=1e-6)

    def test_field_is_immutable(self):
        f = sample_grid(BeamSpec.single(hg(0, 0)), GridSpec(3.0, 11))
        with pytest.raises(ValueError):
            f.values[0, 0] = 1.0

    def test_shape_checked(self):
        with pytest.raises(ValueError):
            FieldGrid(GridSpec(3.0, 11), np.zeros((9, 9)))


ORDERS = [(m, s - m) for s in range(5) for m in range(s + 1)]


@pytest.mark.parametrize("family", [hg, lg])
def test_orthonormality(family):
    g = GridSpec(7.0, 201)
    fields = {mn: sample_mode(family(*mn), g) for mn in ORDERS}
    for a in ORDERS:
        for b in ORDERS:
            expected = 1.0 if a == b else 0.0
            assert abs(fields[a].inner(fields[b]) - expected) < 1e-6, (a, b)


@pytest.mark.parametrize("m,n", [(1, 0), (0, 1), (2, 0), (3, 1), (1, 3), (2, 2), (4, 0)])
def test_phase_winding(m, n):
    phi = np.linspace(0, 2 * np.pi, 4001)
    vals = eval_lg(m, n, np.cos(phi), np.sin(phi))
    winding = np.unwrap(np.angle(vals))
    assert winding[-1] - winding[0] == pytest.approx(2 * np.pi * (m - n), abs=1e-9)


@given(
    st.integers(0, 6),
    st.integers(0, 6),
    st.floats(-4, 4, allow_nan=False),
    st.floats(-4, 4, allow_nan=False),
)
@settings(max_examples=60, deadline=None)
def test_parity(m, n, x, y):
    sign = (-1) ** (m + n)
    assert eval_hg(m, n, -x, -y) == sign * eval_hg(m, n, x, y)
    assert eval_lg(m, n, -x, -y) == pytest.approx(sign * eval_lg(m, n, x, y), rel=1e-12, abs=1e-300)
