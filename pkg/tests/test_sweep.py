
import numpy as np
import pytest

from wgdetect.model import TWO_PI, BareParams, CavityParams, bare_dp, cavity_dp
from wgdetect.sweep import (
    DEGENERATE,
    AxisSpec,
    InvalidAxis,
    figure_sweep,
    line_scan_fig6,
    matched_g,
    sweep,
)


def test_axis_parse():
    ax = AxisSpec.parse("V:0:1.2:5")
    assert ax == AxisSpec("V", 0.0, 1.2, 5)
    np.testing.assert_allclose(ax.values(), [0, 0.3, 0.6, 0.9, 1.2])


@pytest.mark.parametrize("text", ["bogus:0:1:3", "V:1:0:3", "V:0:1:1", "V:0:1", "V:a:1:3"])
def test_axis_rejects(text):
    with pytest.raises(InvalidAxis):
        AxisSpec.parse(text)


def test_bare_sweep_rejects_cavity_axis():
    with pytest.raises(InvalidAxis):
        sweep(BareParams.from_user(gamma_q=0.16, h=0.1), [AxisSpec("V", 0, 1, 3)])


def test_cells_equal_direct_calls():
    base = CavityParams.from_user(gamma_q=0.16, gamma_c=0.76, h=0.1, V=0.0, g=0.29)
    res = sweep(base, [AxisSpec("V", 0.2, 0.9, 2), AxisSpec("delta", -0.1, 0.1, 2)])
    assert res.shape == (2, 2)
    expected = [(0.2, -0.1), (0.2, 0.1), (0.9, -0.1), (0.9, 0.1)]
    assert res.coords == pytest.approx(expected)
    for (V, d), cell in zip(expected, res.cells):
        p = CavityParams.from_user(gamma_q=0.16, gamma_c=0.76, h=0.1, V=V, g=0.29, delta=d)
        assert cell.eta == cavity_dp(p).eta


def test_gamma_1_axis():
    base = BareParams.from_user(gamma_q=0.16, h=0.0)
    res = sweep(base, [AxisSpec("Gamma_1", 0.0, 0.32, 3)])
    assert res.cells[1].eta == bare_dp(BareParams.from_user(gamma_q=0.16, Gamma_1=0.16)).eta


def test_degenerate_cells_marked():
    base = BareParams.from_user(gamma_q=0.0, h=0.0)
    res = sweep(base, [AxisSpec("h", 0.0, 1.0, 3)])
    assert res.status[0] == DEGENERATE and res.cells[0] is None
    assert res.status[1:] == ["ok", "ok"]
    assert res.n_degenerate == 1


def test_parallel_matches_serial():
    base = CavityParams.from_user(gamma_q=0.16, gamma_c=0.76, h=0.0, V=0.0, g=0.29)
    axes = [AxisSpec("h", 0.0, 1.0, 31), AxisSpec("V", 0.0, 1.2, 31)]
    a = sweep(base, axes, workers=1)
    b = sweep(base, axes, workers=3)
    assert [c.eta for c in a.cells] == [c.eta for c in b.cells]
    assert [c.solution for c in a.cells] == [c.solution for c in b.cells]


def test_matched_g_follows_formula():
    p = CavityParams.from_user(gamma_q=0.16, gamma_c=0.76, h=0.0, V=0.61, g=0.0)
    assert matched_g(p).g / TWO_PI == pytest.approx(0.2882, abs=1e-4)
    below = CavityParams.from_user(gamma_q=0.16, gamma_c=0.76, h=0.0, V=0.3, g=0.5)
    assert matched_g(below).g == 0.0


class TestFigures:
    def test_fig3_peak(self):
        res = figure_sweep(3)
        i, best = res.best()
        assert res.coords[i] == pytest.approx((0.0, 0.16))
        assert best.eta == pytest.approx(0.3322, abs=1e-4)
        assert best.eta <= 1 / (1 + 2 * TWO_PI * 0.16) + 1e-9

    def test_fig3_symmetric_in_detuning(self):
        eta = figure_sweep(3, [AxisSpec("delta", -1, 1, 41), AxisSpec("Gamma_1", 0, 0.8, 21)]).eta_array()
        np.testing.assert_allclose(eta, eta[::-1], rtol=1e-12, atol=0)

    def test_fig4_peak(self):
        res = figure_sweep(4, [AxisSpec("h", 0.0, 1.0, 51), AxisSpec("V", 0.0, 1.2, 201)])
        i, best = res.best()
        h, V = res.coords[i]
        assert h == 0.0
        assert best.eta == pytest.approx(0.5439, abs=1e-3)
        assert 0.58 <= V <= 0.68

    def test_fig2_peak_rises_as_dissipation_falls(self):
        eta = figure_sweep(2, [AxisSpec("gamma_q", 0.02, 1.0, 25), AxisSpec("h", 0.0, 1.5, 301)]).eta_array()
        peaks = eta.max(axis=1)
        assert np.all(np.diff(peaks) < 0)

    def test_fig6_budget(self):
        res = figure_sweep(6, [AxisSpec("V", 0.0, 1.2, 241)])
        assert res.g_mode == "matched"
        assert res.cells[0].p_t == 1.0
        i, best = res.best()
        assert res.coords[i][0] == pytest.approx(0.61, abs=0.005)
        sh = best.shares()
        assert sh["r"] == pytest.approx(0.18, abs=0.005)
        assert sh["t"] < 1e-6

    def test_fig6_requires_h_zero(self):
        base = CavityParams.from_user(gamma_q=0.16, gamma_c=0.76, h=0.1, V=0.0, g=0.0)
        with pytest.raises(ValueError):
            line_scan_fig6(base, AxisSpec("V", 0, 1, 3))

    def test_unknown_figure(self):
        with pytest.raises(KeyError):
            figure_sweep(7)
