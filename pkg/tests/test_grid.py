import math

import numpy as np
import pytest

from nlgauge.errors import ValidationError, WindingError
from nlgauge.grid import Grid, STField, WaveFunction, st_to_wavefunction, wavefunction_to_st

from helpers import nodeless_psi


def test_grid_validation():
    with pytest.raises(ValidationError):
        Grid(40, 100)
    with pytest.raises(ValidationError):
        Grid(-1, 64)
    g = Grid(40, 64)
    assert g.x[0] == -20.0 and g.dx == 40 / 64
    assert Grid.from_json(g.to_json()) == g


def test_spectral_derivatives():
    g = Grid(2 * math.pi, 64)
    f = np.exp(np.sin(g.x))
    d1, d2 = g.derivs(f)
    assert np.max(np.abs(d1 - np.cos(g.x) * f)) < 1e-12
    assert np.max(np.abs(d2 - (np.cos(g.x) ** 2 - np.sin(g.x)) * f)) < 1e-11
    assert np.allclose(g.deriv(f, 2), d2, atol=1e-12)


def test_from_expressions_extracts_winding():
    g = Grid(40, 128)
    k = 2 * math.pi * 3 / 40
    f = STField.from_expressions(g, f"{k}*x + sin(2*pi*x/40)", "0")
    assert f.k == pytest.approx(k, rel=1e-12)
    assert np.max(np.abs(f.S - (k * g.x + np.sin(2 * math.pi * g.x / 40)))) < 1e-12
    f2 = STField.from_expressions(g, "0", "0", winding=2)
    assert f2.k == pytest.approx(4 * math.pi / 40)
    with pytest.raises(WindingError):
        STField.from_expressions(g, "0", "x")


def test_stfield_rejects_bad_arrays():
    g = Grid(40, 64)
    with pytest.raises(ValidationError):
        STField(g, np.zeros(10), np.zeros(64))
    with pytest.raises(ValidationError):
        STField(g, np.full(64, np.nan), np.zeros(64))


def test_plane_wave_conversion():
    g = Grid(40, 128)
    k = 2 * math.pi * 5 / 40
    f = wavefunction_to_st(WaveFunction(g, np.exp(1j * k * g.x)))
    assert f.k == pytest.approx(k, rel=1e-12)
    assert np.max(np.abs(f.s)) < 1e-12 and np.max(np.abs(f.T)) < 1e-15


def test_gaussian_conversion():
    g = Grid(10, 64)
    f = wavefunction_to_st(WaveFunction(g, np.exp(-g.x ** 2 / 4)))
    assert f.k == 0.0 and np.max(np.abs(f.S)) == 0.0
    assert np.max(np.abs(f.T + g.x ** 2 / 4)) < 1e-14


def test_random_nodeless_round_trip():
    rng = np.random.default_rng(0)
    g = Grid(40, 256)
    for n in range(10):
        psi = nodeless_psi(g, rng) * np.exp(2j * math.pi * (n - 5) * (g.x - g.x0) / g.L)
        back = st_to_wavefunction(wavefunction_to_st(WaveFunction(g, psi))).psi
        assert np.max(np.abs(back - psi) / np.abs(psi)) < 1e-12


def test_node_refused():
    g = Grid(40, 64)
    with pytest.raises(ValidationError, match="node"):
        wavefunction_to_st(WaveFunction(g, g.x.astype(complex)))


def test_csv_round_trip(tmp_path):
    g = Grid(40, 64)
    f = STField.from_expressions(g, "0.2*x + cos(x)", "-0.1*sin(x)^2", winding=0)
    f = f.with_arrays(k=2 * math.pi / 40)
    p = tmp_path / "f.csv"
    f.to_csv(p)
    f2 = STField.from_csv(p)
    assert f2.k == f.k and np.array_equal(f2.T, f.T)
    assert np.max(np.abs(f2.s - f.s)) < 1e-12
