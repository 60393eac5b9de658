import csv
import io
import math

import numpy as np
import pytest
from scipy import integrate

from bosonorder.algebra import NormalForm
from bosonorder.coherent import vacuum_projector_nf
from bosonorder.phasespace import (
    PhaseGrid,
    ThermalParams,
    classical_thermal,
    classical_variance,
    grid_csv,
    husimi_from_state,
    husimi_thermal,
    husimi_variance,
    marginal_variance,
    normalization,
    sup_distance,
    thermal_numerator_nf,
    thermal_partition_function,
)

BETAS = [0.01, 0.1, 1, 10]


def test_husimi_at_origin_ln2():
    assert husimi_thermal(0, 0, math.log(2)) == pytest.approx(1 / (4 * math.pi), rel=1e-15)


@pytest.mark.parametrize("q, p", [(0, 0), (1, -0.5), (2.5, 1.5)])
def test_husimi_ground_state_limit(q, p):
    ground = math.exp(-(q * q + p * p) / 2) / (2 * math.pi)
    assert abs(husimi_thermal(q, p, 50) - ground) < 1e-10


def test_classical_at_origin():
    assert classical_thermal(0, 0, 1) == pytest.approx(1 / (2 * math.pi), rel=1e-15)


def test_densities_are_positive():
    qq, pp = np.meshgrid(np.linspace(-8, 8, 9), np.linspace(-8, 8, 9))
    for beta in BETAS:
        assert np.all(husimi_thermal(qq, pp, beta) > 0)


@pytest.mark.parametrize("beta", [0.1, 1, 10])
def test_normalization(beta):
    q_mass, c_mass = normalization(beta)
    assert abs(q_mass - 1) < 1e-6
    assert abs(c_mass - 1) < 1e-6


def test_normalization_against_adaptive_quadrature():
    r = 12.0
    val, _ = integrate.dblquad(lambda p, q: husimi_thermal(q, p, 1.0), -r, r, -r, r, epsabs=1e-11)
    assert abs(val - 1) < 1e-6


def test_quantum_wider_at_beta_tenth():
    assert classical_variance(0.1) == pytest.approx(10)
    assert husimi_variance(0.1) == pytest.approx(1 / (1 - math.exp(-0.1)))
    assert husimi_variance(0.1) > classical_variance(0.1)


@pytest.mark.parametrize("beta", BETAS)
def test_width_ordering(beta):
    vq = marginal_variance(husimi_thermal, beta)
    vc = marginal_variance(classical_thermal, beta)
    assert vq == pytest.approx(husimi_variance(beta), rel=1e-6)
    assert vc == pytest.approx(classical_variance(beta), rel=1e-6)
    assert vq > vc


def test_classical_limit_is_monotone():
    d = [sup_distance(b) for b in (1, 0.5, 0.1, 0.01)]
    assert all(x > y for x, y in zip(d, d[1:]))


def test_vacuum_state_at_origin():
    assert husimi_from_state(vacuum_projector_nf(30), 1.0, 0, 0) == pytest.approx(1 / (2 * math.pi), abs=1e-15)


def test_thermal_state_at_one_zero():
    nf = thermal_numerator_nf(1.0)
    got = husimi_from_state(nf, thermal_partition_function(1.0), 1.0, 0.0)
    assert abs(got - husimi_thermal(1.0, 0.0, 1.0)) < 1e-10


def test_thermal_state_on_random_grid():
    rng = np.random.default_rng(11)
    params = ThermalParams(0.7)
    nf = thermal_numerator_nf(params)
    z_part = thermal_partition_function(params)
    pts = rng.uniform(-3, 3, size=(40, 2))
    diff = max(abs(husimi_from_state(nf, z_part, q, p) - husimi_thermal(q, p, params)) for q, p in pts)
    assert diff < 1e-9


def test_husimi_from_state_rejects_bad_normalizer():
    with pytest.raises(ValueError):
        husimi_from_state(NormalForm.one(), 0.0, 0, 0)


def test_params_validation():
    for bad in (0, -1, float("inf"), float("nan")):
        with pytest.raises(ValueError):
            ThermalParams(bad)


def test_grid_parse_and_validation():
    g = PhaseGrid.parse("-1:1:3,0:2:2")
    assert g == PhaseGrid(-1.0, 1.0, 3, 0.0, 2.0, 2)
    for bad in ("-1:1:1,0:2:2", "1:-1:3,0:2:2", "1:2:3", "a:b:c,d:e:f"):
        with pytest.raises(ValueError):
            PhaseGrid.parse(bad)


def test_csv_layout():
    text = grid_csv(ThermalParams(1.0), PhaseGrid.parse("-1:1:3,0:1:2"))
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["q", "p", "Q", "Pcl"]
    assert len(rows) == 1 + 3 * 2
    assert [(float(r[0]), float(r[1])) for r in rows[1:3]] == [(-1.0, 0.0), (-1.0, 1.0)]
    q, p, qv, pv = map(float, rows[4])
    assert (q, p) == (0.0, 1.0)
    assert qv == husimi_thermal(0.0, 1.0, 1.0)
    assert pv == classical_thermal(0.0, 1.0, 1.0)
