"""Husimi and classical thermal distributions of the harmonic oscillator.

Conventions: hbar = 1, ``q = (a+ + a)/sqrt2``, ``p = i(a+ - a)/sqrt2``, and the
coherent label for the phase point ``(q, p)`` is ``z = (q + i p)/sqrt2``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .algebra import NormalForm
from .coherent import expectation, number_exp_nf

__all__ = [
    "ThermalParams",
    "PhaseGrid",
    "husimi_thermal",
    "classical_thermal",
    "husimi_from_state",
    "thermal_numerator_nf",
    "thermal_partition_function",
    "husimi_variance",
    "classical_variance",
    "quadrature_radius",
    "grid_integral",
    "normalization",
    "sup_distance",
    "marginal_variance",
    "evaluate_grid",
    "grid_csv",
]


@dataclass(frozen=True)
class ThermalParams:
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be finite and positive, got {self.beta}")


@dataclass(frozen=True)
class PhaseGrid:
    q_min: float
    q_max: float
    nq: int
    p_min: float
    p_max: float
    np: int

    def __post_init__(self):
        if self.nq < 2 or self.np < 2:
            raise ValueError("grid needs at least 2 points per axis")
        if not (self.q_min < self.q_max and self.p_min < self.p_max):
            raise ValueError("grid bounds must be increasing")

    @classmethod
    def parse(cls, text: str) -> PhaseGrid:
        """Parse ``"qmin:qmax:nq,pmin:pmax:np"``."""
        try:
            qs, ps = text.split(",")
            q0, q1, nq = qs.split(":")
            p0, p1, npts = ps.split(":")
            return cls(float(q0), float(q1), int(nq), float(p0), float(p1), int(npts))
        except ValueError as exc:
            raise ValueError(f"bad grid {text!r}: expected 'qmin:qmax:nq,pmin:pmax:np' ({exc})") from None

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linspace(self.q_min, self.q_max, self.nq), np.linspace(self.p_min, self.p_max, self.np)


def _beta(params) -> float:
    return params.beta if isinstance(params, ThermalParams) else ThermalParams(float(params)).beta


def husimi_thermal(q, p, params: ThermalParams | float):
    beta = _beta(params)
    g = -math.expm1(-beta)  # 1 - e^-beta without cancellation
    return g / (2 * math.pi) * np.exp(-g * (np.square(q) + np.square(p)) / 2)


def classical_thermal(q, p, params: ThermalParams | float):
    beta = _beta(params)
    return beta / (2 * math.pi) * np.exp(-beta * (np.square(q) + np.square(p)) / 2)


def thermal_partition_function(params: ThermalParams | float) -> float:
    return 1.0 / -math.expm1(-_beta(params))


def thermal_numerator_nf(params: ThermalParams | float, terms: int = 120) -> NormalForm:
    """Normal form of ``exp(-beta a+ a)`` truncated after ``terms`` powers."""
    return number_exp_nf(-_beta(params), terms)


def husimi_from_state(rho_nf: NormalForm, normalizer: float, q: float, p: float) -> float:
    """``<z|rho|z> / (2 pi)`` for ``rho = rho_nf / normalizer``."""
    if normalizer <= 0:
        raise ValueError("normalizer must be positive")
    z = complex(q, p) / math.sqrt(2)
    return (expectation(rho_nf, z) / normalizer).real / (2 * math.pi)


def husimi_variance(params: ThermalParams | float) -> float:
    """Variance of each quadrature marginal of the thermal Husimi density."""
    return 1.0 / -math.expm1(-_beta(params))


def classical_variance(params: ThermalParams | float) -> float:
    return 1.0 / _beta(params)


def quadrature_radius(params: ThermalParams | float, mass_loss: float = 1e-10) -> float:
    """Radius holding all but ``mass_loss`` of the (wider) quantum density."""
    return math.sqrt(2 * math.log(1 / mass_loss) * husimi_variance(params))


def grid_integral(values_fn, radius: float, n: int = 400) -> float:
    """Midpoint rule for ``values_fn(q, p)`` over ``[-radius, radius]^2``.

    For Gaussians of standard deviation ``sigma`` the rule's own error is
    ``O(exp(-2 pi^2 sigma^2 / h^2))`` with spacing ``h``; the neglected mass is
    set by ``radius``.
    """
    h = 2 * radius / n
    axis = -radius + h * (np.arange(n) + 0.5)
    qq, pp = np.meshgrid(axis, axis, indexing="ij")
    return float(values_fn(qq, pp).sum() * h * h)


def normalization(params: ThermalParams | float, n: int = 400) -> tuple[float, float]:
    """Quadrature mass of the Husimi and classical densities."""
    r = quadrature_radius(params)
    return (
        grid_integral(lambda q, p: husimi_thermal(q, p, params), r, n),
        grid_integral(lambda q, p: classical_thermal(q, p, params), r, n),
    )


def marginal_variance(fn, params: ThermalParams | float, n: int = 400) -> float:
    """Quadrature estimate of ``<q^2>`` under ``fn``."""
    r = quadrature_radius(params)
    return grid_integral(lambda q, p: q * q * fn(q, p, params), r, n)


def sup_distance(params: ThermalParams | float, grid: Optional[PhaseGrid] = None) -> float:
    grid = grid or PhaseGrid(-5.0, 5.0, 101, -5.0, 5.0, 101)
    qs, ps = grid.axes()
    qq, pp = np.meshgrid(qs, ps, indexing="ij")
    return float(np.abs(husimi_thermal(qq, pp, params) - classical_thermal(qq, pp, params)).max())


def evaluate_grid(params: ThermalParams | float, grid: PhaseGrid) -> list[tuple[float, float, float, float]]:
    """Rows ``(q, p, Q, Pcl)``, q-major."""
    qs, ps = grid.axes()
    rows = []
    for q in qs:
        for p in ps:
            rows.append((float(q), float(p), float(husimi_thermal(q, p, params)), float(classical_thermal(q, p, params))))
    return rows


def grid_csv(params: ThermalParams | float, grid: PhaseGrid) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["q", "p", "Q", "Pcl"])
    for row in evaluate_grid(params, grid):
        writer.writerow([repr(v) for v in row])
    return buf.getvalue()
