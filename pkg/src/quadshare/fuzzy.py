"""Mamdani inference engine over seven-set triangular partitions.

Inputs (error and error-rate) and the output share the same normalized
universe shape: seven triangles with evenly spaced centers, unit overlap
(each interior point belongs to exactly two sets, memberships summing to 1),
and saturating shoulders past the outermost centers. Rule firing is min-AND,
aggregation is per-consequent max, and defuzzification is the centroid of
the clipped-and-merged output sets computed by trapezoid quadrature on a
fixed sample grid.
"""
from __future__ import annotations

import math

import numpy as np

from . import kernels
from .errors import ZeroActivation
from .tables import DEFAULT_TABLES, GAIN_TARGETS, RuleTable

DEFAULT_RESOLUTION = 1001
DEFAULT_AREA_TOL = 1e-12


class FuzzyPartition:
    """Seven triangular sets with saturating end shoulders on [lo, hi]."""

    def __init__(self, lo: float = -3.0, hi: float = 3.0):
        if not (hi > lo):
            raise ValueError(f"partition needs hi > lo, got [{lo}, {hi}]")
        self.lo = float(lo)
        self.hi = float(hi)
        self.centers = np.linspace(self.lo, self.hi, 7)

    def fuzzify(self, x: float) -> np.ndarray:
        """Membership of x in each of the seven sets; sums to 1 everywhere."""
        return kernels.fuzzify(float(x), self.centers)

    def clamp(self, x: float) -> float:
        return min(max(float(x), self.lo), self.hi)


class FuzzyEngine:
    """Gain-increment inference for the three PID gains.

    The output grid, the sampled output membership matrix and the trapezoid
    weights are precomputed once so each infer() call is a single kernel hit.
    """

    def __init__(
        self,
        tables: dict[str, RuleTable] | None = None,
        in_lo: float = -3.0,
        in_hi: float = 3.0,
        out_lo: float = -3.0,
        out_hi: float = 3.0,
        resolution: int = DEFAULT_RESOLUTION,
        area_tol: float = DEFAULT_AREA_TOL,
    ):
        if resolution < 3:
            raise ValueError("resolution must be at least 3")
        self.e_part = FuzzyPartition(in_lo, in_hi)
        self.ec_part = FuzzyPartition(in_lo, in_hi)
        self.out_part = FuzzyPartition(out_lo, out_hi)
        self.resolution = int(resolution)
        self.area_tol = float(area_tol)

        if tables is None:
            tables = DEFAULT_TABLES
        self.tables = {t: tables[t] for t in GAIN_TARGETS}
        self._rules = {t: self.tables[t].to_indices() for t in GAIN_TARGETS}

        self.grid = np.linspace(out_lo, out_hi, self.resolution)
        self.h = (out_hi - out_lo) / (self.resolution - 1)
        # tri[k, j] = membership of output set k at grid point j
        self._tri = np.vstack([self.out_part.fuzzify(x) for x in self.grid]).T.copy()
        self._weights = np.ones(self.resolution)
        self._weights[0] = self._weights[-1] = 0.5

    def rule_levels(self, e: float, ec: float, target: str) -> np.ndarray:
        """Max firing strength reaching each of the 7 consequent labels."""
        mu_e = self.e_part.fuzzify(e)
        mu_ec = self.ec_part.fuzzify(ec)
        lev = np.zeros(7)
        act = np.minimum(mu_e[:, None], mu_ec[None, :])
        np.maximum.at(lev, self._rules[target].ravel(), act.ravel())
        return lev

    def infer(self, e: float, ec: float, target: str) -> float:
        """Crisp gain increment on the output universe for one gain target."""
        val = kernels.infer(
            float(e),
            float(ec),
            self.e_part.centers,
            self.ec_part.centers,
            self._rules[target],
            self._tri,
            self.grid,
            self._weights,
            self.h,
            self.area_tol,
        )
        if math.isnan(val):
            raise ZeroActivation(
                f"aggregated output area below {self.area_tol} for "
                f"target={target} e={e} ec={ec}"
            )
        return float(val)

    def gain_deltas(self, e: float, ec: float) -> tuple[float, float, float]:
        """(dkp, dki, dkd) on the normalized output universe."""
        return (
            self.infer(e, ec, "kp"),
            self.infer(e, ec, "ki"),
            self.infer(e, ec, "kd"),
        )
