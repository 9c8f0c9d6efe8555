"""Cauchy-integral representation of N and its boundary conditions.

    N_0(s) = (1/2 pi i) oint U(xi)/(xi - s) dxi - 1   inside gamma
    N_0(s) = 1 - (1/2 pi i) oint U(xi)/(xi - s) dxi   outside gamma

with U(s) = V'(J(s)) J(s). U is analytic outside gamma, so integrals for
points near gamma are taken over the dilated curve DILATION * gamma, adding
the residue U(s) for points between the two curves.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict

import numpy as np

from src.conformal.curve import CurveSamples, contour_integral, inside_curve, radius_at
from src.conformal.maps import ConformalMap, map_eval
from src.potentials.potential import Potential

logger = logging.getLogger(__name__)

DILATION = 1.25


@dataclass(frozen=True)
class ResolventData:
    map: ConformalMap
    curve: CurveSamples
    potential: Potential

    def u(self, s):
        j = map_eval(self.map, s)
        return self.potential.evaluate(j, 1) * j

    @property
    def node_values(self) -> np.ndarray:
        return np.asarray(self.u(self.curve.nodes))

    def cauchy(self, s: complex, scale: float = 1.0) -> complex:
        s = complex(s)
        return contour_integral(self.map, lambda xi: self.u(xi) / (xi - s),
                                real_symmetric=(s.imag == 0.0), scale=scale)

    def n0(self, s: complex) -> complex:
        s = complex(s)
        if inside_curve(self.curve, s):
            return self.cauchy(s, DILATION) - 1.0
        if self._between(s):
            return 1.0 - self.cauchy(s, DILATION) + complex(self.u(s))
        return 1.0 - self.cauchy(s)

    def _between(self, s: complex) -> bool:
        if s.imag == 0.0:
            return False
        phi = math.atan2(abs(s.imag), s.real)
        return abs(s) < DILATION * radius_at(self.map, phi)

    def boundary_sum(self, phi: float, delta: float = 1e-3) -> complex:
        """N_+ + N_- - U at the curve point with angle phi.

        Limits from both sides are Richardson-extrapolated from offsets
        delta, delta/2, delta/4 along the ray.
        """
        s0 = radius_at(self.map, phi) * complex(math.cos(phi), math.sin(phi))

        def gap(step):
            return self.n0(s0 * (1.0 - step)) + self.n0(s0 * (1.0 + step))

        g1, g2, g4 = gap(delta), gap(delta / 2.0), gap(delta / 4.0)
        limit = (8.0 * g4 - 6.0 * g2 + g1) / 3.0
        return limit - complex(self.u(s0))

    def conditions(self, far: float = 1e6) -> Dict[str, complex]:
        """N_0(0), N_0(-1) (soft only) and N_0 at a far point."""
        checks = {"n_at_zero": self.n0(0.0), "n_at_far": self.n0(complex(far, 0.0))}
        if not self.map.is_hard:
            checks["n_at_minus_one"] = self.n0(-1.0)
        return checks
