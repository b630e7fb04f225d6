"""A closed-form planar family with a single migrating zero.

On the unit circle the direction D = cos 2phi e_r + sin 2phi e_phi winds
three times.  The harmonic fields B_lam = grad U_lam with

  U_lam = 3 lam cos 2phi / (2 r^2) - (1 - lam^2)(cos phi / r + cos 3phi / (3 r^3))

are parallel to D on r = 1 with amplitude a_lam = 2(1 - lam^2) cos phi - 3 lam.
In complex form B_x - i B_y = (1 - lam^2)(z^2 + 1)/z^4 - 3 lam / z^3, so the
zeros solve z^2 - 2 mu z + 1 = 0 with mu = 3 lam / (2 - 2 lam^2).
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidInput
from .geometry import DirectionField, polar_to_cartesian
from .io import write_csv

ROTATION = 3
DECAY = 2


def _check(lam):
    if not -1 < lam < 1:
        raise InvalidInput("lambda must lie in (-1, 1)")


def mu_of_lambda(lam):
    _check(lam)
    return 3 * lam / (2 - 2 * lam * lam)


def potential(lam, r, phi):
    return (3 * lam * np.cos(2 * phi) / (2 * r ** 2)
            - (1 - lam * lam) * (np.cos(phi) / r + np.cos(3 * phi) / (3 * r ** 3)))


def field_lambda(lam, r, phi):
    """(B_r, B_phi) of grad U_lam."""
    k = 1 - lam * lam
    br = k * (np.cos(phi) / r ** 2 + np.cos(3 * phi) / r ** 4) - 3 * lam * np.cos(2 * phi) / r ** 3
    bp = k * (np.sin(phi) / r ** 2 + np.sin(3 * phi) / r ** 4) - 3 * lam * np.sin(2 * phi) / r ** 3
    return br, bp


def boundary_amplitude(lam, phi):
    return 2 * (1 - lam * lam) * np.cos(phi) - 3 * lam


def direction_field(m=720):
    return DirectionField.from_polar_function(lambda p: (np.cos(2 * p), np.sin(2 * p)), m)


def zero_position(lam):
    """(r0, phi0, regime).  In the boundary regime the zeros are (1, +-phi0)."""
    mu = mu_of_lambda(lam)
    if mu > 1:
        return mu + np.sqrt(mu * mu - 1), 0.0, "interior-right"
    if mu < -1:
        return -mu + np.sqrt(mu * mu - 1), np.pi, "interior-left"
    return 1.0, float(np.arccos(mu)), "boundary-pair"


def regime_transitions():
    """The lambda values where |mu| = 1, found numerically."""
    lo = brentq(lambda l: mu_of_lambda(l) + 1, -0.99, 0.0, xtol=1e-15)
    hi = brentq(lambda l: mu_of_lambda(l) - 1, 0.0, 0.99, xtol=1e-15)
    return lo, hi


def predicted_zero_count():
    return ROTATION - DECAY


def weighted_zero_count(lam):
    """Zeros in r > 1 count 1, zeros on r = 1 count 1/2 each."""
    _, _, regime = zero_position(lam)
    return 1.0 if regime != "boundary-pair" else 2 * 0.5


@dataclass
class PathRow:
    lam: float
    regime: str
    r0: float
    phi0: float
    residual: float

    def row(self):
        return (self.lam, self.regime, self.r0, self.phi0, self.residual)


def trace_zero_path(lams, tol=1e-10):
    """Zero positions along a lambda sweep.  lambda = +-1 are recorded as escapes."""
    rows = []
    for lam in lams:
        lam = float(lam)
        if abs(lam) >= 1:
            rows.append(PathRow(lam, "escape", np.inf, 0.0 if lam > 0 else np.pi, 0.0))
            continue
        r0, p0, regime = zero_position(lam)
        res = max(float(np.hypot(*field_lambda(lam, r0, s * p0))) for s in (1, -1))
        if res > tol:
            raise InvalidInput(f"zero at lambda = {lam} leaves residual {res:.3g}")
        rows.append(PathRow(lam, regime, r0, p0, res))
    return rows


def write_trajectory(path, rows):
    return write_csv(path, ["lambda", "regime", "r0", "phi0", "residual"], [r.row() for r in rows])


def field_cartesian(lam, x, y):
    r, p = np.hypot(x, y), np.arctan2(y, x)
    return polar_to_cartesian(*field_lambda(lam, r, p), p)
