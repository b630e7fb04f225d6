"""Shooting solver for the one-dimensional Euler-Lagrange eigenproblem.

In the variables f+ = w + chi and f- = w - chi the system reads

  (1 - mu) f+'' = (1 - mu) a(a+2)/(4z^2) f+ - (1 + mu) g^2/(4z^2) f+ + (1 - mu (d^2+e^2)/2) f+
                  - (g/z) f-' + (1 - mu(a+1)) g/(2z^2) f- - mu (d^2-e^2)/2 f-
  (1 + mu) f-'' = (1 + mu) a(a+2)/(4z^2) f- - (1 - mu) g^2/(4z^2) f- + (1 + mu (d^2+e^2)/2) f-
                  - (g/z) f+' + (1 + mu(a+1)) g/(2z^2) f+ + mu (d^2-e^2)/2 f+

on [b0, bt] with f+- = 0 at both ends.  The reduced (x-independent) system
drops the terms without a 1/z^2 or 1/z factor.  Two trajectories are shot
from each end towards a matching point and the eigenvalue condition is the
vanishing of the 4x4 determinant built from them.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import BlowUp, InvalidInput, NoEigenvalueFound, StepSizeUnderflow
from .hardy import WeightParams
from .io import write_csv
from .minmax import mu_analytic

EPS_MU = 1e-3
RESCALE_AT = 1e8

# Fehlberg 4(5) tableau
_C = np.array([0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2])
_A = np.array([
    [0, 0, 0, 0, 0],
    [1 / 4, 0, 0, 0, 0],
    [3 / 32, 9 / 32, 0, 0, 0],
    [1932 / 2197, -7200 / 2197, 7296 / 2197, 0, 0],
    [439 / 216, -8, 3680 / 513, -845 / 4104, 0],
    [-8 / 27, 2, -3544 / 2565, 1859 / 4104, -11 / 40],
])
_B4 = np.array([25 / 216, 0, 1408 / 2565, 2197 / 4104, -1 / 5, 0])
_B5 = np.array([16 / 135, 0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55])


@numba.njit(cache=True, nogil=True)
def _deriv(z, Y, out, cf):
    mu, alpha, gamma, sp, sm, md = cf[0], cf[1], cf[2], cf[3], cf[4], cf[5]
    ca = alpha * (alpha + 2) / 4
    g2 = gamma * gamma / 4
    iz = 1.0 / z
    iz2 = iz * iz
    for j in range(Y.shape[1]):
        fp, dfp, fm, dfm = Y[0, j], Y[1, j], Y[2, j], Y[3, j]
        ddp = ((1 - mu) * ca * iz2 * fp - (1 + mu) * g2 * iz2 * fp + sp * fp - gamma * iz * dfm
               + (1 - mu * (alpha + 1)) * gamma * 0.5 * iz2 * fm - md * fm) / (1 - mu)
        ddm = ((1 + mu) * ca * iz2 * fm - (1 - mu) * g2 * iz2 * fm + sm * fm - gamma * iz * dfp
               + (1 + mu * (alpha + 1)) * gamma * 0.5 * iz2 * fp + md * fp) / (1 + mu)
        out[0, j] = dfp
        out[1, j] = ddp
        out[2, j] = dfm
        out[3, j] = ddm


@numba.njit(cache=True, nogil=True)
def _orthonormalize(Y):
    m = Y.shape[1]
    for j in range(m):
        for i in range(j):
            s = 0.0
            for r in range(4):
                s += Y[r, i] * Y[r, j]
            for r in range(4):
                Y[r, j] -= s * Y[r, i]
        nrm = 0.0
        for r in range(4):
            nrm += Y[r, j] * Y[r, j]
        nrm = np.sqrt(nrm)
        for r in range(4):
            Y[r, j] /= nrm


@numba.njit(cache=True, nogil=True)
def _rkf45(Y0, z0, z1, cf, tol, rescale, C, A, B4, B5):
    """Integrate the columns of Y0 from z0 to z1.  Returns (Y, status, steps)."""
    Y = Y0.copy()
    m = Y.shape[1]
    K = np.zeros((6, 4, m))
    T = np.zeros((4, m))
    span = z1 - z0
    sgn = 1.0 if span > 0 else -1.0
    h = sgn * 0.01 * min(abs(z0), abs(span))
    z = z0
    steps = 0
    while sgn * (z1 - z) > 0:
        if sgn * (z + h - z1) > 0:
            h = z1 - z
        if abs(h) < 1e-14 * abs(z):
            return Y, 1, steps
        for s in range(6):
            for r in range(4):
                for j in range(m):
                    acc = Y[r, j]
                    for q in range(s):
                        acc += h * A[s, q] * K[q, r, j]
                    T[r, j] = acc
            _deriv(z + C[s] * h, T, K[s], cf)
        err = 0.0
        for j in range(m):
            scale = 0.0
            for r in range(4):
                scale = max(scale, abs(Y[r, j]))
            scale = tol * max(scale, 1e-300)
            for r in range(4):
                e = 0.0
                for s in range(6):
                    e += (B5[s] - B4[s]) * K[s, r, j]
                err = max(err, abs(h * e) / scale)
        if err <= 1.0:
            for r in range(4):
                for j in range(m):
                    acc = Y[r, j]
                    for s in range(6):
                        acc += h * B5[s] * K[s, r, j]
                    Y[r, j] = acc
            z += h
            steps += 1
            if rescale:
                big = 0.0
                for r in range(4):
                    for j in range(m):
                        big = max(big, abs(Y[r, j]))
                if not np.isfinite(big):
                    return Y, 2, steps
                if big > RESCALE_AT:
                    _orthonormalize(Y)
        fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h *= fac
    return Y, 0, steps


@dataclass
class ShootingProblem:
    params: WeightParams
    b0: float
    btilde: float
    reduced: bool = False
    match: str = "center"
    tol: float = 1e-10

    def __post_init__(self):
        if not (0 < self.b0 < self.btilde):
            raise InvalidInput("need 0 < b0 < btilde")
        if self.match not in ("center", "log"):
            raise InvalidInput("match must be 'center' or 'log'")

    @property
    def matching_point(self):
        if self.match == "log":
            return float(np.sqrt(self.b0 * self.btilde))
        return 0.5 * (self.b0 + self.btilde)

    def coefficients(self, mu):
        w = self.params
        if self.reduced:
            sp = sm = md = 0.0
        else:
            s = 0.5 * mu * (w.d ** 2 + w.e ** 2)
            sp, sm, md = 1 - s, 1 + s, 0.5 * mu * (w.d ** 2 - w.e ** 2)
        return np.array([mu, w.alpha, w.gamma, sp, sm, md], dtype=float)


def rhs(problem, mu, z, y):
    """First-order right-hand side for a single state (f+, f+', f-, f-')."""
    Y = np.asarray(y, dtype=float).reshape(4, 1)
    k = np.zeros((4, 1))
    _deriv(float(z), Y, k, problem.coefficients(mu))
    return k[:, 0]


def _check_mu(mu):
    if not (-1 + EPS_MU <= mu <= 1 - EPS_MU):
        raise InvalidInput(f"mu = {mu} too close to +-1")


def _run(problem, mu, z0, z1, Y0, rescale):
    Y, status, _ = _rkf45(np.ascontiguousarray(Y0, dtype=float), float(z0), float(z1),
                          problem.coefficients(mu), problem.tol, rescale, _C, _A, _B4, _B5)
    if status == 1:
        raise StepSizeUnderflow(f"step size underflow at mu = {mu}")
    if status == 2:
        raise BlowUp(f"trajectory overflow at mu = {mu}")
    return Y


def integrate(problem, mu, z0, z1, y0):
    """Single trajectory from z0 to z1 without rescaling."""
    _check_mu(mu)
    return _run(problem, mu, z0, z1, np.asarray(y0, dtype=float).reshape(4, 1), False)[:, 0]


def integrate_system(problem, mu, side):
    """Two trajectories with f+- = 0 and unit derivatives at one end, at the matching point.

    Columns are rescaled (orthonormalized) on the way, so only their span is meaningful.
    """
    _check_mu(mu)
    start = problem.b0 if side == "left" else problem.btilde
    if side not in ("left", "right"):
        raise InvalidInput("side must be 'left' or 'right'")
    Y0 = np.zeros((4, 2))
    Y0[1, 0] = 1.0
    Y0[3, 1] = 1.0
    return _run(problem, mu, start, problem.matching_point, Y0, True)


def _orient(Y):
    Q, R = np.linalg.qr(Y)
    return Q * np.sign(np.diag(R))


def matching_determinant(problem, mu):
    """det [Q_left Q_right] with orthonormal, orientation-preserving columns."""
    QL = _orient(integrate_system(problem, mu, "left"))
    QR = _orient(integrate_system(problem, mu, "right"))
    return float(np.linalg.det(np.hstack([QL, QR])))


@dataclass
class EigenResult:
    eigenvalues: list
    trace_mu: np.ndarray = field(repr=False)
    trace_det: np.ndarray = field(repr=False)

    @property
    def found(self):
        return len(self.eigenvalues) > 0

    @property
    def mu_min(self):
        return min(self.eigenvalues) if self.eigenvalues else float("nan")


def _threads():
    try:
        return max(1, int(os.environ.get("AXIDIRECT_THREADS", "0")) or os.cpu_count() or 1)
    except ValueError:
        return 1


def find_eigenvalues(problem, window=None, n_scan=200, root_tol=1e-8, strict=False):
    """Scan the determinant on a uniform mu grid, refine sign changes and near-zero minima."""
    lo, hi = window if window is not None else (EPS_MU, 1 - EPS_MU)
    _check_mu(lo)
    _check_mu(hi)
    mus = np.linspace(lo, hi, n_scan)

    def det(m):
        return matching_determinant(problem, float(m))

    n = _threads()
    if n > 1:
        with ThreadPoolExecutor(n) as ex:
            dets = np.array(list(ex.map(det, mus)))
    else:
        dets = np.array([det(m) for m in mus])
    roots = []
    for i in range(n_scan - 1):
        if dets[i] == 0.0:
            roots.append(mus[i])
        elif dets[i] * dets[i + 1] < 0:
            roots.append(brentq(det, mus[i], mus[i + 1], xtol=root_tol))
    if dets[-1] == 0.0:
        roots.append(mus[-1])
    a = np.abs(dets)
    for i in range(1, n_scan - 1):
        if a[i] < a[i - 1] and a[i] < a[i + 1] and dets[i - 1] * dets[i + 1] > 0 and dets[i - 1] * dets[i] > 0:
            res = minimize_scalar(lambda m: abs(det(m)), bounds=(mus[i - 1], mus[i + 1]),
                                  method="bounded", options={"xatol": root_tol})
            if res.fun < 1e-6:
                roots.append(float(res.x))
    roots = sorted(roots)
    uniq = []
    for r in roots:
        if not uniq or r - uniq[-1] > 10 * root_tol:
            uniq.append(float(r))
    if strict and not uniq:
        raise NoEigenvalueFound(f"no eigenvalue in [{lo}, {hi}]")
    return EigenResult(uniq, mus, dets)


def write_results(path, items):
    """items: iterable of (problem, EigenResult)."""
    rows = [(p.params.gamma, p.b0, p.btilde, r.mu_min) for p, r in items]
    return write_csv(path, ["gamma", "b0", "btilde", "mu_min"], rows)


def reduced_table(alpha, gammas, ratios, n_scan=200):
    """Rows (gamma, ratio, mu_numeric, mu_analytic, abs_err) of the reduced system on [ratio, 1]."""
    rows = []
    for ratio in ratios:
        for g in gammas:
            p = ShootingProblem(WeightParams(alpha, g, 1.0, 1.0), ratio, 1.0, reduced=True)
            num = find_eigenvalues(p, n_scan=n_scan).mu_min
            ana = mu_analytic(alpha, g, ratio ** (1 + alpha))
            rows.append((float(g), float(ratio), num, ana, abs(num - ana)))
    return rows


def write_reduced_table(path, rows):
    return write_csv(path, ["gamma", "ratio", "mu_numeric", "mu_analytic", "abs_err"], rows)
