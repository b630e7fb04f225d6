"""Min-max (inf-sup) constants of the weighted linearized problem.

Notation: gt = gamma/(1+alpha) and B = (b0/b1)^(1+alpha).  The analytic
x-independent value is

    mu0^2 = (1+gt)(1-B)/(1-B^(1+gt)) * (1-gt)(1-B)/(1-B^(1-gt)),

the lower bound LB is the infimum of

    f(s, t) = (1 + s + D0 t) / sqrt((1 + d^2 s + Dp t)(1 + e^2 s + Dm t))

over s >= 0, 0 <= t <= 1 with Dp, Dm = (alpha+1 +- gamma)^2 - 1 and
D0 = (alpha+1)^2 - gamma^2 - 1, and CF = 2 sqrt(2) ||a_rho - alpha|| / (1+alpha+gamma).
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.linalg import cholesky, solve_triangular, svdvals, LinAlgError
from scipy.optimize import minimize, minimize_scalar

from .errors import (EmptyFeasibleRegion, InvalidInput, OutOfRange, QuadratureNotConverged,
                     SingularNormMatrix)
from .hardy import WeightParams
from .io import write_csv


def _q(e, B):
    """e (1-B) / (1-B^e), continuous through e = 0."""
    if B == 0.0:
        if e <= 0:
            raise OutOfRange("B = 0 needs gamma/(1+alpha) < 1")
        return e
    lb = np.log(B)
    if e == 0.0:
        return (1 - B) / -lb
    return e * (1 - B) / -np.expm1(e * lb)


def mu_analytic(alpha, gamma, B):
    if alpha < 0 or gamma < 0:
        raise InvalidInput("need alpha >= 0 and gamma >= 0")
    if not (0 <= B < 1):
        raise OutOfRange("need 0 <= B < 1")
    gt = gamma / (1 + alpha)
    return float(np.sqrt(_q(1 + gt, B) * _q(1 - gt, B)))


# direct evaluation of the x-independent functional

_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def _weighted_rule(gt, B, n):
    """Nodes z and weights w with sum w g(z) ~ int_B^1 g(z) z^(-gt) dz."""
    if B > 0:
        # z = e^u, dz z^-gt = e^((1-gt) u) du on [ln B, 0]
        edges = np.linspace(np.log(B), 0.0, n + 1)
        lo, hi = edges[:-1, None], edges[1:, None]
        u = (0.5 * (lo + hi) + 0.5 * (hi - lo) * _GL_X).ravel()
        w = (0.5 * (hi - lo) * _GL_W).ravel() * np.exp((1 - gt) * u)
        return np.exp(u), w
    if gt >= 1:
        raise OutOfRange("B = 0 needs gamma/(1+alpha) < 1")
    # t = z^(1-gt), dz z^-gt = dt/(1-gt); grade panels toward t = 0
    edges = np.linspace(0.0, 1.0, n + 1) ** 4
    lo, hi = edges[:-1, None], edges[1:, None]
    t = (0.5 * (lo + hi) + 0.5 * (hi - lo) * _GL_X).ravel()
    w = (0.5 * (hi - lo) * _GL_W).ravel() / (1 - gt)
    return t ** (1 / (1 - gt)), w


def _extremal(gt, B):
    lam = (1 - B) * (1 + gt) / (1 - B ** (1 + gt))
    return lambda z: 1 - lam * z ** gt


def _direct_terms(gt, B, vp, n):
    z, w = _weighted_rule(gt, B, n)
    v = vp(z)
    I0 = w.sum()
    I1 = np.dot(w, v)
    A = np.dot(w, v * v)
    return I0, I1, A


def _direct_value(gt, B, vp, n):
    I0, I1, A = _direct_terms(gt, B, vp, n)
    C = -I1 / I0
    num = A + C * I1
    den = np.sqrt(A * (A + 2 * C * I1 + C * C * I0))
    return num / den


def mu_direct(alpha, gamma, B, n_grid=64, v_prime=None, tol=1e-11):
    """Functional value at v (default: the extremal) paired with its optimal psi.

    The constant C = -int v' z^-gt / int z^-gt makes psi admissible; with it
    the functional reduces to weighted integrals of v' and v'^2.  Panels
    double until two levels agree to tol.
    """
    if n_grid < 64:
        raise InvalidInput("n_grid must be at least 64")
    gt = gamma / (1 + alpha)
    if gt == 0 and v_prime is None:
        # the extremal degenerates to v' = 0; any admissible v gives 1
        v_prime = lambda z: z - (1 + B) / 2
    vp = v_prime or _extremal(gt, B)
    n = n_grid
    prev = _direct_value(gt, B, vp, n)
    for _ in range(6):
        n *= 2
        cur = _direct_value(gt, B, vp, n)
        if abs(cur - prev) <= tol:
            return float(cur)
        prev = cur
    raise QuadratureNotConverged("direct functional did not settle")


def direct_quotient(alpha, gamma, B, n_grid=256):
    """(int v0' z^-gt)^2 / int v0'^2 z^-gt at the extremal v0."""
    gt = gamma / (1 + alpha)
    _, I1, A = _direct_terms(gt, B, _extremal(gt, B), n_grid)
    return float(I1 * I1 / A)


# coefficient bounds and the comparison function

def a_zeta(x):
    x = np.asarray(x, dtype=float)
    return np.where(x == 0, 0.0, (1 - np.cos(x)) / np.where(x == 0, 1.0, x))


def a_rho(x):
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def _sup_abs(fn, x_max=200.0):
    x = np.linspace(0.0, x_max, 400001)
    v = np.abs(fn(x))
    k = int(np.argmax(v))
    best = v[k]
    if 0 < k < len(x) - 1:
        res = minimize_scalar(lambda t: -abs(float(fn(t))), bounds=(x[k - 1], x[k + 1]),
                              method="bounded", options=dict(xatol=1e-12))
        best = max(best, -res.fun)
    return float(best)


@lru_cache(maxsize=64)
def coefficient_bounds(alpha=0.39):
    """(||a_zeta||_inf, ||a_rho - alpha||_inf) over the real line.

    Both functions are even in |.| so x >= 0 suffices; the tail is covered
    by the limits 0 and |alpha| at infinity.
    """
    az = _sup_abs(a_zeta)
    ar = max(_sup_abs(lambda x: a_rho(x) - alpha), abs(alpha))
    return az, ar


def comparison_function(alpha, gamma):
    _, ar = coefficient_bounds(float(alpha))
    return 2 * np.sqrt(2) * ar / (1 + alpha + gamma)


# lower bound

def _coeffs(w):
    a1 = w.alpha + 1
    Dp = (a1 + w.gamma) ** 2 - 1
    Dm = (a1 - w.gamma) ** 2 - 1
    D0 = a1 ** 2 - w.gamma ** 2 - 1
    return D0, Dp, Dm


def lb_objective(w, s, t):
    D0, Dp, Dm = _coeffs(w)
    s, t = np.asarray(s, dtype=float), np.asarray(t, dtype=float)
    P = 1 + w.d ** 2 * s + Dp * t
    Q = 1 + w.e ** 2 * s + Dm * t
    ok = (P > 0) & (Q > 0)
    out = np.full(np.broadcast(s, t).shape, np.inf)
    N = 1 + s + D0 * t
    np.divide(N, np.sqrt(np.where(ok, P * Q, 1.0)), out=out, where=ok)
    return out


def _edge_stationary(n0, n1, p0, p1, q0, q1):
    # d/dx log(N / sqrt(PQ)) = 0 is linear in x for linear N, P, Q
    c1 = n1 * (p0 * q1 + p1 * q0) - 2 * n0 * p1 * q1
    c0 = 2 * n1 * p0 * q0 - n0 * (p1 * q0 + q1 * p0)
    if c1 == 0:
        return []
    return [-c0 / c1]


def lower_bound(w, n_scan=400, detail=False):
    """Infimum of f(s, t); edge minima in closed form, checked by a grid scan.

    With detail=True also returns the minimizing (s, t) (s = inf for the
    limit 1/(d e) as s grows).
    """
    if w.alpha < 0 or w.gamma < 0 or w.d <= 0 or w.e <= 0:
        raise InvalidInput("need alpha, gamma >= 0 and d, e > 0")
    D0, Dp, Dm = _coeffs(w)
    d2, e2 = w.d ** 2, w.e ** 2
    cand = [(0.0, 0.0), (0.0, 1.0)]
    cand += [(0.0, t) for t in _edge_stationary(1, D0, 1, Dp, 1, Dm) if 0 < t < 1]
    cand += [(s, 1.0) for s in _edge_stationary(1 + D0, 1, 1 + Dp, d2, 1 + Dm, e2) if s > 0]
    vals = [float(lb_objective(w, s, t)) for s, t in cand]
    cand.append((np.inf, 1.0))
    vals.append(1 / (w.d * w.e))

    s = np.concatenate([[0.0], np.logspace(-4, 4, n_scan - 1)])
    t = np.linspace(0.0, 1.0, n_scan)
    S, T = np.meshgrid(s, t, indexing="ij")
    F = lb_objective(w, S, T)
    if not np.isfinite(F).any():
        raise EmptyFeasibleRegion("no feasible (s, t)")
    k = np.unravel_index(np.argmin(F), F.shape)
    best = int(np.argmin(vals))
    if F[k] < vals[best] - 1e-12:
        # interior minimum missed by the edge analysis; polish it
        x0 = [np.log(max(S[k], 1e-8)), T[k]]
        res = minimize(lambda x: float(lb_objective(w, np.exp(x[0]), np.clip(x[1], 0, 1))),
                       x0, method="Nelder-Mead", options=dict(xatol=1e-12, fatol=1e-15))
        cand.append((float(np.exp(res.x[0])), float(np.clip(res.x[1], 0, 1))))
        vals.append(min(float(res.fun), float(F[k])))
        best = len(vals) - 1
    if detail:
        return vals[best], cand[best]
    return vals[best]


# reports

@dataclass
class MinMaxReport:
    params: WeightParams
    B: float
    mu0: float
    LB: float
    CF: float
    inf_sup: float = float("nan")

    @property
    def delta(self):
        return self.LB - self.CF

    @property
    def solvable(self):
        return bool(self.LB > self.CF)

    HEADER = ["alpha", "gamma", "d", "e", "B", "mu0", "LB", "CF", "delta", "solvable"]

    def row(self):
        p = self.params
        return [p.alpha, p.gamma, p.d, p.e, self.B, self.mu0, self.LB, self.CF,
                self.delta, self.solvable]


def window_check(w, B=0.0, with_inf_sup=False, n=32):
    try:
        mu0 = mu_analytic(w.alpha, w.gamma, B)
    except OutOfRange:
        mu0 = float("nan")
    rep = MinMaxReport(w, B, mu0, lower_bound(w), comparison_function(w.alpha, w.gamma))
    if with_inf_sup:
        rep.inf_sup = inf_sup_discrete(w, n=n)
    return rep


def window_sweep(alpha, d, e, gammas, B=0.0):
    return [window_check(WeightParams(alpha, float(g), d, e), B) for g in gammas]


def write_reports(path, reports):
    return write_csv(path, MinMaxReport.HEADER, [r.row() for r in reports])


# discrete inf-sup oracle

def _int_pow(a, b, s):
    """int_a^b y^-s dy, with a midpoint value where the integral diverges."""
    if a == 0 and s >= 1:
        return (b - a) * ((a + b) / 2) ** -s
    if s == 1:
        return np.log(b / a)
    return (b ** (1 - s) - a ** (1 - s)) / (1 - s)


def _smallest_singular(K, Mp, Mm):
    try:
        Lp = cholesky(Mp, lower=True)
        Lm = cholesky(Mm, lower=True)
    except LinAlgError as exc:
        raise SingularNormMatrix("norm matrix is not positive definite") from exc
    X = solve_triangular(Lp, K, lower=True)
    X = solve_triangular(Lm, X.T, lower=True).T
    return float(svdvals(X)[-1])


def inf_sup_discrete(w, n=32, width=1.0, b0=1e-4, b1=1.0, ny=None):
    """Discrete inf-sup constant of the weighted form on (0,width) x (b0,b1).

    Finite differences on cell edges with zero boundary values; the y nodes
    are geometric so that the singular weights near the axis are resolved.
    The numerator form carries y^-alpha; the trial norm y^-(alpha+gamma)
    with d^2 on the x part, the test norm y^-(alpha-gamma) with e^2.
    """
    ny = ny or n
    if not (3 <= n <= 64 and 3 <= ny <= 64):
        raise InvalidInput("use 3..64 cells per side")
    if not (0 < b0 < b1):
        raise InvalidInput("need 0 < b0 < b1")
    hx = width / n
    mx, my = n - 1, ny - 1
    y = np.geomspace(b0, b1, ny + 1)
    hy = np.diff(y)
    mid = 0.5 * (y[:-1] + y[1:])
    Dx = sparse.eye(n, mx) - sparse.eye(n, mx, k=-1)
    Dy = sparse.diags(1 / hy) @ (sparse.eye(ny, my) - sparse.eye(ny, my, k=-1))
    Gx = sparse.kron(Dx / hx, sparse.eye(my)).tocsr()   # rows (x edge i, node row j)
    Gy = sparse.kron(sparse.eye(mx), Dy).tocsr()        # rows (node column i, y edge j)

    def form(s, cx):
        wx = np.array([_int_pow(mid[j], mid[j + 1], s) for j in range(my)]) * hx
        wy = np.array([_int_pow(y[j], y[j + 1], s) for j in range(ny)]) * hx
        Wx = np.tile(wx, n)
        Wy = np.tile(wy, mx)
        A = cx * Gx.T @ sparse.diags(Wx) @ Gx + Gy.T @ sparse.diags(Wy) @ Gy
        return A.toarray()

    K = form(w.alpha, 1.0)
    Mp = form(w.alpha + w.gamma, w.d ** 2)
    Mm = form(w.alpha - w.gamma, w.e ** 2)
    return _smallest_singular(K, Mp, Mm)


def inf_sup_1d(w, b0=0.01, b1=1.0, n=400):
    """x-independent restriction on (b0, b1) with P1 elements on a geometric mesh."""
    if not (0 < b0 < b1):
        raise InvalidInput("need 0 < b0 < b1")
    y = np.geomspace(b0, b1, n + 1)
    h = np.diff(y)

    def stiff(s):
        k = np.array([_int_pow(y[i], y[i + 1], s) for i in range(n)]) / h ** 2
        main = k[:-1] + k[1:]
        return np.diag(main) - np.diag(k[1:-1], 1) - np.diag(k[1:-1], -1)

    return _smallest_singular(stiff(w.alpha), stiff(w.alpha + w.gamma), stiff(w.alpha - w.gamma))
