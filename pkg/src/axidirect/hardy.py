"""Weighted Hardy-type constants and numerical checks of the inequalities.

Norms on the half plane y > 0 are

    ||g||_{p,gamma} = ( int |g|^p y^(-gamma) dx dy )^(1/p),

with ||.||_gamma short for p = 2 and nabla_c f = (c f_x, f_y).  The checks
evaluate both sides by composite Gauss-Legendre quadrature on the support
rectangle and refine until two levels agree.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import (BadInterval, DegenerateWeight, InvalidInput, NonCompactSupport,
                     QuadratureNotConverged)

INEQUALITIES = ("hardy_p", "hardy_2", "sup_1d", "sup_1d_l1", "interp_1d",
                "small_p", "large_p", "large_p_weighted")


@dataclass
class WeightParams:
    alpha: float
    gamma: float
    d: float
    e: float
    beta: float = 0.5

    @property
    def beta_plus(self):
        return (self.alpha + self.gamma) / 2

    @property
    def beta_minus(self):
        return (self.alpha - self.gamma) / 2

    @property
    def delta_plus(self):
        b = self.beta_plus
        return b * (b + 1)

    @property
    def delta_minus(self):
        b = self.beta_minus
        return b * (b + 1)

    @property
    def delta_zero(self):
        bp, bm = self.beta_plus, self.beta_minus
        return bp * bm + (bp + bm) / 2

    @property
    def gamma_tilde(self):
        return self.gamma / (1 + self.alpha)

    def admissible(self):
        return (self.alpha >= 0 and self.gamma >= self.alpha
                and 0 < self.d <= 1 and self.e >= 1)

    def spectral_condition(self):
        return bool((self.d ** 2 + self.e ** 2) / 2 < 1)

    def require_admissible(self):
        if not self.admissible():
            raise InvalidInput("need alpha >= 0, gamma >= alpha, 0 < d <= 1, e >= 1")
        return self

    def as_dict(self):
        return {"alpha": self.alpha, "gamma": self.gamma, "d": self.d,
                "e": self.e, "beta": self.beta}


def hardy_constant(p, gamma):
    """Sharp constant p/|p + gamma - 1| in ||f/y||_{p,gamma} <= C ||f_y||_{p,gamma}."""
    if p < 1:
        raise InvalidInput("exponent must be >= 1")
    den = abs(p + gamma - 1)
    if den == 0:
        raise DegenerateWeight("gamma = 1 - p has no Hardy constant")
    return p / den


def box_lower_bound(gamma, a, b):
    """lambda_min^(-1/2) for supports in a < y < b; no admissible constant is smaller."""
    if not (0 < a < b):
        raise BadInterval("need 0 < a < b")
    lam = ((1 + gamma) / 2) ** 2 + (np.pi / np.log(b / a)) ** 2
    return lam ** -0.5


# test functions

@dataclass
class Profile:
    """A function of y alone on an interval, with its derivative."""

    f: object
    df: object
    interval: tuple
    vanish_right: bool = True

    dim = 1

    def __post_init__(self):
        a, b = self.interval
        if not (0 <= a < b):
            raise BadInterval("need 0 <= a < b")

    def check_support(self):
        a, b = self.interval
        y = np.linspace(a, b, 257)
        scale = np.max(np.abs(self.f(y[1:-1])))
        ends = [abs(float(self.f(np.array([a]))[0]))]
        if self.vanish_right:
            ends.append(abs(float(self.f(np.array([b]))[0])))
        if max(ends) > 1e-10 * max(scale, 1e-300):
            raise NonCompactSupport("profile does not vanish at the interval ends")


def _bump1(t, j):
    s = t * (1 - t)
    return s ** j, j * s ** (j - 1) * (1 - 2 * t)


@dataclass
class Bump:
    """(u(1-u))^j (v(1-v))^k with u, v the rectangle's unit coordinates."""

    rect: tuple
    j: int = 2
    k: int = 2

    dim = 2

    def __post_init__(self):
        x0, x1, y0, y1 = self.rect
        if not (x0 < x1 and 0 <= y0 < y1):
            raise BadInterval("rectangle must satisfy x0 < x1, 0 <= y0 < y1")

    def evaluate(self, x, y):
        x0, x1, y0, y1 = self.rect
        gx, dgx = _bump1((x - x0) / (x1 - x0), self.j)
        gy, dgy = _bump1((y - y0) / (y1 - y0), self.k)
        return gx * gy, dgx * gy / (x1 - x0), gx * dgy / (y1 - y0)

    def check_support(self):
        pass


@dataclass
class Separable:
    """g(x) h(y) from two profiles; the rectangle is their product."""

    gx: Profile
    gy: Profile

    dim = 2

    @property
    def rect(self):
        return tuple(self.gx.interval) + tuple(self.gy.interval)

    def evaluate(self, x, y):
        a, da = self.gx.f(x), self.gx.df(x)
        b, db = self.gy.f(y), self.gy.df(y)
        return a * b, da * b, a * db

    def check_support(self):
        self.gx.check_support()
        self.gy.check_support()


def box_extremal(gamma, a, b, x_range=None):
    """Minimizer y^((1+gamma)/2) sin(pi ln(y/a)/ln(b/a)) of the box problem.

    With x_range the profile is multiplied by a quadratic bump in x, which
    leaves the ratio ||f/y|| / ||f_y|| unchanged.
    """
    if not (0 < a < b):
        raise BadInterval("need 0 < a < b")
    L = np.log(b / a)
    s = (1 + gamma) / 2

    def f(y):
        return y ** s * np.sin(np.pi * np.log(y / a) / L)

    def df(y):
        th = np.pi * np.log(y / a) / L
        return y ** (s - 1) * (s * np.sin(th) + np.pi / L * np.cos(th))

    prof = Profile(f, df, (a, b))
    if x_range is None:
        return prof
    x0, x1 = x_range
    w = x1 - x0

    def g(x):
        return _bump1((x - x0) / w, 2)[0]

    def dg(x):
        return _bump1((x - x0) / w, 2)[1] / w

    return Separable(Profile(g, dg, (x0, x1)), prof)


# quadrature

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def _nodes(a, b, n_panels, graded):
    t = np.linspace(0.0, 1.0, n_panels + 1)
    edges = a + (b - a) * (t ** 3 if graded else t)
    lo, hi = edges[:-1, None], edges[1:, None]
    x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * _GL_X
    w = 0.5 * (hi - lo) * _GL_W
    return x.ravel(), w.ravel()


def _norm(v, w, p):
    v = np.abs(v)
    if np.isinf(p):
        return float(v.max())
    return float(np.sum(w * v ** p) ** (1 / p))


def _sides(fun, which, prm, n_panels):
    if fun.dim == 1:
        a, b = fun.interval
        y, w = _nodes(a, b, n_panels, a == 0)
        f, fy = fun.f(y), fun.df(y)
        grad = np.abs(fy)
        R = b
    else:
        x0, x1, y0, y1 = fun.rect
        xs, wx = _nodes(x0, x1, n_panels, False)
        ys, wy = _nodes(y0, y1, n_panels, y0 == 0)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        y = Y.ravel()
        w = np.outer(wx, wy).ravel()
        f, fx, fy = (g.ravel() for g in fun.evaluate(X, Y))
        c = prm.get("c", 1.0)
        grad = np.hypot(c * fx, fy)
        R = max(np.hypot(x0, y1), np.hypot(x1, y1))
        R = max(R, prm.get("R") or 0.0)

    if which in ("hardy_p", "hardy_2"):
        p = 2.0 if which == "hardy_2" else prm["p"]
        g = prm["gamma"]
        wg = w * y ** -g
        return _norm(f / y, wg, p), hardy_constant(p, g) * _norm(fy, wg, p)

    if which in ("sup_1d", "sup_1d_l1", "interp_1d") and fun.dim != 1:
        raise InvalidInput("%s is one-dimensional; pass a Profile" % which)
    if which not in ("hardy_p", "hardy_2", "sup_1d", "sup_1d_l1", "interp_1d") and fun.dim != 2:
        raise InvalidInput("%s needs a two-dimensional test function" % which)

    beta = prm["beta"]
    if which == "sup_1d":
        q = prm["q"]
        if not (q > 1 and beta > 1 - q):
            raise InvalidInput("need q > 1 and beta > 1 - q")
        delta = 1 + (beta - 1) / q
        C = (1 + beta / (q - 1)) ** -(1 - 1 / q)
        return _norm(f / y ** delta, w, np.inf), C * _norm(fy, w * y ** -beta, q)
    if which == "sup_1d_l1":
        return _norm(f / y ** beta, w, np.inf), _norm(fy, w * y ** -beta, 1.0)
    if which == "interp_1d":
        p = prm["p"]
        if not (p >= 2 and beta > -1):
            raise InvalidInput("need p >= 2 and beta > -1")
        delta = (1 + beta) / 2 + 1 / p
        e = 0.5 if np.isinf(p) else (p + 2) / (2 * p)
        C = 2 ** (2 / p) * (1 / (1 + beta)) ** e
        return _norm(f / y ** delta, w, p), C * _norm(fy, w * y ** -beta, 2.0)

    c, p = prm.get("c", 1.0), prm["p"]
    if c <= 0:
        raise InvalidInput("c must be positive")
    if which == "small_p":
        if not (2 <= p <= 4 and beta > -1):
            raise InvalidInput("need 2 <= p <= 4 and beta > -1")
        delta = beta / 2 + (6 - p) / (2 * p)
        C = (2 / (1 + beta)) ** ((6 - p) / (2 * p)) * (R / c ** 2) ** ((p - 2) / (2 * p))
        return _norm(f / y ** delta, w, p), C * _norm(grad, w * y ** -beta, 2.0)
    if which == "large_p":
        if not (p >= 2 and beta > 0):
            raise InvalidInput("need p >= 2 and beta > 0")
        delta = beta * (2 + p) / (2 * p)
        C = p / (2 * np.sqrt(c))
        return _norm(f / y ** delta, w, p), C * _norm(grad, w * y ** -beta, 2 * p / (2 + p))
    if which == "large_p_weighted":
        eps = prm["eps"]
        if not (p >= 2 and beta > -2 / p and eps > 0):
            raise InvalidInput("need p >= 2, beta > -2/p, eps > 0")
        delta = beta / 2 + (1 - eps) / p
        C = p / (2 * np.sqrt(c)) * (2 * R ** (1 + eps) / eps) ** (1 / p)
        return _norm(f / y ** delta, w, p), C * _norm(grad, w * y ** -beta, 2.0)
    raise InvalidInput("unknown inequality %r; choose from %s" % (which, ", ".join(INEQUALITIES)))


@dataclass
class HardyReport:
    which: str
    lhs: float
    rhs: float
    converged: bool
    tol: float = 1e-4

    @property
    def ratio(self):
        return self.lhs / self.rhs if self.rhs > 0 else np.inf

    @property
    def holds(self):
        return self.lhs <= self.rhs * (1 + self.tol)

    def as_dict(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio,
                "converged": bool(self.converged)}

    def to_json(self):
        return json.dumps(self.as_dict())


def verify_inequality(fun, which, tol=1e-4, max_level=6, strict=True, **params):
    """Evaluate both sides of a named inequality for the test function fun.

    which is one of INEQUALITIES.  Parameters are passed by keyword:
    p, q, gamma, beta, c, eps and optionally R (radius of the enclosing
    half ball; by default the smallest one containing the rectangle).
    """
    if which not in INEQUALITIES:
        raise InvalidInput("unknown inequality %r; choose from %s" % (which, ", ".join(INEQUALITIES)))
    fun.check_support()
    prev = None
    n = 4
    for _ in range(max_level):
        cur = _sides(fun, which, params, n)
        if prev is not None:
            err = max(abs(cur[0] - prev[0]) / max(abs(cur[0]), 1e-300),
                      abs(cur[1] - prev[1]) / max(abs(cur[1]), 1e-300))
            if err <= tol:
                return HardyReport(which, cur[0], cur[1], True, tol)
        prev = cur
        n *= 2
    if strict:
        raise QuadratureNotConverged("quadrature levels still disagree at %d panels" % (n // 2))
    return HardyReport(which, prev[0], prev[1], False, tol)


def random_bump(rng):
    x0 = rng.uniform(-1.0, 0.5)
    y0 = 0.0 if rng.random() < 0.5 else rng.uniform(0.05, 0.5)
    rect = (x0, x0 + rng.uniform(0.3, 1.0), y0, y0 + rng.uniform(0.3, 1.0))
    k = int(rng.integers(2 if y0 == 0 else 1, 5))
    return Bump(rect, int(rng.integers(1, 5)), k)


def random_bump_suite(n, seed=0, which=("hardy_p", "hardy_2", "small_p", "large_p", "large_p_weighted")):
    """Check each named inequality on n random bumps with random parameters."""
    rng = np.random.default_rng(seed)
    out = {name: [] for name in which}
    for _ in range(n):
        f = random_bump(rng)
        for name in which:
            if name == "hardy_p":
                p = rng.uniform(1.0, 4.0)
                g = rng.uniform(-0.5, 1.0)
                if abs(p + g - 1) < 0.2:
                    g += 0.4
                prm = dict(p=p, gamma=g)
            elif name == "hardy_2":
                prm = dict(gamma=rng.uniform(-0.8, 1.5))
            elif name == "small_p":
                prm = dict(p=rng.uniform(2, 4), beta=rng.uniform(-0.8, 1.0), c=rng.uniform(0.3, 2.0))
            elif name == "large_p":
                prm = dict(p=rng.uniform(2, 6), beta=rng.uniform(0.05, 1.0), c=rng.uniform(0.3, 2.0))
            else:
                p = rng.uniform(2, 6)
                beta = rng.uniform(-1.8 / p, 1.0)
                top = min(1.0, 1 + p * beta / 2) - 0.02
                prm = dict(p=p, beta=beta, c=rng.uniform(0.3, 2.0), eps=rng.uniform(0.02, top))
            out[name].append(verify_inequality(f, name, **prm))
    return out
