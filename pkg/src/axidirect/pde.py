"""Fixed-point solver for the semilinear problem for u = q - Phi on a half annulus.

The equation is div(grad q + (1 - cos x, sin x)/rho) = 0 with x = q - Psi,
discretized by finite volumes on the cell-centred polar grid.  Fluxes are
evaluated at face midpoints with the exact rho, Psi and Phi there; the axis
faces use the odd reflection of u, so x/rho is taken from the first cell.
Picard steps freeze the coefficient a[x] and solve a sparse linear system.

Since G = (grad p) is the flux F = grad q + (1 - cos x, sin x)/rho rotated by
90 degrees, p is recovered on cell vertices from the face fluxes themselves;
its discrete curl is then exactly the discrete residual of the q equation.
"""

from dataclasses import dataclass, field, asdict

import numpy as np
import scipy.sparse as sps
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse.linalg import spsolve
from sklearn.base import BaseEstimator

from . import boundary as bd
from .errors import (DegenerateSystem, DivergingIteration, InvalidInput, LargeCurl,
                     LinearSolveFailed, NoisyFit, NotConverged, PositivityViolated)
from .geometry import DirectionField, MultipoleSpec, PolarGrid, legendre, multipole_field
from .hardy import WeightParams
from .io import read_json, write_json

BETA_MONITOR = 0.2


def coefficient_a(x):
    """(a_zeta, a_rho) = ((1 - cos x)/x, sin x / x), with series near 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    az = np.where(small, x / 2 - x ** 3 / 24, (1 - np.cos(xs)) / xs)
    ar = np.where(small, 1 - x * x / 6, np.sin(xs) / xs)
    return az, ar


@dataclass
class SolverConfig:
    tol: float = 1e-8
    max_iter: int = 200
    omega0: float = 1.0
    R: float = 8.0
    grid: tuple = (128, 256)
    params: WeightParams = field(default_factory=lambda: WeightParams(0.39, 0.7, 0.1, 1.2, 0.5))

    def to_dict(self):
        return {"tol": self.tol, "maxIter": self.max_iter, "omega0": self.omega0, "R": self.R,
                "grid": list(self.grid), "params": self.params.as_dict()}

    @classmethod
    def from_dict(cls, d):
        p = d.get("params", {})
        w = WeightParams(p.get("alpha", 0.39), p.get("gamma", 0.7), p.get("d", 0.1),
                         p.get("e", 1.2), p.get("beta", 0.5))
        return cls(d.get("tol", 1e-8), int(d.get("maxIter", 200)), d.get("omega0", 1.0),
                   d.get("R", 8.0), tuple(d.get("grid", (128, 256))), w)

    def to_json(self, path):
        write_json(path, self.to_dict())

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(read_json(path))


class OmegaProblem:
    """Geometry and frozen data for one annulus problem.

    omega_fn(r, phi) gives Omega = Psi - Phi anywhere; phi_fn(r, phi), if
    given, is Phi itself, so that fluxes are built from grad(u + Phi).
    """

    def __init__(self, grid, omega_fn, phi_fn=None):
        self.grid = grid
        g = grid
        self.omega_fn = omega_fn
        self.phi_fn = phi_fn
        rc, pc = g.mesh()
        self.rc, self.pc = rc, pc
        self.rho_c = rc * np.sin(pc)
        # radial faces: (n_r + 1, n_phi); angular faces: (n_r, n_phi + 1)
        self.rr, self.rp = np.meshgrid(g.r_faces, g.phi, indexing="ij")
        self.ar_, self.ap = np.meshgrid(g.r, g.phi_faces, indexing="ij")
        self.om_c = omega_fn(rc, pc)
        self.om_r = omega_fn(self.rr, self.rp)
        inner = self.ap[:, 1:-1]
        self.om_a = np.zeros(self.ap.shape)
        self.om_a[:, 1:-1] = omega_fn(self.ar_[:, 1:-1], inner)
        if phi_fn is None:
            self.phi_c = np.zeros(g.shape)
            self.phi_b0 = np.zeros(g.n_phi)
            self.phi_b1 = np.zeros(g.n_phi)
        else:
            self.phi_c = phi_fn(rc, pc)
            self.phi_b0 = phi_fn(np.full(g.n_phi, g.r_min), g.phi)
            self.phi_b1 = phi_fn(np.full(g.n_phi, g.r_max), g.phi)
        self.rho_r = self.rr * np.sin(self.rp)
        self.rho_a = self.ar_ * np.sin(self.ap)
        self.len_r = self.rr * g.dphi
        self.len_a = np.full(self.ap.shape, g.dr)

    @property
    def n(self):
        return self.grid.n_r * self.grid.n_phi

    def _faces(self, u):
        """Face values of x = u - Omega, x/rho and the gradient of q = u + Phi.

        Returns, per face family, (x_f, x_over_rho, dq_n), with the normal
        pointing towards increasing r or phi.
        """
        g = self.grid
        q = u + self.phi_c
        nr, nphi = g.shape
        # radial faces
        uf = np.zeros((nr + 1, nphi))
        uf[1:-1] = 0.5 * (u[1:] + u[:-1])
        dq = np.empty((nr + 1, nphi))
        dq[1:-1] = (q[1:] - q[:-1]) / g.dr
        dq[0] = (q[0] - self.phi_b0) / (0.5 * g.dr)
        dq[-1] = (self.phi_b1 - q[-1]) / (0.5 * g.dr)
        xr = uf - self.om_r
        # angular faces; the axis faces use the first cell (odd reflection)
        ua = np.zeros((nr, nphi + 1))
        ua[:, 1:-1] = 0.5 * (u[:, 1:] + u[:, :-1])
        dqa = np.empty((nr, nphi + 1))
        dqa[:, 1:-1] = (q[:, 1:] - q[:, :-1]) / (self.ar_[:, 1:-1] * g.dphi)
        dqa[:, 0] = 2 * q[:, 0] / (g.r * g.dphi)
        dqa[:, -1] = -2 * q[:, -1] / (g.r * g.dphi)
        xa = ua - self.om_a
        xc = u - self.om_c
        xa[:, 0] = xc[:, 0]
        xa[:, -1] = xc[:, -1]
        rho_a = self.rho_a.copy()
        rho_a[:, 0] = self.rho_c[:, 0]
        rho_a[:, -1] = self.rho_c[:, -1]
        return (xr, self.rho_r, dq), (xa, rho_a, dqa)

    @staticmethod
    def _normal(az, ar, phi, radial):
        c, s = np.cos(phi), np.sin(phi)
        if radial:
            return az * c + ar * s
        return -az * s + ar * c

    def fluxes(self, u):
        """Nonlinear face fluxes F_n times face length."""
        (xr, rr, dq), (xa, ra, dqa) = self._faces(u)
        az, ar = coefficient_a(xr)
        fr = (dq + self._normal(az, ar, self.rp, True) * xr / rr) * self.len_r
        az, ar = coefficient_a(xa)
        fa = (dqa + self._normal(az, ar, self.ap, False) * xa / ra) * self.len_a
        return fr, fa

    def residual(self, u):
        """Net outflow per cell."""
        fr, fa = self.fluxes(u)
        return (fr[1:] - fr[:-1]) + (fa[:, 1:] - fa[:, :-1])

    def linear_system(self, w):
        """Sparse system for u with a[x] frozen at x = w - Omega."""
        g = self.grid
        nr, nphi = g.shape
        idx = np.arange(self.n).reshape(nr, nphi)
        (xr, rr, _), (xa, ra, _) = self._faces(w)
        az, ar = coefficient_a(xr)
        cr = self._normal(az, ar, self.rp, True) / rr * self.len_r
        az, ar = coefficient_a(xa)
        ca = self._normal(az, ar, self.ap, False) / ra * self.len_a
        rows, cols, vals = [], [], []
        b = np.zeros((nr, nphi))

        def add(cell, other, v):
            rows.append(cell.ravel())
            cols.append(other.ravel())
            vals.append(v.ravel())

        phi = self.phi_c
        # interior radial faces between i-1 (L) and i (R): flux leaves L, enters R
        L, Rr = idx[:-1], idx[1:]
        k = self.len_r[1:-1] / g.dr
        c = cr[1:-1]
        aL, aR = -k + 0.5 * c, k + 0.5 * c
        beta = k * (phi[1:] - phi[:-1]) - c * self.om_r[1:-1]
        for cell, sgn in ((L, 1.0), (Rr, -1.0)):
            add(cell, L, sgn * aL)
            add(cell, Rr, sgn * aR)
        b[:-1] -= beta
        b[1:] += beta
        # r = r_min face: flux into cell 0 with u_f = 0
        k0 = self.len_r[0] / (0.5 * g.dr)
        add(idx[0], idx[0], -k0)
        b[0] += k0 * (phi[0] - self.phi_b0) - cr[0] * self.om_r[0]
        # r = r_max face: flux out of the last cell
        k1 = self.len_r[-1] / (0.5 * g.dr)
        add(idx[-1], idx[-1], -k1)
        b[-1] -= k1 * (self.phi_b1 - phi[-1]) - cr[-1] * self.om_r[-1]
        # interior angular faces
        L, Rr = idx[:, :-1], idx[:, 1:]
        k = self.len_a[:, 1:-1] / (self.ar_[:, 1:-1] * g.dphi)
        c = ca[:, 1:-1]
        aL, aR = -k + 0.5 * c, k + 0.5 * c
        beta = k * (phi[:, 1:] - phi[:, :-1]) - c * self.om_a[:, 1:-1]
        for cell, sgn in ((L, 1.0), (Rr, -1.0)):
            add(cell, L, sgn * aL)
            add(cell, Rr, sgn * aR)
        b[:, :-1] -= beta
        b[:, 1:] += beta
        # axis faces: ghost -u, x/rho from the adjacent cell
        ka = g.dr * 2 / (g.r * g.dphi)
        add(idx[:, 0], idx[:, 0], -(ka + ca[:, 0]))
        b[:, 0] += ka * phi[:, 0] - ca[:, 0] * self.om_c[:, 0]
        add(idx[:, -1], idx[:, -1], -ka + ca[:, -1])
        b[:, -1] -= -ka * phi[:, -1] - ca[:, -1] * self.om_c[:, -1]
        A = sps.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                           shape=(self.n, self.n))
        return A, b.ravel()


def energy(grid, u, beta=BETA_MONITOR):
    """Weighted Dirichlet energy sum |grad u|^2 rho^-beta over the cells."""
    g = grid
    up = np.pad(u, ((1, 1), (1, 1)))
    up[:, 0] = -up[:, 1]
    up[:, -1] = -up[:, -2]
    up[0] = -up[1]
    up[-1] = -up[-2]
    R, P = g.mesh()
    ur = (up[2:, 1:-1] - up[:-2, 1:-1]) / (2 * g.dr)
    up_ = (up[1:-1, 2:] - up[1:-1, :-2]) / (2 * g.dphi * R)
    rho = R * np.sin(P)
    return float(np.sum((ur ** 2 + up_ ** 2) * rho ** -beta * g.area))


def apply_operator(problem, w, u):
    """Net outflow per cell of the frozen-coefficient flux applied to u."""
    A, b = problem.linear_system(w)
    return (A @ np.ravel(u) - b).reshape(problem.grid.shape)


def solve_linearized(problem, w, source=None):
    """u solving the Picard-frozen linear problem around w.

    source, if given, is the prescribed net outflow per cell (a cell-integrated
    right-hand side); it is zero for the equation itself.
    """
    A, b = problem.linear_system(w)
    if source is not None:
        b = b + np.ravel(source)
    if not np.any(b):
        return np.zeros(problem.grid.shape)
    u = spsolve(A.tocsc(), b)
    if not np.all(np.isfinite(u)):
        raise LinearSolveFailed("sparse solve produced non-finite values")
    res = np.linalg.norm(A @ u - b) / max(np.linalg.norm(b), 1e-300)
    if res > 1e-10:
        raise LinearSolveFailed(f"linear residual {res:.3g} above 1e-10")
    return u.reshape(problem.grid.shape)


@dataclass
class SolveState:
    grid: PolarGrid
    u: np.ndarray
    log: list
    converged: bool
    beta: float = BETA_MONITOR

    @property
    def iterations(self):
        return len(self.log)

    @property
    def energy(self):
        return energy(self.grid, self.u, self.beta)


def solve_nonlinear(problem, u0=None, tol=1e-8, max_iter=200, omega0=1.0, strict=True):
    """Damped Picard iteration u <- u + omega (T u - u).

    Stops when the weighted-energy norm of T u - u drops below tol times that
    of T u.  omega halves whenever the nonlinear residual grows, down to 1/8.
    """
    g = problem.grid
    u = np.zeros(g.shape) if u0 is None else np.array(u0, dtype=float)
    omega = omega0
    log = []
    res_prev = np.linalg.norm(problem.residual(u))
    e_ref = None
    grow = 0
    for it in range(max_iter):
        tu = solve_linearized(problem, u)
        d = tu - u
        en_t = energy(g, tu)
        inc = np.sqrt(energy(g, d) / en_t) if en_t > 0 else np.sqrt(energy(g, d))
        u_new = u + omega * d
        res = np.linalg.norm(problem.residual(u_new))
        en = energy(g, u_new)
        log.append({"iter": it + 1, "increment": float(inc), "residual": float(res),
                    "omega": omega, "energy": en})
        if e_ref is None:
            e_ref = max(en, 1e-300)
        elif en > 2 * e_ref:
            grow += 1
            e_ref = en
            if grow >= 2:
                raise DivergingIteration("weighted energy doubled twice",
                                         SolveState(g, u_new, log, False))
        if res > res_prev and omega > 0.125:
            omega = max(0.125, omega / 2)
        res_prev = res
        u = u_new
        if inc < tol:
            return SolveState(g, u, log, True)
    state = SolveState(g, u, log, False)
    if strict:
        raise NotConverged(f"no convergence in {max_iter} iterations", state)
    return state


@dataclass
class Potential:
    """p on cell vertices plus its value at cell centres."""

    vertices: np.ndarray
    cells: np.ndarray
    curl: float


def reconstruct_p(problem, u, p0=0.0, tol=1e-8, check=True):
    """Least-squares potential of the rotated face fluxes, gauged at (r_min, pi/2)."""
    g = problem.grid
    nr, nphi = g.shape
    fr, fa = problem.fluxes(u)
    vid = np.arange((nr + 1) * (nphi + 1)).reshape(nr + 1, nphi + 1)
    # along a radial face (fixed r) p increases with phi by -F_r L;
    # along an angular face (fixed phi) p increases with r by +F_phi L
    tail = np.concatenate([vid[:, :-1].ravel(), vid[:-1, :].ravel()])
    head = np.concatenate([vid[:, 1:].ravel(), vid[1:, :].ravel()])
    d = np.concatenate([-fr.ravel(), fa.ravel()])
    m = len(d)
    E = sps.csr_matrix((np.concatenate([-np.ones(m), np.ones(m)]),
                        (np.tile(np.arange(m), 2), np.concatenate([tail, head]))),
                       shape=(m, vid.size))
    if nphi % 2:
        raise InvalidInput("use an even number of angular cells so phi = pi/2 is a vertex")
    pin = vid[0, nphi // 2]
    keep = np.ones(vid.size, bool)
    keep[pin] = False
    Ek = E[:, keep]
    pk = spsolve((Ek.T @ Ek).tocsc(), Ek.T @ d)
    p = np.zeros(vid.size)
    p[keep] = pk
    p = p - p[pin] + p0
    circ = E @ p - d
    scale = max(np.max(np.abs(d)), 1e-300)
    curl = float(np.max(np.abs(circ)) / scale)
    if check and curl > 10 * tol:
        raise LargeCurl(f"curl residual {curl:.3g}: q does not solve the equation")
    P = p.reshape(nr + 1, nphi + 1)
    cells = 0.25 * (P[:-1, :-1] + P[1:, :-1] + P[:-1, 1:] + P[1:, 1:])
    return Potential(P, cells, curl)


def h_product(config, z):
    h = z ** (-config.rho)
    for zn in config.zeros:
        h = h * (z - zn) * (z - np.conj(zn))
    return h


@dataclass
class ReconstructedSolution:
    grid: PolarGrid
    config: bd.ZeroConfig
    q: np.ndarray
    p: Potential
    b_zeta: np.ndarray
    b_rho: np.ndarray
    amplitude: np.ndarray
    state: SolveState = None
    direction: DirectionField = None

    def axis_b_zeta(self, zeta):
        """B_zeta on the symmetry axis from the vertex values of p (q = 0 there)."""
        zeta = np.asarray(zeta, dtype=float)
        g = self.grid
        rf = g.r_faces
        out = np.empty(zeta.shape)
        for k, z in np.ndenumerate(zeta):
            col = 0 if z > 0 else -1
            p = np.interp(abs(z), rf, self.p.vertices[:, col])
            out[k] = (h_product(self.config, complex(z)) * np.exp(p / 2)).real
        return out

    def field_polar(self, r, phi):
        """(B_r, B_phi) by bilinear interpolation of the cell values."""
        bz, br = self.interpolate(r, phi)
        c, s = np.cos(phi), np.sin(phi)
        return bz * c + br * s, -bz * s + br * c

    def interpolate(self, r, phi):
        g = self.grid
        ph = np.concatenate([[0.0], g.phi, [np.pi]])
        bz = np.concatenate([self.b_zeta[:, :1], self.b_zeta, self.b_zeta[:, -1:]], axis=1)
        brh = np.concatenate([np.zeros((g.n_r, 1)), self.b_rho, np.zeros((g.n_r, 1))], axis=1)
        pts = np.stack(np.broadcast_arrays(np.clip(r, g.r[0], g.r[-1]), np.abs(phi)), axis=-1)
        iz = RegularGridInterpolator((g.r, ph), bz)(pts)
        ir = RegularGridInterpolator((g.r, ph), brh)(pts) * np.sign(phi)
        return iz, ir


def assemble_field(config, p, q, grid, direction=None, trace=None):
    """f = h exp((p + i q)/2) at cell centres; B_zeta = Re f, B_rho = -Im f.

    The signed amplitude B.D/|D|^2 on r = r_min is formed at the boundary face
    midpoints, where q equals the inner trace.
    """
    R, P = grid.mesh()
    z = R * np.exp(1j * P)
    f = h_product(config, z) * np.exp((p.cells + 1j * q) / 2)
    amp = None
    if direction is not None and trace is not None:
        pb = 0.5 * (p.vertices[0, :-1] + p.vertices[0, 1:])
        qb = np.interp(grid.phi, trace.phi, trace.value)
        zb = grid.r_min * np.exp(1j * grid.phi)
        fb = h_product(config, zb) * np.exp((pb + 1j * qb) / 2)
        dz = np.interp(grid.phi, direction.phi, direction.d_zeta)
        dr = np.interp(grid.phi, direction.phi, direction.d_rho)
        amp = (fb.real * dz - fb.imag * dr) / (dz ** 2 + dr ** 2)
    return f.real, -f.imag, amp


def multipole_direction(n, m=720, radius=1.0):
    """Direction of the exterior 2^n-pole on a circle, D_zeta > 0 on the positive axis."""
    return DirectionField.from_multipole(MultipoleSpec(n + 2, [-1.0]), m, radius)


def _solve_once(D, config, R, outer, grid, tol, max_iter, omega0, u0):
    tin = bd.boundary_trace(D, config, 1.0)
    tout = bd.boundary_trace(outer, config, R)
    Phi = bd.harmonic_interpolant(tin, tout, R=R)
    g = PolarGrid(1.0, R, grid[0], grid[1])

    def omega_fn(r, phi):
        return bd.zero_angle(config, r * np.cos(phi), r * np.sin(phi), branch="atan2") - Phi(r, phi)

    prob = OmegaProblem(g, omega_fn, Phi)
    state = solve_nonlinear(prob, u0=u0, tol=tol, max_iter=max_iter, omega0=omega0)
    pot = reconstruct_p(prob, state.u, tol=tol)
    q = state.u + prob.phi_c
    bz, brho, amp = assemble_field(config, pot, q, g, D, tin)
    if amp is not None and np.any(amp <= 0):
        raise PositivityViolated("amplitude on the inner circle is not positive")
    sol = ReconstructedSolution(g, config, q, pot, bz, brho, amp, state, D)
    sol.problem = prob
    sol.phi_interp = Phi
    sol.outer = outer
    return sol


def solve_direction_problem(D, config, R=8.0, outer=None, grid=(128, 256), tol=1e-8,
                            max_iter=200, omega0=1.0, u0=None, sweeps=8, n_max=8):
    """Boundary traces, Phi, Psi, Omega, the Picard solve, p and the field.

    With `outer` given the problem is the bounded one on 1 < r < R.  Otherwise
    it is exterior with decay order rho_hat + 1: the first pass takes the
    trace on r = R from the leading multipole, later passes from all fitted
    multipole coefficients of the previous solution, until the fit settles.
    """
    if outer is not None:
        return _solve_once(D, config, R, outer, grid, tol, max_iter, omega0, u0)
    n0 = config.rho_hat - 1
    outer = multipole_direction(n0, D.n, R)
    prev = None
    for _ in range(max(1, sweeps)):
        sol = _solve_once(D, config, R, outer, grid, tol, max_iter, omega0, u0)
        fit = annulus_multipole_fit(radial_component(sol.b_zeta, sol.b_rho, sol.grid), sol.grid, n_max)
        sol.fit = fit
        c = fit.coeffs / np.max(np.abs(fit.coeffs))
        if prev is not None and np.max(np.abs(c - prev)) < 1e-6:
            break
        prev = c
        outer = DirectionField.from_multipole(MultipoleSpec(n0 + 2, list(fit.coeffs[n0:])), D.n, R)
        u0 = sol.state.u
    return sol


def field_zeros(b_zeta, b_rho, grid):
    """Interior vertices around which (B_zeta, B_rho) winds, with the winding number.

    Each loop runs through the four cells sharing a vertex.  Returns a list of
    (r, phi, winding).
    """
    a = np.angle(b_zeta + 1j * b_rho)
    loop = [a[:-1, :-1], a[1:, :-1], a[1:, 1:], a[:-1, 1:], a[:-1, :-1]]
    wind = np.zeros(a[:-1, :-1].shape)
    for s, t in zip(loop[:-1], loop[1:]):
        wind += np.angle(np.exp(1j * (t - s)))
    wind = np.rint(wind / (2 * np.pi)).astype(int)
    out = []
    for i, j in zip(*np.nonzero(wind)):
        out.append((grid.r_faces[i + 1], grid.phi_faces[j + 1], int(wind[i, j])))
    return out


@dataclass
class MultipoleFit:
    """Legendre coefficients c_n of the decaying part of B_r, n = 0..n_max."""

    coeffs: np.ndarray
    slopes: np.ndarray
    radii: np.ndarray

    def decay_order(self, rel=1e-6):
        """(delta, n): smallest n with |c_n| > rel max |c| and delta = n + 2."""
        c = np.abs(self.coeffs)
        n = int(np.nonzero(c > rel * c.max())[0][0])
        return n + 2, n

    def leading(self, rel=1e-6):
        return float(self.coeffs[self.decay_order(rel)[1]])


def legendre_project(phi, b_r, n_max):
    """Least-squares coefficients of b_r(phi) in P_n(cos phi), n = 0..n_max, per row."""
    P, _ = legendre(n_max, np.cos(phi))
    M = np.asarray(P).T
    sol, *_ = np.linalg.lstsq(M, np.atleast_2d(b_r).T, rcond=None)
    return sol.T


def decay_order(radii, phi, b_r, n_max=8, rel=1e-6, slope_tol=0.1):
    """Decay order of an exterior field from B_r samples on circles.

    b_r has one row per radius.  Mode n of an exterior 2^n-pole falls off like
    r^-(n+2); the fitted log-log slope of the selected mode must be within
    slope_tol of that integer.
    """
    radii = np.asarray(radii, dtype=float)
    b = legendre_project(np.asarray(phi, dtype=float), b_r, n_max)
    n = np.arange(n_max + 1)
    c = -b * radii[:, None] ** (n + 2) / (n + 1)
    coeffs = c.mean(axis=0)
    slopes = np.full(n_max + 1, np.nan)
    with np.errstate(divide="ignore"):
        lb = np.log(np.abs(b))
    ok = np.all(np.isfinite(lb), axis=0)
    if len(radii) > 1:
        slopes[ok] = np.polyfit(np.log(radii), lb[:, ok], 1)[0]
    fit = MultipoleFit(coeffs, slopes, radii)
    delta, k = fit.decay_order(rel)
    s = slopes[k]
    if len(radii) > 1 and (not np.isfinite(s) or abs(s + delta) > slope_tol):
        raise NoisyFit(f"mode {k} falls off with slope {s:.3g}, expected {-delta}")
    return fit


def annulus_multipole_fit(b_r, grid, n_max=8, r_range=None):
    """c_n from annulus data B_r, allowing a growing part d_n r^(n-1) in each mode.

    A field harmonic in a shell has, per Legendre mode, B_r = -(n+1) c_n r^-(n+2)
    + n d_n r^(n-1); the truncated exterior solutions carry a small growing part.
    """
    r = grid.r
    sel = np.ones(len(r), bool) if r_range is None else (r >= r_range[0]) & (r <= r_range[1])
    b = legendre_project(grid.phi, b_r[sel], n_max)
    rs = r[sel]
    c = np.zeros(n_max + 1)
    for n in range(n_max + 1):
        cols = [-(n + 1) * rs ** -(n + 2.0)]
        if n > 0:
            cols.append(n * rs ** (n - 1.0))
        sol, *_ = np.linalg.lstsq(np.stack(cols, 1), b[:, n], rcond=None)
        c[n] = sol[0]
    return MultipoleFit(c, -(np.arange(n_max + 1) + 2.0), rs)


def radial_component(b_zeta, b_rho, grid):
    _, P = grid.mesh()
    return b_zeta * np.cos(P) + b_rho * np.sin(P)


@dataclass
class CombinedField:
    """lambda-weighted sum of solutions sharing one boundary direction."""

    parts: list
    weights: np.ndarray
    grid: PolarGrid
    b_zeta: np.ndarray
    b_rho: np.ndarray
    amplitude: np.ndarray
    fit: MultipoleFit = None

    def axis_b_zeta(self, zeta):
        return sum(w * s.axis_b_zeta(zeta) for w, s in zip(self.weights, self.parts))

    def boundary_min_abs(self):
        """min |B| on the inner circle; all parts are parallel to D there."""
        D = self.parts[0].direction
        g = self.grid
        dz = np.interp(g.phi, D.phi, D.d_zeta)
        dr = np.interp(g.phi, D.phi, D.d_rho)
        return float(np.min(np.abs(self.amplitude) * np.hypot(dz, dr)))

    def axis_zeros(self, n=4000):
        """Sign changes of B_zeta along both axis rays, refined by bisection."""
        from scipy.optimize import brentq
        out = []
        rf = self.grid.r_faces
        for sgn in (1, -1):
            z = sgn * np.linspace(rf[0], rf[-1], n)
            v = self.axis_b_zeta(z)
            for k in np.nonzero(v[:-1] * v[1:] < 0)[0]:
                out.append(brentq(lambda t: float(self.axis_b_zeta(np.array(t))), z[k], z[k + 1]))
        return out


def shift_zero_to_axis(solutions, zeta_s, mode="expel", zeta_s2=None, n_max=8, r_range=None):
    """Combine B[z], B~[z~] and B^(delta+2) so that B_zeta vanishes at zeta_s on the axis.

    mode "expel" also cancels the leading multipole coefficient, so the decay
    order of the combination rises by one; mode "second-axis" instead puts a
    second axis zero at zeta_s2.  Returns a CombinedField.
    """
    if len(solutions) != 3:
        raise InvalidInput("need three solutions")
    s0, s1, s2 = solutions
    if not (s0.grid == s1.grid == s2.grid):
        raise InvalidInput("solutions must share one grid")
    z0, z1 = s0.config.zeros, s1.config.zeros
    if len(z0) == len(z1) and np.allclose(z0, z1):
        raise DegenerateSystem("the two moved zeros coincide")
    row_a = np.array([float(s.axis_b_zeta(np.array(zeta_s))) for s in solutions])
    fits = [annulus_multipole_fit(radial_component(s.b_zeta, s.b_rho, s.grid), s.grid, n_max, r_range)
            for s in solutions]
    if mode == "expel":
        k = s0.config.rho_hat - 1
        row_b = np.array([f.coeffs[k] for f in fits])
    elif mode == "second-axis":
        if zeta_s2 is None:
            raise InvalidInput("second-axis mode needs zeta_s2")
        row_b = np.array([float(s.axis_b_zeta(np.array(zeta_s2))) for s in solutions])
    else:
        raise InvalidInput(f"unknown mode {mode!r}")
    M = np.stack([row_a / np.max(np.abs(row_a)), row_b / np.max(np.abs(row_b))])
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[-1] < 1e-10 * sv[0]:
        raise DegenerateSystem("the linear system for the weights is singular")
    lam = np.cross(M[0], M[1])
    lam = lam / np.max(np.abs(lam))
    amp = sum(l * s.amplitude for l, s in zip(lam, solutions))
    if np.mean(amp) < 0:
        lam, amp = -lam, -amp
    bz = sum(l * s.b_zeta for l, s in zip(lam, solutions))
    br = sum(l * s.b_rho for l, s in zip(lam, solutions))
    fit = MultipoleFit(sum(l * f.coeffs for l, f in zip(lam, fits)), fits[0].slopes, fits[0].radii)
    return CombinedField(list(solutions), lam, s0.grid, bz, br, amp, fit)


class DirectionProblemSolver(BaseEstimator):
    """Estimator-style front end: parameters in __init__, fit() solves, predict() samples B.

    Fitted attributes end in an underscore; get_params / set_params come from
    BaseEstimator, so the solver settings can be swept or cloned.
    """

    def __init__(self, R=8.0, grid=(128, 256), tol=1e-8, max_iter=200, omega0=1.0, exterior=True):
        self.R = R
        self.grid = grid
        self.tol = tol
        self.max_iter = max_iter
        self.omega0 = omega0
        self.exterior = exterior

    @classmethod
    def from_config(cls, cfg):
        return cls(cfg.R, tuple(cfg.grid), cfg.tol, cfg.max_iter, cfg.omega0)

    def fit(self, D, config, outer=None):
        if not self.exterior and outer is None:
            raise InvalidInput("a bounded problem needs the outer direction field")
        self.solution_ = solve_direction_problem(D, config, self.R, outer, tuple(self.grid),
                                                 self.tol, self.max_iter, self.omega0)
        self.n_iter_ = self.solution_.state.iterations
        return self

    def predict(self, zeta, rho):
        """(B_zeta, B_rho) at points of the meridian plane."""
        sol = self.solution_
        r, phi = np.hypot(zeta, rho), np.arctan2(rho, zeta)
        return sol.interpolate(r, phi)
