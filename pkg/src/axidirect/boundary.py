"""Zero angle, boundary traces, harmonic interpolant and the K constants.

The zero angle Psi carries the phase of h(z) = z^-rho prod (z - z_n)(z - conj z_n)
through conj(h)/h = v + i w.  The traces of the phase q on |z| = 1 and
|z| = R come from the direction field and the zero configuration, and Phi is
the harmonic function in the annulus taking those traces.  Every angle field
here is odd in phi, so it is stored on the upper half plane only.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dst
from scipy.optimize import brentq

from .errors import InvalidInput, PointOnZero, SeriesNotDecaying, WindingMismatch
from .geometry import PolarGrid
from .io import read_csv, read_json, write_csv, write_json

MAX_MODES = 256
COEF_CUT = 1e-12


@dataclass
class ZeroConfig:
    """Order rho of h at infinity, the order rho_hat left at the outer circle,
    and one representative z_n (Im z_n > 0) per conjugate pair of zeros."""

    rho: int
    rho_hat: int
    zeros: list = field(default_factory=list)

    def __post_init__(self):
        self.zeros = [complex(z) for z in self.zeros]
        if int(self.rho) != self.rho or self.rho < 1:
            raise InvalidInput("rho must be a positive integer")
        self.rho, self.rho_hat = int(self.rho), int(self.rho_hat)
        if self.rho - self.rho_hat != 2 * len(self.zeros):
            raise InvalidInput("rho - rho_hat must equal twice the number of zero pairs")
        for z in self.zeros:
            if z.imag <= 0:
                raise InvalidInput("zeros must lie strictly off the axis, Im z > 0")
            if abs(z) <= 1:
                raise InvalidInput("zeros must lie outside the unit circle")

    def to_dict(self):
        return {"rho": self.rho, "rho_hat": self.rho_hat,
                "zeros": [[z.real, z.imag] for z in self.zeros]}

    def to_json(self, path):
        write_json(path, self.to_dict())

    @classmethod
    def from_dict(cls, d):
        return cls(d["rho"], d["rho_hat"], [complex(x, y) for x, y in d.get("zeros", [])])

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(read_json(path))


def _unit_ratio(config, zeta, rho):
    z = np.asarray(zeta, dtype=float) + 1j * np.asarray(rho, dtype=float)
    az = np.abs(z)
    if np.any(az == 0):
        raise PointOnZero("the origin is a pole of h")
    e = (z / az) ** (2 * config.rho)
    for zn in config.zeros:
        if np.any(np.abs(z - zn) <= 1e-12 * abs(zn)):
            raise PointOnZero(f"point coincides with the zero {zn}")
        P = (z - zn) * (z - np.conj(zn))
        e = e * (np.conj(P) / np.abs(P)) ** 2
    return e


def angle_components(config, zeta, rho):
    """v, w with conj(h)/h = v + i w.  Pairing conjugate factors keeps both real."""
    e = _unit_ratio(config, zeta, rho)
    return e.real, e.imag


def zero_angle(config, zeta, rho, branch="arctan"):
    """Psi at the points (zeta, rho).

    branch="arctan" is arctan(w/v), which jumps by pi where v changes sign.
    branch="atan2" is the full angle of v + i w in (-pi, pi].
    """
    v, w = angle_components(config, zeta, rho)
    if branch == "arctan":
        with np.errstate(divide="ignore"):
            return np.where(v == 0, np.sign(w) * np.pi / 2, np.arctan(w / np.where(v == 0, 1.0, v)))
    if branch == "atan2":
        return np.arctan2(w, v)
    raise InvalidInput(f"unknown branch {branch!r}")


def jump_rays(config, r, n_scan=4096, xtol=1e-14):
    """Angles in (0, pi) on the circle of radius r where v changes sign."""
    phi = np.linspace(0.0, np.pi, n_scan + 1)[1:-1]

    def v_at(a):
        return angle_components(config, r * np.cos(a), r * np.sin(a))[0]

    v = v_at(phi)
    out = []
    for k in np.flatnonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0):
        out.append(brentq(lambda a: float(v_at(a)), phi[k], phi[k + 1], xtol=xtol))
    out.extend(phi[v == 0].tolist())
    return np.sort(np.array(out))


@dataclass
class Trace:
    phi: np.ndarray
    value: np.ndarray
    radius: float = 1.0


def _pair_arg(zn, radius, phi):
    # continuous arg of (R e^{i phi} - z)(R e^{i phi} - conj z) minus phi; odd in phi
    a = np.abs(phi)
    q = abs(zn) ** 2 / radius
    th = np.arctan2((radius - q) * np.sin(a), (radius + q) * np.cos(a) - 2 * zn.real)
    return np.sign(phi) * th


def boundary_trace(field, config, radius=1.0, tol=1e-6):
    """Trace of q on the circle |z| = radius from the sampled direction field.

    The field must wind rho_c times, where rho_c is rho minus twice the
    number of zero pairs inside the circle.
    """
    phi = field.phi
    inside = sum(abs(z) < radius for z in config.zeros)
    for z in config.zeros:
        if abs(abs(z) - radius) < 1e-12:
            raise PointOnZero("a zero lies on the boundary circle")
    rho_c = config.rho - 2 * inside
    argd = field.complex_arg()
    if abs(argd[0] - rho_c * np.pi) > tol or abs(argd[-1] + rho_c * np.pi) > tol:
        raise WindingMismatch(
            f"arg D runs from {argd[0]:.6g} to {argd[-1]:.6g}, expected -/+ {rho_c} pi")
    val = config.rho * phi + argd
    for z in config.zeros:
        val = val - (phi + _pair_arg(z, radius, phi))
    val = 2 * val
    if max(abs(val[0]), abs(val[-1])) > 10 * tol:
        raise WindingMismatch("trace does not vanish at the axis")
    val[0] = val[-1] = 0.0
    return Trace(phi.copy(), val, float(radius))


def sine_coefficients(values):
    """b_k, k >= 1, of an odd function sampled uniformly on [-pi, pi]."""
    values = np.asarray(values, dtype=float)
    m = len(values) - 1
    if m % 2 or m < 4:
        raise InvalidInput("need an even number of intervals on [-pi, pi]")
    M = m // 2
    half = values[M:]
    return dst(half[1:-1], type=1) / M


def _check_decay(b, which):
    if b.size < 8:
        return
    big = np.max(np.abs(b))
    if big == 0:
        return
    k = np.arange(1, b.size + 1)
    tail = slice(b.size // 2, None)
    if np.max(k[tail] * np.abs(b[tail])) > 0.05 * big:
        raise SeriesNotDecaying(f"{which} trace: sine coefficients do not decay")


class HarmonicInterpolant:
    """Phi = sum (A_k r^k + B_k r^-k) sin(k phi) on 1 < r < R, or B_k r^-k outside the unit circle."""

    def __init__(self, coef_inner, coef_outer=None, R=np.inf, exterior=False):
        self.coef_inner = np.asarray(coef_inner, dtype=float)
        n = self.coef_inner.size
        self.coef_outer = np.zeros(n) if coef_outer is None else np.asarray(coef_outer, dtype=float)
        self.R = float(R)
        self.exterior = bool(exterior)
        k = np.arange(1, n + 1)
        if self.exterior:
            self.A = np.zeros(n)
            self.B = self.coef_inner.copy()
        else:
            s = self.R ** (-k.astype(float))
            den = 1 - s * s
            self.A = (self.coef_outer * s - self.coef_inner * s * s) / den
            self.B = (self.coef_inner - self.coef_outer * s) / den

    @property
    def n_modes(self):
        return self.coef_inner.size

    def _terms(self, r, phi, order):
        r, phi = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(phi, dtype=float))
        out = [np.zeros(r.shape) for _ in range(order)]
        for j, (a, b) in enumerate(zip(self.A, self.B)):
            k = j + 1
            rp, rm = r ** k, r ** (-k)
            s, c = np.sin(k * phi), np.cos(k * phi)
            rad = a * rp + b * rm
            out[0] += rad * s
            if order > 1:
                out[1] += k * (a * rp - b * rm) / r * s
                out[2] += k * rad * c
            if order > 3:
                out[3] += k * ((k - 1) * a * rp + (k + 1) * b * rm) / r ** 2 * s
                out[4] += -k * k * rad * s
        return out

    def __call__(self, r, phi):
        return self._terms(r, phi, 1)[0]

    def gradient(self, r, phi):
        """(Phi_r, Phi_phi)."""
        _, pr, pp = self._terms(r, phi, 3)
        return pr, pp

    def laplace_residual(self, grid):
        R, P = grid.mesh()
        _, pr, _, prr, ppp = self._terms(R, P, 5)
        scale = max(np.max(np.abs(self.coef_inner)), np.max(np.abs(self.coef_outer)), 1e-300)
        return float(np.max(np.abs(prr + pr / R + ppp / R ** 2)) / scale)


def harmonic_interpolant(inner, outer=None, R=None, exterior=False):
    """Harmonic extension of odd boundary data sampled on [-pi, pi].

    inner is the trace on r = 1, outer the trace on r = R.  With
    exterior=True only inner is used and the extension decays at infinity.
    """
    inner = getattr(inner, "value", inner)
    b = sine_coefficients(inner)
    _check_decay(b, "inner")
    if exterior:
        bh = np.zeros_like(b)
        R = np.inf
    else:
        if outer is None or R is None:
            raise InvalidInput("the annulus needs outer data and R")
        if not R > 1:
            raise InvalidInput("need R > 1")
        outer = getattr(outer, "value", outer)
        bh = sine_coefficients(outer)
        _check_decay(bh, "outer")
        n = min(b.size, bh.size)
        b, bh = b[:n], bh[:n]
    big = max(np.max(np.abs(b)), np.max(np.abs(bh)))
    keep = np.flatnonzero((np.abs(b) >= COEF_CUT * big) | (np.abs(bh) >= COEF_CUT * big)) if big > 0 else []
    n = min(int(keep[-1]) + 1 if len(keep) else 0, MAX_MODES)
    return HarmonicInterpolant(b[:n], bh[:n], R=R, exterior=exterior)


@dataclass(eq=False)
class AngleField:
    """An odd angle field sampled on the upper half of a polar grid."""

    grid: PolarGrid
    values: np.ndarray
    kind: str = "omega"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise InvalidInput("values must match the grid shape")
        if self.kind not in ("psi", "phi", "omega", "q", "u"):
            raise InvalidInput(f"unknown kind {self.kind!r}")

    @classmethod
    def from_function(cls, grid, fn, kind="phi"):
        R, P = grid.mesh()
        return cls(grid, fn(R, P), kind)

    def full(self):
        """Angles and values on (-pi, pi) by odd reflection."""
        phi = np.concatenate([-self.grid.phi[::-1], self.grid.phi])
        return phi, np.concatenate([-self.values[:, ::-1], self.values], axis=1)

    def to_csv(self, path):
        R, P = self.grid.mesh()
        return write_csv(path, ["r", "phi", "value"],
                         zip(R.ravel(), P.ravel(), self.values.ravel()))

    @classmethod
    def from_csv(cls, path, kind="omega"):
        _, c = read_csv(path)
        r, phi = np.unique(c["r"]), np.unique(c["phi"])
        dr = (r[-1] - r[0]) / (len(r) - 1)
        grid = PolarGrid(float(np.round(r[0] - dr / 2, 12)), float(np.round(r[-1] + dr / 2, 12)),
                         len(r), len(phi))
        return cls(grid, c["value"].reshape(len(r), len(phi)), kind)


def psi_field(config, grid, branch="arctan"):
    return AngleField(grid, zero_angle(config, grid.zeta, grid.rho, branch), "psi")


def omega_field(psi, Phi):
    if psi.grid != Phi.grid:
        raise InvalidInput("fields live on different grids")
    return AngleField(psi.grid, psi.values - Phi.values, "omega")


def estimate_K(field):
    """max |value| / sin(phi) over the nodes, skipping the cell next to each axis end."""
    s = np.sin(field.grid.phi)[1:-1]
    v = np.abs(field.values[:, 1:-1])
    if v.size == 0 or not np.any(v):
        return 0.0
    return float(np.max(v / s))
