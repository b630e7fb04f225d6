"""Grids, boundary direction fields, rotation numbers and exterior multipoles.

Coordinates on the meridional half plane are zeta = r cos(phi) along the
symmetry axis and rho = r sin(phi) > 0 away from it.  A field is given either
in polar components (B_r, B_phi) or Cartesian components (B_zeta, B_rho).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import root

from .errors import EmptySpec, InvalidInput, NegativeCount, UndersampledField, ZeroVector
from .io import read_csv, read_json, write_csv, write_json


def polar_to_cartesian(br, bp, phi):
    c, s = np.cos(phi), np.sin(phi)
    return br * c - bp * s, br * s + bp * c


def cartesian_to_polar(bz, brho, phi):
    c, s = np.cos(phi), np.sin(phi)
    return bz * c + brho * s, -bz * s + brho * c


@dataclass
class PolarGrid:
    """Cell-centred grid on the half annulus r_min < r < r_max, 0 < phi < pi.

    Nodes sit half a cell away from every boundary, so no node lies on the
    symmetry axis and 1/rho is finite everywhere on the grid.
    """

    r_min: float
    r_max: float
    n_r: int
    n_phi: int

    def __post_init__(self):
        if not (0 < self.r_min < self.r_max):
            raise InvalidInput("need 0 < r_min < r_max")
        if self.n_r < 2 or self.n_phi < 2:
            raise InvalidInput("need at least two cells per direction")

    @property
    def dr(self):
        return (self.r_max - self.r_min) / self.n_r

    @property
    def dphi(self):
        return np.pi / self.n_phi

    @property
    def r(self):
        return self.r_min + (np.arange(self.n_r) + 0.5) * self.dr

    @property
    def phi(self):
        return (np.arange(self.n_phi) + 0.5) * self.dphi

    @property
    def r_faces(self):
        return self.r_min + np.arange(self.n_r + 1) * self.dr

    @property
    def phi_faces(self):
        return np.arange(self.n_phi + 1) * self.dphi

    def mesh(self):
        return np.meshgrid(self.r, self.phi, indexing="ij")

    @property
    def zeta(self):
        R, P = self.mesh()
        return R * np.cos(P)

    @property
    def rho(self):
        R, P = self.mesh()
        return R * np.sin(P)

    @property
    def area(self):
        R, _ = self.mesh()
        return R * self.dr * self.dphi

    @property
    def shape(self):
        return (self.n_r, self.n_phi)


def legendre(n_max, x):
    """P_n(x) and P_n'(x) for n = 0..n_max by three-term recurrence."""
    x = np.asarray(x, dtype=float)
    p = np.zeros((n_max + 1,) + x.shape)
    dp = np.zeros_like(p)
    p[0] = 1.0
    if n_max >= 1:
        p[1] = x
        dp[1] = 1.0
    for n in range(1, n_max):
        p[n + 1] = ((2 * n + 1) * x * p[n] - n * p[n - 1]) / (n + 1)
        dp[n + 1] = dp[n - 1] + (2 * n + 1) * p[n]
    return p, dp


@dataclass
class MultipoleSpec:
    """Exterior axisymmetric multipole sum; coeffs[k] multiplies the 2^n-pole
    with n = delta - 2 + k, so delta is the exact decay order."""

    delta: int
    coeffs: list

    def __post_init__(self):
        self.coeffs = [float(c) for c in self.coeffs]
        if not self.coeffs:
            raise EmptySpec("multipole spec has no coefficients")
        if self.coeffs[0] == 0.0:
            raise InvalidInput("leading coefficient must be nonzero")
        if self.delta < 2:
            raise InvalidInput("decay order must be at least 2")

    @property
    def orders(self):
        return [self.delta - 2 + k for k in range(len(self.coeffs))]

    def to_json(self, path):
        write_json(path, {"delta": self.delta, "coeffs": self.coeffs})

    @classmethod
    def from_json(cls, path):
        d = read_json(path)
        return cls(int(d["delta"]), d["coeffs"])


def multipole_potential(spec, r, phi):
    r = np.asarray(r, dtype=float)
    p, _ = legendre(spec.orders[-1], np.cos(phi))
    out = 0.0
    for n, c in zip(spec.orders, spec.coeffs):
        out = out + c * p[n] / r ** (n + 1)
    return out


def multipole_field(spec, r, phi):
    """(B_r, B_phi) of the multipole sum, the gradient of its potential."""
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    p, dp = legendre(spec.orders[-1], np.cos(phi))
    s = np.sin(phi)
    br = 0.0
    bp = 0.0
    for n, c in zip(spec.orders, spec.coeffs):
        f = c * r ** (-(n + 2))
        br = br - f * (n + 1) * p[n]
        bp = bp - f * dp[n] * s
    return br, bp


def multipole_field_cartesian(spec, zeta, rho):
    zeta = np.asarray(zeta, dtype=float)
    rho = np.asarray(rho, dtype=float)
    r = np.hypot(zeta, rho)
    phi = np.arctan2(rho, zeta)
    br, bp = multipole_field(spec, r, phi)
    return polar_to_cartesian(br, bp, phi)


@dataclass
class DirectionField:
    """Samples of a boundary direction field on a uniform grid over [-pi, pi].

    Components are Cartesian.  Only the direction matters, but the samples
    are kept as given so that amplitudes can be compared later.
    """

    phi: np.ndarray
    d_zeta: np.ndarray
    d_rho: np.ndarray
    check_symmetry: bool = True
    tag: str = field(default="", compare=False)

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        self.d_zeta = np.asarray(self.d_zeta, dtype=float)
        self.d_rho = np.asarray(self.d_rho, dtype=float)
        if not (self.phi.shape == self.d_zeta.shape == self.d_rho.shape) or self.phi.ndim != 1:
            raise InvalidInput("phi, d_zeta, d_rho must be 1D of equal length")
        m = len(self.phi) - 1
        if m < 4:
            raise InvalidInput("need at least five samples")
        if not np.allclose(self.phi, np.linspace(-np.pi, np.pi, m + 1), atol=1e-12):
            raise InvalidInput("samples must be uniform on [-pi, pi]")
        amp = np.hypot(self.d_zeta, self.d_rho)
        if np.any(amp == 0.0):
            raise ZeroVector("direction field vanishes at a sample")
        if self.check_symmetry:
            scale = amp.max()
            tol = 1e-9 * scale
            if (np.max(np.abs(self.d_zeta - self.d_zeta[::-1])) > tol
                    or np.max(np.abs(self.d_rho + self.d_rho[::-1])) > tol):
                raise InvalidInput("direction field is not symmetric")
            if m % 2 == 0 and self.d_zeta[m // 2] <= 0:
                raise InvalidInput("D_zeta(0) must be positive")

    @property
    def n(self):
        return len(self.phi) - 1

    @classmethod
    def from_function(cls, fn, m=720, **kw):
        """fn(phi) -> (D_zeta, D_rho)."""
        phi = np.linspace(-np.pi, np.pi, m + 1)
        dz, dr = fn(phi)
        return cls(phi, dz, dr, **kw)

    @classmethod
    def from_polar_function(cls, fn, m=720, **kw):
        """fn(phi) -> (D_r, D_phi)."""
        def cart(phi):
            a, b = fn(phi)
            return polar_to_cartesian(a, b, phi)
        return cls.from_function(cart, m, **kw)

    @classmethod
    def from_multipole(cls, spec, m=720, radius=1.0):
        # exact antisymmetry of d_rho despite rounding in sin/cos
        phi = np.linspace(-np.pi, np.pi, m + 1)
        bz, br = multipole_field_cartesian(spec, radius * np.cos(np.abs(phi)),
                                           radius * np.sin(np.abs(phi)))
        br = np.sign(phi) * br
        return cls(phi, bz, br, tag="multipole")

    def complex_arg(self):
        """Continuous arg of D_zeta - i D_rho, normalized to 0 at phi = 0."""
        if self.n % 2 != 0:
            raise InvalidInput("use an even sample count so phi = 0 is a node")
        a = np.angle(self.d_zeta - 1j * self.d_rho)
        mid = self.n // 2
        right = np.unwrap(a[mid:])
        left = np.unwrap(a[: mid + 1][::-1])[::-1]
        return np.concatenate([left[:-1] - left[-1], right - right[0]])

    def to_csv(self, path):
        write_csv(path, ["phi", "d_zeta", "d_rho"], zip(self.phi, self.d_zeta, self.d_rho))

    @classmethod
    def from_csv(cls, path, **kw):
        _, c = read_csv(path)
        return cls(c["phi"], c["d_zeta"], c["d_rho"], **kw)


def rotation_number(field):
    """Winding number of the Cartesian field vector along the sampled circle.

    Increments between neighbouring samples are wrapped into (-pi, pi];
    any increment of pi/2 or more is rejected rather than guessed.
    """
    amp = np.hypot(field.d_zeta, field.d_rho)
    if np.any(amp == 0.0):
        raise ZeroVector("direction field vanishes at a sample")
    ang = np.arctan2(field.d_rho, field.d_zeta)
    inc = np.diff(ang)
    inc = (inc + np.pi) % (2 * np.pi) - np.pi
    if np.any(np.abs(inc) >= np.pi / 2):
        raise UndersampledField("angle increment of pi/2 or more; refine the sampling")
    turns = inc.sum() / (2 * np.pi)
    k = int(round(turns))
    if abs(turns - k) >= 0.01:
        raise UndersampledField("samples do not close up over one traversal")
    return k


def zero_count(rho, other, mode="bounded"):
    """Number of zeros enclosed: rho - rho_hat (bounded) or rho - delta + 1 (exterior)."""
    if mode == "bounded":
        n = rho - other
    elif mode == "exterior":
        if other < 3:
            raise InvalidInput("exterior mode needs decay order >= 3")
        n = rho - other + 1
    else:
        raise InvalidInput("mode must be 'bounded' or 'exterior'")
    if n < 0:
        raise NegativeCount("negative zero count: inconsistent rotation data")
    return n


def unsigned_space_dim(rho, delta):
    if delta < 3:
        raise InvalidInput("decay order must be >= 3")
    return rho - delta + 2 if delta <= rho + 1 else 0


def locate_zeros(field_fn, r_max, r_min=1.0, n_r=240, n_phi=240, tol=1e-10):
    """Zeros of a Cartesian field fn(zeta, rho) in r_min < |z| < r_max, rho >= 0.

    Seeds are local minima of |B| on a polar scan, refined by a root solve.
    Returns complex points zeta + i rho with rho >= 0.
    """
    r = np.linspace(r_min, r_max, n_r + 2)[1:-1]
    phi = np.linspace(0, np.pi, n_phi + 1)
    R, P = np.meshgrid(r, phi, indexing="ij")
    bz, br = field_fn(R * np.cos(P), R * np.sin(P))
    mag = np.hypot(bz, br)
    pad = np.pad(mag, 1, mode="edge")
    is_min = np.ones_like(mag, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_min &= mag <= pad[1 + di:1 + di + mag.shape[0], 1 + dj:1 + dj + mag.shape[1]]
    scale = np.max(mag)
    out = []
    for i, j in zip(*np.nonzero(is_min)):
        x0 = [R[i, j] * np.cos(P[i, j]), R[i, j] * np.sin(P[i, j])]
        sol = root(lambda x: np.array(field_fn(x[0], x[1]), dtype=float), x0, tol=1e-14)
        z = complex(sol.x[0], abs(sol.x[1]))
        if not (r_min < abs(z) < r_max):
            continue
        if np.hypot(*field_fn(z.real, z.imag)) > tol * max(scale, 1.0):
            continue
        if all(abs(z - w) > 1e-7 for w in out):
            out.append(z)
    return sorted(out, key=lambda z: (abs(z), z.real))
