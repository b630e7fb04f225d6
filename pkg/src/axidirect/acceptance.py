"""The ten acceptance checks, shared by `verify-all` and the test suite.

Each check returns a Criterion with a pass flag, a one-line detail string
and the wall time.  Seeds are fixed so every run is reproducible.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import boundary as bd
from . import example2d as ex
from . import hardy, minmax, pde
from . import shooting as sh
from .geometry import DirectionField, MultipoleSpec, PolarGrid, multipole_field_cartesian, rotation_number
from .hardy import WeightParams

PAPER_DELTA_LB = 0.027


@dataclass
class Criterion:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} [{flag}] {self.name}: {self.detail} ({self.seconds:.1f} s)"


def _timed(number, name, fn):
    t = time.perf_counter()
    passed, detail = fn()
    return Criterion(number, name, bool(passed), detail, time.perf_counter() - t)


def c1():
    t = time.perf_counter()
    err = 0.0
    for g in (0.2, 0.6, 1.0):
        for B in (0.0, 1e-4, 1e-2):
            err = max(err, abs(minmax.mu_direct(0.39, g, B) - minmax.mu_analytic(0.39, g, B)))
    dt = time.perf_counter() - t
    return err <= 1e-6 and dt < 1.0, f"max |direct - analytic| = {err:.2e}, {dt:.2f} s"


def c2():
    t = time.perf_counter()
    gammas = np.round(np.arange(0.1, 2.0001, 0.1), 10)
    rows = sh.reduced_table(0.39, gammas, [1e-6, 1e-4, 1e-2])
    err = max(r[4] for r in rows)
    dt = time.perf_counter() - t
    return err <= 1e-3 and dt < 60, f"{len(rows)} points, max error {err:.2e}, {dt:.1f} s"


def c3():
    good = minmax.window_check(WeightParams(0.39, 0.6, 0.1, 1.2))
    bad = minmax.window_check(WeightParams(0.39, 0.6, 1.0, 1.2))
    note = ""
    if abs(good.delta - PAPER_DELTA_LB) > 0.01:
        note = f" (differs from the published 0.027 by {good.delta - PAPER_DELTA_LB:+.3f})"
    ok = good.delta > 0 and bad.LB < bad.CF
    return ok, (f"d=0.1: LB={good.LB:.6f} CF={good.CF:.6f} delta={good.delta:.6f}{note}; "
                f"d=1: LB={bad.LB:.6f} < CF={bad.CF:.6f}")


def c4():
    az, ar = minmax.coefficient_bounds(0.39)
    return 0.72 <= az <= 0.73 and 0.605 <= ar <= 0.61, f"|a_zeta| = {az:.6f}, |a_rho - 0.39| = {ar:.6f}"


def c5():
    t = time.perf_counter()
    w = WeightParams(0.39, 0.7, 0.1, 1.2)
    mus = [sh.find_eigenvalues(sh.ShootingProblem(w, 1e-3, bt)).mu_min for bt in (25.0, 50.0, 100.0)]
    lb = minmax.lower_bound(w)
    mono = all(b <= a + 1e-8 for a, b in zip(mus, mus[1:]))
    dt = time.perf_counter() - t
    ok = mus[-1] >= lb and mono and dt < 120
    return ok, (f"mu_min(25, 50, 100) = {mus[0]:.10f}, {mus[1]:.10f}, {mus[2]:.10f}; "
                f"LB = {lb:.6f}; {dt:.1f} s")


def c6():
    res = hardy.random_bump_suite(1000, seed=0)
    bad = {k: sum(not (r.holds and r.converged) for r in v) for k, v in res.items()}
    worst = max(max(r.ratio for r in v) for v in res.values())
    g, a, b = 0.0, 0.1, 2.0
    f = hardy.box_extremal(g, a, b, x_range=(0.0, 1.0))
    rep = hardy.verify_inequality(f, "hardy_2", gamma=g)
    dev = abs(rep.ratio * hardy.hardy_constant(2, g) / hardy.box_lower_bound(g, a, b) - 1)
    ok = not any(bad.values()) and dev <= 0.02
    return ok, f"failures {bad}, largest lhs/rhs {worst:.4f}; box extremal off by {dev:.2%}"


def c7():
    rng = np.random.default_rng(7)
    worst_k = 0.0
    for rho in (2, 4):
        for _ in range(3):
            zs = []
            for _ in range(rho // 2):
                zs.append(rng.uniform(1.2, 5.0) * np.exp(1j * rng.uniform(0.15, np.pi - 0.15)))
            cfg = bd.ZeroConfig(rho, rho - 2 * len(zs), zs)
            k1 = bd.estimate_K(bd.psi_field(cfg, PolarGrid(1.0, 6.0, 200, 400)))
            k2 = bd.estimate_K(bd.psi_field(cfg, PolarGrid(1.0, 6.0, 400, 800)))
            if not np.isfinite(k1):
                return False, f"K not finite for rho = {rho}"
            worst_k = max(worst_k, abs(k2 - k1) / k1)
    ray_err = 0.0
    for rho in (2, 4):
        rays = np.sort(bd.jump_rays(bd.ZeroConfig(rho, rho, []), 3.0))
        nu = np.arange(2 * rho)
        ray_err = max(ray_err, np.max(np.abs(rays - np.pi * (1 + 2 * nu) / (4 * rho))))
    phi = np.linspace(-np.pi, np.pi, 513)
    data = np.sin(phi) - 0.3 * np.sin(3 * phi) + 0.05 * np.sin(7 * phi)
    I = bd.harmonic_interpolant(data, 0.2 * np.sin(2 * phi), R=3.0)
    lap = I.laplace_residual(PolarGrid(1.0, 3.0, 40, 80))
    ok = worst_k <= 0.01 and ray_err <= 1e-8 and lap <= 1e-8
    return ok, f"K change {worst_k:.2e}, jump rays {ray_err:.1e}, Laplace residual {lap:.1e}"


def _rel_l2(sol, spec):
    g = sol.grid
    bz, br = multipole_field_cartesian(spec, g.zeta, g.rho)
    w = g.area
    c = np.sum(w * (bz * sol.b_zeta + br * sol.b_rho)) / np.sum(w * (sol.b_zeta ** 2 + sol.b_rho ** 2))
    err = np.sum(w * ((c * sol.b_zeta - bz) ** 2 + (c * sol.b_rho - br) ** 2))
    return c, float(np.sqrt(err / np.sum(w * (bz ** 2 + br ** 2))))


def energy_ratio(radii=(2.0, 4.0, 8.0), n_phi=128):
    """Monitor values for the fixed data Omega = sin(phi)/r^2 on growing annuli."""
    es = []
    for R in radii:
        g = PolarGrid(1.0, R, int(32 * (R - 1)), n_phi)
        es.append(pde.solve_nonlinear(pde.OmegaProblem(g, lambda r, p: np.sin(p) / r ** 2)).energy)
    return es, max(es) / min(es)


def c8():
    t = time.perf_counter()
    parts = []
    dip = MultipoleSpec(3, [-1.0])
    D = DirectionField.from_multipole(dip, 720)
    sol = pde.solve_direction_problem(D, bd.ZeroConfig(2, 2, []), R=8.0, grid=(128, 256))
    c, err_a = _rel_l2(sol, dip)
    ok_a = c > 0 and err_a <= 0.02 and np.all(sol.amplitude > 0)
    parts.append(f"(a) dipole {err_a:.1e}")

    mixed = MultipoleSpec(3, [-1.0, 0.0, -2.0])
    from scipy.optimize import brentq
    y0 = brentq(lambda y: multipole_field_cartesian(mixed, 0.0, y)[0], 1.1, 3.0, xtol=1e-14)
    D = DirectionField.from_multipole(mixed, 720)
    sol = pde.solve_direction_problem(D, bd.ZeroConfig(4, 2, [1j * y0]), R=8.0, grid=(128, 256))
    c, err_b = _rel_l2(sol, mixed)
    zs = pde.field_zeros(sol.b_zeta, sol.b_rho, sol.grid)
    g = sol.grid
    near = (len(zs) == 1 and zs[0][2] == -1 and abs(zs[0][0] - y0) <= g.dr
            and abs(zs[0][1] - np.pi / 2) <= g.dphi)
    ok_b = c > 0 and err_b <= 0.03 and near and np.all(sol.amplitude > 0)
    parts.append(f"(b) dipole+octupole {err_b:.1e}, zeros {[(round(float(z[0]), 3), round(float(z[1]), 3)) for z in zs]}")

    prob = pde.OmegaProblem(PolarGrid(1.0, 8.0, 64, 128), lambda r, p: 0 * r)
    st = pde.solve_nonlinear(prob)
    ok_c = not np.any(st.u)
    parts.append(f"(c) zero data max|u| = {np.max(np.abs(st.u)):.1e}")

    prob = sol.problem
    tol = 1e-8
    u1 = pde.solve_nonlinear(prob, tol=tol).u
    u2 = pde.solve_nonlinear(prob, u0=np.random.default_rng(8).uniform(-1, 1, prob.grid.shape), tol=tol).u
    dev = np.max(np.abs(u1 - u2)) / np.max(np.abs(u1))
    ok_d = dev <= 10 * tol
    parts.append(f"(d) guesses differ by {dev:.1e}")

    es, ratio = energy_ratio()
    ok_e = ratio <= 1.2
    parts.append(f"(e) energy {', '.join(f'{e:.4f}' for e in es)} ratio {ratio:.2f}")
    dt = time.perf_counter() - t
    return ok_a and ok_b and ok_c and ok_d and ok_e and dt <= 600, "; ".join(parts) + f"; {dt:.0f} s"


def c9():
    D = DirectionField.from_multipole(MultipoleSpec(3, [-1.0, 0.0, -2.0]), 720)
    g = (64, 128)
    sols = [pde.solve_direction_problem(D, bd.ZeroConfig(4, 2, [0.5 + 1.6j]), grid=g),
            pde.solve_direction_problem(D, bd.ZeroConfig(4, 2, [-0.4 + 2.0j]), grid=g),
            pde.solve_direction_problem(D, bd.ZeroConfig(4, 4, []), grid=g)]
    before = sols[0].fit.decay_order(1e-3)[0]
    ex_ = pde.shift_zero_to_axis(sols, 2.0, "expel")
    after = ex_.fit.decay_order(1e-3)[0]
    sa = pde.shift_zero_to_axis(sols, 2.0, "second-axis", zeta_s2=-2.5)
    res = float(np.max(np.abs(sa.axis_b_zeta(np.array([2.0, -2.5])))))
    mins = min(ex_.boundary_min_abs(), sa.boundary_min_abs())
    ok = after == before + 1 and res <= 1e-8 and mins > 0
    return ok, (f"decay order {before} -> {after}; axis B_zeta residual {res:.1e}; "
                f"min |B| on S1 = {mins:.3f}")


def c10():
    from scipy.optimize import root
    err = 0.0
    for lam in np.round(np.arange(-0.9, 0.9001, 0.05), 10):
        if abs(abs(lam) - 0.5) < 1e-12:
            continue
        r0, p0, _ = ex.zero_position(lam)
        z = r0 * np.exp(1j * p0)

        def f(xy):
            r, p = np.hypot(*xy), np.arctan2(xy[1], xy[0])
            br, bp = ex.field_lambda(lam, r, p)
            return [br * np.cos(p) - bp * np.sin(p), br * np.sin(p) + bp * np.cos(p)]

        x = root(f, [z.real + 1e-3, z.imag + 1e-3], method="hybr", tol=1e-15).x
        err = max(err, abs(complex(*x) - z))
    lo, hi = ex.regime_transitions()
    rot = rotation_number(ex.direction_field(720))
    ok = err <= 1e-10 and abs(lo + 0.5) <= 1e-12 and abs(hi - 0.5) <= 1e-12 and rot == 3
    return ok, f"max zero offset {err:.1e}; transitions {lo:.15f}, {hi:.15f}; rotation {rot}"


CRITERIA = {
    1: ("analytic vs direct min-max", c1),
    2: ("reduced shooting table", c2),
    3: ("solvability window", c3),
    4: ("coefficient bounds", c4),
    5: ("full shooting", c5),
    6: ("Hardy suite", c6),
    7: ("Psi/Phi bounds", c7),
    8: ("PDE oracles", c8),
    9: ("zero shifting", c9),
    10: ("planar example", c10),
}


def run(number):
    name, fn = CRITERIA[number]
    return _timed(number, name, fn)


def run_all(numbers=None, echo=None):
    out = []
    for k in numbers or sorted(CRITERIA):
        res = run(k)
        if echo:
            echo(res.line())
        out.append(res)
    return out
