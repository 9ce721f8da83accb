"""Shooting-method eigen-solver, independent of every closed form.

Both sides are integrated from the walls toward the matching point with
fixed-step RK4 on presampled potential values; eigenvalues are zeros of the
normalized Wronskian mismatch at x = 0.  The integrator consumes only a
potential's side evaluators and its endpoint exponent, never eigenfunction
formulas, so agreement with the closed forms is a genuine cross-check.
"""
import cmath
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .spectral_core import ConvergenceError

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay runnable
    njit = None


class Side(Enum):
    RIGHT = "R"
    LEFT = "L"


@dataclass(frozen=True)
class ShootingConfig:
    h: float = 2e-4
    delta: float = 1e-6
    p: int = 1
    grid_resolution: int = 240
    newton_tol: float = 1e-10

    def __post_init__(self):
        assert 0.0 < self.h < 1e-2
        assert 0.0 < self.delta < 1e-3
        assert self.p >= 1

    @classmethod
    def for_potential(cls, V, **kw) -> "ShootingConfig":
        return cls(p=V.endpoint_exponent, **kw)


@dataclass(frozen=True)
class MismatchValue:
    """Wronskian psi_L psi_R' - psi_L' psi_R at 0, with its natural scale."""
    E: complex
    wronskian: complex
    scale: float

    @property
    def normalized(self) -> complex:
        # the sentinel keeps root scans away from breakdown points
        if self.scale == 0.0 or not math.isfinite(self.scale) or not cmath.isfinite(self.wronskian):
            return complex(1.0)
        return self.wronskian / self.scale


def _rk4_kernel_py(vnodes, vmids, E, hh, psi, dpsi):
    logscale = 0.0
    half = hh / 2.0
    sixth = hh / 6.0
    for k in range(vmids.shape[0]):
        q1 = vnodes[k] - E
        qm = vmids[k] - E
        q2 = vnodes[k + 1] - E
        k1p = dpsi
        k1d = q1 * psi
        k2p = dpsi + half * k1d
        k2d = qm * (psi + half * k1p)
        k3p = dpsi + half * k2d
        k3d = qm * (psi + half * k2p)
        k4p = dpsi + hh * k3d
        k4d = q2 * (psi + hh * k3p)
        psi = psi + sixth * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        dpsi = dpsi + sixth * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
        m = abs(psi) + abs(dpsi)
        if m > 1e100:
            psi /= m
            dpsi /= m
            logscale += math.log(m)
    return psi, dpsi, logscale


_rk4_kernel = njit(cache=True)(_rk4_kernel_py) if njit is not None else _rk4_kernel_py


@lru_cache(maxsize=64)
def _sampled_side(V, side: Side, h: float, delta: float):
    """Potential samples on the integration nodes and midpoints of one side.

    Node positions are affine in the step index so the last node lands on
    exactly 0.0 and is evaluated with the correct side's evaluator; an
    accumulated-position loop drifts across the origin jump and costs the
    integrator an order of convergence.
    """
    n = max(1, round((1.0 - delta) / h))
    x0 = 1.0 - delta if side is Side.RIGHT else -(1.0 - delta)
    hh = -x0 / n
    ev = V.right_eval if side is Side.RIGHT else V.left_eval
    nodes = np.array([ev(x0 * (n - k) / n) for k in range(n + 1)], dtype=np.complex128)
    mids = np.array([ev(x0 * (n - k - 0.5) / n) for k in range(n)], dtype=np.complex128)
    return nodes, mids, hh


def _integrate(V, E: complex, side: Side, cfg: ShootingConfig):
    nodes, mids, hh = _sampled_side(V, side, cfg.h, cfg.delta)
    sgn = -1.0 if side is Side.RIGHT else 1.0
    psi0 = complex(cfg.delta ** cfg.p)
    dpsi0 = complex(sgn * cfg.p * cfg.delta ** (cfg.p - 1))
    return _rk4_kernel(nodes, mids, complex(E), hh, psi0, dpsi0)


def integrate_side(V, E: complex, side: Side, cfg: ShootingConfig = ShootingConfig()):
    """(psi(0), psi'(0)) of the regular solution started at the wall.

    Startup uses the local regular behavior psi = delta^p at distance delta
    from the wall.  If intermediate renormalization fired and the common
    factor is too large to restore, the returned pair is the renormalized
    one (the direction is what the mismatch consumes).
    """
    psi, dpsi, logscale = _integrate(V, E, side, cfg)
    if logscale != 0.0 and logscale < 700.0:
        f = math.exp(logscale)
        return psi * f, dpsi * f
    return psi, dpsi


def mismatch(V, E: complex, cfg: ShootingConfig = ShootingConfig()) -> MismatchValue:
    """Wronskian of the two one-sided solutions at x = 0; zero iff E is an eigenvalue.

    The scale is the Hadamard bound |(pL,dL)| |(pR,dR)|, never zero for a
    nontrivial solution; the normalized value is the sine of the angle
    between the side solutions and is invariant under per-side rescaling.
    """
    pR, dR, _ = _integrate(V, E, Side.RIGHT, cfg)
    pL, dL, _ = _integrate(V, E, Side.LEFT, cfg)
    w = pL * dR - dL * pR
    scale = math.sqrt((abs(pL) ** 2 + abs(dL) ** 2) * (abs(pR) ** 2 + abs(dR) ** 2))
    return MismatchValue(complex(E), w, scale)


def _newton_polish(V, seed: complex, cfg: ShootingConfig):
    """Damped 2-D Newton on (Re, Im) of the normalized mismatch."""
    E = complex(seed)
    f = mismatch(V, E, cfg).normalized
    for _ in range(60):
        if abs(f) < cfg.newton_tol:
            return E, abs(f)
        step = 1e-7 * (1.0 + abs(E))
        fx = mismatch(V, E + step, cfg).normalized
        fy = mismatch(V, E + 1j * step, cfg).normalized
        j11, j12 = (fx.real - f.real) / step, (fy.real - f.real) / step
        j21, j22 = (fx.imag - f.imag) / step, (fy.imag - f.imag) / step
        det = j11 * j22 - j12 * j21
        if det == 0.0:
            break
        dE = complex((-f.real * j22 + f.imag * j12) / det,
                     (-f.imag * j11 + f.real * j21) / det)
        cap = 0.5 * (1.0 + abs(E))
        if abs(dE) > cap:
            dE *= cap / abs(dE)
        lam = 1.0
        fnew = f
        Enew = E
        for _ in range(8):
            Enew = E + lam * dE
            fnew = mismatch(V, Enew, cfg).normalized
            if abs(fnew) < abs(f):
                break
            lam /= 2.0
        E, f = Enew, fnew
    return E, abs(f)


def _real_axis_candidates(V, lo: float, hi: float, cfg: ShootingConfig):
    # PT-symmetric potential: the normalized mismatch is real on the real
    # axis, so plain sign changes bracket eigenvalues
    Es = np.linspace(lo, hi, cfg.grid_resolution)
    vals = [mismatch(V, complex(E), cfg).normalized.real for E in Es]
    out = []
    for k in range(len(Es) - 1):
        if vals[k] == 0.0:
            out.append(float(Es[k]))
        elif vals[k] * vals[k + 1] < 0.0:
            a, b, fa = float(Es[k]), float(Es[k + 1]), vals[k]
            for _ in range(80):
                mid = 0.5 * (a + b)
                fm = mismatch(V, complex(mid), cfg).normalized.real
                if fa * fm <= 0.0:
                    b = mid
                else:
                    a, fa = mid, fm
                if b - a < 1e-12 * (1.0 + abs(b)):
                    break
            out.append(0.5 * (a + b))
    return [complex(E) for E in out]


def _box_minima_candidates(V, lo: complex, hi: complex, cfg: ShootingConfig):
    # coarse |mismatch| landscape; local minima become Newton seeds
    nr, ni = 48, 25
    res = np.linspace(lo.real, hi.real, nr)
    ims = np.linspace(lo.imag, hi.imag, ni)
    mag = np.empty((ni, nr))
    for i, b in enumerate(ims):
        for j, a in enumerate(res):
            mag[i, j] = abs(mismatch(V, complex(a, b), cfg).normalized)
    seeds = []
    for i in range(ni):
        for j in range(nr):
            patch = mag[max(0, i - 1):i + 2, max(0, j - 1):j + 2]
            if mag[i, j] == patch.min() and mag[i, j] < 0.5:
                seeds.append(complex(res[j], ims[i]))
    return seeds


def find_spectrum_numeric(V, count: int, search_box, cfg: ShootingConfig = ShootingConfig(),
                          seeds=None):
    """`count` eigenvalues of V inside the box, sorted by (Re, Im).

    search_box is a pair of complex corners.  PT-symmetric potentials whose
    box straddles the real axis are scanned for real roots; otherwise the
    box is sampled for mismatch minima.  Extra complex seeds (e.g. closed
    predictions perturbed by a few percent) are polished alongside.
    Seeds that fail to converge are skipped; falling short of `count`
    converged levels raises ConvergenceError.
    """
    lo, hi = complex(search_box[0]), complex(search_box[1])
    lo, hi = complex(min(lo.real, hi.real), min(lo.imag, hi.imag)), \
        complex(max(lo.real, hi.real), max(lo.imag, hi.imag))
    candidates = list(seeds) if seeds is not None else []
    if getattr(V, "pt_symmetric", False) and lo.imag <= 0.0 <= hi.imag:
        candidates += _real_axis_candidates(V, lo.real, hi.real, cfg)
    elif not candidates:
        candidates += _box_minima_candidates(V, lo, hi, cfg)
    found = []
    for seed in candidates:
        E, res = _newton_polish(V, seed, cfg)
        if res >= cfg.newton_tol:
            continue
        margin = 1e-6 * (1.0 + abs(hi - lo))
        if not (lo.real - margin <= E.real <= hi.real + margin
                and lo.imag - margin <= E.imag <= hi.imag + margin):
            continue
        if any(abs(E - F) < 1e-8 * (1.0 + abs(E)) for F in found):
            continue
        found.append(E)
    found.sort(key=lambda E: (E.real, E.imag))
    if len(found) < count:
        raise ConvergenceError(
            f"only {len(found)} of {count} levels converged in the search box")
    return found[:count]


def rk4_order_estimate(V, E: complex, cfg: ShootingConfig = ShootingConfig(),
                       ladder=(1.6e-3, 8e-4, 4e-4, 2e-4)) -> float:
    """Observed convergence exponent of the mismatch under step halving.

    E should sit near, not on, an eigenvalue: at a root the leading error
    terms cancel and the ratio turns into noise.
    """
    vals = []
    for h in ladder:
        c = ShootingConfig(h=h, delta=cfg.delta, p=cfg.p,
                           grid_resolution=cfg.grid_resolution, newton_tol=cfg.newton_tol)
        vals.append(mismatch(V, E, c).normalized)
    diffs = [abs(vals[i] - vals[i + 1]) for i in range(len(vals) - 1)]
    exps = [math.log2(diffs[i] / diffs[i + 1]) for i in range(len(diffs) - 1)]
    return sum(exps) / len(exps)
