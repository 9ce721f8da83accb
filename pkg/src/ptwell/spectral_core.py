"""Complex wavenumber maps, matching-condition roots, critical couplings.

Units: hbar = 2m = 1, well half-width 1.  The well is -iZ on (0,1) and +iZ
on (-1,0) with Dirichlet walls at x = +-1.  Real eigenvalues solve
G(t, Z) = s*sinh(2s) + t*sin(2t) = 0 with s = Z/(2t), E = t^2 - s^2.
Above a critical coupling the lowest pair leaves the real axis and is
found from the two-sided wavenumber condition instead.
"""
import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache


class ConvergenceError(Exception):
    """A root search or Newton iteration failed to meet its tolerance."""


class Branch(Enum):
    REAL = "Real"
    COMPLEX_PAIR_LOWER = "ComplexPairLower"
    COMPLEX_PAIR_UPPER = "ComplexPairUpper"


@dataclass(frozen=True)
class CouplingStrength:
    z: float

    def __post_init__(self):
        if self.z < 0:
            raise ValueError("coupling must be nonnegative")


@dataclass(frozen=True)
class MomentumPair:
    """Real pair (s, t) with 2st = Z and t^2 - s^2 = E."""
    s: float
    t: float


@dataclass(frozen=True)
class WaveNumber:
    value: complex


@dataclass(frozen=True)
class SpectralLevel:
    index: int
    energy: complex
    kappa_right: WaveNumber
    kappa_left: WaveNumber
    branch: Branch

    @property
    def is_real(self):
        return self.branch is Branch.REAL


@dataclass(frozen=True)
class Spectrum:
    coupling: CouplingStrength
    levels: tuple
    broken_pairs: tuple = field(default_factory=tuple)


@dataclass(frozen=True)
class CriticalCoupling:
    nu: int
    z_crit: float
    t_merge: float
    e_merge: float


@dataclass(frozen=True)
class CurvePoint:
    T: float
    S: float


def coth(z: complex) -> complex:
    # sinh/cosh overflow near |Re z| ~ 710; switch to the exponential tail
    if abs(z.real) > 20:
        sgn = 1.0 if z.real > 0 else -1.0
        e = cmath.exp(-2 * sgn * z)
        return sgn * (1 + 2 * e / (1 - e))
    return cmath.cosh(z) / cmath.sinh(z)


def cosech(z: complex) -> complex:
    if abs(z.real) > 20:
        sgn = 1.0 if z.real > 0 else -1.0
        e = cmath.exp(-sgn * z)
        return sgn * 2 * e / (1 - e * e)
    return 1.0 / cmath.sinh(z)


def halfplane_sqrt(w: complex) -> complex:
    """Square root branch with Re >= 0; on the imaginary axis picks Im <= 0."""
    r = cmath.sqrt(w)
    if r.real < 0 or (r.real == 0 and r.imag > 0):
        r = -r
    return r


def kappa_from_energy(E: float, Z: float):
    """Map a real energy to (MomentumPair, WaveNumber) with kappa = s - i t.

    kappa^2 = -E - iZ; s >= 0 and t > 0 (fourth quadrant).  Raises for
    E <= 0 at Z = 0 where t would vanish.
    """
    if Z == 0 and E <= 0:
        raise ValueError("E must be positive when Z = 0")
    t = math.sqrt((E + math.hypot(E, Z)) / 2.0)
    s = Z / (2.0 * t) if Z != 0 else 0.0
    return MomentumPair(s, t), WaveNumber(complex(s, -t))


def matching_residual(t: float, Z: float) -> float:
    """G(t, Z) = s sinh(2s) + t sin(2t), s = Z/(2t); zero exactly at eigenvalues."""
    s = Z / (2.0 * t)
    return s * math.sinh(2 * s) + t * math.sin(2 * t)


def matching_residual_dt(t: float, Z: float) -> float:
    """Analytic dG/dt at fixed Z (s = Z/2t depends on t)."""
    s = Z / (2.0 * t)
    return -(s / t) * (math.sinh(2 * s) + 2 * s * math.cosh(2 * s)) + math.sin(2 * t) + 2 * t * math.cos(2 * t)


def curve_X(T: float) -> float:
    """Coupling-independent curve S = arcsinh(0.5*sqrt(-pi T sin(pi T))).

    Defined on the bands 2m-1 <= T <= 2m, m >= 1, where the radicand is
    nonnegative; zero at band endpoints.
    """
    m = math.ceil(T / 2.0)
    if m < 1 or not (2 * m - 1 <= T <= 2 * m):
        raise ValueError(f"T={T} outside the bands [2m-1, 2m]")
    r = -math.pi * T * math.sin(math.pi * T)
    return math.asinh(0.5 * math.sqrt(max(r, 0.0)))


def curve_Y(Z: float, T: float) -> float:
    """Coupling-dependent curve S = arcsinh(sqrt((Z/(2 pi T)) sinh(2Z/(pi T))))."""
    if T <= 0 or Z < 0:
        raise ValueError("need T > 0 and Z >= 0")
    return math.asinh(math.sqrt((Z / (2 * math.pi * T)) * math.sinh(2 * Z / (math.pi * T))))


def curve_point(pair: MomentumPair) -> CurvePoint:
    """CurvePoint of a real level: T = 2t/pi, sinh^2 S = s sinh(2s)/2."""
    return CurvePoint(2 * pair.t / math.pi, math.asinh(math.sqrt(pair.s * math.sinh(2 * pair.s) / 2)))


def band_bounds(nu: int):
    """Open band ((2 nu + 1) pi/2, (nu + 1) pi) holding root pair nu."""
    return (2 * nu + 1) * math.pi / 2, (nu + 1) * math.pi


def kappa_condition_residual(E: complex, Z: float) -> complex:
    """Two-sided wavenumber condition rho coth rho + sigma coth sigma at energy E."""
    rho = halfplane_sqrt(-E - 1j * Z)
    sigma = halfplane_sqrt(1j * Z - E)
    return rho * coth(rho) + sigma * coth(sigma)


def _newton_refine_t(t0: float, Z: float, tol: float = 1e-12, itmax: int = 100) -> float:
    t = t0
    for _ in range(itmax):
        g = matching_residual(t, Z)
        if abs(g) < tol:
            # one extra plain step: push the residual to its rounding floor,
            # which the ill-conditioned wavenumber form downstream needs
            dg = matching_residual_dt(t, Z)
            if dg != 0:
                tn = t - g / dg
                if abs(matching_residual(tn, Z)) <= abs(g):
                    t = tn
            return t
        dg = matching_residual_dt(t, Z)
        if dg == 0:
            break
        step = g / dg
        # stay inside the band; damp on residual increase
        lam = 1.0
        for _ in range(60):
            tn = t - lam * step
            if tn > 0 and abs(matching_residual(tn, Z)) < abs(g):
                break
            lam *= 0.5
        t = t - lam * step
    if abs(matching_residual(t, Z)) < tol:
        return t
    raise ConvergenceError(f"matching-residual Newton stalled at t={t}, Z={Z}")


def _band_roots(Z: float, nu: int, n_grid: int = 512):
    """Roots of G in band nu: sign scan, bisection to 1e-8, Newton to 1e-12."""
    lo, hi = band_bounds(nu)
    if Z == 0:
        # exact endpoint roots t = (2 nu + 1) pi / 2 and (nu + 1) pi
        return [lo, hi]
    dt = (hi - lo) / (n_grid - 1)
    ts = [lo + k * dt for k in range(n_grid)]
    vals = [matching_residual(t, Z) for t in ts]
    brackets = []
    for k in range(n_grid - 1):
        if vals[k] == 0.0:
            brackets.append((ts[k], ts[k]))
        elif vals[k] * vals[k + 1] < 0:
            brackets.append((ts[k], ts[k + 1]))
    roots = []
    for a, b in brackets:
        fa = matching_residual(a, Z)
        while b - a > 1e-8:
            m = 0.5 * (a + b)
            fm = matching_residual(m, Z)
            if fa * fm <= 0:
                b = m
            else:
                a, fa = m, fm
        roots.append(0.5 * (a + b))
    if len(roots) == 2 and roots[1] - roots[0] < 1e-4:
        # near tangency the brackets collapse: locate the minimum of G^2 by
        # quadratic fit, then Newton from both flanks of the vertex
        tc = 0.5 * (roots[0] + roots[1])
        d = max(roots[1] - roots[0], 1e-7)
        g2 = [matching_residual(tc + k * d, Z) ** 2 for k in (-1, 0, 1)]
        denom = g2[0] - 2 * g2[1] + g2[2]
        if denom > 0:
            tc += 0.5 * d * (g2[0] - g2[2]) / denom
        half = max(abs(roots[1] - roots[0]) / 2, 1e-9)
        roots = [tc - half, tc + half]
    return [_newton_refine_t(r, Z) for r in roots]


def _verified_level(index: int, t: float, Z: float) -> SpectralLevel:
    pair, kap = kappa_from_energy(t * t - (Z / (2 * t)) ** 2 if Z else t * t, Z)
    E = complex(pair.t ** 2 - pair.s ** 2)
    if Z != 0:
        # guard against spurious roots: both formulations must agree; at
        # Z = 0 the roots are exact band endpoints and coth has poles there.
        # The wavenumber form equals G scaled by |sinh kappa|^-2, so near a
        # band endpoint its raw value is rounding noise; judge the scaled one
        res = kappa_condition_residual(E, Z)
        sinh_sq = (math.cosh(2 * pair.s) - math.cos(2 * pair.t)) / 2.0
        if abs(res) >= 1e-10 and abs(res) * sinh_sq >= 1e-12:
            raise ConvergenceError(f"root t={t} fails the wavenumber condition ({abs(res):.2e})")
    return SpectralLevel(index, E, kap, WaveNumber(kap.value.conjugate()), Branch.REAL)


def solve_real_spectrum(Z: float, count: int):
    """First `count` real levels, increasing; bands whose pair went complex are skipped."""
    if Z < 0:
        raise ValueError("coupling must be nonnegative")
    levels = []
    nu = 0
    while len(levels) < count:
        for t in _band_roots(Z, nu):
            if len(levels) < count:
                levels.append(_verified_level(len(levels), t, Z))
        nu += 1
        if nu > count + 64:
            raise ConvergenceError("ran out of bands before reaching the requested count")
    return levels


def _two_roots_in_band(Z: float, nu: int) -> bool:
    lo, hi = band_bounds(nu)
    n = 512
    dt = (hi - lo) / (n - 1)
    prev = matching_residual(lo, Z)
    changes = 0
    for k in range(1, n):
        cur = matching_residual(lo + k * dt, Z)
        if prev * cur < 0:
            changes += 1
        prev = cur
    return changes >= 2


@lru_cache(maxsize=None)
def find_critical_coupling(nu: int) -> CriticalCoupling:
    """Coupling where the band-nu root pair merges: G = 0 and dG/dt = 0 jointly.

    A Z-bisection on the loss of the two-sign-change pattern brackets the
    merge to 1e-3, then a damped two-dimensional Newton polishes (t, Z).
    """
    if nu < 0:
        raise ValueError("band index must be nonnegative")
    z_lo = 1e-3
    z_hi = 4.0 + 9.0 * nu
    while _two_roots_in_band(z_hi, nu):
        z_hi *= 1.5
        if z_hi > 1e4:
            raise ConvergenceError("no merge found while raising the coupling")
    while z_hi - z_lo > 1e-3:
        zm = 0.5 * (z_lo + z_hi)
        if _two_roots_in_band(zm, nu):
            z_lo = zm
        else:
            z_hi = zm
    roots = _band_roots(z_lo, nu)
    t = 0.5 * (roots[0] + roots[-1])
    Z = 0.5 * (z_lo + z_hi)

    def F(t_, Z_):
        return matching_residual(t_, Z_), matching_residual_dt(t_, Z_)

    f1, f2 = F(t, Z)
    for _ in range(100):
        if abs(f1) < 1e-12 and abs(f2) < 1e-10:
            break
        ht = 1e-7 * (1 + abs(t))
        hz = 1e-7 * (1 + abs(Z))
        a1, a2 = F(t + ht, Z)
        b1, b2 = F(t, Z + hz)
        j11, j12 = (a1 - f1) / ht, (b1 - f1) / hz
        j21, j22 = (a2 - f2) / ht, (b2 - f2) / hz
        det = j11 * j22 - j12 * j21
        if det == 0:
            raise ConvergenceError("singular Jacobian in the tangency Newton")
        dt_ = (-f1 * j22 + f2 * j12) / det
        dz_ = (-f2 * j11 + f1 * j21) / det
        lam = 1.0
        for _ in range(8):
            n1, n2 = F(t + lam * dt_, Z + lam * dz_)
            if abs(n1) + abs(n2) < abs(f1) + abs(f2):
                break
            lam *= 0.5
        t, Z = t + lam * dt_, Z + lam * dz_
        f1, f2 = n1, n2
    if not (abs(f1) < 1e-10 and abs(f2) < 1e-8):
        raise ConvergenceError(f"tangency Newton did not converge for band {nu}")
    s = Z / (2 * t)
    return CriticalCoupling(nu, Z, t, t * t - s * s)


def _pair_residual(e: float, eps: float, Z: float) -> complex:
    return kappa_condition_residual(complex(e, -eps), Z)


def _pair_newton(e: float, eps: float, Z: float, tol: float = 1e-10, itmax: int = 100):
    f = _pair_residual(e, eps, Z)
    for _ in range(itmax):
        if abs(f) < tol:
            return e, abs(eps)
        he = 1e-7 * (1 + abs(e))
        hp = 1e-7 * (1 + abs(eps))
        fe = _pair_residual(e + he, eps, Z)
        fp = _pair_residual(e, eps + hp, Z)
        j11, j12 = (fe.real - f.real) / he, (fp.real - f.real) / hp
        j21, j22 = (fe.imag - f.imag) / he, (fp.imag - f.imag) / hp
        det = j11 * j22 - j12 * j21
        if det == 0:
            raise ConvergenceError("singular Jacobian in the pair Newton")
        de = (-f.real * j22 + f.imag * j12) / det
        dp = (-f.imag * j11 + f.real * j21) / det
        lam = 1.0
        for _ in range(8):
            fn = _pair_residual(e + lam * de, eps + lam * dp, Z)
            if abs(fn) < abs(f):
                break
            lam *= 0.5
        e, eps, f = e + lam * de, eps + lam * dp, fn
    raise ConvergenceError(f"complex-pair Newton did not converge at Z={Z}")


def solve_complex_pair(Z: float, nu: int, seed=None):
    """The complex-conjugate pair of band nu for Z above its critical coupling.

    Returns (lower, upper) SpectralLevels with energies e0 -+ i eps0, eps0 > 0.
    Without a seed, continues from the merge point in coupling steps of 0.05.
    """
    crit = find_critical_coupling(nu)
    if Z <= crit.z_crit:
        raise ConvergenceError(
            f"pair {nu} is still real at Z={Z} (critical coupling {crit.z_crit:.6f})")
    if seed is not None:
        e, eps = seed
    else:
        e, eps = crit.e_merge, 1e-3
        zc = crit.z_crit
        while zc < Z:
            zc = min(zc + 0.05, Z)
            e, eps = _pair_newton(e, eps, zc)
    e, eps = _pair_newton(e, eps, Z)
    if eps <= 0:
        raise ConvergenceError("pair solver landed on a nonpositive eps")
    E0 = complex(e, -eps)
    E1 = E0.conjugate()
    lower = SpectralLevel(0, E0, WaveNumber(halfplane_sqrt(-E0 - 1j * Z)),
                          WaveNumber(halfplane_sqrt(1j * Z - E0)), Branch.COMPLEX_PAIR_LOWER)
    upper = SpectralLevel(1, E1, WaveNumber(halfplane_sqrt(-E1 - 1j * Z)),
                          WaveNumber(halfplane_sqrt(1j * Z - E1)), Branch.COMPLEX_PAIR_UPPER)
    return lower, upper


def classify_spectrum(Z: float, count: int) -> Spectrum:
    """Assemble `count` levels: broken pairs first (ordered by Re E), then reals.

    Pair members carry the two-sided wavenumbers rho = sqrt(-E - iZ),
    sigma = sqrt(iZ - E) on the Re >= 0 branch; real levels carry the
    conjugate pair (kappa, kappa*).
    """
    if Z < 0:
        raise ValueError("coupling must be nonnegative")
    entries = []
    nu = 0
    while True:
        crit = find_critical_coupling(nu)
        if Z <= crit.z_crit:
            break
        lo, up = solve_complex_pair(Z, nu)
        entries.append((lo, up))
        nu += 1
    reals = solve_real_spectrum(Z, max(count - 2 * len(entries), 0))
    flat = [lv for pair in entries for lv in pair] + list(reals)
    flat.sort(key=lambda lv: (lv.energy.real, lv.energy.imag))
    flat = flat[:count]
    levels = []
    broken = []
    for i, lv in enumerate(flat):
        levels.append(SpectralLevel(i, lv.energy, lv.kappa_right, lv.kappa_left, lv.branch))
        if lv.branch is Branch.COMPLEX_PAIR_LOWER and i + 1 < len(flat) \
                and flat[i + 1].branch is Branch.COMPLEX_PAIR_UPPER:
            broken.append((i, i + 1))
    return Spectrum(CouplingStrength(Z), tuple(levels), tuple(broken))
