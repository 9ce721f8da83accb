"""Closed-form eigenfunctions, PT diagnostics, and zero-coupling limit shapes.

Eigenfunctions are built per side in the wall coordinates w = 1 - x (right)
and v = 1 + x (left) and normalized at the origin, psi(0) = alpha.  When the
origin value vanishes identically (odd levels of the real well) the slope is
pinned instead, psi'(0) = i alpha.
"""
import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

from .spectral_core import SpectralLevel, coth


@dataclass(frozen=True)
class OriginData:
    """psi(0) and psi'(0)/i; both real for a PT-symmetric state."""
    alpha: complex
    beta: complex


@dataclass(frozen=True, eq=False)
class PiecewiseEigenfunction:
    level: SpectralLevel
    member_depth: int
    right_eval: object
    left_eval: object
    origin: OriginData
    coefficients: tuple
    right_deriv: object = None
    left_deriv: object = None

    def __call__(self, x: float) -> complex:
        # x = 0 evaluates the right branch; continuity makes this immaterial
        return self.right_eval(x) if x >= 0 else self.left_eval(x)

    def derivative(self, x: float) -> complex:
        return self.right_deriv(x) if x >= 0 else self.left_deriv(x)


@dataclass(frozen=True)
class GegenbauerPoly:
    degree: int
    order: int

    def __post_init__(self):
        if self.degree < 0 or self.order < 1:
            raise ValueError("need degree >= 0 and order >= 1")

    def __call__(self, x: float) -> float:
        return gegenbauer_eval(self.degree, self.order, x)


def normalize_sides(fR, dR, fL, dL, alpha=1.0):
    """Per-side origin normalization of wall-coordinate evaluators.

    fR(w), dR(w) are the right-side function and its d/dw derivative; fL, dL
    the same in v.  Each side is divided by its own origin value so the match
    psi(0+) = psi(0-) = alpha is exact by construction.  When the origin value
    is negligible against the slope the beta branch takes over: the side is
    divided by its origin slope over i, giving psi'(0) = i alpha.

    Returns (right_eval, left_eval, right_deriv, left_deriv, OriginData),
    all in the physical coordinate x.
    """
    val0R, der0R = fR(1.0), -dR(1.0)
    val0L, der0L = fL(1.0), dL(1.0)
    if abs(val0R) >= 1e-8 * (abs(val0R) + abs(der0R)):
        cR, cL = val0R / alpha, val0L / alpha
    else:
        cR, cL = der0R / (1j * alpha), der0L / (1j * alpha)

    def right_eval(x, fR=fR, cR=cR):
        return fR(1.0 - x) / cR

    def left_eval(x, fL=fL, cL=cL):
        return fL(1.0 + x) / cL

    def right_deriv(x, dR=dR, cR=cR):
        return -dR(1.0 - x) / cR

    def left_deriv(x, dL=dL, cL=cL):
        return dL(1.0 + x) / cL

    origin = OriginData(right_eval(0.0), right_deriv(0.0) / 1j)
    return right_eval, left_eval, right_deriv, left_deriv, origin, (cR, cL)


def square_well_eigenfunction(level: SpectralLevel, alpha: float = 1.0) -> PiecewiseEigenfunction:
    """Eigenfunction of the well itself: sinh[rho(1-x)] right, sinh[sigma(1+x)] left.

    At Z = 0 the odd levels have sinh(rho) = 0 and the origin-value form is
    indeterminate; the continuity limit sin(t x)/t applies there (slope-pinned,
    psi'(0) = i alpha).
    """
    rho = level.kappa_right.value
    sigma = level.kappa_left.value
    if abs(cmath.sinh(rho)) < 1e-12:
        t = -rho.imag
        fR = lambda w: 1j * math.sin(t * (1.0 - w)) / t * alpha
        dR = lambda w: -1j * math.cos(t * (1.0 - w)) * alpha
        fL = lambda v: 1j * math.sin(t * (v - 1.0)) / t * alpha
        dL = lambda v: 1j * math.cos(t * (v - 1.0)) * alpha
        origin = OriginData(0.0, complex(alpha))
        return PiecewiseEigenfunction(
            level, 1,
            lambda x: fR(1.0 - x), lambda x: fL(1.0 + x), origin, (1.0, 1.0),
            lambda x: -dR(1.0 - x), lambda x: dL(1.0 + x))
    fR = lambda w: cmath.sinh(rho * w)
    dR = lambda w: rho * cmath.cosh(rho * w)
    fL = lambda v: cmath.sinh(sigma * v)
    dL = lambda v: sigma * cmath.cosh(sigma * v)
    re, le, rd, ld, origin, coef = normalize_sides(fR, dR, fL, dL, alpha)
    return PiecewiseEigenfunction(level, 1, re, le, origin, coef, rd, ld)


def eval_sw_eigenfunction(level: SpectralLevel, alpha: float, x: float) -> complex:
    """Value at x of the well eigenfunction with psi(0) = alpha."""
    if not -1.0 <= x <= 1.0:
        raise ValueError("x outside the well")
    return square_well_eigenfunction(level, alpha)(x)


def pt_transform(f):
    """The PT image of a callable: x -> conj(f(-x))."""
    def g(x):
        return complex(f(-x)).conjugate()
    return g


def pt_defect(f, grid) -> float:
    """max |f(x) - conj(f(-x))| over the grid, relative to max |f|; 0 iff PT-symmetric there."""
    grid = list(grid)
    if not grid:
        raise ValueError("empty grid")
    amax = max(abs(complex(f(x))) for x in grid)
    if amax == 0.0:
        return 0.0
    return max(abs(complex(f(x)) - complex(f(-x)).conjugate()) for x in grid) / amax


def schrodinger_residual(f, V, E: complex, x: float, h: float) -> complex:
    """Central-stencil residual -f'' + (V - E) f at x; the stencil must stay in one region."""
    if h <= 0:
        raise ValueError("h must be positive")
    if abs(x) < h or abs(x) > 1.0 - h:
        raise ValueError("stencil crosses x = 0 or a wall")
    lap = (complex(f(x + h)) - 2.0 * complex(f(x)) + complex(f(x - h))) / h ** 2
    return -lap + (complex(V(x)) - E) * complex(f(x))


@lru_cache(maxsize=4096)
def gegenbauer_eval(n: int, m: int, x: float) -> float:
    """C_n^(m)(x) by the three-term recurrence."""
    if n < 0 or m < 1:
        raise ValueError("need n >= 0, m >= 1")
    if n == 0:
        return 1.0
    c_prev, c = 1.0, 2.0 * m * x
    for k in range(2, n + 1):
        c_prev, c = c, (2.0 * (k + m - 1) * x * c - (k + 2 * m - 2) * c_prev) / k
    return c


def limit_form(m: int, n: int, x: float) -> float:
    """Zero-coupling shape of the depth-m hierarchy member's level n, up to a constant.

    cos^m(pi x / 2) * C_n^(m)(sin(pi x / 2)).
    """
    if not 1 <= m <= 3:
        raise ValueError("limit form is tabulated for member depths 1..3")
    if n < 0:
        raise ValueError("level index must be nonnegative")
    if not abs(x) < 1:
        raise ValueError("x must lie strictly inside the well")
    c = math.cos(math.pi * x / 2.0)
    return c ** m * gegenbauer_eval(n, m, math.sin(math.pi * x / 2.0))


def chebyshev_grid(count: int = 101):
    """Chebyshev-spaced points on (-0.999, 0.999) that avoid 0 exactly.

    Half-integer nodes of order count+1 never hit the midpoint when count is
    odd; the first `count` of them are returned (decreasing in x).
    """
    order = count + 1
    return [0.999 * math.cos(math.pi * (k + 0.5) / order) for k in range(count)]
