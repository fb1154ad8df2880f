"""Numerical building blocks: complex log-gamma, adaptive Gauss-Kronrod
quadrature along segments and polylines, a trigonometric cubic solver and a
predictor-corrector tracer for level sets {Im P = 0} of polynomials.
"""
from __future__ import annotations

import cmath
import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DomainError, EvaluationError, QuadratureError, TracingError

__all__ = [
    "Polyline",
    "QuadResult",
    "TrigCubic",
    "log_gamma",
    "quad_segment",
    "quad_polyline",
    "trig_cubic",
    "solve_cubic_real",
    "trace_level_set",
]


@dataclass(frozen=True)
class Polyline:
    """Ordered complex vertices; orientation follows the order."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).reshape(-1)
        if pts.size < 2:
            raise DomainError("polyline needs at least two points")
        if not np.all(np.isfinite(pts)):
            raise DomainError("polyline has non-finite vertices")
        if np.any(pts[1:] == pts[:-1]):
            raise DomainError("polyline has repeated consecutive vertices")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.size

    @property
    def start(self) -> complex:
        return complex(self.points[0])

    @property
    def end(self) -> complex:
        return complex(self.points[-1])

    @property
    def length(self) -> float:
        return float(np.sum(np.abs(np.diff(self.points))))

    def conj(self) -> "Polyline":
        return Polyline(np.conj(self.points))

    def reversed(self) -> "Polyline":
        return Polyline(self.points[::-1].copy())


@dataclass(frozen=True)
class QuadResult:
    value: complex | np.ndarray
    error_estimate: float
    evaluations: int


# ---------------------------------------------------------------------------
# log Gamma

# Lanczos approximation with g = 6.024680040776729583740234375 and 13 terms
# (the rational form used by Boost's lanczos13m53 and CPython's math.lgamma).
# Gamma(z) = S(z) * ((z + g - 1/2) / e)^(z - 1/2) * e^-g with S = num / den,
# coefficients listed by ascending power of z.
_LANCZOS_G = 6.024680040776729583740234375
_LANCZOS_NUM = (
    23531376880.410759688572007674451636754734846804940,
    42919803642.649098768957899047001988850926355848959,
    35711959237.355668049440185451547166705960488635843,
    17921034426.037209699919755754458931112671403265390,
    6039542586.3520280050642916443072979210699388420708,
    1439720407.3117216736632230727949123939715485786772,
    248874557.86205415651146038641322942321632125127801,
    31426415.585400194380614231628318205362874684987640,
    2876370.6289353724412254090516208496135991145378768,
    186056.26539522349504029498971604569928220784236328,
    8071.6720023658162106380029022722506138218516325024,
    210.82427775157934587250973392071336271166969580291,
    2.5066282746310002701649081771338373386264310793408,
)
# z (z+1) ... (z+11)
_LANCZOS_DEN = (
    0.0, 39916800.0, 120543840.0, 150917976.0, 105258076.0, 45995730.0,
    13339535.0, 2637558.0, 357423.0, 32670.0, 1925.0, 66.0, 1.0,
)


def _lanczos_sum(z: complex) -> complex:
    if abs(z) < 5.0:
        num = den = 0j
        for cn, cd in zip(reversed(_LANCZOS_NUM), reversed(_LANCZOS_DEN)):
            num = num * z + cn
            den = den * z + cd
        return num / den
    # Horner in 1/z keeps the powers bounded for large |z|
    y = 1.0 / z
    num = den = 0j
    for cn, cd in zip(_LANCZOS_NUM, _LANCZOS_DEN):
        num = num * y + cn
        den = den * y + cd
    return num / den


def log_gamma(z) -> complex:
    """Principal branch of log Gamma(z).

    For Re z < 1/2 the argument is shifted upward with
    log G(z) = log G(z + n) - sum_j log(z + j), which keeps the branch cut on
    the negative real axis (the same convention as ``mpmath.loggamma``).
    """
    z = complex(z)
    if not cmath.isfinite(z):
        raise DomainError(f"log_gamma: non-finite argument {z!r}")
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise DomainError(f"log_gamma: pole at {z.real:g}")
    shift = 0j
    if z.real < 0.5:
        n = int(math.ceil(0.5 - z.real))
        for j in range(n):
            shift += cmath.log(z + j)
        z = z + n
    zg = z + _LANCZOS_G - 0.5
    val = cmath.log(_lanczos_sum(z)) + (z - 0.5) * cmath.log(zg) - zg
    return val - shift


# ---------------------------------------------------------------------------
# Gauss-Kronrod 7/15

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full 15-point abscissae on [-1, 1] and matching weights
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes (x1, x3, x5 and the centre)
_GW[[1, 3, 5]] = _WG[:3]
_GW[[13, 11, 9]] = _WG[:3]
_GW[7] = _WG[3]


def _gk15(f, a: complex, b: complex):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    s = c + h * _NODES
    y = np.asarray(f(s))
    if y.shape[:1] != (15,):
        raise ValueError("integrand must map an array of abscissae to an array "
                         "whose first axis matches")
    bad = ~np.isfinite(y)
    if np.any(bad):
        idx = int(np.argwhere(bad.reshape(15, -1).any(axis=1))[0, 0])
        raise EvaluationError(f"non-finite integrand at s = {s[idx]!r}", abscissa=complex(s[idx]))
    tail = y.shape[1:]
    y = y.reshape(15, -1)
    kron = (h * (_KW @ y)).reshape(tail)
    gauss = (h * (_GW @ y)).reshape(tail)
    err = float(np.max(np.abs(kron - gauss)))
    return kron, err


def quad_segment(f: Callable, a, b, tol: float, *, rtol: float = 0.0,
                 max_depth: int = 30, max_intervals: int = 20000) -> QuadResult:
    """Integrate f along the straight segment from a to b.

    ``f`` receives a 1-D complex array of abscissae and must return an array
    whose first axis matches (trailing axes give a vector-valued integral).
    Global adaptive bisection: the interval with the largest Kronrod-Gauss
    discrepancy is split until the summed discrepancy is below
    ``max(tol, rtol*|value|)``.
    """
    if not tol > 0:
        raise DomainError("quadrature tolerance must be positive")
    a, b = complex(a), complex(b)
    kron, err = _gk15(f, a, b)
    evaluations = 15
    # heap entries (-err, tiebreak, key); leaves maps key -> (a, b, depth, value, err)
    leaves = {0: (a, b, 0, kron, err)}
    heap = [(-err, 0, 0)]
    counter = 1
    total = kron.copy()
    total_err = err
    while True:
        target = max(tol, rtol * float(np.max(np.abs(total))))
        if total_err <= target:
            break
        if not heap or len(leaves) >= max_intervals:
            value = _finish(leaves, a)
            raise QuadratureError(
                f"quadrature tolerance {target:.3g} not reached (estimate {total_err:.3g})",
                result=QuadResult(_shape(value), total_err, evaluations),
            )
        _, _, key = heapq.heappop(heap)
        lo, hi, depth, kv, ev = leaves[key]
        if depth >= max_depth:
            continue
        del leaves[key]
        mid = 0.5 * (lo + hi)
        k1, e1 = _gk15(f, lo, mid)
        k2, e2 = _gk15(f, mid, hi)
        evaluations += 30
        total = total - kv + k1 + k2
        total_err = total_err - ev + e1 + e2
        for lo_, hi_, kv_, ev_ in ((lo, mid, k1, e1), (mid, hi, k2, e2)):
            leaves[counter] = (lo_, hi_, depth + 1, kv_, ev_)
            heapq.heappush(heap, (-ev_, counter, counter))
            counter += 1
    value = _finish(leaves, a)
    total_err = float(sum(v[4] for v in leaves.values()))
    return QuadResult(_shape(value), total_err, evaluations)


def _finish(leaves, a):
    # resum in path order so the result does not depend on the refinement history
    ordered = sorted(leaves.values(), key=lambda v: abs(v[0] - a))
    return np.sum([v[3] for v in ordered], axis=0)


def _shape(value):
    value = np.asarray(value)
    if value.size == 1:
        return complex(value.reshape(-1)[0])
    return value


def quad_polyline(f: Callable, path: Polyline, tol: float, **kwargs) -> QuadResult:
    """Integrate along every segment of ``path``; tolerance is shared in
    proportion to segment length."""
    if not tol > 0:
        raise DomainError("quadrature tolerance must be positive")
    pts = path.points
    lengths = np.abs(np.diff(pts))
    total_len = float(lengths.sum())
    value = 0.0
    err = 0.0
    evals = 0
    for i in range(pts.size - 1):
        res = quad_segment(f, pts[i], pts[i + 1], tol * lengths[i] / total_len, **kwargs)
        value = value + np.asarray(res.value)
        err += res.error_estimate
        evals += res.evaluations
    return QuadResult(_shape(value), err, evals)


# ---------------------------------------------------------------------------
# cubic

@dataclass(frozen=True)
class TrigCubic:
    """Intermediate quantities of the trigonometric root formula.

    Roots are ``2 cube_radius**(1/3) cos(cube_angle + 2 pi j / 3) + shift``
    for j = 0, 1, 2 (``roots`` keeps that unsorted order).
    """

    cube_radius: float
    cube_angle: float
    shift: float
    roots: tuple


def _cubic_terms(c, x):
    return np.array([c[0] * x ** 3, c[1] * x ** 2, c[2] * x, c[3]])


def trig_cubic(c3: float, c2: float, c1: float, c0: float) -> TrigCubic:
    c3, c2, c1, c0 = (float(v) for v in (c3, c2, c1, c0))
    if c3 == 0.0:
        raise DomainError("leading cubic coefficient vanishes")
    a2, a1, a0 = c2 / c3, c1 / c3, c0 / c3
    # depressed form y^3 + p y + q with k = y - a2/3
    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2 ** 3 / 27.0 - a2 * a1 / 3.0 + a0
    scale = max(abs(a2) ** 3, abs(a1) ** 1.5, abs(a0), 1e-300)
    if p > 0.0 or (q / 2.0) ** 2 + (p / 3.0) ** 3 > 1e-13 * scale ** 2:
        raise DomainError("cubic has a complex-conjugate root pair")
    cube_radius = (-p / 3.0) ** 1.5
    if cube_radius == 0.0:
        cube_angle = 0.0
    else:
        arg = -q / (2.0 * cube_radius)
        cube_angle = math.acos(min(1.0, max(-1.0, arg))) / 3.0
    amp = 2.0 * math.sqrt(-p / 3.0)
    shift = -a2 / 3.0
    roots = tuple(amp * math.cos(cube_angle + 2.0 * math.pi * j / 3.0) + shift for j in range(3))
    return TrigCubic(cube_radius, cube_angle, shift, roots)


def solve_cubic_real(c3: float, c2: float, c1: float, c0: float) -> tuple:
    """Three real roots of c3 k^3 + c2 k^2 + c1 k + c0, ascending.

    Trigonometric formula followed by one Newton step per root.
    """
    coeffs = (float(c3), float(c2), float(c1), float(c0))
    tc = trig_cubic(*coeffs)
    polished = []
    for x in tc.roots:
        fx = ((coeffs[0] * x + coeffs[1]) * x + coeffs[2]) * x + coeffs[3]
        dfx = (3.0 * coeffs[0] * x + 2.0 * coeffs[1]) * x + coeffs[2]
        if dfx != 0.0:
            step = fx / dfx
            # a double root makes the step meaningless; keep the trig value then
            if abs(step) <= 1e-6 * max(1.0, abs(x)):
                x = x - step
        polished.append(x)
    return tuple(sorted(polished))


# ---------------------------------------------------------------------------
# level-set tracing

def _as_poly(P) -> Polynomial:
    if isinstance(P, Polynomial):
        return P
    return Polynomial(np.asarray(P, dtype=complex))


def trace_level_set(P, start, keep: Callable[[complex], bool], step: float, *,
                    max_length: float = 100.0, stop_at=None,
                    max_halvings: int = 20, tol: float = 1e-13) -> Polyline:
    """Follow the branch of {Im P = 0} through ``start`` on which ``keep``
    holds.

    Predictor along the unit tangent conj(P')/|P'|, corrector
    k <- k - i Im P(k) / P'(k) (Newton along the normal).  The step is halved
    whenever the corrector needs more than five iterations or the new vertex
    fails ``keep``.  Tracing stops when the curve reaches the real axis (for
    a start off the axis), comes within one step of ``stop_at``, or exceeds
    ``max_length``.  Near the axis the last vertex is snapped to a real
    critical point of P when P has real coefficients, otherwise to the chord
    intersection refined by Newton on the real line.
    """
    P = _as_poly(P)
    dP = P.deriv()
    coef_abs = np.abs(P.coef)
    real_coeffs = bool(np.all(np.imag(P.coef) == 0.0))

    def scale(k):
        return float(np.polynomial.polynomial.polyval(abs(k), coef_abs))

    def correct(k):
        for it in range(1, 6):
            val = complex(P(k))
            if abs(val.imag) <= tol * scale(k):
                return k, it
            d = complex(dP(k))
            if d == 0:
                return None, it
            k = k - 1j * val.imag / d
        val = complex(P(k))
        if abs(val.imag) <= tol * scale(k):
            return k, 6
        return None, 6

    if not step > 0:
        raise DomainError("trace step must be positive")
    k0, _ = correct(complex(start))
    if k0 is None:
        raise TracingError("start point is not on the level set", location=complex(start))
    d0 = complex(dP(k0))
    if abs(d0) <= 1e-14 * max(scale(k0), 1.0):
        raise TracingError("gradient vanishes at the start point", location=k0)
    tangent = d0.conjugate() / abs(d0)
    for cand in (tangent, -tangent):
        trial, _ = correct(k0 + step * cand)
        if trial is not None and keep(trial):
            direction = cand
            break
    else:
        raise TracingError("no tangent direction satisfies the keep predicate", location=k0)

    side = np.sign(k0.imag)
    pts = [k0]
    k = k0
    h = step
    travelled = 0.0
    while True:
        if stop_at is not None and len(pts) > 1 and abs(k - stop_at) <= step:
            if k != stop_at:
                pts.append(complex(stop_at))
            break
        if travelled >= max_length:
            break
        if side != 0 and abs(k.imag) < step:
            end = _finish_on_axis(P, dP, real_coeffs, pts, k, step)
            if end is not None and end != k:
                if len(pts) > 1 and abs(end - k) <= 1e-6 * step:
                    # the last vertex already sits on the axis up to rounding
                    pts[-1] = end
                else:
                    pts.append(end)
            break
        d = complex(dP(k))
        if abs(d) <= 1e-14 * max(scale(k), 1.0):
            raise TracingError("gradient of Im P collapsed", location=k)
        t = d.conjugate() / abs(d)
        if (t * direction.conjugate()).real < 0:
            t = -t
        halvings = 0
        while True:
            cand, its = correct(k + h * t)
            ok = (cand is not None and its <= 5 and keep(cand)
                  and 0.25 * h <= abs(cand - k) <= 2.0 * h)
            if ok and side != 0 and np.sign(cand.imag) != side:
                # overshoot across the axis: finish from the current vertex
                ok = h <= step * 2.0 ** -6
                if not ok:
                    cand = None
            if ok:
                break
            halvings += 1
            if halvings > max_halvings:
                raise TracingError("step halving limit reached", location=k)
            h *= 0.5
        travelled += abs(cand - k)
        pts.append(cand)
        direction = t
        k = cand
        h = min(step, 2.0 * h)
        if side != 0 and np.sign(k.imag) != side:
            break
    if not keep(k0):
        # the start may sit on the boundary of the keep region (a zero of P)
        pts = pts[1:]
    return Polyline(np.array(pts))


def _finish_on_axis(P, dP, real_coeffs, pts, k, step):
    if real_coeffs:
        d2 = dP.deriv()
        x = k.real
        for _ in range(50):
            fx = float(np.real(dP(x)))
            f2 = float(np.real(d2(x)))
            if f2 == 0.0:
                break
            dx = fx / f2
            x -= dx
            if abs(dx) <= 1e-15 * max(1.0, abs(x)):
                break
        if abs(x - k) <= 4.0 * step:
            return complex(x, 0.0)
        raise TracingError("no real critical point near the axis crossing", location=k)
    prev = pts[-2] if len(pts) > 1 else k
    if prev.imag != k.imag:
        s = prev.imag / (prev.imag - k.imag)
        x = (prev + s * (k - prev)).real
    else:
        x = k.real
    for _ in range(50):
        fx = float(np.imag(P(x)))
        fp = float(np.imag(dP(x)))
        if fp == 0.0:
            break
        dx = fx / fp
        x -= dx
        if abs(dx) <= 1e-15 * max(1.0, abs(x)):
            break
    return complex(x, 0.0)
