"""Leading-order long-time formulas in the three supported regions.

Zakharov-Manakov sector: decaying radiation with Gamma-function phases.
Plane-wave sector: A e^{i(Ct + Bx - 2 phi(xi))} with the phase shift phi(xi)
assembled from integrals along gamma_g, its mirror image and the real line.
Slow-decay sector: the printed envelopes only (no constant is available).

Sign conventions for v differ between sectors and are kept local:
v_zm = -(1/2pi) log(1 + |r|^2) <= 0, while the plane-wave delta uses
+log(1 + |r|^2) in its exponent.
"""
from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import numerics, phase
from .errors import CutError, DomainError, RegionError
from .phase import RegionLabel
from .scattering import StepParams, X_fn, real_axis_arg_phi, reflection

__all__ = [
    "AsymptoticValue",
    "UnsupportedRegion",
    "PhaseShift",
    "ERROR_ORDERS",
    "SLOW_DECAY_READINGS",
    "v_zm",
    "log_one_plus_r2",
    "chi_zm",
    "delta_zm",
    "zm_terms",
    "u_zm",
    "log_delta_pw",
    "delta_pw",
    "x_plus",
    "phase_shift_assembly",
    "phase_shift_phi",
    "u_pw",
    "u_pw_reconstruction",
    "slow_decay_bound",
    "u_asymptotic",
]

ERROR_ORDERS = {
    RegionLabel.ZakharovManakov: "t^{-1} log t",
    RegionLabel.PlaneWave: "t^{-1/2}",
    RegionLabel.SlowDecay: "bound-only",
}
SLOW_DECAY_READINGS = ("literal", "derived")


@dataclass(frozen=True)
class AsymptoticValue:
    u: complex
    region: RegionLabel
    error_order: str

    def __post_init__(self):
        if self.region not in ERROR_ORDERS:
            raise DomainError(f"no asymptotic value for region {self.region}")
        if not cmath.isfinite(self.u):
            raise DomainError("asymptotic value must be finite")
        object.__setattr__(self, "u", complex(self.u))


@dataclass(frozen=True)
class UnsupportedRegion:
    """Returned by the dispatcher where no leading-order formula applies."""

    region: RegionLabel
    reason: str


# ---------------------------------------------------------------------------
# Zakharov-Manakov sector

def _log_cos(angle):
    # log cos(a) = log1p(-2 sin^2(a/2)), accurate for small a
    return np.log1p(-2.0 * np.sin(0.5 * angle) ** 2)


def log_one_plus_r2(p: StepParams, k):
    """log(1 + |r(k)|^2) = -2 log a(k) for real k (a = cos arg phi > 0)."""
    return -2.0 * _log_cos(real_axis_arg_phi(p, k))


def v_zm(p: StepParams, k):
    """v(k) = -(1/2pi) log(1 + |r(k)|^2) on the real axis."""
    val = -log_one_plus_r2(p, k) / (2.0 * np.pi)
    return float(val) if np.ndim(val) == 0 else val


def _real_breaks(p: StepParams, lo: float, hi: float):
    # v and log(1 + |r|^2) have a kink at k = -B/2 where the cut meets the axis
    # and vary on the scale A around it
    c = -p.B / 2
    marks = [c] + [c + s * m * p.A for m in (1.0, 4.0, 16.0) for s in (-1.0, 1.0)]
    inner = sorted(x for x in set(marks) if lo < x < hi)
    return [lo] + inner + [hi]


def chi_zm(p: StepParams, k0: float, tol: float = 1e-14) -> complex:
    """chi(k0) = (1/2pi i) int_{-k0}^{k0} (v(s) - v(k0))/(s - k0) ds."""
    if not k0 > 0:
        raise DomainError("k0 must be positive")
    v0 = v_zm(p, k0)

    def integrand(s):
        x = s.real
        return (v_zm(p, x) - v0) / (x - k0)

    total = 0.0
    pts = _real_breaks(p, -k0, k0)
    share = tol / (len(pts) - 1)
    for lo, hi in zip(pts[:-1], pts[1:]):
        total += numerics.quad_segment(integrand, lo, hi, share).value.real
    return complex(0.0, -total / (2.0 * np.pi))


def delta_zm(p: StepParams, k0: float, t: float) -> complex:
    if not (k0 > 0 and t > 0):
        raise DomainError("k0 and t must be positive")
    v = v_zm(p, k0)
    chi = chi_zm(p, k0)
    return cmath.exp(-0.5j * v * math.log(24.0 * t * k0 ** 3) + 4j * t * k0 ** 3 + chi)


def _zm_setup(p: StepParams, x: float, t: float):
    region = phase.classify(p, x, t)
    if region is not RegionLabel.ZakharovManakov:
        raise RegionError(f"(x, t) = ({x:g}, {t:g}) lies in {region.value}, not ZakharovManakov",
                          region=region)
    return math.sqrt(-x / (6.0 * t))


def zm_terms(p: StepParams, x: float, t: float):
    """The two terms of the Z-M formula; u = first - second.

    v Gamma(+-iv) is rewritten as -+i Gamma(1 +- iv), which is the same number
    and stays finite as v -> 0.
    """
    k0 = _zm_setup(p, x, t)
    v = v_zm(p, k0)
    r0 = complex(reflection(p, k0))
    d2 = delta_zm(p, k0, t) ** 2
    pref = math.exp(math.pi * v / 2) / math.sqrt(12.0 * t * k0 * math.pi)
    vg_plus = -1j * cmath.exp(numerics.log_gamma(complex(1.0, v)))
    vg_minus = 1j * cmath.exp(numerics.log_gamma(complex(1.0, -v)))
    first = pref * d2 * cmath.exp(-0.75j * math.pi) * vg_plus * r0.conjugate()
    second = pref / d2 * cmath.exp(0.75j * math.pi) * vg_minus * r0
    return first, second


def u_zm(p: StepParams, x: float, t: float) -> AsymptoticValue:
    first, second = zm_terms(p, x, t)
    return AsymptoticValue(first - second, RegionLabel.ZakharovManakov,
                           ERROR_ORDERS[RegionLabel.ZakharovManakov])


# ---------------------------------------------------------------------------
# plane-wave sector

def _pw_roots(p: StepParams, xi: float):
    if not xi < -p.B ** 2 / 4:
        raise DomainError(f"plane-wave quantities need xi < -B^2/4 (got {xi:g})")
    return phase.stationary_roots(p, xi)


def log_delta_pw(p: StepParams, P1: float, P3: float, k, tol: float = 1e-13):
    """(1/2pi i) int_{P1}^{P3} log(1 + |r(s)|^2)/(s - k) ds for an array of k.

    The value log(1 + |r|^2) at x0 = clip(Re k, P1, P3) is subtracted and its
    contribution added back in closed form, which keeps the remaining
    integrand bounded as k approaches the interval.
    """
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    on = (k.imag == 0.0) & (k.real >= P1) & (k.real <= P3)
    if np.any(on):
        raise CutError("k lies on [P1, P3]", point=complex(k[on][0]))
    x0 = np.clip(k.real, P1, P3)
    L0 = log_one_plus_r2(p, x0)

    def integrand(s):
        x = s.real
        Lx = log_one_plus_r2(p, x)
        return (Lx[:, None] - L0[None, :]) / (x[:, None] - k[None, :])

    total = np.zeros(k.shape, dtype=complex)
    pts = _real_breaks(p, P1, P3)
    share = tol / (len(pts) - 1)
    for lo, hi in zip(pts[:-1], pts[1:]):
        # for k within eps of the axis the integrand has structure of width eps
        # at Re k, so bisection has to go about log2(1/eps) levels deep
        res = numerics.quad_segment(integrand, lo, hi, share, max_depth=60)
        total += np.asarray(res.value).reshape(k.shape)
    total += L0 * (np.log(P3 - k) - np.log(P1 - k))
    return total / (2j * np.pi)


def delta_pw(p: StepParams, xi: float, k) -> complex:
    P1, _, P3 = _pw_roots(p, xi)
    val = np.exp(log_delta_pw(p, P1, P3, k))
    return complex(val[0]) if np.ndim(k) == 0 else val.reshape(np.shape(k))


def x_plus(p: StepParams, s):
    """Boundary value X_+ on gamma_g and its mirror image.

    X_+ is the value of the function whose cut is gamma_g u conj(gamma_g),
    taken from the left of the downward orientation (east).  Relative to X_fn,
    whose cut is the vertical segment, it changes sign inside the lens
    between the two cuts; for a point on the arc that is exactly when the arc
    runs west of Re k = -B/2.  On the vertical segment itself the east limit
    of X_fn is used.
    """
    s = np.asarray(s, dtype=complex)
    d = s.real + p.B / 2
    on_cut = (d == 0.0) & (np.abs(s.imag) <= p.A)
    safe = np.where(on_cut, s + 1.0, s)
    X = np.asarray(X_fn(p, safe))
    X = np.where(d < 0, -X, X)
    if np.any(on_cut):
        y = s.imag
        mod = np.sqrt(np.abs((y - p.A) / (y + p.A)))
        X = np.where(on_cut, (s - p.Ebar) * (-1j) * mod, X)
    return X


@dataclass(frozen=True)
class PhaseShift:
    """Pieces of the phase shift; ``value`` should be real."""

    xi: float
    value: complex
    arc_part: complex
    line_part: float
    error_estimate: float
    crossing: float

    @property
    def imag_residual(self) -> float:
        return abs(self.value.imag)


def _arc_integral(p, P1, P3, branch, pts, tol):
    """int log delta^{-2}(s) / X_+(s) ds from the branch point along pts.

    The first piece [branch, pts[0]] is integrated in s = branch + (pts[0] -
    branch) tau^2, which removes the inverse square-root singularity of X_+.
    """

    def F(s):
        return -2.0 * log_delta_pw(p, P1, P3, s, 1e-12) / x_plus(p, s)

    h = pts[0] - branch
    # below tau_min the node rounds onto the branch point itself; the
    # integrand is smooth in tau, so freezing it there costs O(tau_min^2)
    tau_min = math.sqrt(64 * np.finfo(float).eps * abs(branch) / abs(h)) if branch != 0 else 0.0

    def near(tau):
        tau = np.maximum(tau.real, tau_min)
        return F(branch + h * tau ** 2) * 2.0 * tau * h

    r0 = numerics.quad_segment(near, 0.0, 1.0, 0.1 * tol)
    r1 = numerics.quad_polyline(F, numerics.Polyline(pts), 0.9 * tol)
    return r0.value + r1.value, r0.error_estimate + r1.error_estimate


def _line_integral(p: StepParams, tol):
    """int_R log|a(s)|^2 / X(s) ds with s = -B/2 + A tan(tau).

    X = sign(tau) A sec(tau) on the axis, so the integrand becomes
    sign(tau) log a^2 sec(tau) dtau, which is bounded and vanishes at the ends.
    """

    def G(tau):
        tau = tau.real
        s = -p.B / 2 + p.A * np.tan(tau)
        log_a2 = -log_one_plus_r2(p, s)
        return np.sign(tau) * log_a2 / np.cos(tau)

    half = 0.5 * np.pi
    left = numerics.quad_segment(G, -half, 0.0, 0.5 * tol)
    right = numerics.quad_segment(G, 0.0, half, 0.5 * tol)
    return (left.value + right.value).real, left.error_estimate + right.error_estimate


def phase_shift_assembly(p: StepParams, xi: float, step: float = 0.01,
                         tol: float = 1e-10) -> PhaseShift:
    P1, _, P3 = _pw_roots(p, xi)
    if p.A == 0:
        # a = 1 and delta = 1: every piece vanishes and the arc shrinks to -B/2
        return PhaseShift(float(xi), 0j, 0j, 0.0, 0.0, -p.B / 2)
    upper, lower = phase.gamma_g(p, xi, step)
    # gamma_g runs E -> crossing, its mirror crossing -> conj E
    up, e_up = _arc_integral(p, P1, P3, p.E, upper.points, 0.5 * tol)
    down_rev, e_dn = _arc_integral(p, P1, P3, p.Ebar, lower.points, 0.5 * tol)
    arc = up - down_rev
    line, e_line = _line_integral(p, tol)
    value = (arc + line) / (2.0 * np.pi)
    err = (e_up + e_dn + e_line) / (2.0 * np.pi)
    return PhaseShift(float(xi), complex(value), complex(arc), float(line), float(err),
                      float(upper.end.real))


@functools.lru_cache(maxsize=256)
def _phase_shift_cached(A: float, B: float, xi: float, step: float, tol: float) -> float:
    return phase_shift_assembly(StepParams(A, B), xi, step, tol).value.real


def phase_shift_phi(p: StepParams, xi: float, step: float = 0.01, tol: float = 1e-10) -> float:
    """Real phase shift phi(xi) of the plane-wave sector."""
    return _phase_shift_cached(p.A, p.B, float(xi), float(step), float(tol))


def u_pw(p: StepParams, x: float, t: float) -> AsymptoticValue:
    region = phase.classify(p, x, t)
    if region is not RegionLabel.PlaneWave:
        raise RegionError(f"(x, t) = ({x:g}, {t:g}) lies in {region.value}, not PlaneWave",
                          region=region)
    xi = x / (6.0 * t)
    phi = phase_shift_phi(p, xi)
    u = p.A * cmath.exp(1j * (p.C * t + p.B * x - 2.0 * phi))
    return AsymptoticValue(u, RegionLabel.PlaneWave, ERROR_ORDERS[RegionLabel.PlaneWave])


def u_pw_reconstruction(p: StepParams, x: float, t: float, phi: Optional[float] = None) -> complex:
    """Second route: 2i e^{2i g(inf) t} m12 F(inf)^{-2} with m12 = -iA/2 and
    F(inf) = e^{i phi}."""
    xi = x / (6.0 * t)
    if phi is None:
        phi = phase_shift_phi(p, xi)
    ginf = phase.g_infinity(p, xi)
    return 2j * cmath.exp(2j * ginf * t) * (-0.5j * p.A) * cmath.exp(-2j * phi)


# ---------------------------------------------------------------------------
# slow-decay sector

def slow_decay_bound(p: StepParams, x: float, t: float, reading: str = "literal") -> float:
    """Envelope t^{-1/2} e^{...} for the sub-case containing xi.

    Sub-cases: xi <= A^2/6, A^2/6 < xi <= A^2, xi > A^2.  ``reading`` only
    matters in the middle one: "literal" uses e^{12 sqrt(6t) xi^{3/2}},
    "derived" uses e^{12 sqrt(6) t xi^{3/2}}.
    """
    if reading not in SLOW_DECAY_READINGS:
        raise DomainError(f"unknown slow-decay reading {reading!r}")
    region = phase.classify(p, x, t)
    if region is not RegionLabel.SlowDecay:
        raise RegionError(f"(x, t) = ({x:g}, {t:g}) lies in {region.value}, not SlowDecay",
                          region=region)
    xi = x / (6.0 * t)
    A2 = p.A ** 2
    if xi <= A2 / 6:
        eta = xi + p.B ** 2 / 4
        expo = 12.0 * math.sqrt(3.0) * t * (eta ** 1.5 + eta ** 0.5)
    elif xi <= A2:
        if reading == "literal":
            expo = 12.0 * math.sqrt(6.0 * t) * xi ** 1.5
        else:
            expo = 12.0 * math.sqrt(6.0) * t * xi ** 1.5
    else:
        expo = -8.0 * t * xi ** 1.5
    if expo > 709.0:
        return math.inf
    return math.exp(expo) / math.sqrt(t)


def u_asymptotic(p: StepParams, x: float, t: float,
                 reading: str = "literal") -> Union[AsymptoticValue, UnsupportedRegion]:
    region = phase.classify(p, x, t)
    if region is RegionLabel.ZakharovManakov:
        return u_zm(p, x, t)
    if region is RegionLabel.PlaneWave:
        xi = x / (6.0 * t)
        if not phase.discriminant_lambda(p, xi) < 0:
            return UnsupportedRegion(region, "Lambda(xi) >= 0: stationary points not all real")
        return u_pw(p, x, t)
    if region is RegionLabel.SlowDecay:
        bound = slow_decay_bound(p, x, t, reading)
        if not math.isfinite(bound):
            return UnsupportedRegion(region, "envelope overflows double precision")
        return AsymptoticValue(complex(bound, 0.0), region, ERROR_ORDERS[region])
    if region is RegionLabel.EllipticWave:
        return UnsupportedRegion(region, "genus-1 sector: classification only")
    return UnsupportedRegion(region, "on a region boundary")
