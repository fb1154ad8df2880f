"""Phase functions, sign charts, region classification and the gamma_g arc.

theta(k) = 2k^3 + 6 k xi and g(k) = (2k^2 - Bk + B^2/2 - A^2 + 6 xi) X(k),
with xi = x/(6t).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial

from . import numerics
from .errors import DomainError, TracingError
from .numerics import Polyline, TrigCubic
from .scattering import StepParams, X_fn

__all__ = [
    "RegionLabel",
    "StationaryData",
    "SignChart",
    "BOUNDARY_TOL",
    "theta",
    "im_theta",
    "sign_chart",
    "discriminant_lambda",
    "stationary_cubic",
    "stationary_roots",
    "stationary_trig",
    "stationary_data",
    "thresholds",
    "classify",
    "classify_xi",
    "g_fn",
    "g_infinity",
    "g_infinity_alt",
    "g_prefactor",
    "g_squared_poly",
    "gamma_g",
]

BOUNDARY_TOL = 1e-12


class RegionLabel(str, enum.Enum):
    SlowDecay = "SlowDecay"
    ZakharovManakov = "ZakharovManakov"
    EllipticWave = "EllipticWave"
    PlaneWave = "PlaneWave"
    Boundary = "Boundary"


@dataclass(frozen=True)
class StationaryData:
    xi: float
    lambda_: float
    roots: Optional[tuple] = None
    k0: Optional[float] = None

    def __post_init__(self):
        if (self.roots is not None) != (self.lambda_ < 0):
            raise DomainError("roots must be present exactly when Lambda < 0")
        if (self.k0 is not None) != (self.xi < 0):
            raise DomainError("k0 must be present exactly when xi < 0")


def theta(k, xi: float):
    k = np.asarray(k, dtype=complex)
    val = 2 * k ** 3 + 6 * k * xi
    return val.item() if val.ndim == 0 else val


def im_theta(k, xi: float):
    """Im theta = -2 k2^3 + 6 k2 (k1^2 + xi) for k = k1 + i k2."""
    k = np.asarray(k, dtype=complex)
    k1, k2 = k.real, k.imag
    val = -2 * k2 ** 3 + 6 * k2 * (k1 ** 2 + xi)
    return val.item() if val.ndim == 0 else val


@dataclass(frozen=True)
class SignChart:
    """Sign of Im theta or Im g on a node grid.

    ``signs[j, i]`` belongs to ``re[i] + 1j*im[j]``; entries are +1, -1 or 0,
    and ``valid`` is False where the function is undefined (the cut of X).
    """

    which: str
    re: np.ndarray
    im: np.ndarray
    signs: np.ndarray
    valid: np.ndarray


def sign_chart(which: str, p: StepParams, xi: float, window, resolution) -> SignChart:
    re_min, re_max, im_min, im_max = (float(v) for v in window)
    nx, ny = (int(v) for v in resolution)
    if nx < 2 or ny < 2:
        raise DomainError("sign chart resolution must be at least 2x2")
    if not (re_max > re_min and im_max > im_min):
        raise DomainError("empty sign chart window")
    re = np.linspace(re_min, re_max, nx)
    im = np.linspace(im_min, im_max, ny)
    K = re[None, :] + 1j * im[:, None]
    valid = np.ones(K.shape, dtype=bool)
    if which == "theta":
        val = im_theta(K, xi)
        scale = 2 * np.abs(K) ** 3 + 6 * np.abs(K) * abs(xi)
    elif which == "g":
        on_cut = (K.real + p.B / 2 == 0.0) & (np.abs(K.imag) <= p.A)
        valid = ~on_cut
        Ks = np.where(on_cut, K + 1.0, K)  # placeholder off the cut, masked below
        q = g_prefactor(p, Ks, xi)
        X = X_fn(p, Ks)
        val = (q * X).imag
        qabs = 2 * np.abs(Ks) ** 2 + abs(p.B) * np.abs(Ks) + p.B ** 2 / 2 + p.A ** 2 + 6 * abs(xi)
        scale = qabs * np.abs(X)
    else:
        raise DomainError(f"unknown chart {which!r}; expected 'theta' or 'g'")
    signs = np.sign(val).astype(np.int8)
    signs[np.abs(val) < 1e-12 * scale] = 0
    signs[~valid] = 0
    return SignChart(which, re, im, signs, valid)


def discriminant_lambda(p: StepParams, xi: float) -> float:
    """Lambda(xi); the stationary cubic has three distinct real roots iff
    Lambda < 0 (Lambda is -1/139968 times the cubic's discriminant)."""
    A2, B2 = p.A ** 2, p.B ** 2
    return (xi ** 3 / 27
            + (A2 / 18 + B2 / 54) * xi ** 2
            + (A2 ** 2 / 36 - 7 * A2 * B2 / 108 + B2 ** 2 / 432) * xi
            + A2 ** 3 / 216 - A2 * B2 ** 2 / 864 + 11 * A2 ** 2 * B2 / 432)


def stationary_cubic(p: StepParams, xi: float) -> tuple:
    """Coefficients (c3, c2, c1, c0) of 6k^3 + 3Bk^2 + (3A^2 + 6xi)k - 3A^2B/2 + 3 xi B,
    the numerator of g'(k) X(k)."""
    A2, B = p.A ** 2, p.B
    return 6.0, 3.0 * B, 3.0 * A2 + 6.0 * xi, -1.5 * A2 * B + 3.0 * xi * B


def stationary_trig(p: StepParams, xi: float) -> TrigCubic:
    return numerics.trig_cubic(*stationary_cubic(p, xi))


def stationary_roots(p: StepParams, xi: float) -> tuple:
    """Ascending real stationary points (P1, P2, P3) of g."""
    lam = discriminant_lambda(p, xi)
    if not lam < 0:
        raise DomainError(f"Lambda({xi:g}) = {lam:.6g} >= 0: stationary points are not all real")
    return numerics.solve_cubic_real(*stationary_cubic(p, xi))


def stationary_data(p: StepParams, xi: float) -> StationaryData:
    lam = discriminant_lambda(p, xi)
    roots = stationary_roots(p, xi) if lam < 0 else None
    k0 = float(np.sqrt(-xi)) if xi < 0 else None
    return StationaryData(float(xi), float(lam), roots, k0)


def thresholds(p: StepParams) -> dict:
    """Region edges in xi."""
    return {
        "zm_slow": p.A ** 2 / 3 - p.B ** 2 / 4,
        "plane_wave": -p.B ** 2 / 4,
        "zero": 0.0,
    }


def classify_xi(p: StepParams, xi: float) -> RegionLabel:
    th = thresholds(p)
    if any(abs(xi - v) <= BOUNDARY_TOL for v in th.values()):
        return RegionLabel.Boundary
    upper = th["zm_slow"]
    if xi > upper and xi > 0:
        return RegionLabel.SlowDecay
    if upper < xi < 0:
        return RegionLabel.ZakharovManakov
    if th["plane_wave"] < xi < upper:
        return RegionLabel.EllipticWave
    if xi < th["plane_wave"]:
        return RegionLabel.PlaneWave
    # only reachable for 0 < xi < upper with the edges themselves excluded above
    return RegionLabel.Boundary


def classify(p: StepParams, x: float, t: float) -> RegionLabel:
    if not t > 0:
        raise DomainError("t must be positive")
    return classify_xi(p, x / (6.0 * t))


def g_prefactor(p: StepParams, k, xi: float):
    return 2 * k ** 2 - p.B * k + p.B ** 2 / 2 - p.A ** 2 + 6 * xi


def g_fn(p: StepParams, k, xi: float):
    kk = np.asarray(k, dtype=complex)
    val = g_prefactor(p, kk, xi) * np.asarray(X_fn(p, kk))
    return val.item() if val.ndim == 0 else val


def g_infinity(p: StepParams, xi: float) -> float:
    return (-6 * p.A ** 2 * p.B + p.B ** 3 + 12 * p.B * xi) / 4


def g_infinity_alt(p: StepParams, xi: float) -> float:
    return p.B ** 3 / 4 - 3 * p.A ** 2 * p.B / 2 + 3 * xi * p.B


def g_squared_poly(p: StepParams, xi: float) -> Polynomial:
    """g^2 = (2k^2 - Bk + B^2/2 - A^2 + 6xi)^2 ((k + B/2)^2 + A^2)."""
    q = Polynomial([p.B ** 2 / 2 - p.A ** 2 + 6 * xi, -p.B, 2.0])
    Q = Polynomial([p.B ** 2 / 4 + p.A ** 2, p.B, 1.0])
    return q * q * Q


def gamma_g(p: StepParams, xi: float, step: float = 0.01):
    """Arc {Im g^2 = 0, Re g^2 > 0} from E down to the real axis, and its
    mirror image.

    The branch point itself is not a vertex (g^2 vanishes there); the first
    vertex lies within one step of E.  The upper arc ends on the real axis at
    the middle stationary point P2.  Requires Lambda(xi) < 0.  The step is
    capped at A/4: the arc has length of order A and needs several vertices.
    """
    if not xi < -p.B ** 2 / 4:
        raise DomainError(f"gamma_g needs xi < -B^2/4 (got {xi:g})")
    if not p.A > 0:
        raise DomainError("gamma_g needs A > 0")
    lam = discriminant_lambda(p, xi)
    if not lam < 0:
        # with a single real stationary point the Re g^2 > 0 branch through E
        # runs off to infinity instead of closing on the real axis
        raise DomainError(f"gamma_g needs Lambda(xi) < 0 (got {lam:.6g} at xi = {xi:g})")
    step = min(step, 0.25 * p.A)
    P = g_squared_poly(p, xi)
    coef_abs = np.abs(P.coef)

    def keep(k):
        scale = np.polynomial.polynomial.polyval(abs(k), coef_abs)
        return complex(P(k)).real > 1e-12 * scale

    upper = numerics.trace_level_set(
        P, p.E, keep, step,
        max_length=20.0 * (p.A + abs(p.B) + np.sqrt(abs(xi)) + 1.0),
    )
    if upper.end.imag != 0.0:
        raise TracingError("gamma_g trace did not reach the real axis", location=upper.end)
    return upper, upper.conj()
