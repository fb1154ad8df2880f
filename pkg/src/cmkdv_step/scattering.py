"""Closed-form spectral data for the step A e^{iBx} (x < 0), 0 (x > 0).

Branch realisation: every cut-sensitive quantity goes through the Moebius
variable w = (k - E)/(k - conj E), which sends C minus the vertical segment
[E, conj E] onto C minus (-inf, 0].  Principal roots of w therefore have their
cut exactly on [E, conj E].

The real point k = -B/2 where the cut meets the axis is evaluated with its
east (plus) boundary value, so real-axis quantities are defined everywhere.

Side convention on the cut: ``plus`` is the limit taken from Re k > -B/2
(east), ``minus`` from Re k < -B/2 (west).  With w = |w| e^{-i pi} from the
east this gives phi_+ = |w|^{1/4} e^{-i pi/4} and phi_- = |w|^{1/4} e^{+i pi/4};
with this choice a_- = -i conj(b_+) at the mirrored point and
f = i/(a_+ a_-) = r_- - r_+ hold simultaneously.

All functions accept scalars or numpy arrays of k.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import CutError, DomainError

__all__ = [
    "StepParams",
    "Side",
    "CutPoint",
    "mobius_w",
    "phi_fn",
    "X_fn",
    "Omega_fn",
    "scattering_coeffs",
    "reflection",
    "boundary_values",
    "X_boundary",
    "f_cut",
    "f_from_jump",
    "real_axis_arg_phi",
]


@dataclass(frozen=True)
class StepParams:
    """Amplitude A and wavenumber B of the left plane wave.

    A = 0 is accepted as the degenerate zero-data case (the cut shrinks to the
    point -B/2 and a = 1, b = 0 elsewhere).
    """

    A: float
    B: float

    def __post_init__(self):
        A, B = float(self.A), float(self.B)
        if not (np.isfinite(A) and np.isfinite(B)):
            raise DomainError("A and B must be finite")
        if A < 0:
            raise DomainError("amplitude A must be nonnegative")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def C(self) -> float:
        """Plane-wave frequency: u = A e^{i(Bx + Ct)}."""
        return self.B ** 3 / 2 - 3 * self.A ** 2 * self.B

    @property
    def E(self) -> complex:
        return complex(-self.B / 2, self.A)

    @property
    def Ebar(self) -> complex:
        return complex(-self.B / 2, -self.A)

    def plane_wave(self, x, t):
        return self.A * np.exp(1j * (self.B * np.asarray(x) + self.C * t))


class Side(str, enum.Enum):
    plus = "plus"
    minus = "minus"


@dataclass(frozen=True)
class CutPoint:
    sigma: complex
    side: Side

    def __post_init__(self):
        object.__setattr__(self, "sigma", complex(self.sigma))
        object.__setattr__(self, "side", Side(self.side))


def _scalar_out(template, value):
    return value.item() if np.ndim(template) == 0 else value


def _offsets(p: StepParams, k):
    k = np.asarray(k, dtype=complex)
    dx = k.real + p.B / 2
    dy = k.imag
    # the foot k = -B/2 on the real axis takes the east value (see _w)
    foot = (dx == 0.0) & (dy == 0.0) & (p.A > 0)
    on_cut = (dx == 0.0) & (np.abs(dy) <= p.A) & ~foot
    if np.any(on_cut):
        bad = k[on_cut].reshape(-1)[0]
        raise CutError(f"k = {bad!r} lies on the cut [E, conj E]", point=complex(bad))
    return k, dx, dy


def _w(p: StepParams, k):
    k, dx, dy = _offsets(p, k)
    # w = (d - iA)/(d + iA) with d = k + B/2; written as
    # (|d|^2 - A^2 - 2iA Re d)/|d + iA|^2 so the sign of Im w is exactly
    # the sign of -Re d, i.e. the side of the cut
    den = dx * dx + (dy + p.A) ** 2
    re = (dx * dx + dy * dy - p.A * p.A) / den
    im = -2.0 * p.A * dx / den
    # w = -1 at the foot; a negative zero imaginary part selects the east limit
    im = np.where((dx == 0.0) & (dy == 0.0), -0.0, im)
    w = np.empty(np.shape(re), dtype=complex)
    w.real = re
    w.imag = im  # set directly: re + 1j*im would turn -0.0 into +0.0
    return k, w


def mobius_w(p: StepParams, k):
    """w = (k - E)/(k - conj E); never on (-inf, 0] off the cut."""
    k_in = k
    _, w = _w(p, k)
    return _scalar_out(k_in, w)


def phi_fn(p: StepParams, k):
    """Principal fourth root of w."""
    _, w = _w(p, k)
    return _scalar_out(k, w ** 0.25)


def X_fn(p: StepParams, k):
    """X = (k - conj E) sqrt(w); X^2 = (k + B/2)^2 + A^2, X ~ k + B/2."""
    kk, w = _w(p, k)
    return _scalar_out(k, (kk - p.Ebar) * np.sqrt(w))


def Omega_fn(p: StepParams, k):
    kk, w = _w(p, k)
    X = (kk - p.Ebar) * np.sqrt(w)
    return _scalar_out(k, (2 * kk ** 2 - p.B * kk + p.B ** 2 / 2 - p.A ** 2) * X)


def scattering_coeffs(p: StepParams, k):
    """(a, b) with a = (phi + 1/phi)/2, b = (phi - 1/phi)/2."""
    _, w = _w(p, k)
    phi = w ** 0.25
    inv = 1.0 / phi
    a = 0.5 * (phi + inv)
    b = 0.5 * (phi - inv)
    return _scalar_out(k, a), _scalar_out(k, b)


def reflection(p: StepParams, k):
    """r = b/a.  a never vanishes off the cut (Re phi^2 > 0), so no pole
    check is needed beyond the cut test."""
    _, w = _w(p, k)
    phi2 = np.sqrt(w)
    # b/a = (phi^2 - 1)/(phi^2 + 1)
    return _scalar_out(k, (phi2 - 1.0) / (phi2 + 1.0))


def real_axis_arg_phi(p: StepParams, k):
    """arg phi(k) for real k, in [-pi/4, pi/4].

    Uses arg w = -2 atan2(A, k + B/2) folded into (-pi, pi]; at k = -B/2
    the east limit -pi/4 is returned (|r| and a are continuous there).
    """
    k = np.asarray(k, dtype=float)
    d = k + p.B / 2
    arg_w = -2.0 * np.arctan2(p.A, d)
    arg_w = np.where(arg_w < -np.pi, arg_w + 2.0 * np.pi, arg_w)
    return arg_w / 4.0


def _check_cut_point(p: StepParams, c: CutPoint):
    s = c.sigma
    y = s.imag
    if abs(s.real + p.B / 2) > 1e-12 * max(1.0, abs(p.B)):
        raise DomainError(f"{s!r} is not on the vertical cut Re k = -B/2")
    if y == 0.0 or not abs(y) < p.A:
        raise DomainError(f"{s!r} is not an interior cut point away from -B/2")
    return y


def _phi_side(p: StepParams, c: CutPoint):
    y = _check_cut_point(p, c)
    # w = (y - A)/(y + A) < 0 on the cut
    rho = abs((y - p.A) / (y + p.A)) ** 0.25
    angle = -np.pi / 4 if c.side is Side.plus else np.pi / 4
    return rho * complex(np.cos(angle), np.sin(angle)), rho


def boundary_values(p: StepParams, c: CutPoint):
    """(a, b, r) on the requested side of the cut."""
    phi, _ = _phi_side(p, c)
    a = 0.5 * (phi + 1.0 / phi)
    b = 0.5 * (phi - 1.0 / phi)
    return a, b, b / a


def X_boundary(p: StepParams, c: CutPoint) -> complex:
    """Boundary value of X on the cut from the requested side."""
    y = _check_cut_point(p, c)
    mod = abs((y - p.A) / (y + p.A)) ** 0.5
    root = -1j * mod if c.side is Side.plus else 1j * mod
    return (c.sigma - p.Ebar) * root


def f_cut(p: StepParams, c: CutPoint) -> complex:
    """f = i/(a_+ a_-) = 4i/(rho^2 + rho^-2) on the upper half of the cut."""
    y = _check_cut_point(p, c)
    if y <= 0:
        raise DomainError("f is defined on the upper half of the cut only")
    _, rho = _phi_side(p, c)
    return 4j / (rho ** 2 + rho ** -2)


def f_from_jump(p: StepParams, sigma: complex) -> complex:
    """r_- - r_+ at sigma, the second route to f."""
    r_minus = boundary_values(p, CutPoint(sigma, Side.minus))[2]
    r_plus = boundary_values(p, CutPoint(sigma, Side.plus))[2]
    return r_minus - r_plus
