"""Commensurate fractional-order and discrete transfer-function types.

A commensurate model is a pair of polynomials in s^q for one exact rational
base q:

    G(s) = sum_k b_k (s^q)^k / sum_k a_k (s^q)^k

Coefficients are stored ascending in powers of s^q internally; file formats
and printed forms use descending order. All types are immutable values and
every operation here is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._validation import (
    as_complex_vector,
    as_float_vector,
    check_frequency_grid,
    check_positive_scalar,
    frozen_array,
)
from .exceptions import PoleAtFrequencyError, ValidationError
from .orders import RationalOrder, order_gcd, respace_factor

__all__ = [
    "CommensurateFoTf",
    "DiscreteTf",
    "FrequencyResponse",
    "CharPoly",
    "poly_trim",
    "poly_add",
    "poly_mul",
    "eval_fo",
    "eval_discrete",
    "synth_freq_data",
    "to_common_base",
    "closed_loop_char_poly",
]


# ---------------------------------------------------------------------------
# ascending-coefficient polynomial helpers

def poly_trim(c):
    """Drop trailing (highest-order) zero coefficients; keep at least one."""
    c = np.asarray(c, dtype=float)
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        return c[:1].copy()
    return c[: nz[-1] + 1].copy()


def poly_add(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = max(a.size, b.size)
    out = np.zeros(n)
    out[: a.size] += a
    out[: b.size] += b
    return out


def poly_mul(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.convolve(a, b)


def _eval_poly_asc(coeffs, x):
    """Horner evaluation of an ascending-coefficient polynomial."""
    coeffs = np.asarray(coeffs)
    out = np.zeros_like(np.asarray(x), dtype=complex) + coeffs[-1]
    for c in coeffs[-2::-1]:
        out = out * x + c
    return out


# ---------------------------------------------------------------------------
# types

@dataclass(frozen=True)
class CommensurateFoTf:
    """Fractional-order transfer function over one commensurate base q.

    num, den are ascending coefficient vectors over powers of s^q. The
    denominator may not be identically zero and its trailing zeros are
    trimmed so the leading coefficient is nonzero.
    """

    q: RationalOrder
    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        q = RationalOrder.parse(self.q).check_commensurate_base()
        num = poly_trim(as_float_vector(self.num, "num", min_len=1))
        den = poly_trim(as_float_vector(self.den, "den", min_len=1))
        if not np.any(den):
            raise ValidationError("denominator is identically zero")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "num", frozen_array(num))
        object.__setattr__(self, "den", frozen_array(den))

    @property
    def m(self) -> int:
        """Numerator order count (highest power of s^q)."""
        return self.num.size - 1

    @property
    def n(self) -> int:
        """Denominator order count."""
        return self.den.size - 1

    def dc_ratio(self) -> float:
        """Ratio of constant terms; the s -> 0 limit when both are nonzero."""
        if self.den[0] == 0:
            return float("inf") if self.num[0] != 0 else float("nan")
        return float(self.num[0] / self.den[0])

    @classmethod
    def from_descending(cls, q, num_desc, den_desc) -> "CommensurateFoTf":
        """Build from descending-order vectors (the printed/file convention)."""
        return cls(RationalOrder.parse(q), np.asarray(num_desc, float)[::-1],
                   np.asarray(den_desc, float)[::-1])

    def num_descending(self) -> np.ndarray:
        return self.num[::-1].copy()

    def den_descending(self) -> np.ndarray:
        return self.den[::-1].copy()

    def __call__(self, omega):
        return eval_fo(self, omega)


@dataclass(frozen=True)
class DiscreteTf:
    """Rational discrete-time transfer function, descending powers of z."""

    num: np.ndarray
    den: np.ndarray
    Ts: float

    def __post_init__(self):
        num = as_float_vector(self.num, "num", min_len=1)
        den = as_float_vector(self.den, "den", min_len=1)
        Ts = check_positive_scalar(self.Ts, "Ts")
        if den[0] == 0:
            raise ValidationError("den leading coefficient must be nonzero")
        # strip leading zeros of num for the degree check only
        nz = np.nonzero(num)[0]
        num_deg = num.size - 1 - nz[0] if nz.size else 0
        if num_deg > den.size - 1:
            raise ValidationError("improper model: deg(num) > deg(den)")
        object.__setattr__(self, "num", frozen_array(num))
        object.__setattr__(self, "den", frozen_array(den))
        object.__setattr__(self, "Ts", Ts)

    @property
    def nyquist(self) -> float:
        return np.pi / self.Ts

    def dc_gain(self) -> float:
        return float(np.polyval(self.num, 1.0) / np.polyval(self.den, 1.0))

    def __call__(self, omega):
        return eval_discrete(self, omega)


@dataclass(frozen=True)
class FrequencyResponse:
    """Complex response values on a strictly increasing positive grid."""

    omegas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        w = check_frequency_grid(self.omegas, "omegas")
        v = as_complex_vector(self.values, "values", min_len=1)
        if w.size != v.size:
            raise ValidationError(
                f"omegas and values lengths differ: {w.size} vs {v.size}"
            )
        object.__setattr__(self, "omegas", frozen_array(w))
        object.__setattr__(self, "values", frozen_array(v, dtype=complex))

    def __len__(self) -> int:
        return int(self.omegas.size)


class CharPoly(NamedTuple):
    """Real polynomial in the shared w base, ascending coefficients."""

    coeffs: np.ndarray
    q: RationalOrder


# ---------------------------------------------------------------------------
# evaluation

def _s_powers(omega, q: RationalOrder, count: int) -> np.ndarray:
    """(j*omega)^(k*q) for k = 0..count-1, principal branch, shape (len(w), count).

    (j*w)^(kq) = w^(kq) * exp(j*k*q*pi/2) with arg(j*omega) = pi/2 for w > 0.
    """
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    qf = float(q)
    k = np.arange(count)
    mag = np.power.outer(w, k * qf)
    phase = np.exp(1j * (np.pi / 2) * qf * k)
    return mag * phase


def eval_fo(tf: CommensurateFoTf, omega):
    """Frequency response at omega > 0 (scalar or array), principal branch."""
    w = np.atleast_1d(as_float_vector(omega, "omega", min_len=1))
    if np.any(w <= 0):
        raise ValidationError("omega must be strictly positive")
    count = max(tf.num.size, tf.den.size)
    pows = _s_powers(w, tf.q, count)
    numv = pows[:, : tf.num.size] @ tf.num
    denv = pows[:, : tf.den.size] @ tf.den
    scale = np.abs(pows[:, : tf.den.size]) @ np.abs(tf.den)
    bad = np.abs(denv) <= 100 * np.finfo(float).eps * scale
    if np.any(bad):
        wbad = w[bad][0]
        raise PoleAtFrequencyError(
            f"denominator vanishes at omega = {wbad:.6g} rad/s",
            diagnostics={"omega": float(wbad)},
        )
    out = numv / denv
    if np.isscalar(omega) or np.asarray(omega).ndim == 0:
        return complex(out[0])
    return out


def eval_discrete(tf: DiscreteTf, omega):
    """Response at z = exp(j*omega*Ts); omega must lie in (0, Nyquist]."""
    w = np.atleast_1d(as_float_vector(omega, "omega", min_len=1))
    if np.any(w <= 0):
        raise ValidationError("omega must be strictly positive")
    if np.any(w > tf.nyquist * (1 + 1e-12)):
        raise ValidationError(
            f"omega exceeds the Nyquist frequency {tf.nyquist:.6g} rad/s"
        )
    z = np.exp(1j * w * tf.Ts)
    out = np.polyval(tf.num, z) / np.polyval(tf.den, z)
    if np.isscalar(omega) or np.asarray(omega).ndim == 0:
        return complex(out[0])
    return out


def synth_freq_data(tf: DiscreteTf, grid) -> FrequencyResponse:
    """Synthetic frequency-domain data: eval_discrete over a validated grid."""
    w = check_frequency_grid(grid, "grid", nyquist=tf.nyquist)
    return FrequencyResponse(w, eval_discrete(tf, w))


def default_grid(Ts: float = 0.1, count: int = 100, wmin: float = 1e-3) -> np.ndarray:
    """Log-spaced default grid from wmin up to the discrete Nyquist pi/Ts."""
    check_positive_scalar(Ts, "Ts")
    check_positive_scalar(wmin, "wmin")
    if count < 2:
        raise ValidationError("grid needs at least 2 points")
    return np.logspace(np.log10(wmin), np.log10(np.pi / Ts), count)


# ---------------------------------------------------------------------------
# base changes and loop algebra

def _respace(coeffs: np.ndarray, factor: int) -> np.ndarray:
    out = np.zeros((coeffs.size - 1) * factor + 1)
    out[::factor] = coeffs
    return out


def to_common_base(a: CommensurateFoTf, b: CommensurateFoTf):
    """Re-express both models over the gcd of their bases.

    Algebraic equality is preserved exactly: index k at base q becomes index
    k*(q/q_shared) at the shared base, with zero padding in between.
    """
    q = order_gcd(a.q, b.q)
    fa = respace_factor(a.q, q)
    fb = respace_factor(b.q, q)
    a2 = CommensurateFoTf(q, _respace(a.num, fa), _respace(a.den, fa))
    b2 = CommensurateFoTf(q, _respace(b.num, fb), _respace(b.den, fb))
    return a2, b2


def closed_loop_char_poly(plant: CommensurateFoTf, controller: CommensurateFoTf) -> CharPoly:
    """Unity-feedback characteristic polynomial D_C*D_G + N_C*N_G in shared w.

    No pole-zero cancellation is attempted: common factors stay in the
    polynomial as coincident roots.
    """
    g, c = to_common_base(plant, controller)
    char = poly_add(poly_mul(c.den, g.den), poly_mul(c.num, g.num))
    return CharPoly(poly_trim(char), g.q)
