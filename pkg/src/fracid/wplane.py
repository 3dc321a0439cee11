"""w-plane root extraction and Riemann-sheet damping classification.

Poles of a commensurate model G(s) live in the plane of w = s^q. Their
arguments decide damping: the stability cone is |arg(w)| > pi*q/2, poles
between pi*q and pi sit on secondary Riemann sheets (hyper-damped) and
cannot produce oscillatory modes; |arg(w)| = pi is ultra-damped.

Roots come from an Aberth-Ehrlich simultaneous iteration with a
deterministic circular initialization, so results are bit-reproducible and
no eigenvalue library is involved. A batched variant roots many same-degree
polynomials at once; the controller-tuning objective leans on it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._validation import as_float_vector, frozen_array
from .exceptions import NumericalError, ValidationError
from .fotf import CommensurateFoTf, poly_trim
from .orders import RationalOrder

__all__ = [
    "DampingClass",
    "WPlanePoleSet",
    "wplane_roots",
    "classify",
    "classify_flagged",
    "pole_set",
    "zero_set",
    "is_stable",
]

_MAX_ITER = 400
_STEP_TOL = 1e-12
_RESIDUAL_FACTOR = 1e-8


class DampingClass(enum.Enum):
    UNSTABLE = "Unstable"
    UNDERDAMPED = "Underdamped"
    OVERDAMPED = "Overdamped"
    HYPERDAMPED = "Hyperdamped"
    ULTRADAMPED = "Ultradamped"

    def __str__(self) -> str:
        return self.value


# ---------------------------------------------------------------------------
# Aberth-Ehrlich

def _horner(coeffs_desc_rows: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Row-wise Horner: coeffs (B, d+1) descending, x (B, k) -> (B, k)."""
    out = np.broadcast_to(coeffs_desc_rows[:, :1], x.shape).astype(complex).copy()
    for i in range(1, coeffs_desc_rows.shape[1]):
        out *= x
        out += coeffs_desc_rows[:, i, None]
    return out


def _initial_circle(monic_asc: np.ndarray) -> np.ndarray:
    """Start points on circles set by Cauchy-type coefficient bounds.

    Radius is the geometric mean of a lower bound on the smallest root
    modulus and an upper bound on the largest; the fixed angular offset
    breaks conjugate symmetry so real-axis roots do not stall the
    simultaneous iteration. Rows: (B, n+1) ascending monic -> (B, n).
    """
    B, n1 = monic_asc.shape
    n = n1 - 1
    others = np.abs(monic_asc[:, 1:])
    upper = 1.0 + np.abs(monic_asc[:, :-1]).max(axis=1)
    c0 = np.abs(monic_asc[:, 0])
    lower = c0 / (c0 + others.max(axis=1))
    lower = np.where(lower > 0, lower, upper / (2.0 * n))
    radius = np.sqrt(lower * upper)
    angles = 2 * np.pi * np.arange(n) / n + 0.376
    return radius[:, None] * np.exp(1j * angles)[None, :]


def _aberth_batch(coeffs_asc: np.ndarray) -> np.ndarray:
    """All roots of B same-degree polynomials, shape (B, n+1) -> (B, n).

    Zero constant terms are fine (roots at the origin are found by the
    iteration like any other); rows must share one trimmed degree and have
    nonzero leading coefficients.
    """
    C = np.asarray(coeffs_asc, dtype=float)
    B, n1 = C.shape
    n = n1 - 1
    if n < 1:
        raise ValidationError("polynomial degree must be at least 1")
    if np.any(C[:, -1] == 0):
        raise ValidationError("leading coefficient must be nonzero")
    monic = C / C[:, -1:]
    # constant-zero rows: factor w out implicitly by seeding tiny moduli
    w = _initial_circle(monic)
    desc = monic[:, ::-1]
    dcoef = (monic[:, 1:] * np.arange(1, n1)).astype(float)
    ddesc = dcoef[:, ::-1]
    abs_desc = np.abs(desc)
    eps = np.finfo(float).eps
    # backward-error floor: |p(w)| below this is indistinguishable from an
    # exact root in double precision, so fixed step tolerances cannot work
    # uniformly across conditioning
    resid_floor = 4.0 * n * eps
    for _ in range(_MAX_ITER):
        p = _horner(desc, w)
        scale = _horner(abs_desc, np.abs(w).astype(complex)).real
        if np.all(np.abs(p) <= resid_floor * scale):
            break
        dp = _horner(ddesc, w)
        dp = np.where(dp == 0, eps * (1 + 1j), dp)
        newton = p / dp
        diff = w[:, :, None] - w[:, None, :]
        np.einsum("bii->bi", diff)[...] = 1.0
        small = np.abs(diff) < 1e-300
        if small.any():
            diff = np.where(small, 1e-300 * (1 + 1j), diff)
        pair = 1.0 / diff
        np.einsum("bii->bi", pair)[...] = 0.0
        S = pair.sum(axis=2)
        denom = 1.0 - newton * S
        denom = np.where(denom == 0, eps * (1 + 1j), denom)
        step = newton / denom
        w = w - step
        if np.max(np.abs(step) / (1.0 + np.abs(w))) < _STEP_TOL:
            break
    else:
        resid = np.abs(_horner(desc, w))
        raise NumericalError(
            "Aberth iteration did not converge",
            diagnostics={
                "iterations": _MAX_ITER,
                "max_step": float(np.max(np.abs(step))),
                "max_residual": float(resid.max()),
            },
        )
    # Newton polish sharpens each root independently
    for _ in range(3):
        p = _horner(desc, w)
        dp = _horner(ddesc, w)
        mask = dp != 0
        w = np.where(mask, w - p / np.where(mask, dp, 1.0), w)
    return w


def _check_residuals(coeffs_asc: np.ndarray, roots: np.ndarray) -> None:
    C = np.atleast_2d(coeffs_asc)
    r = np.atleast_2d(roots)
    n = C.shape[1] - 1
    resid = np.abs(_horner(C[:, ::-1], r))
    bound = (
        _RESIDUAL_FACTOR
        * np.abs(C).max(axis=1)[:, None]
        * np.maximum(1.0, np.abs(r)) ** n
    )
    bad = resid > bound
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise NumericalError(
            "root residual exceeds tolerance",
            diagnostics={
                "root": complex(r[i, j]),
                "residual": float(resid[i, j]),
                "bound": float(bound[i, j]),
            },
        )


def wplane_roots(coeffs_ascending) -> np.ndarray:
    """All roots of a real polynomial in w (ascending coefficients).

    Deterministic: returns roots sorted by (real, imag). Residuals are
    checked against 1e-8 * max|coeff| * max(1, |root|)^deg.
    """
    c = poly_trim(as_float_vector(coeffs_ascending, "coeffs", min_len=1))
    if c.size < 2:
        if np.any(c):
            raise ValidationError(
                "need at least one nonzero coefficient beyond the constant"
            )
        raise ValidationError("zero polynomial has no defined roots")
    roots = _aberth_batch(c[None, :])[0]
    _check_residuals(c[None, :], roots[None, :])
    order = np.lexsort((roots.imag, roots.real))
    return roots[order]


def wplane_roots_batch(coeffs_rows: np.ndarray) -> np.ndarray:
    """Roots of a batch of same-degree real polynomials, residual-checked."""
    C = np.asarray(coeffs_rows, dtype=float)
    roots = _aberth_batch(C)
    _check_residuals(C, roots)
    return roots


# ---------------------------------------------------------------------------
# damping classification

def classify_flagged(argument_deg: float, q, tol_deg: float = 1e-6):
    """(DampingClass, boundary_flag) for |arg(w)| in degrees, 0..180.

    Band ownership, most specific first: ultra-damped at the 180 degree
    edge, then the over-damped ray |arg - 180q| <= tol, then the unstable
    cone arg < 90q, the under-damped band up to 180q, and hyper-damped
    beyond. arg exactly at 90q is assigned to the stable side and flagged
    as marginal.
    """
    q = RationalOrder.parse(q)
    if not 0.0 <= argument_deg <= 180.0 + 1e-12:
        raise ValidationError(f"argument must be in [0, 180] degrees, got {argument_deg}")
    qf = float(q)
    cone = 90.0 * qf
    sheet = 180.0 * qf
    boundary = abs(argument_deg - cone) <= tol_deg
    if argument_deg >= 180.0 - tol_deg:
        return DampingClass.ULTRADAMPED, boundary
    if abs(argument_deg - sheet) <= tol_deg:
        return DampingClass.OVERDAMPED, boundary
    if argument_deg < cone:
        return DampingClass.UNSTABLE, boundary
    if argument_deg < sheet:
        return DampingClass.UNDERDAMPED, boundary
    return DampingClass.HYPERDAMPED, boundary


def classify(argument_deg: float, q, tol_deg: float = 1e-6) -> DampingClass:
    return classify_flagged(argument_deg, q, tol_deg)[0]


@dataclass(frozen=True)
class WPlanePoleSet:
    """Classified w-plane roots for one commensurate base q."""

    q: RationalOrder
    roots: np.ndarray
    arguments_deg: np.ndarray
    classifications: tuple
    boundary_flags: tuple

    @classmethod
    def from_roots(cls, q, roots, tol_deg: float = 1e-6) -> "WPlanePoleSet":
        q = RationalOrder.parse(q)
        r = np.asarray(roots, dtype=complex).ravel()
        order = np.lexsort((r.imag, r.real))
        r = r[order]
        args = np.degrees(np.abs(np.angle(r)))
        pairs = [classify_flagged(a, q, tol_deg) for a in args]
        return cls(
            q=q,
            roots=frozen_array(r, dtype=complex),
            arguments_deg=frozen_array(args),
            classifications=tuple(p[0] for p in pairs),
            boundary_flags=tuple(p[1] for p in pairs),
        )

    def __len__(self) -> int:
        return int(self.roots.size)

    @property
    def min_angle_deg(self) -> float:
        return float(self.arguments_deg.min()) if len(self) else float("inf")

    @property
    def stable(self) -> bool:
        """Matignon cone: every root strictly outside |arg| = 90q degrees."""
        return bool(np.all(self.arguments_deg > 90.0 * float(self.q)))

    def all_beyond(self, angle_deg: float, tol_deg: float = 1e-6) -> bool:
        return bool(np.all(self.arguments_deg > angle_deg - tol_deg))

    @property
    def all_hyperdamped(self) -> bool:
        return self.all_beyond(180.0 * float(self.q))


def pole_set(tf: CommensurateFoTf, tol_deg: float = 1e-6) -> WPlanePoleSet:
    return WPlanePoleSet.from_roots(tf.q, wplane_roots(tf.den), tol_deg)


def zero_set(tf: CommensurateFoTf, tol_deg: float = 1e-6) -> WPlanePoleSet:
    return WPlanePoleSet.from_roots(tf.q, wplane_roots(tf.num), tol_deg)


def is_stable(tf: CommensurateFoTf):
    """(stable, classified pole set); strict |arg| > 90q degrees test."""
    poles = pole_set(tf)
    return poles.stable, poles
