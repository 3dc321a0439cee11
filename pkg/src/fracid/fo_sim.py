"""Fixed-step Grunwald-Letnikov simulation of fractional closed loops.

Each operator s^(kq) is discretized as h^(-kq) * sum_j c_j x(t - jh) with
the binomial-recursion weights c_j; summing over a model's coefficient
ladder collapses the whole difference equation into two combined weight
vectors (denominator and numerator sides), one implicit scalar division per
step, and history dot products. Full memory is O(N^2) and exact for the
commensurate ladder; Window(L) truncates history to the L most recent
samples (short-memory principle).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.signal

from ._validation import as_float_vector, check_count, check_positive_scalar, frozen_array
from .exceptions import NumericalError, ValidationError
from .fotf import CommensurateFoTf, poly_add, poly_mul, poly_trim, to_common_base
from .orders import RationalOrder

__all__ = [
    "SimConfig",
    "SimResult",
    "gl_weights",
    "simulate_fo",
    "step_fo",
    "closed_loop_step",
    "disturbance_step",
    "settling_time",
    "overshoot",
    "peak_deviation",
]

FULL_MEMORY = "full"


@dataclass(frozen=True)
class SimConfig:
    """Step size, horizon, and memory policy ('full' or a window length)."""

    h: float = 0.05
    T: float = 100.0
    memory: object = FULL_MEMORY

    def __post_init__(self):
        h = check_positive_scalar(self.h, "h")
        T = check_positive_scalar(self.T, "T")
        if T < h:
            raise ValidationError("horizon T must be at least one step h")
        if self.memory != FULL_MEMORY:
            check_count(self.memory, "memory window", minimum=1)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "T", T)

    @property
    def n_steps(self) -> int:
        return int(np.floor(self.T / self.h + 1e-9)) + 1

    def window(self, N: int) -> int:
        return N if self.memory == FULL_MEMORY else min(int(self.memory), N)


@dataclass(frozen=True)
class SimResult:
    """Uniform time grid with output, controller output, and tracking error.

    Open-loop runs carry the driving input as u_ctrl and a zero error
    channel; closed-loop runs fill all three. The reference signal is
    recoverable as y + e.
    """

    t: np.ndarray
    y: np.ndarray
    u_ctrl: np.ndarray
    e: np.ndarray

    def __post_init__(self):
        t = as_float_vector(self.t, "t", min_len=1)
        y = as_float_vector(self.y, "y", min_len=1)
        u = as_float_vector(self.u_ctrl, "u_ctrl", min_len=1)
        e = as_float_vector(self.e, "e", min_len=1)
        if not (t.size == y.size == u.size == e.size):
            raise ValidationError("t, y, u_ctrl, e must have equal lengths")
        object.__setattr__(self, "t", frozen_array(t))
        object.__setattr__(self, "y", frozen_array(y))
        object.__setattr__(self, "u_ctrl", frozen_array(u))
        object.__setattr__(self, "e", frozen_array(e))

    def __len__(self) -> int:
        return int(self.t.size)

    @property
    def reference(self) -> np.ndarray:
        return self.y + self.e


def gl_weights(alpha: float, count: int) -> np.ndarray:
    """Binomial-recursion weights c_0 = 1, c_j = c_{j-1} (1 - (alpha+1)/j)."""
    count = check_count(count, "count", minimum=1)
    alpha = float(alpha)
    c = np.empty(count)
    c[0] = 1.0
    if count > 1:
        j = np.arange(1, count)
        np.cumprod(1.0 - (alpha + 1.0) / j, out=c[1:])
    return c


def _combined_weights(coeffs_asc: np.ndarray, q: RationalOrder, h: float, N: int) -> np.ndarray:
    """W[j] = sum_k coeff_k h^(-kq) c_j^(kq); zero coefficients skipped."""
    qf = float(q)
    W = np.zeros(N)
    for k, coeff in enumerate(np.asarray(coeffs_asc)):
        if coeff != 0.0:
            W += coeff * h ** (-k * qf) * gl_weights(k * qf, N)
    return W


def _gl_core(num_asc, den_asc, q: RationalOrder, u: np.ndarray, config: SimConfig) -> np.ndarray:
    num = poly_trim(num_asc)
    den = poly_trim(den_asc)
    if num.size > den.size:
        raise ValidationError(
            "improper transfer function in w: deg(num) > deg(den)"
        )
    N = u.size
    L = config.window(N)
    Wa = _combined_weights(den, q, config.h, N)
    Wb = _combined_weights(num, q, config.h, min(N, L))
    if abs(Wa[0]) <= 1e-14 * np.max(np.abs(Wa)):
        raise NumericalError(
            "ill-posed GL discretization: instantaneous coefficient vanishes;"
            " use a smaller step h",
            diagnostics={"h": config.h, "W0": float(Wa[0])},
        )
    rhs = scipy.signal.fftconvolve(Wb, u)[:N]
    y = np.zeros(N)
    War = Wa[::-1].copy()
    w0 = Wa[0]
    y[0] = rhs[0] / w0
    for i in range(1, N):
        je = min(i, L - 1)
        acc = rhs[i] - np.dot(War[N - 1 - je : N - 1], y[i - je : i])
        y[i] = acc / w0
    return y


def simulate_fo(tf: CommensurateFoTf, u, config: SimConfig) -> SimResult:
    """Open-loop GL simulation from rest; u is the sampled input signal."""
    u = as_float_vector(u, "u", min_len=1)
    t = np.arange(u.size) * config.h
    y = _gl_core(tf.num, tf.den, tf.q, u, config)
    return SimResult(t=t, y=y, u_ctrl=u, e=np.zeros_like(y))


def step_fo(tf: CommensurateFoTf, config: SimConfig, amplitude: float = 1.0) -> SimResult:
    u = np.full(config.n_steps, float(amplitude))
    return simulate_fo(tf, u, config)


def _loop_polys(plant: CommensurateFoTf, controller) -> tuple:
    # late import keeps fo_sim usable without the tuning machinery
    from .ctrl_design import ContinuousOrderPid, controller_tf

    ctf = controller_tf(controller) if isinstance(controller, ContinuousOrderPid) else controller
    g, c = to_common_base(plant, ctf)
    ncng = poly_mul(c.num, g.num)
    char = poly_add(poly_mul(c.den, g.den), ncng)
    return g, c, ncng, poly_trim(char)


def _warn_if_unstable(plant, controller) -> None:
    from .ctrl_design import ContinuousOrderPid, verify

    if isinstance(controller, ContinuousOrderPid):
        report = verify(controller, [plant])
        if not report.stable:
            warnings.warn(
                "closed loop is not stable in the w-plane cone; simulating anyway",
                RuntimeWarning,
                stacklevel=3,
            )


def closed_loop_step(plant: CommensurateFoTf, controller, ref_amplitude: float,
                     config: SimConfig) -> SimResult:
    """Unity-feedback reference step: output, controller signal, error."""
    _warn_if_unstable(plant, controller)
    g, c, ncng, char = _loop_polys(plant, controller)
    r = np.full(config.n_steps, float(ref_amplitude))
    t = np.arange(config.n_steps) * config.h
    y = _gl_core(ncng, char, g.q, r, config)
    u_ctrl = _gl_core(poly_mul(c.num, g.den), char, g.q, r, config)
    return SimResult(t=t, y=y, u_ctrl=u_ctrl, e=r - y)


def disturbance_step(plant: CommensurateFoTf, controller, config: SimConfig,
                     amplitude: float = 1.0) -> SimResult:
    """Step disturbance at the plant input with zero reference."""
    _warn_if_unstable(plant, controller)
    g, c, ncng, char = _loop_polys(plant, controller)
    d = np.full(config.n_steps, float(amplitude))
    t = np.arange(config.n_steps) * config.h
    y = _gl_core(poly_mul(g.num, c.den), char, g.q, d, config)
    u_ctrl = -_gl_core(ncng, char, g.q, d, config)
    return SimResult(t=t, y=y, u_ctrl=u_ctrl, e=-y)


# ---------------------------------------------------------------------------
# response metrics

def _final_reference(result: SimResult) -> float:
    return float(result.y[-1] + result.e[-1])


def settling_time(result: SimResult, band_fraction: float = 0.02) -> float:
    """Last time the output sits outside the band around its final reference.

    The band is band_fraction of |reference|; for a zero reference
    (disturbance rejection) it is band_fraction of the peak deviation.
    Returns 0 when the output never leaves the band and inf when it never
    settles inside it.
    """
    if len(result) == 0:
        raise ValidationError("empty simulation result")
    band_fraction = check_positive_scalar(band_fraction, "band_fraction")
    target = _final_reference(result)
    dev = np.abs(result.y - target)
    scale = abs(target) if target != 0.0 else float(dev.max())
    band = band_fraction * scale
    outside = dev > band
    if not outside.any():
        return 0.0
    if outside[-1]:
        return float("inf")
    return float(result.t[np.nonzero(outside)[0][-1]])


def overshoot(result: SimResult) -> float:
    """Peak excursion beyond the final reference, in percent of it.

    Signed in the step direction; zero when the approach is from below
    throughout. For a zero reference, the absolute peak of y is returned.
    """
    target = _final_reference(result)
    y = np.asarray(result.y)
    if target == 0.0:
        return float(np.abs(y).max())
    s = 1.0 if target > 0 else -1.0
    return float(max(0.0, 100.0 * (np.max(s * y) - s * target) / abs(target)))


def peak_deviation(result: SimResult) -> float:
    """Largest absolute output excursion from zero (disturbance metric)."""
    return float(np.abs(np.asarray(result.y)).max())
