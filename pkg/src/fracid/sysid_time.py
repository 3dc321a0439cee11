"""Discrete-time identification from input/output records.

ARX is solved in closed form by orthogonal decomposition of the lag
regressor. ARMAX, Box-Jenkins and output-error structures minimize the
one-step prediction error with a damped Gauss-Newton iteration warm-started
from ARX, with filter stability maintained by reflecting runaway roots into
the unit circle. Structure selection ranks candidates by AIC.
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
import scipy.signal

from ._validation import as_float_vector, check_count, check_positive_scalar, frozen_array
from .exceptions import (
    ConvergenceError,
    IdentifiabilityError,
    ValidationError,
)
from .fotf import DiscreteTf

__all__ = [
    "TimeSeries",
    "EstimatorSpec",
    "FitResult",
    "SweepEntry",
    "build_regressor",
    "arx_fit",
    "pem_fit",
    "aic",
    "fpe",
    "simulate_discrete",
    "structure_sweep",
]

STRUCTURES = ("ARX", "ARMAX", "BJ", "OE")
# tie-break order for equal-AIC candidates, simplest predictor first
_STRUCTURE_RANK = {"ARX": 0, "OE": 1, "ARMAX": 2, "BJ": 3}


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled input/output record."""

    t: np.ndarray
    u: np.ndarray
    y: np.ndarray
    Ts: float

    def __post_init__(self):
        t = as_float_vector(self.t, "t", min_len=2)
        u = as_float_vector(self.u, "u", min_len=2)
        y = as_float_vector(self.y, "y", min_len=2)
        Ts = check_positive_scalar(self.Ts, "Ts")
        if not (t.size == u.size == y.size):
            raise ValidationError("t, u, y must have equal lengths")
        if np.any(np.abs(np.diff(t) - Ts) > 1e-9):
            raise ValidationError("time stamps must be uniform with spacing Ts")
        object.__setattr__(self, "t", frozen_array(t))
        object.__setattr__(self, "u", frozen_array(u))
        object.__setattr__(self, "y", frozen_array(y))
        object.__setattr__(self, "Ts", Ts)

    @classmethod
    def from_arrays(cls, u, y, Ts, t0: float = 0.0) -> "TimeSeries":
        u = as_float_vector(u, "u", min_len=2)
        t = t0 + np.arange(u.size) * float(Ts)
        return cls(t, u, y, Ts)

    def __len__(self) -> int:
        return int(self.t.size)


@dataclass(frozen=True)
class EstimatorSpec:
    """Structure and orders for one candidate model."""

    structure: str
    na: int = 0
    nb: int = 0
    nc: int = 0
    nd: int = 0
    nf: int = 0
    nk: int = 0

    _USED = {
        "ARX": ("na", "nb"),
        "ARMAX": ("na", "nb", "nc"),
        "BJ": ("nb", "nc", "nd", "nf"),
        "OE": ("nb", "nf"),
    }

    def __post_init__(self):
        if self.structure not in STRUCTURES:
            raise ValidationError(
                f"structure must be one of {STRUCTURES}, got {self.structure!r}"
            )
        for name in ("na", "nb", "nc", "nd", "nf", "nk"):
            check_count(getattr(self, name), name, minimum=0)
        used = self._USED[self.structure]
        for name in ("na", "nb", "nc", "nd", "nf"):
            if name not in used and getattr(self, name) != 0:
                raise ValidationError(
                    f"{self.structure} does not use order {name}; it must be 0"
                )
        if self.nb < 1:
            raise ValidationError("nb must be at least 1 (input polynomial B)")

    @property
    def n_params(self) -> int:
        return sum(getattr(self, name) for name in self._USED[self.structure])

    def describe(self) -> str:
        used = self._USED[self.structure]
        orders = ",".join(f"{n}={getattr(self, n)}" for n in used + ("nk",))
        return f"{self.structure}({orders})"


@dataclass(frozen=True)
class FitResult:
    """Identification outcome: deterministic model, noise model, and scores."""

    spec: EstimatorSpec
    model: DiscreteTf
    noise_model: DiscreteTf
    theta: np.ndarray
    V: float
    aic: float
    fpe: float
    residuals: np.ndarray
    loss_trace: np.ndarray
    converged: bool

    def __post_init__(self):
        object.__setattr__(self, "theta", frozen_array(self.theta))
        object.__setattr__(self, "residuals", frozen_array(self.residuals))
        object.__setattr__(self, "loss_trace", frozen_array(self.loss_trace))

    def summary(self) -> str:
        lines = [
            f"structure : {self.spec.describe()}",
            f"theta     : {np.array2string(np.asarray(self.theta), precision=6)}",
            f"V         : {self.V:.6e}",
            f"AIC       : {self.aic:.6f}",
            f"FPE       : {self.fpe:.6e}",
            f"residuals : mean {float(np.mean(self.residuals)):+.3e}"
            f" std {float(np.std(self.residuals)):.3e}",
            f"converged : {self.converged}",
        ]
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# criteria

def aic(V: float, d: int, N: int) -> float:
    """Akaike information criterion, natural logarithm."""
    V = check_positive_scalar(V, "V")
    d = check_count(d, "d", minimum=0)
    N = check_count(N, "N", minimum=1)
    if N <= d:
        raise ValidationError(f"N must exceed d, got N={N}, d={d}")
    return math.log(V) + 2.0 * d / N


def fpe(V: float, d: int, N: int) -> float:
    """Final prediction error V*(1 + d/N)/(1 - d/N)."""
    V = check_positive_scalar(V, "V")
    d = check_count(d, "d", minimum=0)
    N = check_count(N, "N", minimum=1)
    if N <= d:
        raise ValidationError(f"N must exceed d, got N={N}, d={d}")
    return V * (1.0 + d / N) / (1.0 - d / N)


# ---------------------------------------------------------------------------
# regression plumbing

def build_regressor(data: TimeSeries, na: int, nb: int, nk: int):
    """Lag regressor (Phi, targets, column names) for ARX-type problems.

    Row t is [-y(t-1)..-y(t-na), u(t-nk)..u(t-nk-nb+1)]; rows start at the
    first index where every lag exists (no fabricated pre-history).
    """
    na = check_count(na, "na", minimum=0)
    nb = check_count(nb, "nb", minimum=1)
    nk = check_count(nk, "nk", minimum=0)
    y = np.asarray(data.y)
    u = np.asarray(data.u)
    start = max(na, nk + nb - 1)
    N = y.size
    if N <= start:
        raise ValidationError(
            f"insufficient samples: need more than {start}, got {N}"
        )
    rows = N - start
    Phi = np.empty((rows, na + nb))
    for i in range(1, na + 1):
        Phi[:, i - 1] = -y[start - i : N - i]
    for j in range(nb):
        lag = nk + j
        Phi[:, na + j] = u[start - lag : N - lag]
    targets = y[start:N].copy()
    names = [f"y_lag_{i}" for i in range(1, na + 1)] + [
        f"u_lag_{nk + j}" for j in range(nb)
    ]
    return Phi, targets, names


def _check_rank(Phi: np.ndarray, names) -> None:
    # rank-revealing QR with column pivoting names the deficient columns
    _, R, piv = scipy.linalg.qr(Phi, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = max(Phi.shape) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
    rank = int(np.sum(diag > tol))
    if rank < Phi.shape[1]:
        bad = sorted(int(p) for p in piv[rank:])
        raise IdentifiabilityError(
            "regressor is rank deficient; deficient columns: "
            + ", ".join(names[i] for i in bad),
            columns=bad,
            column_names=tuple(names[i] for i in bad),
        )


def _tf_from_polys(numer, denom, nk: int, Ts: float) -> DiscreteTf:
    """B(z^-1) z^-nk / A(z^-1) as a descending-in-z DiscreteTf.

    numer: raw [b_1..b_nb]; denom: monic [1, a_1..a_n].
    """
    numer = np.asarray(numer, dtype=float)
    denom = np.asarray(denom, dtype=float)
    M = max(denom.size - 1, nk + numer.size - 1)
    den = np.zeros(M + 1)
    den[: denom.size] = denom
    num = np.zeros(M - nk + 1)
    num[: numer.size] = numer
    return DiscreteTf(num, den, Ts)


def _identity_tf(Ts: float) -> DiscreteTf:
    return DiscreteTf([1.0], [1.0], Ts)


def arx_fit(data: TimeSeries, spec: EstimatorSpec) -> FitResult:
    """Closed-form least squares for the ARX structure.

    Solved by orthogonal decomposition (never by inverting the normal
    equations); rank deficiency raises with the offending column names.
    """
    if spec.structure != "ARX":
        raise ValidationError(f"arx_fit requires an ARX spec, got {spec.structure}")
    Phi, targets, names = build_regressor(data, spec.na, spec.nb, spec.nk)
    _check_rank(Phi, names)
    theta, *_ = scipy.linalg.lstsq(Phi, targets, lapack_driver="gelsd")
    residuals = targets - Phi @ theta
    N = targets.size
    V = float(residuals @ residuals / N)
    d = theta.size
    a = theta[: spec.na]
    b = theta[spec.na :]
    denom = np.concatenate([[1.0], a])
    model = _tf_from_polys(b, denom, spec.nk, data.Ts)
    noise = DiscreteTf(
        np.concatenate([[1.0], np.zeros(spec.na)]), denom, data.Ts
    )
    score_V = max(V, np.finfo(float).tiny)
    return FitResult(
        spec=spec,
        model=model,
        noise_model=noise,
        theta=theta,
        V=V,
        aic=aic(score_V, d, N),
        fpe=fpe(score_V, d, N),
        residuals=residuals,
        loss_trace=np.array([V]),
        converged=True,
    )


# ---------------------------------------------------------------------------
# prediction-error minimization

def _shift(x: np.ndarray, k: int) -> np.ndarray:
    if k == 0:
        return x.copy()
    out = np.zeros_like(x)
    out[k:] = x[:-k]
    return out


def _lf(b, a, x):
    return scipy.signal.lfilter(np.asarray(b, float), np.asarray(a, float), x)


def _reflect_stable(monic: np.ndarray) -> np.ndarray:
    """Reflect roots of a monic z^-1 polynomial into the open unit disc."""
    monic = np.asarray(monic, dtype=float)
    if monic.size <= 1:
        return monic
    roots = np.roots(monic)
    mags = np.abs(roots)
    if np.all(mags < 1.0):
        return monic
    roots = np.where(mags >= 1.0, 1.0 / np.conj(np.where(roots == 0, 1.0, roots)), roots)
    # a root exactly on the circle maps to itself; nudge it inside
    mags = np.abs(roots)
    roots = np.where(mags >= 1.0, roots * (1.0 - 1e-8) / mags, roots)
    out = np.real(np.poly(roots))
    return out


class _Predictor:
    """Prediction-error and Jacobian evaluation for one structure."""

    def __init__(self, data: TimeSeries, spec: EstimatorSpec):
        self.u = np.asarray(data.u)
        self.y = np.asarray(data.y)
        self.spec = spec
        self.skip = max(spec.na, spec.nk + spec.nb - 1, spec.nc, spec.nd, spec.nf)
        if len(data) <= self.skip + spec.n_params:
            raise ValidationError("insufficient samples for the requested orders")

    def split(self, theta: np.ndarray):
        s = self.spec
        parts = {}
        i = 0
        for name, size in self._layout():
            parts[name] = theta[i : i + size]
            i += size
        return parts

    def _layout(self):
        s = self.spec
        if s.structure == "ARMAX":
            return (("a", s.na), ("b", s.nb), ("c", s.nc))
        if s.structure == "OE":
            return (("b", s.nb), ("f", s.nf))
        if s.structure == "BJ":
            return (("b", s.nb), ("c", s.nc), ("d", s.nd), ("f", s.nf))
        raise ValidationError(f"pem structure required, got {s.structure}")

    def project_stable(self, theta: np.ndarray) -> np.ndarray:
        """Reflect roots of F, D (and C, for an invertible predictor)."""
        parts = self.split(theta.copy())
        for name in ("f", "d", "c"):
            if name in parts and parts[name].size:
                monic = np.concatenate([[1.0], parts[name]])
                parts[name] = _reflect_stable(monic)[1:]
        return np.concatenate([parts[name] for name, _ in self._layout()])

    def _bdelay(self, b):
        return np.concatenate([np.zeros(self.spec.nk), b])

    def errors(self, theta: np.ndarray) -> np.ndarray:
        s = self.spec
        p = self.split(theta)
        if s.structure == "ARMAX":
            A = np.concatenate([[1.0], p["a"]])
            C = np.concatenate([[1.0], p["c"]])
            v = _lf(A, [1.0], self.y) - _lf(self._bdelay(p["b"]), [1.0], self.u)
            return _lf([1.0], C, v)
        if s.structure == "OE":
            F = np.concatenate([[1.0], p["f"]])
            w = _lf(self._bdelay(p["b"]), F, self.u)
            return self.y - w
        # BJ
        F = np.concatenate([[1.0], p["f"]])
        C = np.concatenate([[1.0], p["c"]])
        D = np.concatenate([[1.0], p["d"]])
        w = _lf(self._bdelay(p["b"]), F, self.u)
        return _lf(D, C, self.y - w)

    def jacobian(self, theta: np.ndarray, eps: np.ndarray) -> np.ndarray:
        s = self.spec
        p = self.split(theta)
        cols = []
        if s.structure == "ARMAX":
            C = np.concatenate([[1.0], p["c"]])
            for i in range(1, s.na + 1):
                cols.append(_lf([1.0], C, _shift(self.y, i)))
            for j in range(s.nb):
                cols.append(-_lf([1.0], C, _shift(self.u, s.nk + j)))
            for i in range(1, s.nc + 1):
                cols.append(-_lf([1.0], C, _shift(eps, i)))
        elif s.structure == "OE":
            F = np.concatenate([[1.0], p["f"]])
            w = _lf(self._bdelay(p["b"]), F, self.u)
            for j in range(s.nb):
                cols.append(-_lf([1.0], F, _shift(self.u, s.nk + j)))
            for i in range(1, s.nf + 1):
                cols.append(_lf([1.0], F, _shift(w, i)))
        else:  # BJ
            F = np.concatenate([[1.0], p["f"]])
            C = np.concatenate([[1.0], p["c"]])
            D = np.concatenate([[1.0], p["d"]])
            w = _lf(self._bdelay(p["b"]), F, self.u)
            v = self.y - w
            for j in range(s.nb):
                cols.append(-_lf(D, C, _lf([1.0], F, _shift(self.u, s.nk + j))))
            for i in range(1, s.nc + 1):
                cols.append(-_lf([1.0], C, _shift(eps, i)))
            for i in range(1, s.nd + 1):
                cols.append(_lf([1.0], C, _shift(v, i)))
            for i in range(1, s.nf + 1):
                cols.append(_lf(D, C, _lf([1.0], F, _shift(w, i))))
        return np.column_stack(cols)

    def loss(self, eps: np.ndarray) -> float:
        kept = eps[self.skip :]
        return float(kept @ kept / kept.size)


def _pem_initial(data: TimeSeries, spec: EstimatorSpec) -> np.ndarray:
    s = spec
    if s.structure == "ARMAX":
        warm = arx_fit(data, EstimatorSpec("ARX", na=s.na, nb=s.nb, nk=s.nk))
        return np.concatenate([warm.theta, np.zeros(s.nc)])
    if s.structure == "OE":
        warm = arx_fit(data, EstimatorSpec("ARX", na=s.nf, nb=s.nb, nk=s.nk))
        return np.concatenate([warm.theta[s.nf :], warm.theta[: s.nf]])
    # BJ
    warm = arx_fit(data, EstimatorSpec("ARX", na=s.nf, nb=s.nb, nk=s.nk))
    return np.concatenate(
        [warm.theta[s.nf :], np.zeros(s.nc), np.zeros(s.nd), warm.theta[: s.nf]]
    )


def pem_fit(
    data: TimeSeries,
    spec: EstimatorSpec,
    max_iter: int = 100,
    loss_tol: float = 1e-12,
) -> FitResult:
    """Damped Gauss-Newton prediction-error fit for ARMAX / BJ / OE.

    ARX-compatible warm start, analytic Jacobians, monotone loss trace,
    stability of F, D, C maintained by unit-circle root reflection.
    """
    if spec.structure not in ("ARMAX", "BJ", "OE"):
        raise ValidationError(
            f"pem_fit handles ARMAX/BJ/OE; use arx_fit for {spec.structure}"
        )
    pred = _Predictor(data, spec)
    theta = pred.project_stable(_pem_initial(data, spec))
    eps = pred.errors(theta)
    V = pred.loss(eps)
    trace = [V]
    converged = False
    for _ in range(max_iter):
        J = pred.jacobian(theta, eps)[pred.skip :]
        step, *_ = scipy.linalg.lstsq(J, -eps[pred.skip :], lapack_driver="gelsd")
        accepted = False
        lam = 1.0
        for _ in range(25):
            cand = pred.project_stable(theta + lam * step)
            ceps = pred.errors(cand)
            cV = pred.loss(ceps)
            if cV < V:
                theta, eps, V = cand, ceps, cV
                trace.append(V)
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            converged = True
            break
        if len(trace) >= 2 and abs(trace[-2] - trace[-1]) <= loss_tol * max(trace[-2], 1e-300):
            converged = True
            break

    parts = pred.split(theta)
    denom_g = np.concatenate([[1.0], parts["a" if spec.structure == "ARMAX" else "f"]])
    model = _tf_from_polys(parts["b"], denom_g, spec.nk, data.Ts)
    if spec.structure == "ARMAX":
        noise = _tf_from_polys(
            np.concatenate([[1.0], parts["c"]]), denom_g, 0, data.Ts
        )
    elif spec.structure == "BJ":
        noise = _tf_from_polys(
            np.concatenate([[1.0], parts["c"]]),
            np.concatenate([[1.0], parts["d"]]),
            0,
            data.Ts,
        )
    else:
        noise = _identity_tf(data.Ts)
    kept = eps[pred.skip :]
    N = kept.size
    d = theta.size
    score_V = max(V, np.finfo(float).tiny)
    result = FitResult(
        spec=spec,
        model=model,
        noise_model=noise,
        theta=theta,
        V=V,
        aic=aic(score_V, d, N),
        fpe=fpe(score_V, d, N),
        residuals=kept,
        loss_trace=np.asarray(trace),
        converged=converged,
    )
    if not converged:
        raise ConvergenceError(
            f"prediction-error iteration hit the cap of {max_iter}",
            best=result,
            diagnostics={"V": V, "iterations": max_iter},
        )
    return result


# ---------------------------------------------------------------------------
# simulation and structure selection

def simulate_discrete(model: DiscreteTf, u, y0=None) -> np.ndarray:
    """Run the difference equation forward; zero initial state by default.

    y0, when given, holds the most recent past outputs [y(-1), y(-2), ...].
    """
    u = as_float_vector(u, "u", min_len=1)
    M = model.den.size - 1
    b = np.zeros(M + 1)
    b[M + 1 - model.num.size :] = model.num
    a = np.asarray(model.den)
    if y0 is None:
        return scipy.signal.lfilter(b, a, u)
    y0 = as_float_vector(y0, "y0")
    zi = scipy.signal.lfiltic(b, a, y0)
    out, _ = scipy.signal.lfilter(b, a, u, zi=zi)
    return out


@dataclass(frozen=True)
class SweepEntry:
    """One candidate outcome inside a structure sweep."""

    index: int
    spec: EstimatorSpec
    result: FitResult | None
    error: str | None

    @property
    def ok(self) -> bool:
        return self.result is not None


def _fit_any(data: TimeSeries, spec: EstimatorSpec) -> FitResult:
    if spec.structure == "ARX":
        return arx_fit(data, spec)
    return pem_fit(data, spec)


def structure_sweep(data: TimeSeries, specs, n_jobs: int = 1):
    """Fit every candidate and rank by AIC.

    Ties break toward fewer parameters, then the structure order
    ARX < OE < ARMAX < BJ, then candidate index. Failures are recorded
    per candidate and never abort the sweep; they sort last.
    """
    specs = list(specs)
    if not specs:
        raise ValidationError("structure_sweep needs at least one candidate")

    def run(i_spec):
        i, spec = i_spec
        try:
            return SweepEntry(i, spec, _fit_any(data, spec), None)
        except ConvergenceError as exc:
            # keep the best-so-far fit but remember it did not converge
            return SweepEntry(i, spec, exc.best, f"not converged: {exc}")
        except (ValidationError, np.linalg.LinAlgError) as exc:
            return SweepEntry(i, spec, None, str(exc))

    jobs = list(enumerate(specs))
    if n_jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=n_jobs) as pool:
            entries = list(pool.map(run, jobs))
    else:
        entries = [run(j) for j in jobs]
    # merge deterministically by candidate index before ranking
    entries.sort(key=lambda e: e.index)

    def key(entry: SweepEntry):
        if entry.result is None:
            return (1, 0.0, 0, 0, entry.index)
        r = entry.result
        return (0, r.aic, r.spec.n_params, _STRUCTURE_RANK[r.spec.structure], entry.index)

    return sorted(entries, key=key)
