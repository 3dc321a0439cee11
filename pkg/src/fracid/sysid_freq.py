"""Levy frequency-domain identification of commensurate fractional models.

The nonlinear fit G ~ N/D is linearized to the residual E = G*D - N, linear
in the unknown coefficients [b_0..b_m, a_1..a_n] once a_0 = 1 is pinned.
Each frequency contributes the real and imaginary parts of E as two real
rows; Vinagre weights counteract Levy's high-frequency bias and enter as a
sqrt-weight row scaling. Systems are solved either stacked (pseudo-inverse
semantics, better conditioned) or summed into normal equations.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from ._validation import check_count, frozen_array
from .exceptions import NumericalError, ValidationError
from .fotf import CommensurateFoTf, FrequencyResponse, eval_fo, poly_mul
from .orders import RationalOrder

__all__ = [
    "LevyProblem",
    "LevyFit",
    "QSweepCell",
    "levy_rows",
    "solve_levy",
    "vinagre_weights",
    "accuracy_J",
    "q_sweep",
    "order_distribution",
    "random_stable_model",
]

WEIGHTINGS = ("uniform", "vinagre")
AGGREGATIONS = ("stacked", "summed")
CONDITION_LIMIT = 1e12
MAX_TOTAL_ORDER = Fraction(5, 2)


@dataclass(frozen=True)
class LevyProblem:
    """One Levy fit: data, orders, base q, weighting, aggregation mode."""

    data: FrequencyResponse
    m: int
    n: int
    q: RationalOrder
    weighting: str = "uniform"
    aggregation: str = "stacked"

    def __post_init__(self):
        check_count(self.m, "m", minimum=0)
        check_count(self.n, "n", minimum=0)
        object.__setattr__(self, "q", RationalOrder.parse(self.q).check_commensurate_base())
        if self.weighting not in WEIGHTINGS:
            raise ValidationError(f"weighting must be one of {WEIGHTINGS}")
        if self.aggregation not in AGGREGATIONS:
            raise ValidationError(f"aggregation must be one of {AGGREGATIONS}")
        if len(self.data) < 1:
            raise ValidationError("need at least one frequency")

    @property
    def n_unknowns(self) -> int:
        return self.m + self.n + 1


@dataclass(frozen=True)
class LevyFit:
    """Fitted model with accuracy J, conditioning, and per-frequency residuals."""

    model: CommensurateFoTf
    J: float
    condition: float
    residual_by_freq: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "residual_by_freq", frozen_array(self.residual_by_freq))


def vinagre_weights(omegas) -> np.ndarray:
    """Frequency weights w_p = (omega_{p+1} - omega_{p-1}) / (2 omega_p^2).

    End points use the one-sided difference. Strictly positive on any valid
    grid and decreasing with frequency on log-spaced grids.
    """
    w = np.asarray(omegas, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise ValidationError("vinagre_weights needs at least 2 frequencies")
    if np.any(w <= 0) or np.any(np.diff(w) <= 0):
        raise ValidationError("omegas must be positive and strictly increasing")
    out = np.empty_like(w)
    out[0] = (w[1] - w[0]) / (2.0 * w[0] ** 2)
    out[1:-1] = (w[2:] - w[:-2]) / (2.0 * w[1:-1] ** 2)
    out[-1] = (w[-1] - w[-2]) / (2.0 * w[-1] ** 2)
    return out


def _weights(problem: LevyProblem) -> np.ndarray:
    if problem.weighting == "vinagre":
        return vinagre_weights(problem.data.omegas)
    return np.ones(len(problem.data))


def _basis(omegas: np.ndarray, q: RationalOrder, count: int) -> np.ndarray:
    """(j*omega)^(k*q), shape (P, count), principal branch."""
    qf = float(q)
    k = np.arange(count)
    mag = np.power.outer(np.asarray(omegas, float), k * qf)
    return mag * np.exp(1j * (np.pi / 2) * qf * k)[None, :]


def _assemble(problem: LevyProblem):
    """Stacked real system (A, rhs): rows are Re/Im of N - G*D_tail = G."""
    G = np.asarray(problem.data.values)
    count = max(problem.m, problem.n) + 1
    pows = _basis(problem.data.omegas, problem.q, count)
    Ac = np.concatenate(
        [pows[:, : problem.m + 1], -G[:, None] * pows[:, 1 : problem.n + 1]], axis=1
    )
    sw = np.sqrt(_weights(problem))
    A = np.concatenate([Ac.real * sw[:, None], Ac.imag * sw[:, None]], axis=0)
    rhs = np.concatenate([G.real * sw, G.imag * sw])
    return A, rhs


def levy_rows(problem: LevyProblem, p: int):
    """The two real rows contributed by frequency index p, already weighted."""
    P = len(problem.data)
    if not 0 <= p < P:
        raise ValidationError(f"frequency index {p} out of range 0..{P - 1}")
    A, rhs = _assemble(problem)
    rows = np.stack([A[p], A[P + p]])
    return rows, np.array([rhs[p], rhs[P + p]])


def solve_levy(problem: LevyProblem) -> LevyFit:
    """Solve the Levy least-squares system and score the resulting model."""
    A, rhs = _assemble(problem)
    cols = problem.n_unknowns
    degenerate = False
    if problem.aggregation == "stacked":
        x, _, rank, _ = scipy.linalg.lstsq(A, rhs, lapack_driver="gelsd")
        condition = float(np.linalg.cond(A))
        degenerate = rank < cols
    else:
        # Eq-style per-frequency normal-equation aggregate
        M = np.zeros((cols, cols))
        v = np.zeros(cols)
        P = len(problem.data)
        for p in range(P):
            rows = np.stack([A[p], A[P + p]])
            r = np.array([rhs[p], rhs[P + p]])
            M += rows.T @ rows
            v += rows.T @ r
        condition = float(np.linalg.cond(M))
        try:
            x = np.linalg.solve(M, v)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                "summed normal equations are singular; use stacked aggregation",
                diagnostics={"condition": condition},
            ) from exc
    b = x[: problem.m + 1]
    a = np.concatenate([[1.0], x[problem.m + 1 :]])
    model = CommensurateFoTf(problem.q, b, a)
    resid = _residuals(problem.data, model)
    return LevyFit(
        model=model,
        J=float(resid.mean()),
        condition=condition,
        residual_by_freq=resid,
        degenerate=degenerate,
    )


def _residuals(data: FrequencyResponse, model: CommensurateFoTf) -> np.ndarray:
    Ghat = eval_fo(model, data.omegas)
    return np.abs(np.asarray(data.values) - Ghat) ** 2


def accuracy_J(data: FrequencyResponse, model: CommensurateFoTf) -> float:
    """Mean squared complex mismatch over the data grid."""
    return float(_residuals(data, model).mean())


@dataclass(frozen=True)
class QSweepCell:
    """One (q, weighting) cell of a commensurate-order sweep."""

    q: RationalOrder
    weighting: str
    m: int
    n: int
    fit: LevyFit | None
    error: str | None
    flagged: bool
    truncated_order: bool

    @property
    def ok(self) -> bool:
        return self.fit is not None


def _ladder_orders(q: RationalOrder, max_order: Fraction):
    """m = n = max_order/q; floored when q does not divide it exactly."""
    ratio = Fraction(max_order) / q.as_fraction()
    if ratio < 1:
        raise ValidationError(
            f"q = {q} exceeds the maximum total order {max_order}"
        )
    return int(ratio), ratio.denominator != 1


def q_sweep(
    data: FrequencyResponse,
    q_list,
    max_order: Fraction = MAX_TOTAL_ORDER,
    weightings=WEIGHTINGS,
    aggregation: str = "stacked",
    condition_limit: float = CONDITION_LIMIT,
    n_jobs: int = 1,
):
    """Fit the fixed-top-order ladder m*q = n*q = max_order for each q.

    Every requested (q, weighting) cell is attempted; per-cell failures are
    recorded without aborting. Cells whose condition number exceeds
    condition_limit (or that were rank deficient) are flagged as being in
    the close-to-singular regime. Output order follows the input q list
    regardless of execution order.
    """
    qs = [RationalOrder.parse(q) for q in q_list]
    if not qs:
        raise ValidationError("q_sweep needs at least one q")

    tasks = []
    for q in qs:
        for weighting in weightings:
            tasks.append((q, weighting))

    def run(task):
        q, weighting = task
        try:
            order, truncated = _ladder_orders(q, max_order)
            problem = LevyProblem(
                data, order, order, q, weighting=weighting, aggregation=aggregation
            )
            fit = solve_levy(problem)
            flagged = fit.condition > condition_limit or fit.degenerate
            return QSweepCell(q, weighting, order, order, fit, None, flagged, truncated)
        except (ValidationError, NumericalError) as exc:
            return QSweepCell(q, weighting, -1, -1, None, str(exc), False, False)

    if n_jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=n_jobs) as pool:
            cells = list(pool.map(run, tasks))
    else:
        cells = [run(t) for t in tasks]
    return cells


def order_distribution(fit: LevyFit):
    """(order k*q, numerator coeff, denominator coeff) triples for plotting.

    Missing side entries (when m != n) are reported as 0.0; coefficients
    keep their signs.
    """
    model = fit.model
    qf = float(model.q)
    rows = []
    for k in range(max(model.m, model.n) + 1):
        bk = float(model.num[k]) if k <= model.m else 0.0
        ak = float(model.den[k]) if k <= model.n else 0.0
        rows.append((k * qf, bk, ak))
    return rows


def random_stable_model(
    seed: int,
    q=RationalOrder(1, 4),
    max_order: Fraction = MAX_TOTAL_ORDER,
) -> CommensurateFoTf:
    """Random stable in-class model for exact-recovery self-tests.

    w-plane poles are drawn as conjugate pairs with arguments at least 15
    degrees outside the stability cone, keeping them clear of the jw
    evaluation ray arg(w) = 90q, so synthesized frequency data is finite
    and well scaled. Numerator coefficients are positive uniform draws.
    """
    q = RationalOrder.parse(q).check_commensurate_base()
    rng = np.random.default_rng(seed)
    n_max, _ = _ladder_orders(q, Fraction(max_order))
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(0, n + 1))
    cone = 90.0 * float(q)
    den = np.array([1.0])
    for _ in range(n // 2):
        radius = rng.uniform(0.5, 2.0)
        angle = np.radians(rng.uniform(cone + 15.0, 165.0))
        w = radius * np.exp(1j * angle)
        den = poly_mul(den, np.array([abs(w) ** 2, -2.0 * w.real, 1.0]))
    if n % 2:
        # one ultra-damped real root keeps odd degrees stable
        den = poly_mul(den, np.array([rng.uniform(0.5, 2.0), 1.0]))
    num = rng.uniform(0.5, 2.0, m + 1)
    return CommensurateFoTf(q, num, den)
