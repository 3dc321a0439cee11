"""Continuous-order PID-like controller tuning for hyper-damped loops.

The controller C(s) = (K_0 s^(N q) + ... + K_N) / s pairs a commensurate
gain ladder with one integer integrator. Tuning drives every closed-loop
w-plane root of every plant toward a target argument (180q degrees for
hyper-damping) with a derivative-free simplex search restarted from seeded
perturbations. The objective stacks |arg| deviations of all roots of all
plants and adds a steep penalty inside the stability cone so the search
never trades stability for angle placement.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field

import numpy as np

from ._validation import as_float_vector, check_count, frozen_array
from .exceptions import NumericalError, ValidationError
from .fotf import CommensurateFoTf, closed_loop_char_poly, poly_trim
from .orders import RationalOrder, order_gcd, respace_factor
from .wplane import WPlanePoleSet, _aberth_batch, _check_residuals, wplane_roots

__all__ = [
    "ContinuousOrderPid",
    "SimplexConfig",
    "TuningProblem",
    "TuningReport",
    "controller_tf",
    "closed_loop_poles",
    "objective_Jbar",
    "nelder_mead",
    "NelderMeadResult",
    "tune",
    "verify",
]

SENTINEL_OBJECTIVE = 1e12
_CONE_PENALTY = 1e3


@dataclass(frozen=True)
class ContinuousOrderPid:
    """Gains K_0..K_N over descending powers s^(Nq)..s^0, all over one s."""

    q: RationalOrder
    gains: np.ndarray

    def __post_init__(self):
        q = RationalOrder.parse(self.q).check_commensurate_base()
        gains = as_float_vector(self.gains, "gains", min_len=1)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "gains", frozen_array(gains))

    @property
    def N(self) -> int:
        return self.gains.size - 1


def controller_tf(c: ContinuousOrderPid) -> CommensurateFoTf:
    """Controller as a CommensurateFoTf over the base shared with s^1."""
    base = order_gcd(c.q, RationalOrder(1))
    fg = respace_factor(c.q, base)
    fi = respace_factor(RationalOrder(1), base)
    num = np.zeros(c.N * fg + 1)
    num[:: fg or 1][: c.N + 1] = c.gains[::-1]
    den = np.zeros(fi + 1)
    den[fi] = 1.0
    return CommensurateFoTf(base, num, den)


def closed_loop_poles(plant: CommensurateFoTf, controller, tol_deg: float = 1e-6) -> WPlanePoleSet:
    """Classified roots of D_C*D_G + N_C*N_G over the shared base."""
    ctf = controller_tf(controller) if isinstance(controller, ContinuousOrderPid) else controller
    char, q = closed_loop_char_poly(plant, ctf)
    return WPlanePoleSet.from_roots(q, wplane_roots(char), tol_deg)


# ---------------------------------------------------------------------------
# objective

class _LoopWorkspace:
    """Precomputed closed-loop polynomial structure for fast gain sweeps.

    For gains g (descending K_0..K_N) the characteristic polynomial of
    plant k is fixed_k + sum_n g_rev[n] * shift(ng_k, n*fc_k); with one
    shared length it reduces to a single einsum plus a batched root solve.
    """

    def __init__(self, plants, q_ctrl: RationalOrder, n_gains: int, target_deg: float):
        self.target = float(target_deg)
        self.n_gains = n_gains
        N = n_gains - 1
        self.fixed = []
        self.shifts = []
        self.cones = []
        lengths = []
        for plant in plants:
            q_sh = order_gcd(order_gcd(plant.q, q_ctrl), RationalOrder(1))
            fg = respace_factor(q_ctrl, q_sh)
            fi = respace_factor(RationalOrder(1), q_sh)
            fp = respace_factor(plant.q, q_sh)
            dg = np.zeros((plant.den.size - 1) * fp + 1)
            dg[::fp] = plant.den
            ng = np.zeros((plant.num.size - 1) * fp + 1)
            ng[::fp] = plant.num
            fixed = np.concatenate([np.zeros(fi), dg])
            L = max(fixed.size, N * fg + ng.size)
            rows = np.zeros((n_gains, L))
            for n in range(n_gains):
                rows[n, n * fg : n * fg + ng.size] = ng
            self.fixed.append(np.pad(fixed, (0, L - fixed.size)))
            self.shifts.append(rows)
            self.cones.append(90.0 * float(q_sh))
            lengths.append(L)
        self.uniform = len(set(lengths)) == 1
        if self.uniform:
            self.fixed_mat = np.stack(self.fixed)
            self.shift_tensor = np.stack(self.shifts)
            self.cone_vec = np.array(self.cones)[:, None]

    def char_polys(self, gains: np.ndarray):
        grev = gains[::-1]
        if self.uniform:
            return self.fixed_mat + np.einsum("n,bnl->bl", grev, self.shift_tensor)
        return [f + grev @ rows for f, rows in zip(self.fixed, self.shifts)]

    def objective(self, gains: np.ndarray) -> float:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            chars = self.char_polys(gains)
            if self.uniform:
                lead = chars[:, -1]
                scale = np.abs(chars).max(axis=1)
                if np.all(np.abs(lead) > 1e-12 * scale) and np.all(np.isfinite(chars)):
                    try:
                        roots = _aberth_batch(chars)
                        _check_residuals(chars, roots)
                    except (NumericalError, ValidationError):
                        return SENTINEL_OBJECTIVE
                    if not np.all(np.isfinite(roots)):
                        return SENTINEL_OBJECTIVE
                    args = np.degrees(np.abs(np.angle(roots)))
                    dev = np.abs(args - self.target)
                    dev += _CONE_PENALTY * np.maximum(0.0, self.cone_vec - args)
                    return float(np.sqrt(np.sum(dev * dev)))
            # fallback: uneven lengths or a degenerate leading coefficient
            total = 0.0
            char_list = chars if isinstance(chars, list) else list(chars)
            for poly, cone in zip(char_list, self.cones):
                if not np.all(np.isfinite(poly)):
                    return SENTINEL_OBJECTIVE
                trimmed = poly_trim(poly)
                if trimmed.size < 2:
                    return SENTINEL_OBJECTIVE
                try:
                    roots = wplane_roots(trimmed)
                except (NumericalError, ValidationError):
                    return SENTINEL_OBJECTIVE
                if not np.all(np.isfinite(roots)):
                    return SENTINEL_OBJECTIVE
                args = np.degrees(np.abs(np.angle(roots)))
                dev = np.abs(args - self.target)
                dev += _CONE_PENALTY * np.maximum(0.0, cone - args)
                total += float(np.sum(dev * dev))
            return float(np.sqrt(total))


@dataclass(frozen=True)
class SimplexConfig:
    """Nelder-Mead coefficients and stopping rules."""

    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    diameter_tol: float = 1e-8
    spread_tol: float = 1e-10
    max_iter: int = 2000
    nonzero_step: float = 0.05
    zero_step: float = 0.00025


@dataclass(frozen=True)
class TuningProblem:
    """Plants, target angle, simplex settings, restart budget and seed."""

    plants: tuple
    q: RationalOrder = RationalOrder(1, 4)
    n_gains: int = 11
    target_angle_deg: float | None = None
    simplex: SimplexConfig = field(default_factory=SimplexConfig)
    restarts: int = 8
    seed: int = 0
    initial_gain: float = 1e-4
    angular_tol_deg: float = 1e-6

    def __post_init__(self):
        plants = tuple(self.plants)
        if not plants:
            raise ValidationError("need at least one plant")
        for p in plants:
            if not isinstance(p, CommensurateFoTf):
                raise ValidationError("plants must be CommensurateFoTf instances")
        q = RationalOrder.parse(self.q).check_commensurate_base()
        check_count(self.n_gains, "n_gains", minimum=1)
        check_count(self.restarts, "restarts", minimum=1)
        target = self.target_angle_deg
        if target is None:
            target = 180.0 * float(q)
        cone = 90.0 * float(q)
        if not cone < target < 180.0 + 1e-12:
            raise ValidationError(
                f"target angle must lie in ({cone}, 180] degrees, got {target}"
            )
        object.__setattr__(self, "plants", plants)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "target_angle_deg", float(target))

    def initial_gains(self) -> np.ndarray:
        return np.full(self.n_gains, self.initial_gain)

    def workspace(self) -> _LoopWorkspace:
        return _LoopWorkspace(self.plants, self.q, self.n_gains, self.target_angle_deg)


def objective_Jbar(gains, problem: TuningProblem) -> float:
    """Euclidean norm of per-root angle deviations across all plants.

    Each closed-loop root contributes |arg - target| in degrees; roots
    inside the stability cone add 1e3*(cone - |arg|) on top, so the norm
    grows steeply as soon as any root threatens instability. Root-finding
    failure returns the 1e12 sentinel instead of raising.
    """
    gains = as_float_vector(gains, "gains", min_len=problem.n_gains)
    if gains.size != problem.n_gains:
        raise ValidationError(f"expected {problem.n_gains} gains, got {gains.size}")
    return problem.workspace().objective(gains)


# ---------------------------------------------------------------------------
# simplex search

@dataclass(frozen=True)
class NelderMeadResult:
    x: np.ndarray
    fun: float
    trace: np.ndarray
    converged: bool
    iterations: int
    n_evals: int

    def __post_init__(self):
        object.__setattr__(self, "x", frozen_array(self.x))
        object.__setattr__(self, "trace", frozen_array(self.trace))


def nelder_mead(f, x0, config: SimplexConfig = SimplexConfig()) -> NelderMeadResult:
    """Deterministic Nelder-Mead simplex minimization.

    Initial simplex steps each coordinate by 5% (absolute 0.00025 at zero);
    termination requires simplex diameter < diameter_tol and objective
    spread < spread_tol, or the iteration cap. The best-vertex trace is
    non-increasing.
    """
    x0 = as_float_vector(x0, "x0", min_len=1)
    n = x0.size
    f0 = float(f(x0))
    if not np.isfinite(f0):
        raise ValidationError("objective is not finite at the initial point")
    simplex = np.tile(x0, (n + 1, 1))
    for i in range(n):
        if simplex[i + 1, i] != 0.0:
            simplex[i + 1, i] *= 1.0 + config.nonzero_step
        else:
            simplex[i + 1, i] = config.zero_step
    fvals = np.array([f0] + [float(f(v)) for v in simplex[1:]])
    evals = n + 1
    trace = []
    converged = False
    iterations = 0
    rho, chi, psi, sigma = (
        config.reflection,
        config.expansion,
        config.contraction,
        config.shrink,
    )
    for iterations in range(1, config.max_iter + 1):
        order = np.argsort(fvals, kind="stable")
        simplex = simplex[order]
        fvals = fvals[order]
        diameter = np.max(np.abs(simplex[1:] - simplex[0]))
        spread = fvals[-1] - fvals[0]
        if diameter < config.diameter_tol and spread < config.spread_tol:
            converged = True
            trace.append(fvals[0])
            break
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + rho * (centroid - simplex[-1])
        fr = float(f(xr))
        evals += 1
        if fr < fvals[0]:
            xe = centroid + rho * chi * (centroid - simplex[-1])
            fe = float(f(xe))
            evals += 1
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc = centroid + psi * rho * (centroid - simplex[-1])
                fc = float(f(xc))
                evals += 1
                if fc <= fr:
                    simplex[-1], fvals[-1] = xc, fc
                else:
                    simplex[1:] = simplex[0] + sigma * (simplex[1:] - simplex[0])
                    fvals[1:] = [float(f(v)) for v in simplex[1:]]
                    evals += n
            else:
                xcc = centroid - psi * (centroid - simplex[-1])
                fcc = float(f(xcc))
                evals += 1
                if fcc < fvals[-1]:
                    simplex[-1], fvals[-1] = xcc, fcc
                else:
                    simplex[1:] = simplex[0] + sigma * (simplex[1:] - simplex[0])
                    fvals[1:] = [float(f(v)) for v in simplex[1:]]
                    evals += n
        trace.append(float(fvals.min()))
    best = int(np.argmin(fvals))
    return NelderMeadResult(
        x=simplex[best],
        fun=float(fvals[best]),
        trace=np.minimum.accumulate(np.asarray(trace)) if trace else np.array([f0]),
        converged=converged,
        iterations=iterations,
        n_evals=evals,
    )


# ---------------------------------------------------------------------------
# tuning and verification

@dataclass(frozen=True)
class TuningReport:
    """Verification/tuning outcome over a plant set."""

    controller: ContinuousOrderPid
    objective: float
    pole_sets: tuple
    per_plant_min_deg: np.ndarray
    min_angle_deg: float
    stable: bool
    all_hyperdamped: bool
    trace: np.ndarray
    converged: bool
    runs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "per_plant_min_deg", frozen_array(self.per_plant_min_deg))
        object.__setattr__(self, "trace", frozen_array(self.trace))

    def summary(self) -> str:
        lines = [
            f"gains          : {np.array2string(np.asarray(self.controller.gains), precision=8)}",
            f"objective Jbar : {self.objective:.6f}",
            f"min angle      : {self.min_angle_deg:.4f} deg",
            f"stable         : {self.stable}",
            f"all hyperdamped: {self.all_hyperdamped}",
        ]
        for i, angle in enumerate(self.per_plant_min_deg):
            lines.append(f"plant {i}: min |arg(w)| = {float(angle):.4f} deg")
        return "\n".join(lines)


def verify(controller: ContinuousOrderPid, plants, target_angle_deg=None,
           angular_tol_deg: float = 1e-6) -> TuningReport:
    """Pure closed-loop check: classified pole sets, minimum angles, flags."""
    plants = tuple(plants)
    problem = TuningProblem(
        plants=plants,
        q=controller.q,
        n_gains=controller.gains.size,
        target_angle_deg=target_angle_deg,
        angular_tol_deg=angular_tol_deg,
    )
    pole_sets = tuple(
        closed_loop_poles(p, controller, tol_deg=angular_tol_deg) for p in plants
    )
    mins = np.array([ps.min_angle_deg for ps in pole_sets])
    stable = all(ps.stable for ps in pole_sets)
    hyper = all(
        ps.all_beyond(180.0 * float(ps.q), angular_tol_deg) for ps in pole_sets
    )
    return TuningReport(
        controller=controller,
        objective=objective_Jbar(controller.gains, problem),
        pole_sets=pole_sets,
        per_plant_min_deg=mins,
        min_angle_deg=float(mins.min()),
        stable=stable,
        all_hyperdamped=hyper,
        trace=np.array([]),
        converged=True,
    )


def tune(problem: TuningProblem, n_jobs: int = 1) -> TuningReport:
    """Multi-start simplex search for a hyper-damping controller.

    Start points are seeded +/-50% uniform perturbations of the base gain
    vector. The returned report is the hyper-damped run with the smallest
    objective when one exists, otherwise the smallest-objective run flagged
    not hyper-damped. Bit-reproducible for a fixed seed.
    """
    ws = problem.workspace()
    rng = np.random.default_rng(problem.seed)
    base = problem.initial_gains()
    starts = base * rng.uniform(0.5, 1.5, size=(problem.restarts, problem.n_gains))

    def run(idx: int) -> NelderMeadResult:
        return nelder_mead(ws.objective, starts[idx], problem.simplex)

    indices = range(problem.restarts)
    if n_jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(run, indices))
    else:
        results = [run(i) for i in indices]

    evaluated = []
    for idx, res in enumerate(results):
        controller = ContinuousOrderPid(problem.q, res.x)
        try:
            report = verify(
                controller,
                problem.plants,
                target_angle_deg=problem.target_angle_deg,
                angular_tol_deg=problem.angular_tol_deg,
            )
        except NumericalError:
            continue
        evaluated.append((idx, res, report))
    if not evaluated:
        raise NumericalError("every restart failed closed-loop root-finding")

    hyper = [e for e in evaluated if e[2].all_hyperdamped]
    pool_ = hyper if hyper else evaluated
    idx, res, report = min(pool_, key=lambda e: (e[1].fun, e[0]))
    runs = tuple(
        (i, float(r.fun), rep.all_hyperdamped, r.converged)
        for i, r, rep in evaluated
    )
    return TuningReport(
        controller=report.controller,
        objective=report.objective,
        pole_sets=report.pole_sets,
        per_plant_min_deg=report.per_plant_min_deg,
        min_angle_deg=report.min_angle_deg,
        stable=report.stable,
        all_hyperdamped=report.all_hyperdamped,
        trace=res.trace,
        converged=res.converged,
        runs=runs,
    )
