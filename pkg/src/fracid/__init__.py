"""fracid: commensurate fractional-order identification and control.

Identify discrete and fractional-order models of step-back transients,
classify w-plane poles across Riemann sheets, tune continuous-order
controllers for hyper-damped closed loops, and simulate them with a
Grünwald-Letnikov solver. The bundled PHWR case-study model bank drives
the one-shot `fracid report` reproduction.
"""

from .exceptions import (
    ConvergenceError,
    FracidError,
    IdentifiabilityError,
    NumericalError,
    PoleAtFrequencyError,
    ValidationError,
)
from .orders import RationalOrder
from .fotf import (
    CommensurateFoTf,
    DiscreteTf,
    FrequencyResponse,
    closed_loop_char_poly,
    default_grid,
    eval_discrete,
    eval_fo,
    synth_freq_data,
    to_common_base,
)
from .wplane import (
    DampingClass,
    WPlanePoleSet,
    classify,
    classify_flagged,
    is_stable,
    pole_set,
    wplane_roots,
    zero_set,
)
from .sysid_time import (
    EstimatorSpec,
    FitResult,
    TimeSeries,
    aic,
    arx_fit,
    build_regressor,
    fpe,
    pem_fit,
    simulate_discrete,
    structure_sweep,
)
from .sysid_freq import (
    LevyFit,
    LevyProblem,
    QSweepCell,
    accuracy_J,
    levy_rows,
    order_distribution,
    q_sweep,
    random_stable_model,
    solve_levy,
    vinagre_weights,
)
from .ctrl_design import (
    ContinuousOrderPid,
    NelderMeadResult,
    SimplexConfig,
    TuningProblem,
    TuningReport,
    closed_loop_poles,
    controller_tf,
    nelder_mead,
    objective_Jbar,
    tune,
    verify,
)
from .fo_sim import (
    SimConfig,
    SimResult,
    closed_loop_step,
    disturbance_step,
    gl_weights,
    overshoot,
    peak_deviation,
    settling_time,
    simulate_fo,
    step_fo,
)
from .estimators import DiscreteTfEstimator, HyperdampedTuner, LevyEstimator
from . import fixtures, modelio, svgplot

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "FracidError",
    "ValidationError",
    "IdentifiabilityError",
    "NumericalError",
    "PoleAtFrequencyError",
    "ConvergenceError",
    "RationalOrder",
    "CommensurateFoTf",
    "DiscreteTf",
    "FrequencyResponse",
    "eval_fo",
    "eval_discrete",
    "synth_freq_data",
    "default_grid",
    "to_common_base",
    "closed_loop_char_poly",
    "DampingClass",
    "WPlanePoleSet",
    "wplane_roots",
    "classify",
    "classify_flagged",
    "pole_set",
    "zero_set",
    "is_stable",
    "TimeSeries",
    "EstimatorSpec",
    "FitResult",
    "build_regressor",
    "arx_fit",
    "pem_fit",
    "aic",
    "fpe",
    "simulate_discrete",
    "structure_sweep",
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
    "ContinuousOrderPid",
    "SimplexConfig",
    "TuningProblem",
    "TuningReport",
    "NelderMeadResult",
    "controller_tf",
    "closed_loop_poles",
    "objective_Jbar",
    "nelder_mead",
    "tune",
    "verify",
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
    "DiscreteTfEstimator",
    "LevyEstimator",
    "HyperdampedTuner",
    "fixtures",
    "modelio",
    "svgplot",
]
