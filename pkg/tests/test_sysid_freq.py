import numpy as np
import pytest

from fracid import fixtures
from fracid.exceptions import NumericalError, ValidationError
from fracid.fotf import (
    CommensurateFoTf,
    FrequencyResponse,
    default_grid,
    eval_fo,
    synth_freq_data,
)
from fracid.orders import RationalOrder
from fracid.sysid_freq import (
    CONDITION_LIMIT,
    MAX_TOTAL_ORDER,
    LevyProblem,
    accuracy_J,
    levy_rows,
    q_sweep,
    solve_levy,
    vinagre_weights,
)

Q2 = RationalOrder(1, 2)
Q4 = RationalOrder(1, 4)


def fo_response(model, grid):
    return FrequencyResponse(grid, eval_fo(model, grid))


@pytest.fixture(scope="module")
def g30_synth():
    return synth_freq_data(fixtures.discrete_models()["g30_100"], default_grid())


class TestVinagreWeights:
    def test_worked_example(self):
        assert np.allclose(vinagre_weights([1.0, 2.0, 4.0]), [0.5, 0.375, 0.0625])

    def test_positive_and_decreasing_on_log_grid(self):
        # one-sided end differences sit below the centered trend, so the
        # decay claim applies to the interior points
        w = vinagre_weights(default_grid())
        assert np.all(w > 0)
        assert np.all(np.diff(w[1:-1]) < 0)

    def test_too_short_rejected(self):
        with pytest.raises(ValidationError):
            vinagre_weights([1.0])

    def test_unsorted_rejected(self):
        with pytest.raises(ValidationError):
            vinagre_weights([2.0, 1.0, 3.0])


class TestSolveLevy:
    def test_exact_half_order_recovery(self):
        # 1/(1 + s): over w = s^(1/2) this is 1/(1 + w^2)
        truth = CommensurateFoTf(Q2, [1.0], [1.0, 0.0, 1.0])
        data = fo_response(truth, default_grid())
        fit = solve_levy(LevyProblem(data, 0, 2, Q2))
        assert fit.J < 1e-20
        assert not fit.degenerate
        assert np.allclose(fit.model.num, [1.0], atol=1e-10)
        assert np.allclose(fit.model.den, [1.0, 0.0, 1.0], atol=1e-10)

    def test_integer_order_matches_complex_least_squares(self, rng):
        # independent oracle: complex lstsq on the same linearization
        grid = np.logspace(-1, 1, 40)
        worst = 0.0
        for _ in range(10):
            n = int(rng.integers(1, 4))
            roots = -rng.uniform(0.2, 3.0, size=n)
            den = np.real(np.poly(roots))[::-1]
            num = rng.uniform(0.5, 2.0, size=1)
            truth = CommensurateFoTf(RationalOrder(1), num, den)
            data = fo_response(truth, grid)
            fit = solve_levy(LevyProblem(data, 0, n, RationalOrder(1)))

            G = data.values
            s = 1j * grid
            cols = [np.ones_like(s)] + [-G * s**k for k in range(1, n + 1)]
            Ac = np.stack(cols, axis=1)
            x, *_ = np.linalg.lstsq(Ac, G, rcond=None)
            x = x.real
            got = np.concatenate([fit.model.num / fit.model.den[0],
                                  fit.model.den[1:] / fit.model.den[0]])
            worst = max(worst, np.max(np.abs(got - x)) / max(1.0, np.max(np.abs(x))))
        assert worst < 1e-8

    def test_stacked_and_summed_agree_when_well_conditioned(self):
        truth = CommensurateFoTf(Q2, [1.0], [1.0, 0.0, 1.0])
        data = fo_response(truth, default_grid())
        stacked = solve_levy(LevyProblem(data, 0, 2, Q2, aggregation="stacked"))
        summed = solve_levy(LevyProblem(data, 0, 2, Q2, aggregation="summed"))
        assert np.allclose(stacked.model.den, summed.model.den, atol=1e-8)
        assert summed.J < 1e-16

    def test_summed_singular_raises(self):
        # identically zero response removes every denominator column
        grid = np.array([0.1, 1.0, 10.0])
        data = FrequencyResponse(grid, np.zeros(3, complex))
        with pytest.raises(NumericalError, match="summed normal equations"):
            solve_levy(LevyProblem(data, 1, 1, Q4, aggregation="summed"))

    def test_stacked_flags_rank_deficiency(self):
        grid = np.array([0.1, 1.0, 10.0])
        data = FrequencyResponse(grid, np.zeros(3, complex))
        fit = solve_levy(LevyProblem(data, 1, 1, Q4, aggregation="stacked"))
        assert fit.degenerate

    def test_residual_by_freq_shape(self):
        truth = CommensurateFoTf(Q2, [1.0], [1.0, 0.0, 1.0])
        data = fo_response(truth, default_grid())
        fit = solve_levy(LevyProblem(data, 0, 2, Q2))
        assert fit.residual_by_freq.shape == (len(data),)
        assert fit.J == pytest.approx(float(fit.residual_by_freq.mean()))

    def test_levy_rows_rebuild_the_fit(self):
        truth = CommensurateFoTf(Q2, [1.0, 0.5], [1.0, 0.4, 1.0])
        data = fo_response(truth, default_grid(count=30))
        problem = LevyProblem(data, 1, 2, Q2)
        rows = []
        rhs = []
        for p in range(len(data)):
            r, t = levy_rows(problem, p)
            rows.append(r)
            rhs.append(t)
        A = np.vstack(rows)
        b = np.concatenate(rhs)
        x, *_ = np.linalg.lstsq(A, b, rcond=None)
        fit = solve_levy(problem)
        ref = np.concatenate([fit.model.num, fit.model.den[1:]])
        assert np.allclose(x, ref, atol=1e-9)

    def test_levy_rows_index_out_of_range(self):
        truth = CommensurateFoTf(Q2, [1.0], [1.0, 0.0, 1.0])
        data = fo_response(truth, default_grid(count=10))
        problem = LevyProblem(data, 0, 2, Q2)
        with pytest.raises(ValidationError, match="out of range"):
            levy_rows(problem, 10)


class TestAccuracyJ:
    def test_zero_for_perfect_model(self):
        truth = CommensurateFoTf(Q4, [1.0], [1.0, 1.0])
        data = fo_response(truth, default_grid())
        assert accuracy_J(data, truth) == 0.0

    def test_mean_square_definition(self):
        truth = CommensurateFoTf(Q4, [1.0], [1.0, 1.0])
        grid = default_grid(count=10)
        shifted = FrequencyResponse(grid, eval_fo(truth, grid) + (3 + 4j))
        assert accuracy_J(shifted, truth) == pytest.approx(25.0)

    def test_fixture_cross_domain_golden(self, g30_synth):
        # discrete fixture response scored against the fractional fixture
        model = fixtures.fo_models()["g30_100"]
        assert accuracy_J(g30_synth, model) == pytest.approx(13960.376548671327, rel=1e-6)


class TestQSweep:
    def test_ladder_orders_and_truncation(self, g30_synth):
        cells = q_sweep(g30_synth, ["1", "1/2", "1/4"], weightings=("uniform",))
        by_q = {str(c.q): c for c in cells}
        assert (by_q["1"].m, by_q["1"].n) == (2, 2)
        assert by_q["1"].truncated_order  # 2.5/1 floors to 2
        assert (by_q["1/2"].m, by_q["1/2"].n) == (5, 5)
        assert not by_q["1/2"].truncated_order
        assert (by_q["1/4"].m, by_q["1/4"].n) == (10, 10)

    def test_q_above_ceiling_recorded_not_raised(self, g30_synth):
        cells = q_sweep(g30_synth, ["3"], weightings=("uniform",))
        assert len(cells) == 1
        assert not cells[0].ok
        assert "exceeds the maximum total order" in cells[0].error

    def test_empty_q_list_rejected(self, g30_synth):
        with pytest.raises(ValidationError):
            q_sweep(g30_synth, [])

    def test_golden_J_values(self, g30_synth):
        cells = q_sweep(g30_synth, ["1", "1/2", "1/4"])
        J = {(str(c.q), c.weighting): c.fit.J for c in cells}
        assert J[("1", "uniform")] == pytest.approx(13007.709002545156, rel=1e-9)
        assert J[("1/2", "uniform")] == pytest.approx(1.0987207518094626, rel=1e-9)
        assert J[("1/4", "uniform")] == pytest.approx(1.8608386692910516e-05, rel=1e-6)
        assert J[("1", "vinagre")] == pytest.approx(561.8517482416689, rel=1e-9)
        assert J[("1/4", "vinagre")] == pytest.approx(9.55487686913731e-06, rel=1e-6)

    def test_vinagre_quarter_order_in_published_band(self, g30_synth):
        # two orders of magnitude around the published 3.6721e-6
        cells = q_sweep(g30_synth, ["1/4"], weightings=("vinagre",))
        J = cells[0].fit.J
        assert 3.6721e-8 <= J <= 3.6721e-4

    def test_accuracy_improves_four_orders_by_quarter(self, g30_synth):
        cells = q_sweep(g30_synth, ["1", "1/4"])
        for weighting in ("uniform", "vinagre"):
            J = {str(c.q): c.fit.J for c in cells if c.weighting == weighting}
            assert J["1"] / J["1/4"] >= 1e4

    def test_condition_growth_and_flags(self, g30_synth):
        cells = q_sweep(g30_synth, ["1", "1/2", "1/4", "1/10", "1/20"])
        for weighting in ("uniform", "vinagre"):
            sub = [c for c in cells if c.weighting == weighting]
            conds = [c.fit.condition for c in sub]
            assert conds[0] < conds[1] < conds[2] < conds[3]
            assert [c.flagged for c in sub] == [False, False, False, True, True]

    def test_output_order_follows_input(self, g30_synth):
        cells = q_sweep(g30_synth, ["1/2", "1"], weightings=("uniform",))
        assert [str(c.q) for c in cells] == ["1/2", "1"]

    def test_parallel_matches_serial(self, g30_synth):
        serial = q_sweep(g30_synth, ["1", "1/2"], n_jobs=1)
        parallel = q_sweep(g30_synth, ["1", "1/2"], n_jobs=4)
        assert [(str(c.q), c.weighting) for c in serial] == [
            (str(c.q), c.weighting) for c in parallel
        ]
        assert [c.fit.J for c in serial] == [c.fit.J for c in parallel]


class TestInClassRecovery:
    def test_quarter_order_random_models(self, rng):
        grid = default_grid()
        for _ in range(3):
            n = int(rng.integers(2, 11))
            m = int(rng.integers(0, n + 1))
            roots = []
            k = n
            while k > 0:
                if k >= 2 and rng.random() < 0.7:
                    r = rng.uniform(0.3, 3.0)
                    th = np.deg2rad(rng.uniform(40.0, 170.0))
                    w = r * np.exp(1j * th)
                    roots += [w, np.conj(w)]
                    k -= 2
                else:
                    roots.append(-rng.uniform(0.3, 3.0))
                    k -= 1
            den = np.real(np.poly(roots))[::-1]
            den /= den[0]
            num = rng.uniform(-2.0, 2.0, size=m + 1)
            if abs(num[-1]) < 0.1:
                num[-1] = 0.5
            truth = CommensurateFoTf(Q4, num, den)
            data = fo_response(truth, grid)
            fit = solve_levy(LevyProblem(data, m, n, Q4))
            assert fit.J < 1e-10


def test_module_constants():
    assert CONDITION_LIMIT == 1e12
    from fractions import Fraction

    assert MAX_TOTAL_ORDER == Fraction(5, 2)
