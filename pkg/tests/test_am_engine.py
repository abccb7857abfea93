import logging

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from am_engine import Phase, am_fit, fit_candidate, generate_candidates, multi_start
from data_engine.synth_engine import generate_experiment
from errors import AllStartsFailed, DegenerateDesignWarning, StructuralViolation
from filter_engine import FilterTaps, apply_filter
from graph_engine import Gso, GsoKind, SignalMatrix, SupportSet, default_starts, expand
from health_engine import trace_is_monotone
from metrics_engine import edge_weight_vectors, spearman
from solver_config import AmConfig, ExperimentSpec, ScpConfig
from tests.conftest import make_instance


def fast_config(order, kind="L", **kw):
    return AmConfig(filter_order=order, scp=ScpConfig(max_iters=30), outer_max_iters=8,
                    hypothesis_kind=kind, **kw)


def _scaled_lstsq_residual(x, y, support, kind, order, previous):
    """Residuo del ajuste de orden m armado con matrices base densas y columnas de norma 1."""
    xv, yv = x.values, y.values
    n = support.n_nodes
    cols = [xv]
    for i, j in support.edges:
        b = np.zeros((n, n))
        if kind == "W":
            b[i, j] = b[j, i] = 1.0
        else:
            b[i, i] = b[j, j] = 1.0
            b[i, j] = b[j, i] = -1.0
        cols.append(b @ xv)
    if order >= 2:
        p = expand(previous)
        z = p @ xv
        for _ in range(2, order + 1):
            z = p @ z
            cols.append(z)
    a = np.stack([c.ravel() for c in cols], axis=1)
    a = a / np.linalg.norm(a, axis=0)
    sol, *_ = np.linalg.lstsq(a, yv.ravel(), rcond=None)
    r = yv.ravel() - a @ sol
    return float(r @ r)


class TestAmFit:

    @pytest.mark.parametrize("seed", range(10))
    def test_exact_recovery_from_generating_gso(self, seed):
        _, gso, taps, x, y = make_instance(seed, n_nodes=6, order=3)
        h, final, trace = am_fit(gso, x, y, fast_config(3))
        assert trace.records[0].phase is Phase.TAP
        tol = 1e-10 * (1 + np.max(np.abs(taps.taps)))
        assert np.max(np.abs(h.taps - taps.taps)) < tol
        assert trace.final_cost <= 1e-12 * np.sum(y.values ** 2)

    def test_order_zero_model_is_flat(self):
        _, gso, _, x, _ = make_instance(3, n_nodes=5, order=0)
        y = SignalMatrix(1.7 * x.values)
        start = gso.with_weights(np.ones(gso.weights.size))
        h, _, trace = am_fit(start, x, y, fast_config(0))
        assert h.taps[0] == pytest.approx(1.7, rel=1e-12)
        costs = trace.costs()
        assert_array_equal(costs, costs[0])
        assert costs[0] <= 1e-20 * np.sum(y.values ** 2)

    @pytest.mark.parametrize("seed", range(3))
    @pytest.mark.parametrize("order", [1, 3, 5])
    @pytest.mark.parametrize("n_nodes", [5, 10, 15])
    @pytest.mark.parametrize("kind", ["W", "L"])
    def test_trace_is_monotone_from_default_starts(self, n_nodes, order, kind, seed):
        support, _, _, x, y = make_instance(n_nodes * 100 + order * 10 + seed, n_nodes=n_nodes, order=order,
                                            kind=kind, weight_range=(0.5, 1.5))
        for _, start in default_starts(support, kind):
            _, final, trace = am_fit(start, x, y, fast_config(order, kind))
            costs = trace.costs()
            assert trace_is_monotone(costs)
            assert np.all(np.diff(costs) <= 1e-9 * (1 + costs[0]))
            assert_array_equal([r.cumulative_iter for r in trace.records], np.arange(1, len(costs) + 1))
            assert np.all(final.weights >= 0)

    def test_degenerate_tap_steps_warn_once_per_run(self, caplog):
        x = SignalMatrix(np.random.default_rng(4).standard_normal((4, 20)))
        y = SignalMatrix(1.5 * x.values)
        start = Gso("L", SupportSet(4, ()), [])
        with caplog.at_level(logging.DEBUG):
            h, _, _ = am_fit(start, x, y, fast_config(2))
        assert h.degenerate
        warned = [r for r in caplog.records if r.levelno >= logging.WARNING]
        assert [r.name for r in warned] == ["am_engine"]
        assert any(r.name == "tap_engine" and r.levelno == logging.DEBUG for r in caplog.records)

    def test_nmse_column(self):
        support, _, _, x, y = make_instance(8, n_nodes=5, order=2)
        _, _, trace = am_fit(default_starts(support, "L")[0][1], x, y, fast_config(2))
        assert_allclose(trace.nmses(), trace.costs() / np.sum(y.values ** 2))
        assert trace.final_nmse <= trace.initial_nmse

    def test_kind_mismatch_rejected(self):
        support, _, _, x, y = make_instance(0)
        start = default_starts(support, "W")[0][1]
        with pytest.raises(ValueError):
            am_fit(start, x, y, fast_config(2, "L"))

    def test_deterministic(self):
        support, _, _, x, y = make_instance(21, n_nodes=6, order=2)
        start = default_starts(support, "L")[1][1]
        a = am_fit(start, x, y, fast_config(2))
        b = am_fit(start, x, y, fast_config(2))
        assert_array_equal(a[0].taps, b[0].taps)
        assert_array_equal(a[1].weights, b[1].weights)
        assert_array_equal(a[2].costs(), b[2].costs())

    def test_mismatched_hypothesis_stays_feasible(self):
        support, _, _, x, y = make_instance(4, n_nodes=6, order=2, kind="W")
        _, final, trace = am_fit(default_starts(support, "L")[0][1], x, y, fast_config(2, "L"))
        assert final.kind is GsoKind.LAPLACIAN
        assert np.all(final.weights >= 0)
        assert trace_is_monotone(trace.costs())


class TestCandidates:

    @pytest.mark.parametrize("kind", ["W", "L"])
    def test_first_order_recovers_exact_model(self, kind):
        support, gso, _, x, _ = make_instance(5, n_nodes=6, order=1, kind=kind)
        y = apply_filter(FilterTaps([2.0, 1.0]), gso, x)
        fit = fit_candidate(x, y, support, kind, 1)
        assert_allclose(fit.gso.weights, gso.weights, atol=1e-8)
        assert fit.h0 == pytest.approx(2.0, abs=1e-8)
        assert fit.higher_taps.size == 0

    def test_zero_output_gives_empty_candidates(self):
        support, _, _, x, _ = make_instance(6, n_nodes=5, order=2)
        y = SignalMatrix(np.zeros(x.values.shape))
        with pytest.warns(DegenerateDesignWarning):
            cands = generate_candidates(x, y, support, "L", 2)
        assert len(cands) == 2
        for g in cands:
            assert not np.any(g.weights)

    def test_rank_correlation_with_unit_h1_scale(self):
        support, gso, _, x, _ = make_instance(7, n_nodes=10, order=2, kind="L")
        y = apply_filter(FilterTaps([1.0, 2.0, 0.02]), gso, x)
        cands = generate_candidates(x, y, support, "L", 2)
        assert len(cands) == 2
        assert spearman(*edge_weight_vectors(gso, cands[0])) >= 0.9

    def test_candidates_are_feasible(self):
        support, _, _, x, y = make_instance(9, n_nodes=6, order=3, kind="L")
        for g in generate_candidates(x, y, support, "L", 3):
            assert g.support == support and g.kind is GsoKind.LAPLACIAN
            assert np.all(g.weights >= 0)

    @pytest.mark.parametrize("seed", [0, 1])
    def test_reference_scale_candidates_are_full_fits(self, seed):
        spec = ExperimentSpec(seed=seed)
        exp = generate_experiment(spec)
        order = spec.filter_order
        fits, previous = [], None
        for m in range(1, order + 1):
            fit = fit_candidate(exp.x, exp.y, exp.support, "L", m, previous)
            oracle = _scaled_lstsq_residual(exp.x, exp.y, exp.support, "L", m, previous)
            assert fit.residual <= oracle * (1 + 1e-6) + 1e-12 * np.sum(exp.y.values ** 2)
            fits.append(fit)
            previous = fit.gso

        for fit in fits:
            assert np.count_nonzero(fit.gso.weights) > 0
        for a in range(order):
            for b in range(a + 1, order):
                assert not np.allclose(fits[a].gso.weights, fits[b].gso.weights)

    def test_requires_positive_order(self):
        support, _, _, x, y = make_instance(0)
        with pytest.raises(ValueError):
            generate_candidates(x, y, support, "L", 0)


class TestMultiStart:

    def test_best_start_and_failure_isolation(self):
        support, _, _, x, y = make_instance(12, n_nodes=5, order=2)
        good = default_starts(support, "L")[0][1]
        bad = good.with_weights(np.full(good.weights.size, 1e200))
        result = multi_start([("bad", bad), ("good", good)], x, y, fast_config(2))
        assert not result.runs[0].ok
        assert "FitAborted" in result.runs[0].error
        assert result.best_index == 1
        assert result.best.label == "good"

    def test_all_failed(self):
        support, _, _, x, y = make_instance(12, n_nodes=5, order=2)
        bad = default_starts(support, "L")[0][1].with_weights(np.full(support.n_edges, 1e200))
        with pytest.raises(AllStartsFailed) as info:
            multi_start([bad, bad], x, y, fast_config(2))
        assert len(info.value.failures) == 2

    def test_identical_starts_share_result(self):
        support, _, _, x, y = make_instance(13, n_nodes=5, order=2)
        result = multi_start(default_starts(support, "L"), x, y, fast_config(2))
        a, b = result.runs
        assert a.trace is b.trace
        assert result.best_index == 0

    def test_threads_match_sequential(self):
        support, _, _, x, y = make_instance(14, n_nodes=6, order=2)
        starts = default_starts(support, "L") + [
            (f"S{m}", g) for m, g in enumerate(generate_candidates(x, y, support, "L", 2), start=1)
        ]
        seq = multi_start(starts, x, y, fast_config(2))
        par = multi_start(starts, x, y, fast_config(2), max_workers=3)
        assert seq.best_index == par.best_index
        for r1, r2 in zip(seq.runs, par.runs):
            assert_array_equal(r1.trace.costs(), r2.trace.costs())

    def test_mixed_structure_rejected(self):
        support, _, _, x, y = make_instance(15)
        a = default_starts(support, "L")[0][1]
        with pytest.raises(StructuralViolation):
            multi_start([a, a.with_kind("W")], x, y, fast_config(2))

    def test_best_never_worse_than_any_start(self):
        support, _, _, x, y = make_instance(16, n_nodes=6, order=2)
        starts = default_starts(support, "L") + [("S1", generate_candidates(x, y, support, "L", 1)[0])]
        result = multi_start(starts, x, y, fast_config(2))
        assert result.best.final_cost == min(r.final_cost for r in result.runs)
