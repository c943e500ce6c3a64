import numpy as np
import pytest

from ticklab import (Box, Delta, ExplicitEC, NetworkScenario, NodeConfig,
                     TickTrace, cross_node_spread, plan_scenario,
                     run_network)


def _ideal_ec(tau=1.0):
    return ExplicitEC(tau=tau, sigma=0.0, eps_tail=0.0)


class TestScenarios:
    def test_needs_two_nodes(self):
        with pytest.raises(ValueError):
            NetworkScenario(central=Delta(3.3),
                            nodes=(NodeConfig(delay=0.0, ec=_ideal_ec()),),
                            n_outputs=1)

    def test_needs_common_period(self):
        nodes = (NodeConfig(delay=0.0, ec=_ideal_ec(1.0)),
                 NodeConfig(delay=0.0, ec=_ideal_ec(1.1)))
        with pytest.raises(ValueError):
            NetworkScenario(central=Delta(3.3), nodes=nodes, n_outputs=1)

    def test_detector_band_violation_names_node(self):
        # an arrival at phase tau/2 lands on the detector
        nodes = (NodeConfig(delay=0.0, ec=_ideal_ec(), name="good"),
                 NodeConfig(delay=0.2, ec=_ideal_ec(), name="bad"))
        scenario = NetworkScenario(central=Delta(3.3), nodes=nodes,
                                   n_outputs=1, eps=0.0)
        with pytest.raises(ValueError, match="bad"):
            run_network(scenario, seed=0)


class TestRunNetwork:
    def test_symmetric_deterministic_nodes_coincide(self):
        nodes = (NodeConfig(delay=0.0, ec=_ideal_ec()),
                 NodeConfig(delay=0.0, ec=_ideal_ec()))
        scenario = NetworkScenario(central=Delta(3.3), nodes=nodes,
                                   n_outputs=4, eps=0.0)
        result = run_network(scenario, seed=0)
        assert result.outputs[0].times == pytest.approx(
            result.outputs[1].times)

    def test_delay_offset_absorbed_by_enhancement(self):
        # raw arrivals differ by exactly the delay offset, but both nodes
        # fire at their (pre-synchronized) detector phase
        delta = 0.05
        nodes = (NodeConfig(delay=0.0, ec=_ideal_ec()),
                 NodeConfig(delay=delta, ec=_ideal_ec()))
        scenario = NetworkScenario(central=Delta(3.3), nodes=nodes,
                                   n_outputs=3, eps=0.0)
        result = run_network(scenario, seed=0)
        raw0, raw1 = result.arrivals
        assert np.allclose(raw1.times - raw0.times, delta)
        out0, out1 = result.outputs
        assert out0.times == pytest.approx(out1.times, abs=1e-12)

    def test_nodes_only_see_their_arrivals(self):
        # adding jitter at one node leaves the other node's trace unchanged
        jitter = Box(center=0.05, width=0.05)
        quiet = NodeConfig(delay=0.05, ec=_ideal_ec(), name="quiet")
        noisy_a = NodeConfig(delay=0.05, ec=_ideal_ec(), name="n",
                             jitter=None)
        noisy_b = NodeConfig(delay=0.05, ec=_ideal_ec(), name="n",
                             jitter=jitter)
        central = Box(3.2, 0.05)
        a = run_network(NetworkScenario(central=central,
                                        nodes=(quiet, noisy_a),
                                        n_outputs=3), seed=4)
        b = run_network(NetworkScenario(central=central,
                                        nodes=(quiet, noisy_b),
                                        n_outputs=3), seed=4)
        assert np.array_equal(a.arrivals[0].times, b.arrivals[0].times)


class TestPlanScenario:
    def test_structure(self):
        scenario = plan_scenario(Box(1.0, 0.1), n_nodes=8, jitter_width=0.1,
                                 d=256)
        assert len(scenario.nodes) == 8
        taus = {n.ec.tau for n in scenario.nodes}
        assert len(taus) == 1
        run_network(scenario, seed=0)  # passes the per-node checks

    def test_sigma_scale_only_shrinks_window(self):
        base = plan_scenario(Box(1.0, 0.1), 4, 0.1, 256)
        half = plan_scenario(Box(1.0, 0.1), 4, 0.1, 256, sigma_scale=0.5)
        assert half.nodes[0].ec.tau == base.nodes[0].ec.tau
        assert half.nodes[0].ec.sigma == pytest.approx(
            base.nodes[0].ec.sigma / 2)

    def test_enhancement_beats_raw_spread(self):
        scenario = plan_scenario(Box(1.0, 0.1), 8, 0.1, 256, n_outputs=5)
        enhanced, raw = [], []
        for seed in range(40):
            result = run_network(scenario, seed)
            enhanced.append(cross_node_spread(result.outputs, 4)[0])
            raw.append(cross_node_spread(result.arrivals, 4)[0])
        assert np.median(enhanced) < np.median(raw)


class TestCrossNodeSpread:
    def test_identical_traces(self):
        t = TickTrace(np.array([1.0, 2.0, 3.0]))
        assert cross_node_spread([t, t, t], 1) == (0.0, 0.0)

    def test_constant_offset(self):
        a = TickTrace(np.array([1.0, 2.0]))
        b = TickTrace(np.array([1.3, 2.3]))
        rng, trimmed = cross_node_spread([a, b], 1)
        assert rng == pytest.approx(0.3)
        assert trimmed == pytest.approx(0.3)

    def test_permutation_invariant(self):
        traces = [TickTrace(np.array([1.0 + 0.01 * i])) for i in range(5)]
        fwd = cross_node_spread(traces, 0, eps=0.2)
        rev = cross_node_spread(traces[::-1], 0, eps=0.2)
        assert fwd == rev

    def test_trim_drops_outlier(self):
        traces = [TickTrace(np.array([1.0 + 0.01 * i])) for i in range(4)]
        traces.append(TickTrace(np.array([9.0])))
        rng, trimmed = cross_node_spread(traces, 0, eps=0.2)
        assert rng == pytest.approx(8.0)
        assert trimmed == pytest.approx(0.03)

    def test_insufficient_ticks(self):
        t = TickTrace(np.array([1.0]))
        with pytest.raises(ValueError):
            cross_node_spread([t, t], 1)
