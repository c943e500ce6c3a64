"""Shared-signal network scenario.

A central i.i.d. clock broadcasts its ticks to several nodes over links
with heterogeneous propagation delay and per-tick jitter.  Each node runs
the dynamics-switching protocol against its local enhancing clock.  All
local ECs are pre-synchronized: identical period, phase 0 at time 0.  The
figure of merit is the spread of the k-th output tick across nodes,
compared with the spread of the raw arrivals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clocks import quasi_ideal_ratio, sample_tick_phase, wrap_phase
from .distributions import Box, WaitingTimeDistribution
from .protocols import ExplicitEC
from .trace import TickTrace

_PHASE_MARGIN = 0.75  # fraction of the safe phase band a node may use


@dataclass(frozen=True)
class NodeConfig:
    """One receiving node: mean link delay, optional per-tick jitter law
    (applied centered, i.e. shifted to mean 0), and the local EC."""

    delay: float
    ec: ExplicitEC
    jitter: WaitingTimeDistribution | None = None
    name: str = ""

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError("link delay must be nonnegative")
        if self.jitter is not None:
            lo, _ = self.jitter.support() or (None, None)
            if lo is not None and self.delay + lo - self.jitter.mean < 0:
                raise ValueError("jitter can make the link delay negative")


@dataclass(frozen=True)
class NetworkScenario:
    central: WaitingTimeDistribution
    nodes: tuple
    n_outputs: int
    eps: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if len(self.nodes) < 2:
            raise ValueError("a network needs at least 2 nodes")
        if self.n_outputs < 1:
            raise ValueError("need at least one output tick")
        taus = {node.ec.tau for node in self.nodes}
        if len(taus) > 1:
            raise ValueError(
                "pre-synchronized nodes need a common EC period")


def _node_label(node: NodeConfig, i: int) -> str:
    return node.name or f"node {i}"


def _check_node(scenario: NetworkScenario, node: NodeConfig, i: int):
    """Validate that the node's arrivals land inside the safe phase band
    of its EC, so the switching protocol operates in contract."""
    ec = node.ec
    central = scenario.central.confidence(scenario.eps)
    jitter_half = 0.0
    if node.jitter is not None:
        lo, hi = node.jitter.support() or (None, None)
        if lo is None:
            raise ValueError(
                f"{_node_label(node, i)}: jitter must have bounded support")
        jitter_half = (hi - lo) / 2
    band = (ec.tau - ec.sigma) / 2
    # expected arrival phase relative to the pre-synchronized EC grid
    s0 = wrap_phase(central.mu + node.delay, ec.tau)
    slack = central.sigma / 2 + jitter_half
    if abs(s0) + slack > _PHASE_MARGIN * band:
        raise ValueError(
            f"{_node_label(node, i)}: arrivals (phase {s0:.4g} +- "
            f"{slack:.4g}) reach the detector band of width {band:.4g}")


def _arrivals(broadcast: np.ndarray, node: NodeConfig, rng) -> np.ndarray:
    t = broadcast + node.delay
    if node.jitter is not None:
        t = t + node.jitter.sample(rng, broadcast.size) - node.jitter.mean
    if np.any(np.diff(t) <= 0):
        raise ValueError("link jitter reordered the broadcast ticks")
    return t


def _run_node(arrivals: np.ndarray, ec: ExplicitEC, n_outputs: int,
              rng) -> TickTrace:
    """Dynamics switching over a fixed arrival trace.

    The EC is not reset at the first arrival: it free-evolved from phase 0
    at time 0, which is what keeps the nodes mutually synchronized.  After
    each output the EC is reset as usual.
    """
    tau, sigma, eps_tail = ec.tau, ec.sigma, ec.eps_tail
    out = []
    idx = 0
    t_in = arrivals[idx]
    s = wrap_phase(t_in, tau)
    while len(out) < n_outputs:
        phi = sample_tick_phase(tau, sigma, eps_tail, rng)
        duration = phi - s
        if phi <= s:
            duration += tau
        t_out = t_in + duration
        out.append(t_out)
        while idx < arrivals.size and arrivals[idx] <= t_out:
            idx += 1
        if idx >= arrivals.size:
            if len(out) < n_outputs:
                raise ValueError("broadcast trace exhausted early")
            break
        t_in = arrivals[idx]
        s = wrap_phase(t_in - t_out, tau)
    return TickTrace(np.asarray(out))


@dataclass(frozen=True)
class NetworkResult:
    outputs: tuple      # per-node enhanced TickTrace
    arrivals: tuple     # per-node raw arrival TickTrace


def run_network(scenario: NetworkScenario, seed: int) -> NetworkResult:
    """Simulate one scenario trial.

    The central clock uses the random stream (seed, 0); node i uses
    (seed, i + 1).  Nodes only see their own arrival trace, never each
    other's state.
    """
    for i, node in enumerate(scenario.nodes):
        _check_node(scenario, node, i)
    rng_c = np.random.default_rng([seed, 0])
    n_broadcast = 4 * (scenario.n_outputs + 2)
    waits = np.atleast_1d(scenario.central.sample(rng_c, n_broadcast))
    broadcast = np.cumsum(waits)
    outputs = []
    arrivals = []
    for i, node in enumerate(scenario.nodes):
        rng = np.random.default_rng([seed, i + 1])
        arr = _arrivals(broadcast, node, rng)
        outputs.append(_run_node(arr, node.ec, scenario.n_outputs, rng))
        arrivals.append(TickTrace(arr))
    return NetworkResult(outputs=tuple(outputs), arrivals=tuple(arrivals))


def plan_scenario(central: WaitingTimeDistribution, n_nodes: int,
                  jitter_width: float, d: int, eta: float = 0.1,
                  eps: float = 0.01, eps_ec: float = 0.001,
                  n_outputs: int = 5,
                  sigma_scale: float = 1.0) -> NetworkScenario:
    """Build a symmetric scenario around a central clock.

    All nodes get the same EC (dimension d, common period) and link delays
    near half an EC period, staggered slightly, so the expected first
    arrival sits at phase 0 of the pre-synchronized EC grid.  The period
    is the largest admissible one (smallest half-integer divisor of the
    central mean) whose safe phase band comfortably absorbs the central
    spread plus the link jitter.  ``sigma_scale`` shrinks the EC window
    width without touching anything else.
    """
    if n_nodes < 2:
        raise ValueError("a network needs at least 2 nodes")
    if jitter_width < 0:
        raise ValueError("jitter width must be nonnegative")
    if not 0.0 < sigma_scale <= 1.0:
        raise ValueError("sigma_scale must lie in (0, 1]")
    conf = central.confidence(eps)
    # the period is planned with the unscaled window so that shrinking
    # the window afterwards never changes the tick grid
    ratio = quasi_ideal_ratio(d, eta)
    chosen = None
    for m in range(64, 0, -1):
        tau = conf.mu / (m + 0.5)
        band = (tau - ratio * tau) / 2
        off_span = 0.1 * band
        if conf.sigma / 2 + jitter_width / 2 + off_span / 2 \
                <= _PHASE_MARGIN * band:
            chosen = (m, tau, band, off_span)
            break
    if chosen is None:
        raise ValueError(
            "no EC period accommodates this central spread and jitter")
    m, tau, band, off_span = chosen
    ec = ExplicitEC(tau=tau, sigma=ratio * sigma_scale * tau,
                    eps_tail=eps_ec)
    jitter = None
    if jitter_width > 0:
        jitter = Box(center=jitter_width, width=jitter_width)
    nodes = []
    for i in range(n_nodes):
        offset = off_span * (i / (n_nodes - 1) - 0.5)
        nodes.append(NodeConfig(delay=tau / 2 + offset, ec=ec,
                                jitter=jitter, name=f"node-{i}"))
    return NetworkScenario(central=central, nodes=tuple(nodes),
                           n_outputs=n_outputs, eps=eps)


def cross_node_spread(traces, k: int, eps: float = 0.0):
    """Spread of the k-th tick (0-based) across nodes.

    Returns (range, trimmed width), where the trimmed width is that of the
    narrowest interval containing at least ceil((1 - eps) n) of the n
    node values.
    """
    values = []
    for trace in traces:
        if len(trace) <= k:
            raise ValueError("a trace has too few ticks for this index")
        values.append(trace[k])
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    if not 0.0 <= eps < 1.0:
        raise ValueError("tail level must lie in [0, 1)")
    m = max(1, math.ceil((1.0 - eps) * n - 1e-9))
    widths = x[m - 1:] - x[: n - m + 1]
    return float(x[-1] - x[0]), float(widths.min())
