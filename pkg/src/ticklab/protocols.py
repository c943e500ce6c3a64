"""Accuracy enhancing protocols and their analytic bounds.

Four protocols turn the ticks of a noisy i.i.d. input clock into a more
accurate output tick signal:

1. dynamics switching: each input tick switches a local enhancing clock
   (EC) into tick mode; the EC tick is the output and resets the EC;
2. dynamics switching with feedback: as 1, but the input clock is also
   reset at every output tick, making the output gaps i.i.d.;
3. input bunching: every d-th input tick is an output tick;
4. EC bunching: the EC free-runs and the first EC tick at or after each
   input tick is the output tick.

The module also houses the period-selection rules for protocols 1 and 2,
the closed-form inaccuracy bounds for the first two protocols, and the
Monte-Carlo trial runner.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .clocks import (InputClock, RenewalProcess, quasi_ideal_ratio,
                     sample_tick_phase, wrap_phase)
from .distributions import WaitingTimeDistribution
from .inaccuracy import InaccuracyEstimate, empirical_inaccuracy
from .trace import TickTrace

_M_CAP = 10 ** 6


def choose_period_no_feedback(mu_in: float, sigma_in: float,
                              j: int = 1) -> tuple[int, float]:
    """Pick the EC period for dynamics switching without feedback.

    Solves mu_in = (m + 1/2) tau for the largest integer m such that
    j * sigma_in lies in [mu_in / (m + 3/2), mu_in / (m + 1/2)); then the
    input confidence interval up to tick j still fits inside one EC period.
    """
    if mu_in <= 0 or sigma_in < 0:
        raise ValueError("need mu_in > 0 and sigma_in >= 0")
    if j < 1:
        raise ValueError("tick index must be a positive integer")
    if sigma_in >= 2.0 * mu_in / 3.0:
        raise ValueError("input inaccuracy must be below 2/3")
    if sigma_in > 0 and j >= 2.0 * mu_in / (3.0 * sigma_in):
        raise ValueError("tick index too large for this input inaccuracy")
    if sigma_in == 0:
        m = _M_CAP
    else:
        x = mu_in / (j * sigma_in)
        m = max(1, math.ceil(x - 1.5))
        if m > _M_CAP:
            m = _M_CAP
        else:
            # bracket check, with a little float slack on the closed end
            assert mu_in / (m + 1.5) <= j * sigma_in * (1 + 1e-12)
            assert j * sigma_in < mu_in / (m + 0.5)
    return m, mu_in / (m + 0.5)


def choose_period_feedback(mu_in: float,
                           sigma_in: float) -> tuple[int, float]:
    """Pick the EC period for dynamics switching with feedback.

    Solves mu_in = m tau for the integer m with sigma_in in
    [mu_in / (m + 1), mu_in / m).
    """
    if mu_in <= 0 or sigma_in < 0:
        raise ValueError("need mu_in > 0 and sigma_in >= 0")
    if sigma_in >= mu_in:
        raise ValueError("input inaccuracy must be below 1")
    if sigma_in == 0:
        m = _M_CAP
    else:
        m = max(1, math.ceil(mu_in / sigma_in) - 1)
        if m > _M_CAP:
            m = _M_CAP
        else:
            assert mu_in / (m + 1) <= sigma_in * (1 + 1e-12)
            assert sigma_in < mu_in / m * (1 + 1e-12)
    return m, mu_in / m


def ec_bar_sigma(sigma_ec: float, tau: float) -> float:
    """Inaccuracy upper bound 2 sigma / tau of an enhancing clock."""
    if not 0.0 < sigma_ec < tau:
        raise ValueError("need 0 < sigma_ec < tau")
    return 2.0 * sigma_ec / tau


def theorem1_bound(sigma_in: float, bar_sigma_ec: float, j: int) -> float:
    """Inaccuracy bound (5 j^2 / 6) Sigma_in bar_Sigma_EC for the j-th
    output of dynamics switching without feedback, at tail level j eps0."""
    if not 0.0 <= sigma_in < 2.0 / 3.0:
        raise ValueError("input inaccuracy must be below 2/3")
    if j < 1:
        raise ValueError("tick index must be a positive integer")
    if sigma_in > 0 and j >= 2.0 / (3.0 * sigma_in):
        raise ValueError("tick index too large for this input inaccuracy")
    return 5.0 * j * j / 6.0 * sigma_in * bar_sigma_ec


def theorem2_bound(sigma_in: float, bar_sigma_ec: float) -> float:
    """Per-tick inaccuracy bound Sigma_in bar_Sigma_EC for the i.i.d.
    output of dynamics switching with feedback."""
    if not 0.0 <= sigma_in < 1.0:
        raise ValueError("input inaccuracy must be below 1")
    return sigma_in * bar_sigma_ec


def corollary_bounds(sigma_in: float, d: int, nu: float,
                     j: int) -> tuple[float, float]:
    """Bounds with the EC inaccuracy replaced by its d-dimensional scaling
    2 / d^(1-nu): ((5 j^2 / 3) Sigma_in / d^(1-nu), 2 Sigma_in / d^(1-nu))."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    if not 0.0 < nu < 1.0:
        raise ValueError("nu must lie in (0, 1)")
    if j < 1:
        raise ValueError("tick index must be a positive integer")
    scale = d ** (1.0 - nu)
    return (5.0 * j * j / 3.0 * sigma_in / scale, 2.0 * sigma_in / scale)


def output_epsilon_budget(eps: float, eps_ec: float, j: int) -> float:
    """Tail level j eps + (j + 1) eps_ec of the j-th output confidence
    interval, capped at 1."""
    if not 0.0 <= eps <= 1.0 or not 0.0 <= eps_ec <= 1.0:
        raise ValueError("tail levels must lie in [0, 1]")
    if j < 1:
        raise ValueError("tick index must be a positive integer")
    return min(1.0, j * eps + (j + 1) * eps_ec)


class Protocol(Enum):
    DYN_SWITCH = "dyn-switch"
    DYN_SWITCH_FEEDBACK = "dyn-switch-feedback"
    INPUT_BUNCH = "input-bunch"
    EC_BUNCH = "ec-bunch"


@dataclass(frozen=True)
class QuasiIdealSpec:
    """EC given by its dimension; the period is chosen by the protocol."""

    d: int
    eta: float = 0.1
    eps_tail: float = 0.001


@dataclass(frozen=True)
class ExplicitEC:
    """EC with a caller-fixed period and window width."""

    tau: float
    sigma: float
    eps_tail: float


@dataclass(frozen=True)
class FreeRunEC:
    """Free-running EC for the EC-bunching protocol: mean tick gap mu,
    window width sigma, tail eps_tail."""

    mu: float
    sigma: float
    eps_tail: float


@dataclass(frozen=True)
class ProtocolConfig:
    protocol: Protocol
    input_dist: WaitingTimeDistribution
    eps: float
    n_ticks: int
    ec: QuasiIdealSpec | ExplicitEC | FreeRunEC | None = None
    bunch: int | None = None          # counter capacity of input bunching
    period_tick: int = 1              # j targeted by the period chooser
    horizon: float | None = None
    restart_every: int | None = None

    def __post_init__(self):
        if self.n_ticks < 1:
            raise ValueError("need at least one output tick")
        if not 0.0 <= self.eps < 1.0:
            raise ValueError("tail level must lie in [0, 1)")
        if self.horizon is not None and self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.restart_every is not None and self.restart_every < 1:
            raise ValueError("restart period must be a positive integer")
        if self.protocol is Protocol.INPUT_BUNCH:
            if self.bunch is None or self.bunch < 1:
                raise ValueError("input bunching needs a counter capacity")
        elif self.ec is None:
            raise ValueError(f"{self.protocol.value} needs an EC spec")


@dataclass(frozen=True)
class PreparedRun:
    """Resolved parameters of one protocol configuration."""

    cfg: ProtocolConfig
    mu_in: float
    sigma_in: float
    tau: float | None
    m: int | None
    sigma_ec: float | None
    eps_ec: float | None
    mu_ec: float | None
    horizon: float
    # j up to which each theorem hypothesis admits the run
    theorem_j_limit: float | None = None
    cond_j_limit: float | None = None

    @property
    def bar_sigma_ec(self) -> float:
        if self.tau is not None:
            return ec_bar_sigma(self.sigma_ec, self.tau)
        return ec_bar_sigma(self.sigma_ec, 2.0 * self.mu_ec)


def _ec_bunch_mean(mu_in: float, sigma_in: float, ratio: float) -> float:
    """Mean EC tick gap for EC bunching with a d-dimensional EC.

    Uses mu_ec = mu_in / (m + 1/2) so the input confidence interval sits
    mid-gap on the EC tick grid, with the largest m whose accumulated EC
    jitter over a cycle stays well clear of the grid spacing.
    """
    best = 1
    for m in range(1, 64):
        mu_ec = mu_in / (m + 0.5)
        sigma_tick = 2.0 * ratio * mu_ec
        if mu_ec > sigma_in and \
                (m + 1) * sigma_tick <= 0.9 * (mu_ec - sigma_in):
            best = m
    return mu_in / (best + 0.5)


def prepare(cfg: ProtocolConfig) -> PreparedRun:
    """Resolve periods, widths and diagnostics before running trials."""
    interval = cfg.input_dist.confidence(cfg.eps)
    mu_in, sigma_in = interval.mu, interval.sigma
    tau = m = sigma_ec = eps_ec = mu_ec = None
    theorem_j = cond_j = None

    if cfg.protocol in (Protocol.DYN_SWITCH, Protocol.DYN_SWITCH_FEEDBACK):
        if isinstance(cfg.ec, QuasiIdealSpec):
            if cfg.protocol is Protocol.DYN_SWITCH:
                m, tau = choose_period_no_feedback(mu_in, sigma_in,
                                                   cfg.period_tick)
            else:
                m, tau = choose_period_feedback(mu_in, sigma_in)
            sigma_ec = quasi_ideal_ratio(cfg.ec.d, cfg.ec.eta) * tau
            eps_ec = cfg.ec.eps_tail
        elif isinstance(cfg.ec, ExplicitEC):
            tau, sigma_ec, eps_ec = cfg.ec.tau, cfg.ec.sigma, cfg.ec.eps_tail
        else:
            raise ValueError("dynamics switching needs a switchable EC")
        if sigma_ec >= tau:
            raise ValueError("EC window width reaches the chosen period")
        if cfg.protocol is Protocol.DYN_SWITCH_FEEDBACK \
                and sigma_in >= tau - sigma_ec:
            raise ValueError(
                "input confidence width must stay below tau - sigma_ec")
        if sigma_in > 0:
            theorem_j = 2.0 * mu_in / (3.0 * sigma_in)
        if sigma_ec + sigma_in > 0:
            cond_j = (tau - sigma_ec) / (sigma_ec + sigma_in)
        horizon = cfg.horizon or 4.0 * (mu_in + tau) * (cfg.n_ticks + 2)

    elif cfg.protocol is Protocol.INPUT_BUNCH:
        horizon = cfg.horizon or 4.0 * mu_in * cfg.bunch * (cfg.n_ticks + 1)

    else:  # EC_BUNCH
        if isinstance(cfg.ec, FreeRunEC):
            mu_ec, sigma_ec, eps_ec = cfg.ec.mu, cfg.ec.sigma, cfg.ec.eps_tail
        elif isinstance(cfg.ec, QuasiIdealSpec):
            ratio = quasi_ideal_ratio(cfg.ec.d, cfg.ec.eta)
            lo, hi = cfg.input_dist.support() or (mu_in - sigma_in / 2,
                                                  mu_in + sigma_in / 2)
            mu_ec = _ec_bunch_mean(mu_in, hi - lo, ratio)
            sigma_ec = 2.0 * ratio * mu_ec
            eps_ec = cfg.ec.eps_tail
        else:
            raise ValueError("EC bunching needs a free-running EC")
        if sigma_in >= mu_ec:
            raise ValueError(
                "input confidence width must stay below the EC tick gap")
        horizon = cfg.horizon or 4.0 * (mu_in + mu_ec) * (cfg.n_ticks + 2)

    return PreparedRun(cfg=cfg, mu_in=mu_in, sigma_in=sigma_in, tau=tau,
                       m=m, sigma_ec=sigma_ec, eps_ec=eps_ec, mu_ec=mu_ec,
                       horizon=horizon, theorem_j_limit=theorem_j,
                       cond_j_limit=cond_j)


def _run_switching(prep: PreparedRun, rng, feedback: bool) -> TickTrace:
    cfg = prep.cfg
    tau, sigma_ec, eps_ec = prep.tau, prep.sigma_ec, prep.eps_ec
    proc = RenewalProcess(InputClock(cfg.input_dist), rng)
    out = []
    t_in = proc.next_tick()
    s = 0.0  # EC reset when the first input tick arrives
    truncated = False
    while len(out) < cfg.n_ticks:
        phi = sample_tick_phase(tau, sigma_ec, eps_ec, rng)
        duration = phi - s
        if phi <= s:
            duration += tau
        t_out = t_in + duration
        if t_out > prep.horizon:
            truncated = True
            break
        out.append(t_out)
        restart = cfg.restart_every is not None \
            and len(out) % cfg.restart_every == 0
        if feedback:
            proc.reset(t_out)
            t_in = proc.next_tick()
        else:
            t_in = proc.next_after(t_out)
        # the EC idles from its reset at t_out until the next input tick;
        # an explicit restart re-zeroes it at that tick instead
        s = 0.0 if restart else wrap_phase(t_in - t_out, tau)
    return TickTrace(np.asarray(out), truncated=truncated,
                     n_ignored_inputs=proc.n_skipped)


def run_dyn_switch(prep: PreparedRun, rng) -> TickTrace:
    """Dynamics switching without feedback."""
    return _run_switching(prep, rng, feedback=False)


def run_dyn_switch_feedback(prep: PreparedRun, rng) -> TickTrace:
    """Dynamics switching with the input clock reset at every output."""
    return _run_switching(prep, rng, feedback=True)


def run_input_bunch(prep: PreparedRun, rng) -> TickTrace:
    """Every d-th input tick is an output tick."""
    cfg = prep.cfg
    d = cfg.bunch
    waits = np.atleast_1d(cfg.input_dist.sample(rng, cfg.n_ticks * d))
    ticks = np.cumsum(waits)
    out = ticks[d - 1::d]
    keep = out <= prep.horizon
    return TickTrace(out[keep], truncated=not keep.all())


class _FreeRunEC:
    """Lazily extended tick grid of a free-running EC."""

    def __init__(self, mu, sigma, eps_tail, rng, block=256):
        self.tau = 2.0 * mu
        self.sigma = sigma
        self.eps_tail = eps_tail
        self._rng = rng
        self._block = block
        self.ticks = np.empty(0)

    def _extend(self):
        phi = np.atleast_1d(sample_tick_phase(
            self.tau, self.sigma, self.eps_tail, self._rng, self._block))
        gaps = np.where(phi > 0, phi, phi + self.tau)
        last = self.ticks[-1] if self.ticks.size else 0.0
        self.ticks = np.concatenate([self.ticks, last + np.cumsum(gaps)])

    def first_at_or_after(self, t: float) -> float:
        while self.ticks.size == 0 or self.ticks[-1] < t:
            self._extend()
        i = int(np.searchsorted(self.ticks, t, side="left"))
        return float(self.ticks[i])


def run_ec_bunch(prep: PreparedRun, rng) -> TickTrace:
    """Output the first tick of a free-running EC at or after each input
    tick; the next input tick considered is the first one strictly after
    the previous output."""
    cfg = prep.cfg
    ec = _FreeRunEC(prep.mu_ec, prep.sigma_ec, prep.eps_ec, rng)
    proc = RenewalProcess(InputClock(cfg.input_dist), rng)
    out = []
    t_prev = 0.0
    truncated = False
    while len(out) < cfg.n_ticks:
        t_in = proc.next_after(t_prev)
        t_out = ec.first_at_or_after(t_in)
        if t_out > prep.horizon:
            truncated = True
            break
        out.append(t_out)
        t_prev = t_out
    return TickTrace(np.asarray(out), truncated=truncated,
                     n_ignored_inputs=proc.n_skipped)


_RUNNERS = {
    Protocol.DYN_SWITCH: run_dyn_switch,
    Protocol.DYN_SWITCH_FEEDBACK: run_dyn_switch_feedback,
    Protocol.INPUT_BUNCH: run_input_bunch,
    Protocol.EC_BUNCH: run_ec_bunch,
}


def run_protocol(prep: PreparedRun, rng) -> TickTrace:
    return _RUNNERS[prep.cfg.protocol](prep, rng)


@dataclass(frozen=True)
class TrialMatrix:
    """Per-trial output tick times, referenced to the trial origin.

    For the switching protocols the entry at column j (1-based) is
    t_out_j - t_out_0, so tick j spans j protocol cycles; each trial runs
    one extra output to anchor t_out_0.  For the bunching protocols the
    entry is the j-th output time itself.  Truncated trials hold NaN rows
    and are excluded from estimates.
    """

    prep: PreparedRun
    data: np.ndarray
    truncated: np.ndarray
    n_ignored: np.ndarray

    @property
    def n_trials(self) -> int:
        return self.data.shape[0]

    @property
    def n_truncated(self) -> int:
        return int(self.truncated.sum())

    def tick_samples(self, j: int) -> np.ndarray:
        if not 1 <= j <= self.data.shape[1]:
            raise ValueError("tick index out of range")
        return self.data[~self.truncated, j - 1]

    def estimate(self, j: int, eps: float) -> InaccuracyEstimate:
        return empirical_inaccuracy(self.tick_samples(j), j, eps)


def monte_carlo(cfg: ProtocolConfig, trials: int,
                seed: int) -> TrialMatrix:
    """Run independent trials with per-trial random streams derived from
    (seed, trial index); the result is bit-identical for a fixed seed
    regardless of execution order."""
    if trials < 1:
        raise ValueError("need at least one trial")
    prep = prepare(cfg)
    switching = cfg.protocol in (Protocol.DYN_SWITCH,
                                 Protocol.DYN_SWITCH_FEEDBACK)
    n_out = cfg.n_ticks + 1 if switching else cfg.n_ticks
    data = np.full((trials, cfg.n_ticks), np.nan)
    truncated = np.zeros(trials, dtype=bool)
    n_ignored = np.zeros(trials, dtype=int)
    run_cfg = ProtocolConfig(
        protocol=cfg.protocol, input_dist=cfg.input_dist, eps=cfg.eps,
        n_ticks=n_out, ec=cfg.ec, bunch=cfg.bunch,
        period_tick=cfg.period_tick, horizon=prep.horizon,
        restart_every=cfg.restart_every)
    run_prep = prepare(run_cfg)
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        trace = run_protocol(run_prep, rng)
        n_ignored[i] = trace.n_ignored_inputs
        if trace.truncated or len(trace) < n_out:
            truncated[i] = True
            continue
        if switching:
            data[i] = trace.times[1:] - trace.times[0]
        else:
            data[i] = trace.times
    return TrialMatrix(prep=prep, data=data, truncated=truncated,
                       n_ignored=n_ignored)
