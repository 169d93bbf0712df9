"""Simulated five-setup coincidence experiment, CH estimator and noise sweeps.

Randomness comes from numpy's PCG64 generator (``numpy.random.default_rng``)
seeded with an explicit integer; the same inputs and seed always produce the
same counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .scenario import (
    MeasurementSetup,
    Outcome,
    OutcomeDistribution,
    QuantumState,
    born_distribution,
    make_w_state,
    outcomes,
    white_noise,
)
from .selection import CH_SETUPS, ch_lower_bound, ch_terms

Z95 = 1.96


@dataclass(frozen=True)
class CountsTable:
    setup: MeasurementSetup
    counts: Mapping[Outcome, int]
    shots: int

    def __post_init__(self):
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("counts must be non-negative")
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to shots")

    def frequencies(self) -> OutcomeDistribution:
        if self.shots <= 0:
            raise ValueError(f"table for {self.setup.label} has no shots")
        return OutcomeDistribution(self.setup, {o: c / self.shots for o, c in self.counts.items()})


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_counts(state: QuantumState, setup: MeasurementSetup, shots: int, seed) -> CountsTable:
    """Multinomial draw of ``shots`` joint outcomes from the Born distribution.

    ``seed`` is an integer or an existing ``numpy.random.Generator``.
    Round-off negatives (|p| < 1e-12) are clipped before sampling.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    dist = born_distribution(state, setup)
    outs = outcomes(setup.num_qubits)
    p = np.clip(np.array([dist[o] for o in outs]), 0.0, None)
    p /= p.sum()
    draws = _rng(seed).multinomial(shots, p)
    return CountsTable(setup, {o: int(c) for o, c in zip(outs, draws)}, shots)


def expected_counts(state: QuantumState, setup: MeasurementSetup, shots: int) -> CountsTable:
    """Counts equal to the exact probabilities scaled by ``shots`` and rounded (no sampling)."""
    dist = born_distribution(state, setup)
    counts = {o: int(round(max(dist[o], 0.0) * shots)) for o in outcomes(setup.num_qubits)}
    return CountsTable(setup, counts, sum(counts.values()))


def simulate_experiment(state: QuantumState, shots: int, seed) -> dict[str, CountsTable]:
    """Counts for the five CH setups, drawn in a fixed order from one generator."""
    rng = _rng(seed)
    return {label: sample_counts(state, MeasurementSetup.from_label(label), shots, rng)
            for label in CH_SETUPS}


@dataclass(frozen=True)
class ChEstimate:
    value: float
    sigma: float
    ci95: tuple[float, float]
    terms: Mapping[str, float]

    def contains(self, x: float) -> bool:
        return self.ci95[0] <= x <= self.ci95[1]


def _binomial_var(rate: float, n: int) -> float:
    return rate * (1.0 - rate) / n


def estimate_ch(tables: Mapping[str, CountsTable]) -> ChEstimate:
    """CH lower-bound estimate from coincidence counts with a normal 95% interval.

    Setups are independent; each aggregated term (the ZZZ four-outcome sum,
    each setup's share of the six-term sum, and the XXX two-outcome sum) is
    treated as a binomial rate.
    """
    missing = [s for s in CH_SETUPS if s not in tables]
    if missing:
        raise ValueError(f"missing setups: {', '.join(missing)}")
    for label in CH_SETUPS:
        if tables[label].setup.label != label:
            raise ValueError(f"table under key {label} holds setup {tables[label].setup.label}")
        if tables[label].shots <= 0:
            raise ValueError(f"table {label} has zero shots")
    freqs = {label: tables[label].frequencies() for label in CH_SETUPS}
    terms = ch_terms(freqs)

    var = _binomial_var(terms["p_zz"], tables["ZZZ"].shots)
    mid_parts = {
        "ZXX": freqs["ZXX"][(-1, 1, -1)] + freqs["ZXX"][(-1, -1, 1)],
        "XZX": freqs["XZX"][(1, -1, -1)] + freqs["XZX"][(-1, -1, 1)],
        "XXZ": freqs["XXZ"][(1, -1, -1)] + freqs["XXZ"][(-1, 1, -1)],
    }
    for label, rate in mid_parts.items():
        var += _binomial_var(rate, tables[label].shots)
    var += _binomial_var(terms["p_xx"], tables["XXX"].shots)

    sigma = math.sqrt(max(var, 0.0))
    value = terms["ch_lower"]
    return ChEstimate(value, sigma, (value - Z95 * sigma, value + Z95 * sigma), terms)


@dataclass(frozen=True)
class SweepRow:
    p: float
    ch_lower_exact: float
    estimate: float | None = None
    sigma: float | None = None


def noise_sweep(p_from: float, p_to: float, steps: int, mode: str = "exact",
                shots: int = 100_000, seed: int = 0, state: QuantumState | None = None) -> list[SweepRow]:
    """Exact (and optionally sampled) CH lower bound along a white-noise grid.

    In ``"sampled"`` mode point ``idx`` uses seed ``seed + idx``.
    """
    if not 0.0 <= p_from <= p_to <= 1.0:
        raise ValueError(f"invalid noise range [{p_from}, {p_to}]")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if mode not in ("exact", "sampled"):
        raise ValueError(f"unknown sweep mode {mode!r}")
    base = make_w_state() if state is None else state
    rows = []
    for idx, p in enumerate(np.linspace(p_from, p_to, steps)):
        p = float(p)
        noisy = white_noise(base, p)
        exact = ch_lower_bound(noisy)
        if mode == "sampled":
            est = estimate_ch(simulate_experiment(noisy, shots, seed + idx))
            rows.append(SweepRow(p, exact, est.value, est.sigma))
        else:
            rows.append(SweepRow(p, exact))
    return rows


def noise_threshold(target: float, tol: float = 1e-10, state: QuantumState | None = None) -> float:
    """Noise level p in [0, 1] at which the exact CH lower bound equals ``target`` (bisection)."""
    base = make_w_state() if state is None else state
    f = lambda p: ch_lower_bound(white_noise(base, p))  # noqa: E731
    lo, hi = 0.0, 1.0
    f_lo, f_hi = f(lo), f(hi)
    if not min(f_lo, f_hi) <= target <= max(f_lo, f_hi):
        raise ValueError(f"target {target!r} outside attained range [{min(f_lo, f_hi)}, {max(f_lo, f_hi)}]")
    decreasing = f_lo > f_hi
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        above = f(mid) > target
        if above == decreasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
