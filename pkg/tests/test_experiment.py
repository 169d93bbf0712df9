import math

import pytest

from wbell.experiment import (
    CountsTable,
    estimate_ch,
    expected_counts,
    noise_sweep,
    noise_threshold,
    sample_counts,
    simulate_experiment,
)
from wbell.scenario import MeasurementSetup, make_w_state, maximally_mixed, white_noise
from wbell.selection import CH_SETUPS, ch_lower_bound

CIRELSON_CH = (math.sqrt(2) - 1) / 2


def test_sample_counts_moments():
    shots = 300_000
    t = sample_counts(make_w_state(), MeasurementSetup.from_label("ZZZ"), shots, seed=5)
    assert sum(t.counts.values()) == shots
    sd = math.sqrt(shots * (1 / 3) * (2 / 3))
    for o in ((1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
        assert abs(t.counts[o] - 100_000) < 5 * sd
    assert t.counts[(1, 1, 1)] == 0


def test_single_shot():
    t = sample_counts(make_w_state(), MeasurementSetup.from_label("XXX"), 1, seed=0)
    assert sorted(t.counts.values())[-1] == 1 and sum(t.counts.values()) == 1


def test_sampling_is_deterministic():
    a = simulate_experiment(make_w_state(), 1000, 42)
    b = simulate_experiment(make_w_state(), 1000, 42)
    assert {k: dict(v.counts) for k, v in a.items()} == {k: dict(v.counts) for k, v in b.items()}
    c = simulate_experiment(make_w_state(), 1000, 43)
    assert {k: dict(v.counts) for k, v in a.items()} != {k: dict(v.counts) for k, v in c.items()}


def test_zero_shots_rejected():
    with pytest.raises(ValueError):
        sample_counts(make_w_state(), MeasurementSetup.from_label("ZZZ"), 0, seed=0)


def test_counts_table_invariant():
    with pytest.raises(ValueError):
        CountsTable(MeasurementSetup.from_label("Z"), {(1,): 3, (-1,): 1}, 5)


def test_estimate_ideal_w():
    est = estimate_ch(simulate_experiment(make_w_state(), 100_000, 1))
    assert 0.24 <= est.value <= 0.26
    assert not est.contains(CIRELSON_CH)
    assert est.sigma <= 0.003
    assert est.ci95 == pytest.approx((est.value - 1.96 * est.sigma, est.value + 1.96 * est.sigma))


def test_estimate_maximally_mixed():
    est = estimate_ch(simulate_experiment(maximally_mixed(3), 100_000, 2))
    assert est.value == pytest.approx(-0.5, abs=6 * est.sigma)


@pytest.mark.parametrize("p", [0.0, 0.2, 0.7])
def test_estimate_on_pseudo_counts_equals_exact(p):
    state = white_noise(make_w_state(), p)
    tables = {label: expected_counts(state, MeasurementSetup.from_label(label), 10**12) for label in CH_SETUPS}
    assert estimate_ch(tables).value == pytest.approx(ch_lower_bound(state), abs=1e-9)


def test_estimate_requires_all_setups():
    tables = simulate_experiment(make_w_state(), 100, 0)
    del tables["XZX"]
    with pytest.raises(ValueError, match="XZX"):
        estimate_ch(tables)


def test_estimate_rejects_mislabelled_table():
    tables = simulate_experiment(make_w_state(), 100, 0)
    tables["ZXX"], tables["XZX"] = tables["XZX"], tables["ZXX"]
    with pytest.raises(ValueError):
        estimate_ch(tables)


def test_exact_sweep_closed_form():
    rows = noise_sweep(0.0, 1.0, 11)
    assert len(rows) == 11
    for r in rows:
        assert r.ch_lower_exact == pytest.approx(0.25 - 0.75 * r.p, abs=1e-12)
        assert r.estimate is None and r.sigma is None
    assert rows[0].ch_lower_exact == pytest.approx(0.25, abs=1e-12)
    assert rows[-1].ch_lower_exact == pytest.approx(-0.5, abs=1e-12)
    vals = [r.ch_lower_exact for r in rows]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_sampled_sweep_seeds_per_point():
    rows = noise_sweep(0.0, 0.5, 3, mode="sampled", shots=2000, seed=10)
    again = noise_sweep(0.0, 0.5, 3, mode="sampled", shots=2000, seed=10)
    assert rows == again
    # point 1 of a sweep seeded 10 equals point 0 of a sweep seeded 11
    shifted = noise_sweep(0.25, 0.5, 2, mode="sampled", shots=2000, seed=11)
    assert shifted[0].estimate == rows[1].estimate


@pytest.mark.parametrize("args", [(0.5, 0.2, 5), (-0.1, 0.5, 5), (0.0, 1.0, 1)])
def test_sweep_invalid(args):
    with pytest.raises(ValueError):
        noise_sweep(*args)


def test_thresholds():
    assert noise_threshold(0.0) == pytest.approx(1 / 3, abs=1e-9)
    assert noise_threshold(CIRELSON_CH) == pytest.approx((3 - 2 * math.sqrt(2)) / 3, abs=1e-9)
    assert noise_threshold(0.25) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ValueError):
        noise_threshold(0.3)
