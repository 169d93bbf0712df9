import itertools
import math

import numpy as np
import pytest

from wbell import qmath
from wbell.inequalities import (
    CIRELSON_BOUND,
    ChshSpec,
    bell_operator,
    canonical_chsh_observables,
    ch_lhv_status,
    ch_value,
    chsh_report,
    chsh_value,
    joint_prob_from_correlations,
    lhv_enumerate_ch,
    lhv_enumerate_chsh,
    lhv_enumerate_w_selection,
    map_chsh_bound_to_ch,
    sampled_chsh_block,
    sampled_chsh_values,
    tsirelson_max,
)
from wbell.scenario import MeasurementSetup, QuantumState, SpinObservable, born_distribution, correlation, make_singlet
from wbell.selection import XK, SignLinear, counterfactual_correlations

SQ2 = math.sqrt(2.0)


def test_chsh_value_w_counterfactual():
    c = counterfactual_correlations()
    v = chsh_value(c["ZZ"], c["ZX"], c["XZ"], c["XX"], ChshSpec(XK, XK))
    assert v == SignLinear(3.0, 0.0)
    report = chsh_report(v)
    assert report.violated_lhv and report.violated_cirelson


def test_chsh_value_singlet_canonical():
    # singlet: C(t1, t2) = -cos(t1 - t2) for plane observables
    s = make_singlet()
    A, a, B, b = (SpinObservable.plane(t) for t in (0.0, math.pi / 2, 3 * math.pi / 4, math.pi / 4))

    def corr(o1, o2):
        return correlation(born_distribution(s, MeasurementSetup([o1, o2])), [1, 2])

    v = chsh_value(corr(A, B), corr(A, b), corr(a, B), corr(a, b), ChshSpec(1, 1))
    assert v == SignLinear(pytest.approx(2 * SQ2, abs=1e-12), 0.0)


def test_chsh_value_zero():
    assert chsh_value(0, 0, 0, 0) == SignLinear(0.0, 0.0)


def test_chsh_spec_validation():
    with pytest.raises(ValueError):
        ChshSpec(2, 1)
    with pytest.raises(ValueError):
        ChshSpec(SignLinear(1.0, 1.0), 1)


def test_ch_value_examples():
    assert ch_value(1, 0, 0, 0.75) == pytest.approx(0.25)
    assert ch_value(0.25, 0.25, 0.25, 0.25) == pytest.approx(-0.5)
    v = ch_value(0, 1, 1, 1)
    assert v == -3 and ch_lhv_status(v) == "below"
    assert ch_lhv_status(0.25) == "above"
    with pytest.raises(ValueError):
        ch_value(1.1, 0, 0, 0)


def test_bound_map():
    assert map_chsh_bound_to_ch(2) == 0
    assert map_chsh_bound_to_ch(2 * SQ2) == pytest.approx((SQ2 - 1) / 2, abs=1e-15)
    assert map_chsh_bound_to_ch(3) == 0.25
    xs = np.linspace(-4, 4, 17)
    ys = [map_chsh_bound_to_ch(x) for x in xs]
    assert all(b > a for a, b in zip(ys, ys[1:]))


def test_bound_map_links_enumerations():
    chsh = lhv_enumerate_chsh()
    ch = lhv_enumerate_ch()
    assert map_chsh_bound_to_ch(chsh.maximum) == ch.maximum
    assert map_chsh_bound_to_ch(-chsh.maximum) == ch.minimum


def test_joint_prob_examples():
    assert joint_prob_from_correlations(-1, -1, -1, -1, 1) == 1
    assert joint_prob_from_correlations(1, 1, 0, 0, 0) == 0.25
    assert joint_prob_from_correlations(1, -1, 1, -1, -1) == 1
    with pytest.raises(ValueError):
        joint_prob_from_correlations(1, 1, 1.5, 0, 0)


def test_joint_prob_matches_born_for_random_states():
    rng = np.random.default_rng(11)
    for _ in range(25):
        psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        state = QuantumState(psi / np.linalg.norm(psi))
        setup = MeasurementSetup(SpinObservable.plane(t) for t in rng.uniform(-np.pi, np.pi, 2))
        d = born_distribution(state, setup)
        ci, cj, cij = correlation(d, [1]), correlation(d, [2]), correlation(d, [1, 2])
        for si, sj in itertools.product((1, -1), repeat=2):
            assert joint_prob_from_correlations(si, sj, ci, cj, cij) == pytest.approx(d[(si, sj)], abs=1e-10)


def test_lhv_chsh_enumeration():
    e = lhv_enumerate_chsh()
    assert e.maximum == 2 and e.cases == 64
    assert set(e.per_mn_max.values()) == {2}
    assert all(c > 0 for c in e.per_mn_attaining.values())
    assert isinstance(e.maximum, int)


def test_lhv_w_selection_enumeration():
    e = lhv_enumerate_w_selection()
    assert e.maximum == 2 and e.cases == 24
    assert set(abs(v) for v in e.values) == {2}
    assert 3 > e.maximum


def test_lhv_w_selection_matches_closed_form():
    # 1 + x_k (x_i + x_j) - x_i x_j for selected pairs (z_i = z_j = -1)
    vals = sorted(1 + xk * (xi + xj) - xi * xj for xi, xj, xk in itertools.product((1, -1), repeat=3))
    assert sorted(lhv_enumerate_w_selection().values) == sorted(vals * 3)


def test_lhv_ch_enumeration():
    e = lhv_enumerate_ch()
    assert (e.minimum, e.maximum) == (-1, 0)
    assert e.attaining_max > 0 and e.attaining_min > 0


def test_bell_operator_canonical_spectrum():
    B = bell_operator(*canonical_chsh_observables())
    np.testing.assert_allclose(qmath.hermitian_eigenvalues(B), [-2 * SQ2, 0, 0, 2 * SQ2], atol=1e-9)


@pytest.mark.parametrize("m, n", list(itertools.product((1, -1), repeat=2)))
def test_bell_operator_commuting_choice(m, n):
    A = SpinObservable.plane(0.3)
    B = SpinObservable.plane(-1.1)
    assert qmath.spectral_norm(bell_operator(A, A, B, B, ChshSpec(m, n))) <= 2 + 1e-12


def test_bell_operator_all_z():
    z = SpinObservable.z()
    vals = qmath.hermitian_eigenvalues(bell_operator(z, z, z, z))
    assert max(abs(vals)) <= 2 + 1e-12
    # m = n = 1 collapses to -2 Z(x)Z
    np.testing.assert_allclose(vals, [-2, -2, 2, 2], atol=1e-12)


def test_bell_operator_rejects_symbolic():
    z = SpinObservable.z()
    with pytest.raises(ValueError):
        bell_operator(z, z, z, z, ChshSpec.w_selection())


def test_random_bell_operators_respect_cirelson():
    rng = np.random.default_rng(5)
    for _ in range(300):
        obs = [SpinObservable.plane(t) for t in rng.uniform(-np.pi, np.pi, 4)]
        m, n = rng.choice([1, -1], size=2)
        assert qmath.spectral_norm(bell_operator(*obs, ChshSpec(int(m), int(n)))) <= CIRELSON_BOUND + 1e-9


def test_sampled_values_deterministic_and_bounded():
    a = sampled_chsh_values(5000, 3)
    b = sampled_chsh_values(5000, 3)
    np.testing.assert_array_equal(a, b)
    assert a.max() <= CIRELSON_BOUND + 1e-9


def test_sampling_independent_of_partition():
    whole = sampled_chsh_values(25_000, 9)
    parts = [sampled_chsh_block(9, 2, 5_000), sampled_chsh_block(9, 0), sampled_chsh_block(9, 1)]
    np.testing.assert_array_equal(whole, np.concatenate([parts[1], parts[2], parts[0]]))
    assert max(p.max() for p in parts) == whole.max()


def test_product_states_stay_local():
    vals = sampled_chsh_values(20000, 4, product_states=True)
    assert vals.max() <= 2 + 1e-9
    r = tsirelson_max(2000, 4, product_states=True)
    assert r.refined_max <= 2 + 1e-9


def test_tsirelson_refined():
    r = tsirelson_max(2000, 7)
    assert r.refined_max == pytest.approx(CIRELSON_BOUND, abs=1e-6)
    assert r.refined_max <= CIRELSON_BOUND + 1e-9
    assert r.within_bound
