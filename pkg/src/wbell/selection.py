"""Pair-selection rules, counterfactual subensemble correlations and CH estimator terms.

The selected pair of a trio is the two qubits whose sigma_z value would be -1
(qubits ``i`` and ``j``); the remaining qubit is ``k`` and its unknown
sigma_x value is the sign ``x_k``.  Quantities depending on ``x_k`` are kept
symbolic as :class:`SignLinear` values so nothing ever branches on it.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Mapping, NamedTuple

from .qmath import STRUCT_TOL
from .scenario import (
    MeasurementSetup,
    OutcomeDistribution,
    QuantumState,
    born_distribution,
    conditional_probability,
    make_w_state,
)

# Fidelity slack allowed before the counterfactual chain refuses a state.
W_FIDELITY_TOL = 1e-9
# Slack for "with certainty" statements derived from floating-point distributions.
CERTAINTY_TOL = 1e-12

CH_SETUPS = ("ZZZ", "ZXX", "XZX", "XXZ", "XXX")


class SelectionRule(enum.Enum):
    W_MINUS_MINUS = "WMinusMinus"
    GHZ_RULE = "GhzRule"


class PairAssignment(NamedTuple):
    """Selected pair ``(i, j)`` (ascending) and the remaining qubit ``k``."""

    i: int
    j: int
    k: int

    @property
    def pair(self) -> frozenset[int]:
        return frozenset((self.i, self.j))


def classify_trio(rule: SelectionRule, z) -> PairAssignment | None:
    """Apply a selection rule to a z-pattern; ``None`` means the trio is not selected."""
    z = tuple(z)
    if len(z) != 3 or any(v not in (1, -1) for v in z):
        raise ValueError(f"z must be a triple of +/-1 values, got {z!r}")
    plus = [q for q in (1, 2, 3) if z[q - 1] == 1]
    if len(plus) == 1:
        i, j = (q for q in (1, 2, 3) if q != plus[0])
        return PairAssignment(i, j, plus[0])
    if rule is SelectionRule.GHZ_RULE and len(plus) == 3:
        # "any two" -- fixed to qubits 1 and 2 for reproducibility.
        return PairAssignment(1, 2, 3)
    return None


def membership_is_local(rule: SelectionRule) -> bool:
    """True iff every qubit can tell from its own z value whether it is selected."""
    seen: dict[tuple[int, int], bool] = {}
    for z in itertools.product((1, -1), repeat=3):
        assignment = classify_trio(rule, z)
        if assignment is None:
            continue
        for q in (1, 2, 3):
            member = q in assignment.pair
            key = (q, z[q - 1])
            if seen.setdefault(key, member) != member:
                return False
    return True


@dataclass(frozen=True)
class SignLinear:
    """The value ``c0 + c1 * x_k`` for an unknown sign ``x_k`` in {-1, +1}."""

    c0: float = 0.0
    c1: float = 0.0

    @classmethod
    def coerce(cls, value) -> "SignLinear":
        if isinstance(value, SignLinear):
            return value
        return cls(float(value), 0.0)

    def at(self, xk: int) -> float:
        if xk not in (1, -1):
            raise ValueError("x_k must be +1 or -1")
        return self.c0 + self.c1 * xk

    @property
    def values(self) -> tuple[float, float]:
        """Values at ``x_k = +1`` and ``x_k = -1``."""
        return self.at(1), self.at(-1)

    @property
    def is_constant(self) -> bool:
        return self.c1 == 0.0

    def __add__(self, other):
        o = SignLinear.coerce(other)
        return SignLinear(self.c0 + o.c0, self.c1 + o.c1)

    __radd__ = __add__

    def __neg__(self):
        return SignLinear(-self.c0, -self.c1)

    def __sub__(self, other):
        return self + (-SignLinear.coerce(other))

    def __rsub__(self, other):
        return SignLinear.coerce(other) - self

    def __mul__(self, other):
        o = SignLinear.coerce(other)
        # x_k ** 2 == 1
        return SignLinear(self.c0 * o.c0 + self.c1 * o.c1, self.c0 * o.c1 + self.c1 * o.c0)

    __rmul__ = __mul__

    def __str__(self) -> str:
        if self.c1 == 0:
            return f"{self.c0:g}"
        return f"{self.c0:g} {'+' if self.c1 >= 0 else '-'} {abs(self.c1):g}*x_k"


XK = SignLinear(0.0, 1.0)


def _setup_with(z_at: int, n: int = 3) -> MeasurementSetup:
    return MeasurementSetup.from_label("".join("Z" if q == z_at else "X" for q in range(1, n + 1)))


def _require_w(state: QuantumState) -> None:
    if state.num_qubits != 3:
        raise ValueError("counterfactual correlations need a three-qubit state")
    fid = state.fidelity(make_w_state())
    if fid < 1.0 - W_FIDELITY_TOL:
        raise ValueError(f"state is not the W state (fidelity {fid!r}); the counterfactual chain needs exact W")


def _certain(p: float) -> bool:
    return p >= 1.0 - CERTAINTY_TOL


def _x_relation_sign(state: QuantumState, z_at: int) -> int:
    """Sign s such that x_j = s * x_k with certainty whenever z at ``z_at`` is -1."""
    dist = born_distribution(state, _setup_with(z_at))
    others = [q for q in (1, 2, 3) if q != z_at]
    given = lambda o: o[z_at - 1] == -1  # noqa: E731
    same = conditional_probability(dist, lambda o: o[others[0] - 1] == o[others[1] - 1], given)
    if _certain(same):
        return 1
    if _certain(1.0 - same):
        return -1
    raise ValueError(f"x outcomes of qubits {others} are not perfectly correlated given z_{z_at} = -1")


def counterfactual_correlations(state: QuantumState | None = None) -> dict[str, SignLinear]:
    """Subensemble correlations C(Z_i,Z_j), C(Z_i,X_j), C(X_i,Z_j), C(X_i,X_j).

    Each value is derived from exact three-qubit distributions of the W state:

    * ``ZZ``: average of ``z_i z_j`` over the ZZZ outcomes accepted by the rule.
    * ``ZX``/``XZ``: given the Z-measured selected qubit reads -1, the two X
      outcomes are perfectly (anti)correlated, so ``z_i x_j = -s x_k``.
    * ``XX``: given ``z_k = 1``, same and opposite X outcomes of the other
      two are weighted by their conditional probabilities.
    """
    state = make_w_state() if state is None else state
    _require_w(state)

    zzz = born_distribution(state, MeasurementSetup.from_label("ZZZ"))
    accepted = 0.0
    zz = 0.0
    for z, p in zzz.items():
        a = classify_trio(SelectionRule.W_MINUS_MINUS, z)
        if a is None:
            continue
        accepted += p
        zz += p * z[a.i - 1] * z[a.j - 1]
    if accepted <= STRUCT_TOL:
        raise ValueError("no probability mass on selected trios")
    c_zz = SignLinear(zz / accepted, 0.0)

    # Selected qubits always read z = -1; the chain is the same for every labelling.
    signs = {_x_relation_sign(state, q) for q in (1, 2, 3)}
    if len(signs) != 1:
        raise ValueError("x relation differs between qubits")
    s = signs.pop()
    c_zx = SignLinear(0.0, -float(s))
    c_xz = SignLinear(0.0, -float(s))

    xx_values = []
    for k in (1, 2, 3):
        dist = born_distribution(state, _setup_with(k))
        i, j = (q for q in (1, 2, 3) if q != k)
        given = lambda o, k=k: o[k - 1] == 1  # noqa: E731
        same = conditional_probability(dist, lambda o: o[i - 1] == o[j - 1], given)
        diff = conditional_probability(dist, lambda o: o[i - 1] != o[j - 1], given)
        xx_values.append(same - diff)
    if max(xx_values) - min(xx_values) > CERTAINTY_TOL:
        raise ValueError("C(X_i, X_j) depends on which qubit is k")
    c_xx = SignLinear(sum(xx_values) / 3.0, 0.0)
    return {"ZZ": c_zz, "ZX": c_zx, "XZ": c_xz, "XX": c_xx}


@dataclass(frozen=True)
class CertaintyReport:
    """Outcome of the three EPR-style prediction checks."""

    z_determined_by_others: bool
    x_pair_equal_given_z_minus: bool
    others_minus_given_z_plus: bool

    @property
    def all_passed(self) -> bool:
        return self.z_determined_by_others and self.x_pair_equal_given_z_minus and self.others_minus_given_z_plus

    def as_dict(self) -> dict[str, bool]:
        return {
            "z_determined_by_others": self.z_determined_by_others,
            "x_pair_equal_given_z_minus": self.x_pair_equal_given_z_minus,
            "others_minus_given_z_plus": self.others_minus_given_z_plus,
        }


def _safe_conditional(dist, event, given) -> float | None:
    try:
        return conditional_probability(dist, event, given)
    except ZeroDivisionError:
        return None


def epr_certainty_checks(state: QuantumState | None = None) -> CertaintyReport:
    """Check which outcomes can be predicted with certainty from the other qubits.

    A check whose conditioning event never occurs counts as failed: an
    impossible premise predicts nothing.
    """
    state = make_w_state() if state is None else state
    zzz = born_distribution(state, MeasurementSetup.from_label("ZZZ"))

    determined = True
    for q in (1, 2, 3):
        others = [r for r in (1, 2, 3) if r != q]
        for vals in itertools.product((1, -1), repeat=2):
            given = lambda o, vals=vals: (o[others[0] - 1], o[others[1] - 1]) == vals  # noqa: E731
            if zzz.prob(given) <= STRUCT_TOL:
                continue
            p_plus = conditional_probability(zzz, lambda o: o[q - 1] == 1, given)
            if not (_certain(p_plus) or _certain(1.0 - p_plus)):
                determined = False

    x_equal = True
    for q in (1, 2, 3):
        dist = born_distribution(state, _setup_with(q))
        j, k = (r for r in (1, 2, 3) if r != q)
        p = _safe_conditional(dist, lambda o: o[j - 1] == o[k - 1], lambda o: o[q - 1] == -1)
        if p is None or not _certain(p):
            x_equal = False

    others_minus = True
    for q in (1, 2, 3):
        j, k = (r for r in (1, 2, 3) if r != q)
        p = _safe_conditional(zzz, lambda o: o[j - 1] == -1 and o[k - 1] == -1, lambda o: o[q - 1] == 1)
        if p is None or not _certain(p):
            others_minus = False

    return CertaintyReport(determined, x_equal, others_minus)


def _require_setup(dist: OutcomeDistribution, label: str) -> None:
    if dist.setup.label != label:
        raise ValueError(f"expected a {label} distribution, got {dist.setup.label}")


def pair_prob_zz(dist_zzz: OutcomeDistribution) -> float:
    """P_{Z_i Z_j}(-1,-1): total weight of z-patterns with at most one +1."""
    _require_setup(dist_zzz, "ZZZ")
    return dist_zzz[(1, -1, -1)] + dist_zzz[(-1, 1, -1)] + dist_zzz[(-1, -1, 1)] + dist_zzz[(-1, -1, -1)]


def middle_upper_bound(
    dist_zxx: OutcomeDistribution, dist_xzx: OutcomeDistribution, dist_xxz: OutcomeDistribution
) -> float:
    """Six-term sum bounding both P_{Z_i X_j}(-1,-x_k) and P_{X_i Z_j}(-x_k,-1)."""
    _require_setup(dist_zxx, "ZXX")
    _require_setup(dist_xzx, "XZX")
    _require_setup(dist_xxz, "XXZ")
    return (
        dist_zxx[(-1, 1, -1)]
        + dist_zxx[(-1, -1, 1)]
        + dist_xzx[(1, -1, -1)]
        + dist_xzx[(-1, -1, 1)]
        + dist_xxz[(1, -1, -1)]
        + dist_xxz[(-1, 1, -1)]
    )


def pair_prob_xx_same(dist_xxx: OutcomeDistribution) -> float:
    """P_{X_i X_j}(x_k, x_k) = P(1,1,1) + P(-1,-1,-1)."""
    _require_setup(dist_xxx, "XXX")
    return dist_xxx[(1, 1, 1)] + dist_xxx[(-1, -1, -1)]


def ch_setup_distributions(state: QuantumState) -> dict[str, OutcomeDistribution]:
    """Exact distributions for the five setups the CH test needs."""
    if state.num_qubits != 3:
        raise ValueError("the CH test needs a three-qubit state")
    return {label: born_distribution(state, MeasurementSetup.from_label(label)) for label in CH_SETUPS}


def ch_terms(dists: Mapping[str, OutcomeDistribution]) -> dict[str, float]:
    missing = [s for s in CH_SETUPS if s not in dists]
    if missing:
        raise ValueError(f"missing setups: {', '.join(missing)}")
    zz = pair_prob_zz(dists["ZZZ"])
    mid = middle_upper_bound(dists["ZXX"], dists["XZX"], dists["XXZ"])
    xx = pair_prob_xx_same(dists["XXX"])
    return {"p_zz": zz, "middle_bound": mid, "p_xx": xx, "ch_lower": zz - mid - xx}


def ch_lower_bound(state: QuantumState) -> float:
    """Measurable lower bound on the CH combination of the selected pair.

    In a single trio the Z_i X_j event implies the six-term event for qubit
    ``i`` and the X_i Z_j event implies it for qubit ``j``, so the two middle
    probabilities together never exceed the six-term sum.
    """
    return ch_terms(ch_setup_distributions(state))["ch_lower"]
