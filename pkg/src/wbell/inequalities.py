"""CHSH and CH functionals, local-hidden-variable enumeration and the Cirel'son bound.

Deterministic-strategy enumerations use plain Python integers, so the local
bounds come out exactly rather than within a tolerance.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import qmath
from .scenario import SignConvention, SpinObservable
from .selection import XK, SelectionRule, SignLinear, classify_trio

LHV_CHSH_BOUND = 2.0
CIRELSON_BOUND = 2.0 * math.sqrt(2.0)
LHV_CH_RANGE = (-1.0, 0.0)
# Slack on quantum-bound checks for sampled and refined values.
BOUND_SLACK = 1e-9
PROB_SLACK = 1e-12


@dataclass(frozen=True)
class ChshSpec:
    """Signs ``m`` and ``n`` of the CHSH combination; either may be the symbol ``x_k``."""

    m: int | SignLinear = 1
    n: int | SignLinear = 1

    def __post_init__(self):
        for name in ("m", "n"):
            v = getattr(self, name)
            if isinstance(v, SignLinear):
                if v not in (XK, -XK):
                    raise ValueError(f"{name} must be +/-1 or +/-x_k")
            elif v not in (1, -1):
                raise ValueError(f"{name} must be +/-1 or +/-x_k, got {v!r}")

    @property
    def symbolic(self) -> bool:
        return isinstance(self.m, SignLinear) or isinstance(self.n, SignLinear)

    @classmethod
    def w_selection(cls) -> "ChshSpec":
        """``m = n = x_k``."""
        return cls(XK, XK)


def chsh_value(c_AB, c_Ab, c_aB, c_ab, spec: ChshSpec = ChshSpec()) -> SignLinear:
    """``C(A,B) - m C(A,b) - n C(a,B) - m n C(a,b)`` with symbolic sign algebra."""
    m = SignLinear.coerce(spec.m)
    n = SignLinear.coerce(spec.n)
    terms = [SignLinear.coerce(c) for c in (c_AB, c_Ab, c_aB, c_ab)]
    return terms[0] - m * terms[1] - n * terms[2] - m * n * terms[3]


@dataclass(frozen=True)
class InequalityReport:
    value: SignLinear
    lhv_bound: float
    cirelson_bound: float
    violated_lhv: bool
    violated_cirelson: bool

    def as_dict(self) -> dict:
        return {
            "value": {"c0": self.value.c0, "c1": self.value.c1},
            "value_at_xk_plus": self.value.at(1),
            "value_at_xk_minus": self.value.at(-1),
            "lhv_bound": self.lhv_bound,
            "cirelson_bound": self.cirelson_bound,
            "violated_lhv": self.violated_lhv,
            "violated_cirelson": self.violated_cirelson,
        }


def chsh_report(value) -> InequalityReport:
    """Compare a (possibly symbolic) CHSH value with both bounds at both signs of x_k."""
    v = SignLinear.coerce(value)
    lo = min(abs(x) for x in v.values)
    return InequalityReport(
        value=v,
        lhv_bound=LHV_CHSH_BOUND,
        cirelson_bound=CIRELSON_BOUND,
        violated_lhv=lo > LHV_CHSH_BOUND,
        violated_cirelson=lo > CIRELSON_BOUND,
    )


def ch_value(p1: float, p2: float, p3: float, p4: float) -> float:
    """``P1 - P2 - P3 - P4``; the local range is [-1, 0].

    Inputs may overshoot [0, 1] by floating-point round-off (1e-12).
    """
    for p in (p1, p2, p3, p4):
        if not -PROB_SLACK <= p <= 1.0 + PROB_SLACK:
            raise ValueError(f"probability out of range: {p!r}")
    return p1 - p2 - p3 - p4


def ch_lhv_status(value: float) -> str:
    """``"below"``, ``"within"`` or ``"above"`` the local range [-1, 0]."""
    if value < LHV_CH_RANGE[0]:
        return "below"
    if value > LHV_CH_RANGE[1]:
        return "above"
    return "within"


def map_chsh_bound_to_ch(l: float) -> float:
    """CHSH bound ``l`` -> CH bound ``(l - 2) / 4``."""
    return (l - 2.0) / 4.0


def joint_prob_from_correlations(sign_i: int, sign_j: int, c_i: float, c_j: float, c_ij: float) -> float:
    """Joint probability of outcomes (sign_i, sign_j) from means and the correlation."""
    if sign_i not in (1, -1) or sign_j not in (1, -1):
        raise ValueError("outcome signs must be +1 or -1")
    for c in (c_i, c_j, c_ij):
        if abs(c) > 1.0 + 1e-12:
            raise ValueError(f"correlation {c!r} outside [-1, 1]")
    return 0.25 * (1.0 + sign_i * c_i + sign_j * c_j + sign_i * sign_j * c_ij)


@dataclass(frozen=True)
class ChshEnumeration:
    maximum: int
    per_mn_max: dict[tuple[int, int], int]
    per_mn_attaining: dict[tuple[int, int], int]
    cases: int


def lhv_enumerate_chsh() -> ChshEnumeration:
    """Max |CHSH| over all deterministic (A, a, B, b) and all (m, n)."""
    per_max: dict[tuple[int, int], int] = {}
    per_count: dict[tuple[int, int], int] = {}
    cases = 0
    for m, n in itertools.product((1, -1), repeat=2):
        vals = []
        for A, a, B, b in itertools.product((1, -1), repeat=4):
            vals.append(abs(A * B - m * A * b - n * a * B - m * n * a * b))
            cases += 1
        best = max(vals)
        per_max[(m, n)] = best
        per_count[(m, n)] = vals.count(best)
    return ChshEnumeration(max(per_max.values()), per_max, per_count, cases)


@dataclass(frozen=True)
class WSelectionEnumeration:
    maximum: int
    values: tuple[int, ...]
    attaining: int
    cases: int


def lhv_enumerate_w_selection() -> WSelectionEnumeration:
    """Max |z_i z_j - x_k z_i x_j - x_k x_i z_j - x_i x_j| over local trios.

    Each trio carries predefined (z_q, x_q); only patterns with exactly one
    z = +1 are selected, which fixes i, j and k.
    """
    values = []
    for zs in itertools.product((1, -1), repeat=3):
        assignment = classify_trio(SelectionRule.W_MINUS_MINUS, zs)
        if assignment is None:
            continue
        i, j, k = assignment
        for xs in itertools.product((1, -1), repeat=3):
            zi, zj = zs[i - 1], zs[j - 1]
            xi, xj, xk = xs[i - 1], xs[j - 1], xs[k - 1]
            values.append(zi * zj - xk * zi * xj - xk * xi * zj - xi * xj)
    best = max(abs(v) for v in values)
    return WSelectionEnumeration(best, tuple(values), sum(abs(v) == best for v in values), len(values))


@dataclass(frozen=True)
class ChEnumeration:
    minimum: int
    maximum: int
    attaining_min: int
    attaining_max: int
    cases: int


def lhv_enumerate_ch() -> ChEnumeration:
    """Extremes of the CH combination over deterministic (z_i, x_i, z_j, x_j, x_k).

    The four joint probabilities become 0/1 indicators of the events
    (z_i, z_j) = (-1, -1), (z_i, x_j) = (-1, -x_k), (x_i, z_j) = (-x_k, -1)
    and (x_i, x_j) = (x_k, x_k).
    """
    values = []
    for zi, xi, zj, xj, xk in itertools.product((1, -1), repeat=5):
        p_zz = int(zi == -1 and zj == -1)
        p_zx = int(zi == -1 and xj == -xk)
        p_xz = int(xi == -xk and zj == -1)
        p_xx = int(xi == xk and xj == xk)
        values.append(p_zz - p_zx - p_xz - p_xx)
    lo, hi = min(values), max(values)
    return ChEnumeration(lo, hi, values.count(lo), values.count(hi), len(values))


def bell_operator(A: SpinObservable, a: SpinObservable, B: SpinObservable, b: SpinObservable,
                  spec: ChshSpec = ChshSpec()) -> np.ndarray:
    """4x4 operator ``A(x)B - m A(x)b - n a(x)B - m n a(x)b``."""
    if spec.symbolic:
        raise ValueError("the Bell operator needs numeric m and n")
    m, n = spec.m, spec.n
    mA, ma, mB, mb = A.matrix(), a.matrix(), B.matrix(), b.matrix()
    return (qmath.kron(mA, mB) - m * qmath.kron(mA, mb) - n * qmath.kron(ma, mB)
            - m * n * qmath.kron(ma, mb))


def canonical_chsh_observables() -> tuple[SpinObservable, SpinObservable, SpinObservable, SpinObservable]:
    """Anticommuting pairs reaching 2*sqrt(2) with m = n = 1.

    A = Z, a = X, B = (Z + X)/sqrt(2), b = (Z - X)/sqrt(2).
    """
    plane = lambda t: SpinObservable.plane(t, SignConvention.MINUS_SIN_Z)  # noqa: E731
    return plane(-math.pi / 2), plane(0.0), plane(-math.pi / 4), plane(-3 * math.pi / 4)


def _plane_matrices(angles: np.ndarray) -> np.ndarray:
    """Batch of cos(t) sigma_x - sin(t) sigma_z matrices, shape (N, 2, 2)."""
    c, s = np.cos(angles), np.sin(angles)
    out = np.empty(angles.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = -s
    out[..., 0, 1] = c
    out[..., 1, 0] = c
    out[..., 1, 1] = s
    return out


def _batch_kron(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.einsum("nab,ncd->nacbd", x, y).reshape(x.shape[0], 4, 4)


def _random_pure_states(rng: np.random.Generator, count: int, product: bool) -> np.ndarray:
    if product:
        left = rng.standard_normal((count, 2)) + 1j * rng.standard_normal((count, 2))
        right = rng.standard_normal((count, 2)) + 1j * rng.standard_normal((count, 2))
        psi = np.einsum("na,nb->nab", left, right).reshape(count, 4)
    else:
        psi = rng.standard_normal((count, 4)) + 1j * rng.standard_normal((count, 4))
    return psi / np.linalg.norm(psi, axis=1, keepdims=True)


SAMPLE_BLOCK = 10_000


def sampled_chsh_block(seed: int, block: int, count: int = SAMPLE_BLOCK, product_states: bool = False) -> np.ndarray:
    """One block of sampled |<psi|Bell|psi>| values.

    Block ``b`` draws from its own PCG64 stream seeded with ``[seed, b]``, so
    any partition of the blocks across workers reproduces the same values.
    """
    rng = np.random.default_rng([seed, block])
    angles = rng.uniform(-math.pi, math.pi, size=(count, 4))
    signs = rng.choice(np.array([1.0, -1.0]), size=(count, 2))
    A, a, B, b = (_plane_matrices(angles[:, q]) for q in range(4))
    m = signs[:, 0][:, None, None]
    n = signs[:, 1][:, None, None]
    ops = _batch_kron(A, B) - m * _batch_kron(A, b) - n * _batch_kron(a, B) - m * n * _batch_kron(a, b)
    psi = _random_pure_states(rng, count, product_states)
    vals = np.einsum("ni,nij,nj->n", psi.conj(), ops, psi)
    return np.abs(vals.real)


def sampled_chsh_values(samples: int, seed: int, product_states: bool = False) -> np.ndarray:
    """|<psi|Bell|psi>| for random x-z plane angles, random signs and random pure states.

    Pure states are normalized complex Gaussian 4-tuples (or products of
    normalized complex Gaussian 2-tuples).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    blocks = []
    for block, start in enumerate(range(0, samples, SAMPLE_BLOCK)):
        blocks.append(sampled_chsh_block(seed, block, min(SAMPLE_BLOCK, samples - start), product_states))
    return np.concatenate(blocks)


def _chsh_norm(angles, m: int = 1, n: int = 1) -> float:
    obs = [SpinObservable.plane(t) for t in angles]
    return qmath.spectral_norm(bell_operator(*obs, ChshSpec(m, n)))


@dataclass(frozen=True)
class TsirelsonResult:
    samples: int
    seed: int
    sampled_max: float
    sampled_exceed_count: int
    refined_max: float
    refined_angles: tuple[float, ...]
    refined_signs: tuple[int, int]
    bound: float = CIRELSON_BOUND

    @property
    def within_bound(self) -> bool:
        return self.sampled_max <= self.bound + BOUND_SLACK and self.refined_max <= self.bound + BOUND_SLACK


def tsirelson_max(samples: int, seed: int, refine: bool = True, product_states: bool = False) -> TsirelsonResult:
    """Largest |CHSH| found by random sampling, then by local refinement.

    Refinement maximizes the spectral norm of the Bell operator over the
    four plane angles and both signs: for fixed observables the best state
    is an extremal eigenvector. Product-state runs skip refinement, since
    the eigenvector is in general entangled.
    """
    from .optimize import AngleBox, maximize  # local import: optimize depends on this module

    vals = sampled_chsh_values(samples, seed, product_states=product_states)
    best_idx = int(np.argmax(vals))
    sampled_max = float(vals[best_idx])
    exceed = int(np.sum(vals > CIRELSON_BOUND + BOUND_SLACK))

    refined = sampled_max
    angles: tuple[float, ...] = ()
    signs = (1, 1)
    if refine and not product_states:
        best = None
        for m, n in itertools.product((1, -1), repeat=2):
            box = AngleBox([(-math.pi, math.pi)] * 4)
            res = maximize(lambda t, m=m, n=n: _chsh_norm(t, m, n), box, grid=4, refine_tol=1e-9, seed=seed)
            if best is None or res.value > best[0]:
                best = (res.value, tuple(float(t) for t in res.argmax), (m, n))
        refined, angles, signs = best
    return TsirelsonResult(samples, seed, sampled_max, exceed, refined, angles, signs)
