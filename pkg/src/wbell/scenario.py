"""Quantum states, +/-1 spin observables and exact Born-rule outcome distributions.

Conventions
-----------
* Single-qubit basis: index 0 is ``|+>`` (sigma_z = +1), index 1 is ``|->``.
* Qubits are labelled 1..n; qubit 1 is the most significant tensor factor.
* Outcome tuples are enumerated in the order ``itertools.product((1, -1), ...)``,
  which matches the basis ordering.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import qmath
from .qmath import I2, SIGMA_X, SIGMA_Z, STRUCT_TOL

Outcome = tuple[int, ...]


class QuantumState:
    """Pure or mixed state of ``num_qubits`` qubits.

    Pure states hold a length ``2**n`` amplitude vector, mixed states a
    ``2**n x 2**n`` density matrix. Both are validated on construction.
    """

    __slots__ = ("num_qubits", "data")

    def __init__(self, data, num_qubits: int | None = None):
        arr = np.array(data, dtype=complex)
        if arr.ndim not in (1, 2):
            raise ValueError("state data must be a vector or a square matrix")
        dim = arr.shape[0]
        n = int(round(math.log2(dim))) if dim > 0 else -1
        if n < 1 or 2**n != dim:
            raise ValueError(f"dimension {dim} is not a power of two")
        if num_qubits is not None and num_qubits != n:
            raise ValueError(f"num_qubits={num_qubits} does not match dimension {dim}")
        if arr.ndim == 1:
            norm2 = float(np.vdot(arr, arr).real)
            if abs(norm2 - 1.0) > STRUCT_TOL:
                raise ValueError(f"pure state is not normalized (|psi|^2 = {norm2!r})")
        else:
            if arr.shape != (dim, dim):
                raise ValueError("density matrix must be square")
            if not qmath.is_hermitian(arr):
                raise ValueError("density matrix is not Hermitian")
            tr = np.trace(arr)
            if abs(tr - 1.0) > STRUCT_TOL:
                raise ValueError(f"density matrix trace is {tr.real!r}, expected 1")
            if qmath.hermitian_eigenvalues(arr)[0] < -1e-10:
                raise ValueError("density matrix has a negative eigenvalue")
        self.data = arr
        self.num_qubits = n

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def density_matrix(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data.copy()

    def amplitude(self, bits: Sequence[int]) -> complex:
        """Amplitude of a z-basis pattern given as +/-1 values (pure states only)."""
        if not self.is_pure:
            raise ValueError("amplitudes are only defined for pure states")
        return complex(self.data[basis_index(bits)])

    def fidelity(self, pure: "QuantumState") -> float:
        """``<phi|rho|phi>`` against a pure reference state."""
        if not pure.is_pure:
            raise ValueError("reference state must be pure")
        if pure.dim != self.dim:
            raise ValueError("dimension mismatch")
        phi = pure.data
        if self.is_pure:
            return float(abs(np.vdot(phi, self.data)) ** 2)
        return float(np.vdot(phi, self.data @ phi).real)

    def __repr__(self) -> str:
        kind = "pure" if self.is_pure else "mixed"
        return f"QuantumState({kind}, num_qubits={self.num_qubits})"


def basis_index(bits: Sequence[int]) -> int:
    """Index of a z-basis pattern of +/-1 values (``+1 -> 0``, ``-1 -> 1``)."""
    idx = 0
    for b in bits:
        if b not in (1, -1):
            raise ValueError(f"basis labels must be +1 or -1, got {b!r}")
        idx = 2 * idx + (0 if b == 1 else 1)
    return idx


def basis_state(bits: Sequence[int]) -> QuantumState:
    vec = np.zeros(2 ** len(bits), dtype=complex)
    vec[basis_index(bits)] = 1.0
    return QuantumState(vec)


def product_state(*qubit_vectors) -> QuantumState:
    vecs = []
    for v in qubit_vectors:
        v = np.asarray(v, dtype=complex)
        vecs.append(v / np.linalg.norm(v))
    return QuantumState(qmath.kron(*vecs))


def make_w_state() -> QuantumState:
    """(|+--> + |-+-> + |--+>) / sqrt(3)."""
    vec = np.zeros(8, dtype=complex)
    for bits in ((1, -1, -1), (-1, 1, -1), (-1, -1, 1)):
        vec[basis_index(bits)] = 1.0 / math.sqrt(3.0)
    return QuantumState(vec)


def make_ghz_state() -> QuantumState:
    """(|+++> + |--->) / sqrt(2)."""
    vec = np.zeros(8, dtype=complex)
    vec[basis_index((1, 1, 1))] = vec[basis_index((-1, -1, -1))] = 1.0 / math.sqrt(2.0)
    return QuantumState(vec)


def make_singlet() -> QuantumState:
    """(|+-> - |-+>) / sqrt(2)."""
    vec = np.zeros(4, dtype=complex)
    vec[basis_index((1, -1))] = 1.0 / math.sqrt(2.0)
    vec[basis_index((-1, 1))] = -1.0 / math.sqrt(2.0)
    return QuantumState(vec)


def maximally_mixed(num_qubits: int) -> QuantumState:
    dim = 2**num_qubits
    return QuantumState(np.eye(dim, dtype=complex) / dim)


def white_noise(state: QuantumState, p: float) -> QuantumState:
    """Mix a state with white noise: ``(1 - p) rho + p I / 2**n``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise parameter must lie in [0, 1], got {p!r}")
    rho = state.density_matrix()
    mixed = (1.0 - p) * rho + p * np.eye(state.dim, dtype=complex) / state.dim
    return QuantumState(mixed)


class ObservableKind(enum.Enum):
    Z = "Z"
    X = "X"
    PLANE = "PlaneAngle"


class SignConvention(enum.Enum):
    MINUS_SIN_Z = "MinusSinZ"  # cos(t) sigma_x - sin(t) sigma_z
    PLUS_SIN_Z = "PlusSinZ"  # cos(t) sigma_x + sin(t) sigma_z


@dataclass(frozen=True)
class SpinObservable:
    """A +/-1 valued single-qubit observable in the x-z plane."""

    kind: ObservableKind
    angle: float = 0.0
    convention: SignConvention = SignConvention.MINUS_SIN_Z

    @classmethod
    def z(cls) -> "SpinObservable":
        return cls(ObservableKind.Z)

    @classmethod
    def x(cls) -> "SpinObservable":
        return cls(ObservableKind.X)

    @classmethod
    def plane(cls, angle: float, convention: SignConvention = SignConvention.MINUS_SIN_Z) -> "SpinObservable":
        return cls(ObservableKind.PLANE, float(angle), convention)

    @property
    def label(self) -> str:
        if self.kind is ObservableKind.PLANE:
            sign = "-" if self.convention is SignConvention.MINUS_SIN_Z else "+"
            return f"P{sign}({self.angle!r})"
        return self.kind.value

    def matrix(self) -> np.ndarray:
        if self.kind is ObservableKind.Z:
            return SIGMA_Z.copy()
        if self.kind is ObservableKind.X:
            return SIGMA_X.copy()
        sign = -1.0 if self.convention is SignConvention.MINUS_SIN_Z else 1.0
        return math.cos(self.angle) * SIGMA_X + sign * math.sin(self.angle) * SIGMA_Z


class MeasurementSetup(tuple):
    """Per-qubit observables measured jointly; ``setup[0]`` acts on qubit 1."""

    def __new__(cls, observables: Iterable[SpinObservable]):
        obs = tuple(observables)
        if not obs:
            raise ValueError("a measurement setup needs at least one observable")
        for o in obs:
            if not isinstance(o, SpinObservable):
                raise TypeError(f"expected SpinObservable, got {type(o).__name__}")
        return super().__new__(cls, obs)

    @classmethod
    def from_label(cls, label: str) -> "MeasurementSetup":
        """Build a Z/X setup from a string such as ``"ZXX"``."""
        table = {"Z": SpinObservable.z, "X": SpinObservable.x}
        try:
            return cls(table[ch]() for ch in label.upper())
        except KeyError:
            raise ValueError(f"setup label must consist of Z and X, got {label!r}") from None

    @property
    def num_qubits(self) -> int:
        return len(self)

    @property
    def label(self) -> str:
        return "".join(o.label for o in self)

    def __repr__(self) -> str:
        return f"MeasurementSetup({self.label!r})"


def outcomes(num_qubits: int) -> list[Outcome]:
    return list(itertools.product((1, -1), repeat=num_qubits))


@dataclass(frozen=True)
class OutcomeDistribution:
    """Joint outcome probabilities of one measurement setup."""

    setup: MeasurementSetup
    probabilities: Mapping[Outcome, float]

    def __post_init__(self):
        n = self.setup.num_qubits
        for o in self.probabilities:
            if len(o) != n or any(v not in (1, -1) for v in o):
                raise ValueError(f"invalid outcome tuple {o!r} for {n} qubits")
        total = sum(self.probabilities.values())
        if abs(total - 1.0) > STRUCT_TOL:
            raise ValueError(f"probabilities sum to {total!r}, expected 1")
        if min(self.probabilities.values()) < -STRUCT_TOL:
            raise ValueError("negative probability in distribution")

    @property
    def num_qubits(self) -> int:
        return self.setup.num_qubits

    def __getitem__(self, outcome: Outcome) -> float:
        return self.probabilities.get(tuple(outcome), 0.0)

    def prob(self, predicate: Callable[[Outcome], bool]) -> float:
        """Total probability of the outcomes satisfying ``predicate``."""
        return sum(p for o, p in self.probabilities.items() if predicate(o))

    def items(self):
        return self.probabilities.items()


def _validate_dims(state: QuantumState, setup: MeasurementSetup) -> None:
    if state.num_qubits != setup.num_qubits:
        raise ValueError(
            f"dimension mismatch: state has {state.num_qubits} qubits, setup has {setup.num_qubits}"
        )


def born_distribution(state: QuantumState, setup: MeasurementSetup) -> OutcomeDistribution:
    """Exact joint distribution from tensor products of projectors ``(I + o O_q)/2``."""
    _validate_dims(state, setup)
    mats = [o.matrix() for o in setup]
    projectors = [{s: 0.5 * (I2 + s * m) for s in (1, -1)} for m in mats]
    probs = {}
    for out in outcomes(setup.num_qubits):
        proj = qmath.kron(*(projectors[q][s] for q, s in enumerate(out)))
        probs[out] = qmath.expectation(state, proj)
    return OutcomeDistribution(setup, probs)


def _check_qubits(dist: OutcomeDistribution, qubits: Iterable[int]) -> tuple[int, ...]:
    qs = tuple(qubits)
    for q in qs:
        if not isinstance(q, (int, np.integer)) or not 1 <= q <= dist.num_qubits:
            raise IndexError(f"qubit index {q!r} out of range 1..{dist.num_qubits}")
    return qs


def correlation(dist: OutcomeDistribution, qubits: Iterable[int]) -> float:
    """Mean of the product of the listed qubits' outcomes (1-based labels).

    A single qubit gives its mean value; the empty set gives 1.
    """
    qs = _check_qubits(dist, qubits)
    total = 0.0
    for out, p in dist.items():
        total += p * math.prod(out[q - 1] for q in qs)
    return total


def conditional_probability(
    dist: OutcomeDistribution,
    event: Callable[[Outcome], bool],
    given: Callable[[Outcome], bool],
) -> float:
    """``P(event | given)`` for predicates over outcome tuples."""
    p_given = dist.prob(given)
    if p_given <= STRUCT_TOL:
        raise ZeroDivisionError(f"conditioning event has probability {p_given!r}")
    return dist.prob(lambda o: event(o) and given(o)) / p_given


def marginal(dist: OutcomeDistribution, qubits: Sequence[int]) -> OutcomeDistribution:
    qs = _check_qubits(dist, qubits)
    probs: dict[Outcome, float] = {o: 0.0 for o in outcomes(len(qs))}
    for out, p in dist.items():
        probs[tuple(out[q - 1] for q in qs)] += p
    return OutcomeDistribution(MeasurementSetup(dist.setup[q - 1] for q in qs), probs)
