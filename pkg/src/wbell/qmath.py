"""Dense complex linear algebra for the few-qubit operators used here.

Matrices and vectors are plain ``numpy`` complex128 arrays. Nothing in this
package goes beyond 8x8, so the eigensolver is a straightforward cyclic
Jacobi sweep rather than a LAPACK call.
"""

from __future__ import annotations

import numpy as np

# Structural checks (hermiticity, normalization, trace).
STRUCT_TOL = 1e-12
# Accuracy promised for eigenvalues and expectation residues.
EIGEN_TOL = 1e-10
IMAG_TOL = 1e-10
# Off-diagonal Frobenius norm at which Jacobi sweeps stop.
JACOBI_OFF_TOL = 1e-14
JACOBI_MAX_SWEEPS = 64

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class ConvergenceError(ArithmeticError):
    """Raised when an iterative routine exceeds its iteration cap."""


def as_matrix(m) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {arr.shape}")
    return arr


def kron(*factors) -> np.ndarray:
    """Tensor product of one or more matrices (or vectors), left to right."""
    if not factors:
        raise ValueError("kron needs at least one factor")
    out = np.asarray(factors[0], dtype=complex)
    for f in factors[1:]:
        f = np.asarray(f, dtype=complex)
        if out.ndim != f.ndim or out.ndim not in (1, 2):
            raise ValueError("kron factors must all be vectors or all be matrices")
        if out.ndim == 1:
            out = (out[:, None] * f[None, :]).reshape(-1)
        else:
            r1, c1 = out.shape
            r2, c2 = f.shape
            out = (out[:, None, :, None] * f[None, :, None, :]).reshape(r1 * r2, c1 * c2)
    return out


def is_hermitian(m, tol: float = STRUCT_TOL) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def _require_hermitian(m: np.ndarray) -> None:
    if not is_hermitian(m):
        raise ValueError("operator is not Hermitian")


def expectation(state, op) -> float:
    """Real expectation value of a Hermitian operator.

    ``state`` is either a state vector (``<psi|O|psi>``) or a density matrix
    (``tr(rho O)``); :class:`wbell.scenario.QuantumState` is accepted too.
    The imaginary part is checked against ``IMAG_TOL`` and then dropped.
    """
    op = as_matrix(op)
    _require_hermitian(op)
    data = getattr(state, "data", state)
    data = np.asarray(data, dtype=complex)
    if data.ndim == 1:
        if data.shape[0] != op.shape[0]:
            raise ValueError(f"dimension mismatch: state {data.shape[0]}, operator {op.shape[0]}")
        val = np.vdot(data, op @ data)
    elif data.ndim == 2:
        if data.shape != op.shape:
            raise ValueError(f"dimension mismatch: state {data.shape}, operator {op.shape}")
        val = np.trace(data @ op)
    else:
        raise ValueError("state must be a vector or a square matrix")
    if abs(val.imag) > IMAG_TOL:
        raise ArithmeticError(f"expectation has imaginary residue {val.imag:.3e}")
    return float(val.real)


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)))


def jacobi_eigh(m, max_sweeps: int = JACOBI_MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a small Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(values, vectors)`` with values ascending and ``vectors[:, n]``
    the eigenvector belonging to ``values[n]``.

    Each rotation first removes the phase of the pivot ``a[p, q]`` with a
    diagonal unitary and then applies the classic real symmetric rotation,
    so the pivot is annihilated exactly.
    """
    a = as_matrix(m).copy()
    _require_hermitian(a)
    n = a.shape[0]
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)
    scale = max(1.0, float(np.sqrt(np.sum(np.abs(a) ** 2))))

    for _ in range(max_sweeps):
        if _off_norm(a) < JACOBI_OFF_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                app = a[p, p].real
                aqq = a[q, q].real
                tau = (aqq - app) / (2.0 * r)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # Columns: U = D G with D = diag(1, conj(phase)) on (p, q).
                col_p = a[:, p].copy()
                col_q = a[:, q] * np.conj(phase)
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :] * phase
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vp = v[:, p].copy()
                vq = v[:, q] * np.conj(phase)
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        if _off_norm(a) >= JACOBI_OFF_TOL * scale:
            raise ConvergenceError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")

    values = np.diag(a).real.copy()
    order = np.argsort(values, kind="stable")
    return values[order], v[:, order]


def hermitian_eigenvalues(m) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix (dimension <= 8)."""
    m = as_matrix(m)
    if m.shape[0] > 8:
        raise ValueError("hermitian_eigenvalues supports dimensions up to 8")
    return jacobi_eigh(m)[0]


def spectral_norm(m) -> float:
    vals = hermitian_eigenvalues(m)
    return float(max(abs(vals[0]), abs(vals[-1])))
