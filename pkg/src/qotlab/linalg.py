"""Dense complex linear algebra used by every other module.

Kronecker convention: left-factor-major. For ``tensor(a, b)`` the index of
``a`` is the most significant digit, so ``|0>⊗|1>`` is basis index 1 and a
register list ``[r0, r1, ..., rk]`` maps to the mixed-radix integer with
``r0`` as the leading digit. All modules state register order against this.
"""

from __future__ import annotations

from functools import reduce
from typing import Sequence

import numpy as np

ATOL = 1e-10
RECON_TOL = 1e-9

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


class DimensionError(ValueError):
    pass


class NotUnitaryError(ValueError):
    pass


def ket(index: int, dim: int = 2) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def normalize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return v / n


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def tensor(*factors: np.ndarray) -> np.ndarray:
    """Kronecker product of state vectors or operators, left factor most significant.

    >>> tensor(ket(0), ket(1)).real.tolist()
    [0.0, 1.0, 0.0, 0.0]
    """
    if not factors:
        raise ValueError("tensor() needs at least one operand")
    kinds = {np.ndim(f) for f in factors}
    if len(kinds) != 1:
        raise DimensionError("cannot mix state vectors and operators in tensor()")
    return reduce(np.kron, (np.asarray(f, dtype=complex) for f in factors))


def is_unitary(u: np.ndarray, atol: float = ATOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) < atol)


def is_density(rho: np.ndarray, atol: float = ATOL) -> bool:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if abs(np.trace(rho) - 1) > atol or np.max(np.abs(rho - rho.conj().T)) > atol:
        return False
    return bool(np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)) >= -atol)


def apply_unitary(u: np.ndarray, state: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    state = np.asarray(state, dtype=complex)
    if u.ndim != 2 or u.shape[1] != state.shape[0]:
        raise DimensionError(f"operator shape {u.shape} does not act on dimension {state.shape[0]}")
    if not is_unitary(u):
        raise NotUnitaryError("operator is not unitary within 1e-10")
    return u @ state


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduce ``rho`` on factors ``dims`` to the factors listed in ``keep``.

    The kept factors appear in ascending position order in the result.
    """
    dims = [int(d) for d in dims]
    rho = np.asarray(rho, dtype=complex)
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise DimensionError(f"density of shape {rho.shape} does not match dims {dims}")
    requested = [int(k) for k in keep]
    if len(set(requested)) != len(requested) or any(k < 0 or k >= len(dims) for k in requested):
        raise ValueError(f"invalid subsystem subset {requested} for {len(dims)} factors")
    keep = sorted(requested)
    n = len(dims)
    traced = [k for k in range(n) if k not in keep]
    t = rho.reshape(dims + dims)
    # Contract each traced factor's row index against its column index.
    row = list(range(n))
    col = list(range(n, 2 * n))
    for k in traced:
        col[k] = row[k]
    out_idx = [row[k] for k in keep] + [col[k] for k in keep]
    reduced = np.einsum(t, row + col, out_idx)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return reduced.reshape(d, d)


def pure_partial_trace(psi: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced density of the pure state ``psi`` without forming ``|psi><psi|``."""
    dims = [int(d) for d in dims]
    keep = sorted(set(int(k) for k in keep))
    traced = [k for k in range(len(dims)) if k not in keep]
    t = np.asarray(psi, dtype=complex).reshape(dims)
    t = np.transpose(t, keep + traced)
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    m = t.reshape(d, -1)
    return m @ m.conj().T


def schmidt_decompose(
    psi: np.ndarray, dims: Sequence[int], left: Sequence[int]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Schmidt decomposition of ``psi`` across the cut ``left | rest``.

    Returns ``(coeffs, lefts, rights)`` with descending non-negative ``coeffs``
    and ``psi ≈ Σ_k coeffs[k] * kron(lefts[:, k], rights[:, k])`` where the
    right factor registers keep their original relative order. Only
    numerically nonzero terms (above 1e-14) are returned; equal coefficients
    keep the order produced by the SVD, which is deterministic.
    """
    dims = [int(d) for d in dims]
    left = list(left)
    right = [k for k in range(len(dims)) if k not in left]
    t = np.asarray(psi, dtype=complex).reshape(dims)
    t = np.transpose(t, left + right)
    dl = int(np.prod([dims[k] for k in left])) if left else 1
    m = t.reshape(dl, -1)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    keep = s > 1e-14
    return s[keep], u[:, keep], vh[keep].T


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise DimensionError(f"shapes differ: {rho.shape} vs {sigma.shape}")
    delta = rho - sigma
    delta = (delta + delta.conj().T) / 2
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(delta))))


def fidelity_pure(a: np.ndarray, b: np.ndarray) -> float:
    """|<a|b>| for normalized vectors."""
    return float(abs(np.vdot(a, b)))
