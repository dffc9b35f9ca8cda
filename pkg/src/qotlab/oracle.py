"""Plain dense state-vector simulator, kept independent of the branched engine.

Used as a cross-check: a :class:`qotlab.lab.Lab` can shadow every operation
onto a :class:`DenseState` and compare the two after each protocol step.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from qotlab.linalg import pure_partial_trace


class DenseState:
    def __init__(self, cap: int = 2**22):
        self.order: list[str] = []
        self.dims: dict[str, int] = {}
        self.vec = np.ones(1, dtype=complex)
        self.cap = cap

    def add(self, label: str, vec: np.ndarray) -> None:
        vec = np.asarray(vec, dtype=complex)
        if self.vec.size * vec.size > self.cap:
            raise MemoryError(f"dense oracle would exceed {self.cap} amplitudes")
        self.vec = np.kron(self.vec, vec)
        self.order.append(label)
        self.dims[label] = vec.size

    def _tensor(self) -> np.ndarray:
        return self.vec.reshape([self.dims[r] for r in self.order])

    def apply(self, regs: Sequence[str], u: np.ndarray) -> None:
        axes = [self.order.index(r) for r in regs]
        t = self._tensor()
        ud = [self.dims[r] for r in regs]
        u = np.asarray(u, dtype=complex).reshape(ud + ud)
        k = len(regs)
        t = np.tensordot(u, t, axes=(list(range(k, 2 * k)), axes))
        # tensordot puts the acted-on axes first; restore the original layout.
        rest = [a for a in range(len(self.order)) if a not in axes]
        t = np.moveaxis(t, list(range(k)), axes) if rest or k else t
        self.vec = np.ascontiguousarray(t).reshape(-1)

    def parity(self, controls: Sequence[str], target: str) -> None:
        cnot = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
        for c in controls:
            self.apply([c, target], cnot)

    def probabilities(self, reg: str) -> np.ndarray:
        ax = self.order.index(reg)
        t = np.moveaxis(self._tensor(), ax, 0).reshape(self.dims[reg], -1)
        p = np.sum(np.abs(t) ** 2, axis=1)
        return p / p.sum()

    def measure(self, reg: str, outcome: int | None = None, rng: np.random.Generator | None = None):
        p = self.probabilities(reg)
        if outcome is None:
            outcome = int(rng.choice(len(p), p=p))
        ax = self.order.index(reg)
        t = np.moveaxis(self._tensor(), ax, 0).copy()
        mask = np.zeros(self.dims[reg], dtype=bool)
        mask[outcome] = True
        t[~mask] = 0
        t = np.moveaxis(t, 0, ax)
        self.vec = t.reshape(-1) / np.sqrt(p[outcome])
        return outcome, float(p[outcome])

    def discard(self, reg: str) -> np.ndarray:
        ax = self.order.index(reg)
        rho = pure_partial_trace(self.vec, [self.dims[r] for r in self.order], [ax])
        w, v = np.linalg.eigh(rho)
        if w[-1] < 1 - 1e-9:
            raise ValueError(f"register {reg!r} is not in a pure product state (purity {w[-1]})")
        local = v[:, -1]
        t = np.moveaxis(self._tensor(), ax, 0)
        t = np.tensordot(local.conj(), t, axes=(0, 0))
        self.vec = t.reshape(-1)
        self.vec /= np.linalg.norm(self.vec)
        del self.order[ax]
        del self.dims[reg]
        return local

    def vector(self, order: Sequence[str]) -> np.ndarray:
        t = np.transpose(self._tensor(), [self.order.index(r) for r in order])
        return t.reshape(-1)
