"""Session lab: the joint quantum state plus who may touch which register."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from qotlab.oracle import DenseState
from qotlab.registers import (
    DEFAULT_BRANCH_CAP,
    BranchedState,
    MeasurementRecord,
    RegisterError,
)


class AccessError(PermissionError):
    pass


class Lab:
    """Holds one session's :class:`BranchedState` and enforces register ownership.

    Parties are plain strings (``"alice"``, ``"bob"``, ``"vault"``). With
    ``shadow=True`` every operation is replayed on a :class:`DenseState` and
    the overlap between the two representations is recorded after each step
    in :attr:`fidelities`.
    """

    def __init__(self, rng: np.random.Generator, branch_cap: int = DEFAULT_BRANCH_CAP, shadow: bool = False,
                 shadow_cap: int = 2**22):
        self.state = BranchedState(cap=branch_cap)
        self.owner: dict[str, str] = {}
        self.rng = rng
        self.retired: dict[str, np.ndarray] = {}
        self.shadow = DenseState(cap=shadow_cap) if shadow else None
        self.fidelities: list[float] = []
        self.prob_gaps: list[float] = []

    # -- access control ----------------------------------------------------

    def check(self, party: str, regs: Sequence[str]) -> None:
        for r in regs:
            who = self.owner.get(r)
            if who is None:
                raise RegisterError(f"register {r!r} is not live")
            if who != party:
                raise AccessError(f"{party} cannot act on {r!r} held by {who}")

    def transfer(self, reg: str, src: str, dst: str) -> None:
        self.check(src, [reg])
        self.owner[reg] = dst

    def accessible(self, party: str) -> list[str]:
        return [r for r, who in self.owner.items() if who == party]

    # -- operations --------------------------------------------------------

    def new(self, party: str, label: str, vec: np.ndarray) -> str:
        if label in self.owner or label in self.retired:
            raise RegisterError(f"register label {label!r} already used in this session")
        self.state = self.state.add_register(label, vec)
        self.owner[label] = party
        if self.shadow is not None:
            self.shadow.add(label, vec)
            self._compare()
        return label

    def apply(self, party: str, regs: Sequence[str], u: np.ndarray, split_control: bool = False) -> None:
        self.check(party, regs)
        self.state = self.state.apply(regs, u, split_control=split_control)
        if self.shadow is not None:
            self.shadow.apply(regs, u)
            self._compare()

    def parity(self, party: str, controls: Sequence[str], target: str) -> None:
        self.check(party, list(controls) + [target])
        self.state = self.state.apply_parity(controls, target)
        if self.shadow is not None:
            self.shadow.parity(controls, target)
            self._compare()

    def measure(self, party: str, reg: str) -> MeasurementRecord:
        self.check(party, [reg])
        rec, self.state = self.state.measure(reg, self.rng)
        if self.shadow is not None:
            _, p = self.shadow.measure(reg, outcome=rec.outcome)
            self.prob_gaps.append(abs(p - rec.probability))
            self._compare()
        return rec

    def retire(self, party: str, reg: str) -> np.ndarray:
        """Drop a register that is no longer entangled with anything."""
        self.check(party, [reg])
        self.state, vec = self.state.discard(reg)
        del self.owner[reg]
        self.retired[reg] = vec
        if self.shadow is not None:
            self.shadow.discard(reg)
            self._compare()
        return vec

    def _compare(self) -> None:
        order = self.shadow.order
        if not order:
            return
        branched = self.state.to_dense(order, cap=self.shadow.cap)
        self.fidelities.append(float(abs(np.vdot(self.shadow.vec, branched))))
