"""Ideal bit-commitment functionality.

The vault holds committed registers inside the session lab. While an entry is
open nobody can act on its register (binding) and the receiver's view is a
fixed dummy state (concealing). In ``NON_BCCC`` mode the register is taken
coherently, so a committer may commit a superposition entangled with its own
registers. ``BCCC`` mode measures the register at commit time, which forces a
classical value.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from qotlab.lab import Lab
from qotlab.linalg import ket, projector
from qotlab.registers import RegisterError


class BcMode(enum.Enum):
    NON_BCCC = "non-bccc"
    BCCC = "bccc"


class CommitmentError(RuntimeError):
    pass


@dataclass(frozen=True)
class UnveilRecord:
    """Outcome of opening one commitment.

    ``value`` is what the vault releases; ``honest`` is False when the
    committer's claimed value disagrees with it, i.e. the receiver's check
    against the evidence fails.
    """

    id: int
    value: int
    honest: bool = True

    def __post_init__(self):
        if self.value not in (0, 1):
            raise ValueError(f"unveiled value must be a bit, got {self.value!r}")


@dataclass
class _Entry:
    register: str
    mode: BcMode
    status: str = "open"
    bit: int | None = None


class CommitmentVault:
    def __init__(self, lab: Lab, committer: str = "bob", receiver: str = "alice",
                 mode: BcMode = BcMode.NON_BCCC):
        self.lab = lab
        self.committer = committer
        self.receiver = receiver
        self.mode = mode
        self.entries: dict[int, _Entry] = {}
        self._by_register: set[str] = set()

    def commit(self, register: str, mode: BcMode | None = None) -> int:
        mode = self.mode if mode is None else mode
        if register in self._by_register:
            raise CommitmentError(f"register {register!r} is already committed")
        self.lab.transfer(register, self.committer, "vault")
        cid = len(self.entries)
        entry = _Entry(register, mode)
        if mode is BcMode.BCCC:
            entry.bit = self.lab.measure("vault", register).outcome
        self.entries[cid] = entry
        self._by_register.add(register)
        return cid

    def _entry(self, cid: int) -> _Entry:
        try:
            return self.entries[cid]
        except KeyError:
            raise CommitmentError(f"unknown commitment id {cid}") from None

    def unveil(self, cid: int, claim: int | None = None) -> UnveilRecord:
        """Open commitment ``cid``; the committer may attach a claimed value."""
        entry = self._entry(cid)
        if entry.status != "open":
            raise CommitmentError(f"commitment {cid} was already unveiled")
        if entry.mode is BcMode.BCCC:
            value = entry.bit
        else:
            value = self.lab.measure("vault", entry.register).outcome
        entry.status = "unveiled"
        entry.bit = value
        self.lab.retire("vault", entry.register)
        return UnveilRecord(cid, value, honest=claim is None or claim == value)

    def receiver_view(self, cid: int) -> np.ndarray:
        entry = self._entry(cid)
        if entry.status == "open":
            dim = self._dim(entry.register)
            return projector(ket(0, dim))
        return projector(ket(entry.bit, 2))

    def _dim(self, register: str) -> int:
        if register in self.lab.state.dims:
            return self.lab.state.dims[register]
        raise RegisterError(register)

    def open_registers(self) -> list[str]:
        return [e.register for e in self.entries.values() if e.status == "open"]
