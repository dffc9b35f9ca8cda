"""All-or-nothing and 1-out-of-2 oblivious transfer built on bit commitment.

Indices are 0-based. Step outline:

I.    Alice sends ``n`` qubits ``|a_i, g_i>``.
II.   Bob measures qubit ``i`` in basis ``b_i`` (result ``h_i``) and commits
      ``b_i`` and ``h_i`` separately.
III.  Alice opens the commitments on a random test set ``R`` and aborts if
      some ``i`` in ``R`` has ``a_i == b_i`` but ``g_i != h_i``.
IV.   Alice announces all bases; Bob picks ``I0 ⊆ T0 - R`` (matching bases)
      and ``I1 ⊆ T1 - R`` of equal size and sends them in random order as
      ``(J0, J1)``.
V.    AoN: Alice sends ``s`` and ``beta_s = b ⊕ (⊕_{J_s} g)``.
V'.   1-2: Alice sends ``beta_0`` and ``beta_1`` for her bits ``b0, b1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from qotlab.commitment import BcMode, CommitmentVault, UnveilRecord
from qotlab.lab import Lab
from qotlab.linalg import H, ket
from qotlab.registers import DEFAULT_BRANCH_CAP, prepare_bb84

SUBSET_FRACTION = 0.24


class Variant(enum.Enum):
    AON = "aon"
    ONE_OUT_OF_TWO = "12ot"


class ProtocolError(RuntimeError):
    pass


class InfeasiblePartition(ProtocolError):
    """Bob cannot draw two subsets of the configured size outside ``R``."""


class MalformedSubsets(ProtocolError):
    pass


class UnveilMismatch(ProtocolError):
    pass


@dataclass(frozen=True)
class ProtocolConfig:
    n: int = 25
    subset_size: int | None = None
    test_size: int | None = None
    variant: Variant = Variant.AON
    bc_mode: BcMode = BcMode.NON_BCCC
    seed: int = 0
    ancillas: str = "full"
    branch_cap: int = DEFAULT_BRANCH_CAP
    strict: bool = True

    def __post_init__(self):
        if self.subset_size is None:
            object.__setattr__(self, "subset_size", math.floor(SUBSET_FRACTION * self.n))
        if self.test_size is None:
            object.__setattr__(self, "test_size", math.ceil(self.n / 5))
        if self.strict and self.n < 8:
            raise ValueError(f"n must be at least 8, got {self.n}")
        if self.n < 1 or self.subset_size < 0 or not 0 <= self.test_size <= self.n:
            raise ValueError(f"invalid sizes in {self}")
        if 2 * self.subset_size > self.n - self.test_size:
            raise ValueError(
                f"infeasible: 2*subset_size={2 * self.subset_size} > n-|R|={self.n - self.test_size}"
            )
        if self.ancillas not in ("full", "compact"):
            raise ValueError(f"ancillas must be 'full' or 'compact', got {self.ancillas!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")


# ---------------------------------------------------------------- messages


@dataclass(frozen=True)
class QubitBatch:
    registers: tuple[str, ...]


@dataclass(frozen=True)
class CommitBatch:
    ids: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class TestRequest:
    R: tuple[int, ...]


@dataclass(frozen=True)
class TestUnveil:
    records: tuple[tuple[int, UnveilRecord, UnveilRecord], ...]


@dataclass(frozen=True)
class Abort:
    reason: str


@dataclass(frozen=True)
class Accept:
    pass


@dataclass(frozen=True)
class BasesAnnounce:
    a: tuple[int, ...]


@dataclass(frozen=True)
class SubsetsAnnounce:
    J0: tuple[int, ...]
    J1: tuple[int, ...]


@dataclass(frozen=True)
class FinalAoN:
    s: int
    beta: int


@dataclass(frozen=True)
class Final12:
    beta0: int
    beta1: int


MESSAGE_TYPES = (QubitBatch, CommitBatch, TestRequest, TestUnveil, Abort, BasesAnnounce, SubsetsAnnounce,
           FinalAoN, Final12)


def message_record(m) -> dict:
    """Classical content of a message as plain JSON-ready data."""
    if isinstance(m, TestUnveil):
        body = [[i, rb.value, rh.value, rb.honest and rh.honest] for i, rb, rh in m.records]
        return {"type": "TestUnveil", "records": body}
    body = {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(m).items()}
    if isinstance(m, CommitBatch):
        body = {"ids": [list(p) for p in m.ids]}
    return {"type": type(m).__name__, **body}


# ---------------------------------------------------------------- parties


def _bits(rng: np.random.Generator, n: int) -> tuple[int, ...]:
    return tuple(int(x) for x in rng.integers(0, 2, size=n))


def _xor(bits, idx) -> int:
    out = 0
    for i in idx:
        out ^= bits[i]
    return out


@dataclass
class AliceState:
    a: tuple[int, ...]
    g: tuple[int, ...]
    b: tuple[int, ...]
    R: tuple[int, ...] = ()
    s: int | None = None
    beta: tuple[int, ...] = ()
    commitments: tuple[tuple[int, int], ...] = ()


@dataclass
class BobHonestState:
    b: tuple[int, ...]
    h: tuple[int, ...]
    commitments: tuple[tuple[int, int], ...]
    T0: tuple[int, ...] = ()
    T1: tuple[int, ...] = ()
    I0: tuple[int, ...] = ()
    I1: tuple[int, ...] = ()
    J0: tuple[int, ...] = ()
    J1: tuple[int, ...] = ()
    swapped: bool = False
    R: tuple[int, ...] = ()
    lie: bool = False


@dataclass(frozen=True)
class Decode:
    """Bob's output: ``decoded`` bits where he is certain, ``guess`` for every bit."""

    decoded: tuple[int | None, ...]
    got: tuple[bool, ...]
    guess: tuple[int, ...]


def alice_prepare(config: ProtocolConfig, lab: Lab, rng: np.random.Generator) -> tuple[AliceState, QubitBatch]:
    a = _bits(rng, config.n)
    g = _bits(rng, config.n)
    secrets = 1 if config.variant is Variant.AON else 2
    b = _bits(rng, secrets)
    regs = tuple(lab.new("alice", f"phi[{i}]", prepare_bb84(a[i], g[i])) for i in range(config.n))
    return AliceState(a=a, g=g, b=b), QubitBatch(regs)


def hand_over(lab: Lab, batch: QubitBatch) -> None:
    for r in batch.registers:
        lab.transfer(r, "alice", "bob")


def bob_honest_measure_and_commit(
    batch: QubitBatch, lab: Lab, vault: CommitmentVault, rng: np.random.Generator, lie: bool = False
) -> tuple[BobHonestState, CommitBatch]:
    """Measure every qubit in a random basis and commit ``(b_i, h_i)``.

    With ``lie=True`` Bob commits the complement of every ``h_i``; binding
    means this is the only point at which he can misreport.
    """
    n = len(batch.registers)
    b = _bits(rng, n)
    h = []
    ids = []
    for i, reg in enumerate(batch.registers):
        if b[i]:
            lab.apply("bob", [reg], H)
        hi = lab.measure("bob", reg).outcome
        lab.retire("bob", reg)
        h.append(hi)
        rb = lab.new("bob", f"B[{i}]", ket(b[i]))
        rh = lab.new("bob", f"H[{i}]", ket(hi ^ int(lie)))
        ids.append((vault.commit(rb), vault.commit(rh)))
    ids = tuple(ids)
    return BobHonestState(b=b, h=tuple(h), commitments=ids, lie=lie), CommitBatch(ids)


def alice_choose_tests(alice: AliceState, config: ProtocolConfig, commits: CommitBatch,
                       rng: np.random.Generator) -> TestRequest:
    alice.commitments = commits.ids
    R = tuple(sorted(int(i) for i in rng.choice(config.n, size=config.test_size, replace=False)))
    alice.R = R
    return TestRequest(R)


def bob_honest_unveil(bob: BobHonestState, vault: CommitmentVault, request: TestRequest) -> TestUnveil:
    bob.R = request.R
    records = []
    for i in request.R:
        cb, ch = bob.commitments[i]
        records.append((i, vault.unveil(cb), vault.unveil(ch)))
    return TestUnveil(tuple(records))


def alice_test(alice: AliceState, unveils: TestUnveil) -> Accept | Abort:
    opened = tuple(sorted(i for i, _, _ in unveils.records))
    if opened != tuple(sorted(alice.R)):
        raise UnveilMismatch(f"unveiled indices {opened} do not match R={alice.R}")
    for i, rb, rh in unveils.records:
        if (rb.id, rh.id) != tuple(alice.commitments[i]):
            raise UnveilMismatch(f"index {i}: unveiled ids {(rb.id, rh.id)} are not the committed pair")
        if not (rb.honest and rh.honest):
            return Abort(f"commitment check failed at index {i}")
        if alice.a[i] == rb.value and alice.g[i] != rh.value:
            return Abort(f"basis match with wrong result at index {i}")
    return Accept()


def alice_announce_bases(alice: AliceState) -> BasesAnnounce:
    return BasesAnnounce(alice.a)


def choose_subsets(cand0, cand1, k: int, rng: np.random.Generator) -> tuple[tuple[int, ...], tuple[int, ...]]:
    if len(cand0) < k or len(cand1) < k:
        raise InfeasiblePartition(
            f"need {k} indices in each class, have {len(cand0)} and {len(cand1)} outside R"
        )
    i0 = tuple(sorted(int(x) for x in rng.choice(np.asarray(cand0, dtype=int), size=k, replace=False)))
    i1 = tuple(sorted(int(x) for x in rng.choice(np.asarray(cand1, dtype=int), size=k, replace=False)))
    return i0, i1


def bob_partition_honest(bob: BobHonestState, bases: BasesAnnounce, config: ProtocolConfig,
                         rng: np.random.Generator) -> SubsetsAnnounce:
    a = bases.a
    bob.T0 = tuple(i for i in range(len(a)) if a[i] == bob.b[i])
    bob.T1 = tuple(i for i in range(len(a)) if a[i] != bob.b[i])
    R = set(bob.R)
    bob.I0, bob.I1 = choose_subsets([i for i in bob.T0 if i not in R], [i for i in bob.T1 if i not in R],
                                    config.subset_size, rng)
    bob.swapped = bool(rng.integers(0, 2))
    bob.J0, bob.J1 = (bob.I1, bob.I0) if bob.swapped else (bob.I0, bob.I1)
    return SubsetsAnnounce(bob.J0, bob.J1)


def _check_subsets(alice: AliceState, subsets: SubsetsAnnounce, config: ProtocolConfig) -> None:
    j0, j1 = set(subsets.J0), set(subsets.J1)
    n = len(alice.a)
    if len(j0) != len(subsets.J0) or len(j1) != len(subsets.J1):
        raise MalformedSubsets("repeated index in announced subsets")
    if len(j0) != config.subset_size or len(j1) != config.subset_size:
        raise MalformedSubsets(f"subset sizes {len(j0)}, {len(j1)} != {config.subset_size}")
    if j0 & j1:
        raise MalformedSubsets("J0 and J1 overlap")
    if (j0 | j1) & set(alice.R):
        raise MalformedSubsets("announced subsets intersect the test set R")
    if any(not 0 <= i < n for i in j0 | j1):
        raise MalformedSubsets("index out of range")


def alice_final(alice: AliceState, subsets: SubsetsAnnounce, config: ProtocolConfig,
                rng: np.random.Generator) -> FinalAoN | Final12:
    _check_subsets(alice, subsets, config)
    if config.variant is Variant.AON:
        s = int(rng.integers(0, 2))
        js = subsets.J1 if s else subsets.J0
        beta = alice.b[0] ^ _xor(alice.g, js)
        alice.s, alice.beta = s, (beta,)
        return FinalAoN(s, beta)
    beta0 = alice.b[0] ^ _xor(alice.g, subsets.J0)
    beta1 = alice.b[1] ^ _xor(alice.g, subsets.J1)
    alice.beta = (beta0, beta1)
    return Final12(beta0, beta1)


def bob_decode_honest(bob: BobHonestState, final: FinalAoN | Final12, rng: np.random.Generator) -> Decode:
    if isinstance(final, FinalAoN):
        js = bob.J1 if final.s else bob.J0
        if js == bob.I0:
            d = final.beta ^ _xor(bob.h, js)
            return Decode((d,), (True,), (d,))
        return Decode((None,), (False,), (int(rng.integers(0, 2)),))
    j = 0 if bob.J0 == bob.I0 else 1
    beta = (final.beta0, final.beta1)
    d = beta[j] ^ _xor(bob.h, bob.I0)
    other = int(rng.integers(0, 2))
    decoded = [None, None]
    guess = [other, other]
    decoded[j] = d
    guess[j] = d
    got = [False, False]
    got[j] = True
    return Decode(tuple(decoded), tuple(got), tuple(guess))
