"""One protocol session from Alice's first qubit to Bob's guess."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from qotlab.adversary import CheatReport, EntangledBob, PovmPair
from qotlab.commitment import CommitmentVault
from qotlab.lab import Lab
from qotlab.protocol import (
    Abort,
    AliceState,
    CommitBatch,
    FinalAoN,
    ProtocolConfig,
    SubsetsAnnounce,
    TestUnveil,
    Variant,
    alice_announce_bases,
    alice_choose_tests,
    alice_final,
    alice_prepare,
    alice_test,
    bob_decode_honest,
    bob_honest_measure_and_commit,
    bob_honest_unveil,
    bob_partition_honest,
    hand_over,
    message_record,
)


class Strategy(enum.Enum):
    HONEST = "honest"
    ENTANGLING = "entangling"
    LYING_UNVEILER = "lying-unveiler"


def session_streams(entropy: int | Sequence[int]) -> tuple[np.random.Generator, ...]:
    """Independent ``(alice, bob, nature)`` generators for one session."""
    ent = [int(entropy)] if np.isscalar(entropy) else [int(e) for e in entropy]
    return tuple(np.random.default_rng(np.random.SeedSequence(ent, spawn_key=(k,))) for k in range(3))


@dataclass(frozen=True)
class SessionResult:
    strategy: Strategy
    variant: Variant
    transcript: tuple
    alice_bits: tuple[int, ...]
    guess: tuple[int, ...] = ()
    got: tuple[bool, ...] = ()
    aborted: bool = False
    p_correct: float | None = None
    cheat: CheatReport | None = None
    target: int = 0
    alice: AliceState | None = field(default=None, compare=False, repr=False)
    J: tuple[tuple[int, ...], tuple[int, ...]] = ((), ())
    bob_swapped: bool | None = field(default=None, compare=False, repr=False)
    oracle_fidelities: tuple[float, ...] = field(default=(), compare=False, repr=False)
    oracle_prob_gaps: tuple[float, ...] = field(default=(), compare=False, repr=False)

    @property
    def correct(self) -> tuple[bool, ...]:
        return tuple(g == b for g, b in zip(self.guess, self.alice_bits))

    @property
    def matched(self) -> bool | None:
        """Whether Bob's guess of the primary bit (``b`` or the target) was right."""
        if self.aborted:
            return None
        return self.correct[self.target]

    def to_text(self) -> str:
        body = {
            "strategy": self.strategy.value,
            "variant": self.variant.value,
            "aborted": self.aborted,
            "alice_bits": list(self.alice_bits),
            "guess": list(self.guess),
            "got": list(self.got),
            "target": self.target,
            "p_correct": None if self.p_correct is None else float(f"{self.p_correct:.12g}"),
            "transcript": [message_record(m) for m in self.transcript],
        }
        if self.cheat is not None:
            body["cheat"] = {k: (float(f"{v:.12g}") if isinstance(v, float) else v)
                             for k, v in self.cheat.to_dict().items()}
        return json.dumps(body, sort_keys=False, separators=(",", ":"))


def _entangled_commit(bob: EntangledBob, batch) -> CommitBatch:
    return CommitBatch(tuple(bob.attach_u1_and_commit(i, r) for i, r in enumerate(batch.registers)))


def _entangled_unveil(bob: EntangledBob, request) -> TestUnveil:
    bob.R = request.R
    return TestUnveil(tuple((i, *bob.test_unveil(i)) for i in request.R))


def run_session(config: ProtocolConfig, strategy: Strategy = Strategy.HONEST,
                seed: int | Sequence[int] | None = None, target: int = 0, oracle: bool = False,
                pov: PovmPair | None = None) -> SessionResult:
    """Run one session. ``target`` picks the bit an entangling Bob decodes in 1-2 OT.

    With ``oracle=True`` a dense simulation shadows the branched one and the
    per-step fidelities are attached to the result.
    """
    if target not in (0, 1) or (config.variant is Variant.AON and target != 0):
        raise ValueError(f"invalid target {target} for {config.variant.value}")
    alice_rng, bob_rng, nature = session_streams(config.seed if seed is None else seed)
    lab = Lab(nature, branch_cap=config.branch_cap, shadow=oracle)
    vault = CommitmentVault(lab, mode=config.bc_mode)
    transcript = []

    alice, batch = alice_prepare(config, lab, alice_rng)
    transcript.append(batch)
    hand_over(lab, batch)

    if strategy is Strategy.ENTANGLING:
        bob = EntangledBob(lab, vault, config)
        commits = _entangled_commit(bob, batch)
    else:
        bob, commits = bob_honest_measure_and_commit(batch, lab, vault, bob_rng,
                                                     lie=strategy is Strategy.LYING_UNVEILER)
    transcript.append(commits)
    request = alice_choose_tests(alice, config, commits, alice_rng)
    transcript.append(request)
    unveils = _entangled_unveil(bob, request) if strategy is Strategy.ENTANGLING \
        else bob_honest_unveil(bob, vault, request)
    transcript.append(unveils)
    verdict = alice_test(alice, unveils)

    def finish(**kw) -> SessionResult:
        return SessionResult(strategy, config.variant, tuple(transcript), alice.b, alice=alice, target=target,
                             oracle_fidelities=tuple(lab.fidelities), oracle_prob_gaps=tuple(lab.prob_gaps), **kw)

    if isinstance(verdict, Abort):
        transcript.append(verdict)
        return finish(aborted=True)

    bases = alice_announce_bases(alice)
    transcript.append(bases)
    if strategy is Strategy.ENTANGLING:
        subsets = SubsetsAnnounce(*bob.apply_u3_partition(bases.a, bob_rng))
    else:
        subsets = bob_partition_honest(bob, bases, config, bob_rng)
    transcript.append(subsets)
    final = alice_final(alice, subsets, config, alice_rng)
    transcript.append(final)
    J = (subsets.J0, subsets.J1)

    if strategy is not Strategy.ENTANGLING:
        dec = bob_decode_honest(bob, final, bob_rng)
        p = 1.0 if dec.got[target] else 0.5
        return finish(guess=dec.guess, got=dec.got, p_correct=p, J=J, bob_swapped=bob.swapped)

    pov = PovmPair.standard() if pov is None else pov
    if isinstance(final, FinalAoN):
        s, beta = final.s, final.beta
    else:
        s, beta = target, (final.beta0, final.beta1)[target]
    g, p, eff = bob.decode(s, beta, pov, bob_rng, nature)
    guess = [g]
    if config.variant is Variant.ONE_OUT_OF_TWO:
        # One measurement yields one bit; the other is a coin flip.
        other = int(bob_rng.integers(0, 2))
        guess = [g, other] if target == 0 else [other, g]
    truth = alice.b[target]
    report = CheatReport(target=target, good_amp=eff.good_amp, fail_amp=eff.fail_amp, coherent=eff.coherent,
                         p_correct=p, guess=g, truth=truth, fail_overlap=eff.fail_overlap)
    got = tuple(False for _ in guess)
    return finish(guess=tuple(guess), got=got, p_correct=p, cheat=report, J=J)
