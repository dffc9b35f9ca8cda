"""The entangling honest-but-curious Bob.

Instead of measuring, Bob keeps ``b_i`` and ``h_i`` in registers ``B[i]`` and
``H[i]`` (delayed measurement via ``U1``), commits them coherently through
ancillas ``E`` and ``Psi`` (``U2``), and after the bases are announced uses a
single control qubit ``Sprime`` to put the labelling of ``J0, J1`` in
superposition (``U3``). After Alice's final message his state is, on the
three-dimensional span of "decodes 0", "decodes 1" and "failed",
``(|b> + |?>)/√2``, which a two-outcome POVM decodes with probability
``(2+√3)/4``.

Register order for the operators below is the argument order of
:meth:`qotlab.lab.Lab.apply`; each matrix uses the left-factor-major
convention of :mod:`qotlab.linalg`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from qotlab.commitment import BcMode, CommitmentVault, UnveilRecord
from qotlab.lab import Lab
from qotlab.linalg import H as HADAMARD
from qotlab.linalg import I2, X, ket, projector, tensor
from qotlab.protocol import ProtocolConfig, choose_subsets
from qotlab.registers import BranchedState, prepare_bb84

RELIABILITY = (2 + np.sqrt(3)) / 4
AMP_TOL = 1e-9


class ParityNotDeterministic(RuntimeError):
    pass


class TargetAlreadyChosen(RuntimeError):
    pass


def u1_operator() -> np.ndarray:
    """Controlled measurement on ``B ⊗ phi ⊗ H``: flip ``H`` iff phi reads 1 in basis ``B``."""
    u = np.zeros((8, 8), dtype=complex)
    for b in (0, 1):
        for h in (0, 1):
            u += tensor(projector(ket(b)), projector(prepare_bb84(b, h)), X if h else I2)
    return u


def u2_operator(ancillas: str = "full") -> np.ndarray:
    """Copy a control bit into the commitment system (``E ⊗ Psi``, or ``Psi`` alone).

    ``|e0>|psi0> = |00>`` and ``|e1>|psi1> = |11>``; the map between them is ``X ⊗ X``.
    """
    flip = np.kron(X, X) if ancillas == "full" else X
    d = flip.shape[0]
    return np.kron(projector(ket(0)), np.eye(d)) + np.kron(projector(ket(1)), flip)


@lru_cache(maxsize=None)
def u3_operator(a: int) -> np.ndarray:
    """On ``Sprime ⊗ B ⊗ Gamma``: ``Gamma ^= (B != a) XOR Sprime``."""
    u = np.zeros((8, 8), dtype=complex)
    for sp in (0, 1):
        for b in (0, 1):
            flip = (b != a) ^ sp
            u += tensor(projector(ket(sp)), projector(ket(b)), X if flip else I2)
    u.flags.writeable = False
    return u


def decode_povm() -> np.ndarray:
    """``E0`` of the two-outcome decoding measurement on span{|0>, |1>, |?>}."""
    r3 = np.sqrt(3)
    return np.array(
        [
            [2 + r3, -1, 1 + r3],
            [-1, 2 - r3, 1 - r3],
            [1 + r3, 1 - r3, 2],
        ],
        dtype=complex,
    ) / 6


@dataclass(frozen=True, eq=False)
class PovmPair:
    E0: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.E0, dtype=complex)
        if e.shape != (3, 3):
            raise ValueError(f"E0 must be 3x3, got {e.shape}")
        if np.max(np.abs(e - e.conj().T)) > 1e-12:
            raise ValueError("E0 is not Hermitian")
        w = np.linalg.eigvalsh(e)
        if w[0] < -1e-12 or w[-1] > 1 + 1e-12:
            raise ValueError(f"E0 eigenvalues {w} outside [0, 1]")
        object.__setattr__(self, "E0", e)

    @property
    def complement(self) -> np.ndarray:
        return np.eye(3) - self.E0

    def element(self, outcome: int) -> np.ndarray:
        return self.E0 if outcome == 0 else self.complement

    @property
    def is_rank1_projector(self) -> bool:
        e = self.E0
        return bool(np.max(np.abs(e @ e - e)) < 1e-12 and abs(np.trace(e) - 1) < 1e-12)

    @classmethod
    def standard(cls) -> "PovmPair":
        return cls(decode_povm())


def good_state(bit: int) -> np.ndarray:
    """``(|bit> + |?>)/√2`` in the three-dimensional decoding space."""
    return (ket(bit, 3) + ket(2, 3)) / np.sqrt(2)


def analytic_reliability(pov: PovmPair) -> float:
    phi0, phi1 = good_state(0), good_state(1)
    p = 0.5 * np.vdot(phi0, pov.E0 @ phi0) + 0.5 * np.vdot(phi1, pov.complement @ phi1)
    return float(p.real)


@dataclass(frozen=True, eq=False)
class EffectiveDecodeState:
    """Bob's post-protocol state reduced to span{|0>, |1>, |?>}.

    ``decoded`` is the bit the good branch maps to (``beta XOR parity``);
    ``fail_overlap`` compares the failed component reduced under both
    possible announcements and ``fail_parity_bias`` is ``|p(0) - p(1)|`` of
    the parity register inside the failed component.
    """

    vector: np.ndarray
    decoded: int
    good_amp: float
    fail_amp: float
    fail_overlap: float = 1.0
    fail_parity_bias: float = 0.0

    def __post_init__(self):
        if abs(np.linalg.norm(self.vector) - 1) > 1e-10:
            raise ValueError("effective state is not normalized")

    @property
    def coherent(self) -> bool:
        return self.good_amp > AMP_TOL and self.fail_amp > AMP_TOL


def povm_decode(eff: EffectiveDecodeState, pov: PovmPair, rng: np.random.Generator) -> tuple[int, float]:
    """Sample the POVM on ``eff``; outcome ``E0`` means guess 0."""
    if abs(np.linalg.norm(eff.vector) - 1) > 1e-10:
        raise ValueError("effective state is not normalized")
    phi = eff.vector
    p0 = float(np.clip(np.vdot(phi, pov.E0 @ phi).real, 0.0, 1.0))
    guess = 0 if rng.random() < p0 else 1
    p_correct = p0 if eff.decoded == 0 else 1 - p0
    return guess, p_correct


def projective_decode(eff: EffectiveDecodeState, rng: np.random.Generator) -> tuple[int, float]:
    """Measure in {|0>, |1>, |?>}: certain on a decode outcome, coin flip on ``?``."""
    p_good = eff.good_amp**2
    if rng.random() < p_good:
        return eff.decoded, p_good + 0.5 * (1 - p_good)
    return int(rng.integers(0, 2)), p_good + 0.5 * (1 - p_good)


@dataclass(frozen=True)
class CheatReport:
    target: int
    good_amp: float
    fail_amp: float
    coherent: bool
    p_correct: float
    guess: int
    truth: int
    fail_overlap: float

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "good_amp": self.good_amp,
            "fail_amp": self.fail_amp,
            "coherent": self.coherent,
            "p_correct": self.p_correct,
            "guess": self.guess,
            "truth": self.truth,
            "fail_overlap": self.fail_overlap,
        }


class EntangledBob:
    """Bob's side of the entangling attack, acting through the session lab."""

    def __init__(self, lab: Lab, vault: CommitmentVault, config: ProtocolConfig):
        self.lab = lab
        self.vault = vault
        self.config = config
        self.commitments: dict[int, tuple[int, int]] = {}
        self.R: tuple[int, ...] = ()
        self.J0: tuple[int, ...] = ()
        self.J1: tuple[int, ...] = ()
        self.gamma: dict[int, int] = {}
        self.target: int | None = None
        self._u1 = u1_operator()
        self._u2 = u2_operator(config.ancillas)

    # step II ---------------------------------------------------------------

    def _commit_bit(self, control: str, tag: str) -> int:
        lab = self.lab
        regs = [control]
        if self.config.ancillas == "full":
            regs.append(lab.new("bob", f"E{tag}", ket(0)))
        psi = lab.new("bob", f"Psi{tag}", ket(0))
        regs.append(psi)
        lab.apply("bob", regs, self._u2)
        return self.vault.commit(psi)

    def attach_u1_and_commit(self, i: int, qubit: str) -> tuple[int, int]:
        lab = self.lab
        b = lab.new("bob", f"B[{i}]", HADAMARD @ ket(0))
        h = lab.new("bob", f"H[{i}]", ket(0))
        lab.apply("bob", [b, qubit, h], self._u1)
        ids = (self._commit_bit(b, f"b[{i}]"), self._commit_bit(h, f"h[{i}]"))
        self.commitments[i] = ids
        return ids

    # step III --------------------------------------------------------------

    def test_unveil(self, i: int) -> tuple[UnveilRecord, UnveilRecord]:
        if i not in self.R:
            raise ValueError(f"index {i} is not in the test set")
        cb, ch = self.commitments[i]
        records = (self.vault.unveil(cb), self.vault.unveil(ch))
        # Everything at index i is classical now; drop it.
        for reg in (f"B[{i}]", f"phi[{i}]", f"H[{i}]", f"Eb[{i}]", f"Eh[{i}]"):
            if reg in self.lab.owner:
                self.lab.retire("bob", reg)
        return records

    # step IV ---------------------------------------------------------------

    def apply_u3_partition(self, bases, rng: np.random.Generator) -> tuple[tuple[int, ...], tuple[int, ...]]:
        lab = self.lab
        lab.new("bob", "Sprime", HADAMARD @ ket(0))
        R = set(self.R)
        for i in range(self.config.n):
            if i in R:
                continue
            gamma = lab.new("bob", f"Gamma[{i}]", ket(0))
            lab.apply("bob", ["Sprime", f"B[{i}]", gamma], u3_operator(bases[i]), split_control=True)
            self.gamma[i] = lab.measure("bob", gamma).outcome
            lab.retire("bob", gamma)
        cand0 = [i for i, v in self.gamma.items() if v == 0]
        cand1 = [i for i, v in self.gamma.items() if v == 1]
        self.J0, self.J1 = choose_subsets(cand0, cand1, self.config.subset_size, rng)
        return self.J0, self.J1

    # step V ----------------------------------------------------------------

    def _reduce(self, state: BranchedState, s: int, beta: int):
        good = state.project("Sprime", s)
        fail = state.project("Sprime", 1 - s)
        g2, f2 = good.norm2(), fail.norm2()
        decoded = None
        if g2 > AMP_TOL**2:
            p = good.probabilities("Parity")
            parity = int(np.argmax(p))
            if p[parity] < 1 - 1e-9:
                raise ParityNotDeterministic(f"good-branch parity distribution {p}")
            decoded = beta ^ parity
        return good, fail, g2, f2, decoded

    def build_effective_state(self, s: int, beta: int) -> EffectiveDecodeState:
        if self.target is not None:
            raise TargetAlreadyChosen("the decoding measurement was already built in this session")
        self.target = s
        subset = self.J1 if s else self.J0
        self.lab.new("bob", "Parity", ket(0))
        self.lab.parity("bob", [f"H[{i}]" for i in subset], "Parity")
        state = self.lab.state
        good, fail, g2, f2, decoded = self._reduce(state, s, beta)
        _, fail_alt, _, _, _ = self._reduce(state, s, beta ^ 1)
        total = g2 + f2
        good_amp, fail_amp = float(np.sqrt(g2 / total)), float(np.sqrt(f2 / total))
        if good_amp > AMP_TOL and fail_amp > AMP_TOL:
            for amp in (good_amp, fail_amp):
                if abs(amp - 1 / np.sqrt(2)) > AMP_TOL:
                    raise ParityNotDeterministic(f"branch amplitudes {good_amp}, {fail_amp} are not 1/√2")
        overlap, bias = 1.0, 0.0
        if f2 > AMP_TOL**2:
            overlap = float(abs(fail.inner(fail_alt)) / np.sqrt(f2 * fail_alt.norm2()))
            p = fail.probabilities("Parity")
            bias = float(abs(p[0] - p[1]))
        if decoded is None:
            decoded = beta  # no good branch; the label is never read
        vec = good_amp * ket(decoded, 3) + fail_amp * ket(2, 3)
        return EffectiveDecodeState(vec, decoded, good_amp, fail_amp, overlap, bias)

    def decode(self, s: int, beta: int, pov: PovmPair, rng: np.random.Generator, nature: np.random.Generator):
        """Build the effective state for position ``s`` and decode it.

        When the commitment forced classical values (BCCC) the superposition
        is gone and Bob knows which branch he is in, so he falls back to
        reading it directly.
        """
        eff = self.build_effective_state(s, beta)
        if eff.coherent:
            guess, p = povm_decode(eff, pov, nature)
        else:
            guess, p = projective_decode(eff, nature)
        return guess, p, eff

    def povm_decode_12ot(self, target: int, beta0: int, beta1: int, pov: PovmPair,
                         rng: np.random.Generator, nature: np.random.Generator):
        beta = beta1 if target else beta0
        return self.decode(target, beta, pov, rng, nature)
