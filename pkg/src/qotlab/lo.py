"""Lo's switch-unitary attack on ideal one-sided computation, and why it does
not carry over to the commitment-based 1-2 OT.

An :class:`IdealProtocolModel` is the whole honest protocol collapsed into one
unitary ``U`` on Alice's input register ``A`` and Bob's registers. Alice
purifies her input with a dice register ``D``; if her reduced state on ``DA``
does not depend on Bob's input ``j``, the two final states share Schmidt
vectors on ``DA`` and a unitary on Bob's side alone maps one to the other.
Bob then reads ``f(i, j1)``, applies the switch, and reads ``f(i, j2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.stats import unitary_group

from qotlab.linalg import (
    ket,
    partial_trace,
    schmidt_decompose,
    tensor,
    trace_distance,
)
from qotlab.oracle import DenseState

SWITCH_TOL = 1e-9


class ConcealmentError(ValueError):
    """Alice's reduced state depends on Bob's input, so no switch exists."""


@dataclass(frozen=True, eq=False)
class IdealProtocolModel:
    """``U`` acts on ``A ⊗ B``; Bob's space is the product of ``bob_regs`` in order.

    ``bob_regs[0]`` holds Bob's input ``j`` and ``output`` names the register
    where ``f(i, j)`` appears. ``f[i][j]`` is the function table.
    """

    U: np.ndarray
    n_inputs: int
    bob_regs: tuple[tuple[str, int], ...]
    output: str
    f: tuple[tuple[int, ...], ...]
    name: str = "ideal-ot"

    def __post_init__(self):
        d = self.n_inputs * self.dim_b
        if self.U.shape != (d, d):
            raise ValueError(f"U has shape {self.U.shape}, expected {(d, d)}")
        if np.max(np.abs(self.U.conj().T @ self.U - np.eye(d))) > 1e-10:
            raise ValueError("U is not unitary")

    @property
    def dim_b(self) -> int:
        return int(np.prod([d for _, d in self.bob_regs]))

    @property
    def n_bob_inputs(self) -> int:
        return self.bob_regs[0][1]

    def bob_initial(self, j: int) -> np.ndarray:
        return tensor(*[ket(j if k == 0 else 0, d) for k, (_, d) in enumerate(self.bob_regs)])

    def final(self, i: int, j: int) -> np.ndarray:
        """``|v_ij> = U (|i>_A ⊗ |j, 0...>_B)``."""
        return self.U @ np.kron(ket(i, self.n_inputs), self.bob_initial(j))

    def purified_final(self, j: int) -> np.ndarray:
        """``|v_j> = n^-1/2 Σ_i |i>_D ⊗ |v_ij>`` on ``D ⊗ A ⊗ B``."""
        n = self.n_inputs
        return sum(np.kron(ket(i, n), self.final(i, j)) for i in range(n)) / np.sqrt(n)

    def bob_state(self, i: int, j: int) -> np.ndarray:
        v = self.final(i, j)
        return partial_trace(np.outer(v, v.conj()), [self.n_inputs, self.dim_b], [1])

    def alice_reduction(self, j: int) -> np.ndarray:
        v = self.purified_final(j)
        n = self.n_inputs
        return partial_trace(np.outer(v, v.conj()), [n, n, self.dim_b], [0, 1])


def _messages(i: int) -> tuple[int, int]:
    """Alice's input index ``i`` encodes ``(m0, m1) = divmod(i, 2)``."""
    return divmod(i, 2)


def _permutation_unitary(n_a: int, dims_b: Sequence[int], rule: Callable[[int, tuple[int, ...]], tuple[int, ...]]):
    dims = [n_a, *dims_b]
    total = int(np.prod(dims))
    u = np.zeros((total, total))
    for col in range(total):
        idx = np.unravel_index(col, dims)
        i, rest = int(idx[0]), tuple(int(x) for x in idx[1:])
        row = np.ravel_multi_index((i, *rule(i, rest)), dims)
        u[row, col] = 1
    return u.astype(complex)


def build_ideal_ot() -> IdealProtocolModel:
    """Ideal 1-2 OT: ``|i>|j, o, w> -> |i>|j, o ⊕ m_j, w ⊕ m0 ⊕ m1>``.

    The work qubit ``w`` makes Bob's final states for different ``i``
    orthogonal for either ``j``, which is what keeps Alice's purified view
    independent of ``j``.
    """

    def rule(i, bob):
        j, o, w = bob
        m = _messages(i)
        return (j, o ^ m[j], w ^ m[0] ^ m[1])

    u = _permutation_unitary(4, [2, 2, 2], rule)
    f = tuple(tuple(_messages(i)[j] for j in (0, 1)) for i in range(4))
    return IdealProtocolModel(u, 4, (("j", 2), ("o", 2), ("w", 2)), "o", f, name="ideal-ot")


def build_naive_ot() -> IdealProtocolModel:
    """``|i>|j, o> -> |i>|j, o ⊕ m_j>`` without the work qubit.

    Computes the right function but Alice's purified view depends on ``j``.
    """

    def rule(i, bob):
        j, o = bob
        return (j, o ^ _messages(i)[j])

    u = _permutation_unitary(4, [2, 2], rule)
    f = tuple(tuple(_messages(i)[j] for j in (0, 1)) for i in range(4))
    return IdealProtocolModel(u, 4, (("j", 2), ("o", 2)), "o", f, name="naive-ot")


def random_model(seed: int) -> IdealProtocolModel:
    """Haar-random ``U`` on the small OT dimensions; generically not concealing."""
    u = unitary_group.rvs(8, random_state=np.random.default_rng(seed))
    f = tuple(tuple(_messages(i)[j] for j in (0, 1)) for i in range(2))
    return IdealProtocolModel(u, 2, (("j", 2), ("o", 2)), "o", f, name=f"random-{seed}")


def reduction_gap(model: IdealProtocolModel, j1: int, j2: int) -> float:
    return trace_distance(model.alice_reduction(j1), model.alice_reduction(j2))


@dataclass(frozen=True, eq=False)
class SwitchUnitary:
    matrix: np.ndarray
    j1: int
    j2: int
    schmidt: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def unitarity_error(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def _complete(partial: np.ndarray, basis_in: np.ndarray, basis_out: np.ndarray) -> np.ndarray:
    """Extend ``partial`` (which maps span(basis_in) onto span(basis_out)) to a unitary."""
    comp_in = null_space(basis_in.conj().T) if basis_in.size else np.eye(partial.shape[0])
    comp_out = null_space(basis_out.conj().T) if basis_out.size else np.eye(partial.shape[0])
    return partial + comp_out @ comp_in.conj().T


def construct_switch_unitary(model: IdealProtocolModel, j1: int, j2: int, tol: float = SWITCH_TOL) -> SwitchUnitary:
    """Bob-only unitary with ``(I ⊗ U) |v_j1> = |v_j2>``.

    Built from the Schmidt decomposition of ``|v_j1>`` across ``DA | B``:
    with ``|v_j1> = Σ a_k |α_k>|β_k>`` and ``|β'_k> = (<α_k| ⊗ I)|v_j2> / a_k``
    the switch is ``Σ |β'_k><β_k|`` completed on the complement.
    """
    gap = reduction_gap(model, j1, j2)
    if gap > tol:
        raise ConcealmentError(f"{model.name}: Alice's reduced states differ by {gap:.3e} for j={j1} vs j={j2}")
    n, db = model.n_inputs, model.dim_b
    v1, v2 = model.purified_final(j1), model.purified_final(j2)
    a, alphas, betas = schmidt_decompose(v1, [n * n, db], [0])
    m2 = v2.reshape(n * n, db)
    primes = np.stack([(alphas[:, k].conj() @ m2) / a[k] for k in range(len(a))], axis=1)
    if np.max(np.abs(primes.conj().T @ primes - np.eye(len(a)))) > tol:
        raise ConcealmentError(f"{model.name}: rotated Schmidt vectors are not orthonormal")
    partial = primes @ betas.conj().T
    u = _complete(partial, betas, primes)
    return SwitchUnitary(u, j1, j2, a)


@dataclass(frozen=True)
class SwitchReport:
    max_trace_distance: float
    vector_error: float
    unitarity_error: float
    per_input: tuple[float, ...]

    @property
    def ok(self) -> bool:
        return self.max_trace_distance < SWITCH_TOL and self.vector_error < SWITCH_TOL


def verify_switch(model: IdealProtocolModel, sw: SwitchUnitary) -> SwitchReport:
    """Check ``U ρ^{i,j1} U† = ρ^{i,j2}`` for every classical ``i``."""
    dists = []
    for i in range(model.n_inputs):
        rho1 = model.bob_state(i, sw.j1)
        rho2 = model.bob_state(i, sw.j2)
        dists.append(trace_distance(sw.matrix @ rho1 @ sw.matrix.conj().T, rho2))
    n = model.n_inputs
    full = np.kron(np.eye(n * n), sw.matrix)
    vec_err = float(np.linalg.norm(full @ model.purified_final(sw.j1) - model.purified_final(sw.j2)))
    return SwitchReport(max(dists), vec_err, sw.unitarity_error, tuple(dists))


def double_extraction(model: IdealProtocolModel, i: int, rng: np.random.Generator,
                      sw: SwitchUnitary | None = None) -> tuple[int, int]:
    """Run with ``j=0``, read the output, switch to ``j=1``, read it again."""
    sw = construct_switch_unitary(model, 0, 1) if sw is None else sw
    st = DenseState()
    st.add("A", ket(i, model.n_inputs))
    bob = [name for name, _ in model.bob_regs]
    for name, d in model.bob_regs:
        st.add(name, ket(0, d))
    st.apply(["A", *bob], model.U)
    first, _ = st.measure(model.output, rng=rng)
    st.apply(bob, sw.matrix)
    second, _ = st.measure(model.output, rng=rng)
    return first, second


# ------------------------------------------------------- the BC-based protocol


@dataclass(frozen=True)
class DependenceRecord:
    """One 1-2 OT session seen through both labellings of Bob's subsets.

    ``records`` holds the ``(beta0, beta1)`` Alice would announce for the
    actual ``(J0, J1)`` and for the swapped pair. When they differ, Alice's
    effective input is a function of Bob's labelling.
    """

    records: tuple[tuple[int, int], tuple[int, int]]
    eligible: bool
    joint_correct: bool

    @property
    def nonconstant(self) -> bool:
        return self.records[0] != self.records[1]


def dependence_record(result) -> DependenceRecord | None:
    """Counterfactual check for a completed 1-2 OT :class:`qotlab.session.SessionResult`."""
    if result.aborted:
        return None
    g, b = result.alice.g, result.alice.b
    j0, j1 = result.J

    def parity(idx):
        out = 0
        for k in idx:
            out ^= g[k]
        return out

    p0, p1 = parity(j0), parity(j1)
    actual = (b[0] ^ p0, b[1] ^ p1)
    swapped = (b[0] ^ p1, b[1] ^ p0)
    return DependenceRecord((actual, swapped), p0 != p1, all(result.correct))


@dataclass(frozen=True)
class DependenceReport:
    sessions: int
    eligible: int
    nonconstant: int
    nonconstant_other: int
    joint_correct: int
    projection_valid: bool

    @property
    def nonconstant_fraction(self) -> float:
        return self.nonconstant / self.eligible if self.eligible else float("nan")

    @property
    def joint_accuracy(self) -> float:
        return self.joint_correct / self.sessions if self.sessions else float("nan")


def summarize_dependence(records: Sequence[DependenceRecord]) -> DependenceReport:
    """``projection_valid`` is False once any session shows Alice's input varying with ``J``:
    projecting onto a fixed dice value then no longer isolates a single run."""
    recs = [r for r in records if r is not None]
    eligible = [r for r in recs if r.eligible]
    non = sum(r.nonconstant for r in eligible)
    other = sum(r.nonconstant for r in recs if not r.eligible)
    return DependenceReport(
        sessions=len(recs),
        eligible=len(eligible),
        nonconstant=non,
        nonconstant_other=other,
        joint_correct=sum(r.joint_correct for r in recs),
        projection_valid=non + other == 0,
    )


def bcqot_dependence_check(config, trials: int, seed: int, strategy=None, target: int = 0) -> DependenceReport:
    """Run ``trials`` 1-2 OT sessions and collect the counterfactual records.

    Sessions whose partition is infeasible are retried with the next attempt
    number, matching the harness.
    """
    from qotlab.protocol import InfeasiblePartition, Variant
    from qotlab.session import Strategy, run_session

    if config.variant is not Variant.ONE_OUT_OF_TWO:
        raise ValueError("dependence check needs the 1-2 OT variant")
    strategy = Strategy.ENTANGLING if strategy is None else strategy
    recs = []
    for k in range(trials):
        attempt = 0
        while True:
            try:
                res = run_session(config, strategy, seed=(seed, k, attempt), target=target)
                break
            except InfeasiblePartition:
                attempt += 1
        recs.append(dependence_record(res))
    return summarize_dependence(recs)
