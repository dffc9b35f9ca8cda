"""Frequency and edge-case examples for the protocol parties, at 10^4 samples."""

import numpy as np
import pytest

from qotlab.adversary import EntangledBob, u3_operator
from qotlab.commitment import CommitmentVault
from qotlab.lab import Lab
from qotlab.linalg import H, ket
from qotlab.protocol import (
    Accept,
    AliceState,
    BasesAnnounce,
    BobHonestState,
    InfeasiblePartition,
    ProtocolConfig,
    alice_test,
    bob_partition_honest,
)
from qotlab.protocol import TestUnveil as Unveil
from qotlab.registers import prepare_bb84
from qotlab.session import Strategy, run_session

SAMPLES = 10_000


@pytest.fixture(scope="module")
def honest_batch():
    config = ProtocolConfig(n=12)
    out = []
    k = 0
    while len(out) < SAMPLES:
        try:
            out.append(run_session(config, Strategy.HONEST, seed=(2024, k)))
        except InfeasiblePartition:
            pass
        k += 1
    return out


def test_ordering_bit_is_uniform(honest_batch):
    assert abs(np.mean([r.bob_swapped for r in honest_batch]) - 0.5) < 0.015


def test_alice_s_is_uniform(honest_batch):
    assert abs(np.mean([r.alice.s for r in honest_batch]) - 0.5) < 0.015


def test_honest_decode_branches(honest_batch):
    got = [r for r in honest_batch if r.got[0]]
    missed = [r for r in honest_batch if not r.got[0]]
    assert all(r.guess[0] == r.alice_bits[0] for r in got)
    assert abs(np.mean([r.correct[0] for r in missed]) - 0.5) < 0.02


def test_conjugate_basis_results_are_uniform():
    rng = np.random.default_rng(5)
    ones = 0
    for k in range(SAMPLES):
        a = int(rng.integers(0, 2))
        lab = Lab(rng)
        reg = lab.new("bob", "q", prepare_bb84(a, int(rng.integers(0, 2))))
        if a == 0:
            lab.apply("bob", [reg], H)
        ones += lab.measure("bob", reg).outcome
    assert abs(ones / SAMPLES - 0.5) < 0.015


def test_empty_test_set_accepts():
    alice = AliceState(a=(0,) * 8, g=(0,) * 8, b=(0,), R=())
    assert isinstance(alice_test(alice, Unveil(())), Accept)


def test_all_bases_matching_is_infeasible():
    bob = BobHonestState(b=(0, 1) * 5, h=(0,) * 10, commitments=())
    with pytest.raises(InfeasiblePartition):
        bob_partition_honest(bob, BasesAnnounce((0, 1) * 5), ProtocolConfig(n=10, test_size=0),
                             np.random.default_rng(0))


def test_gamma_outcomes_are_uniform():
    # Gamma = (B != a) XOR S' with both controls in |+>: a fair coin per index.
    ones = 0
    rng = np.random.default_rng(9)
    for k in range(SAMPLES // 10):
        lab = Lab(rng)
        lab.new("bob", "Sprime", H @ ket(0))
        for i in range(10):
            lab.new("bob", f"B[{i}]", H @ ket(0))
            g = lab.new("bob", f"Gamma[{i}]", ket(0))
            lab.apply("bob", ["Sprime", f"B[{i}]", g], u3_operator(i % 2), split_control=True)
            ones += lab.measure("bob", g).outcome
    assert abs(ones / SAMPLES - 0.5) < 0.015


def test_forced_branch_partition_rule():
    # In the S'=0 branch, Gamma=0 exactly when b equals a.
    for a in (0, 1):
        for b in (0, 1):
            u = u3_operator(a)
            state = np.kron(np.kron(ket(0), ket(b)), ket(0))
            out = int(np.argmax(np.abs(u @ state)))
            assert (out & 1 == 0) == (a == b)


def test_unveiled_pairs_never_fail_the_check():
    config = ProtocolConfig(n=20, test_size=10)
    checked = 0
    b_ones = 0
    for seed in range(SAMPLES // 10):
        lab = Lab(np.random.default_rng(seed))
        vault = CommitmentVault(lab)
        bob = EntangledBob(lab, vault, config)
        rng = np.random.default_rng(seed + 1)
        a = rng.integers(0, 2, size=10)
        g = rng.integers(0, 2, size=10)
        for i in range(10):
            q = lab.new("bob", f"phi[{i}]", prepare_bb84(int(a[i]), int(g[i])))
            bob.attach_u1_and_commit(i, q)
        bob.R = tuple(range(10))
        for i in range(10):
            rb, rh = bob.test_unveil(i)
            b_ones += rb.value
            checked += 1
            if rb.value == a[i]:
                assert rh.value == g[i]
    assert checked == SAMPLES
    assert abs(b_ones / SAMPLES - 0.5) < 0.015
