import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qotlab.commitment import BcMode
from qotlab.protocol import (
    Abort,
    Accept,
    AliceState,
    FinalAoN,
    Final12,
    InfeasiblePartition,
    MalformedSubsets,
    ProtocolConfig,
    SubsetsAnnounce,
    UnveilMismatch,
    Variant,
    alice_final,
    alice_test,
    choose_subsets,
)
from qotlab.commitment import UnveilRecord
from qotlab.protocol import TestUnveil as Unveil
from qotlab.session import Strategy, run_session, session_streams


def honest(config, seed):
    for attempt in range(100):
        try:
            return run_session(config, Strategy.HONEST, seed=(seed, attempt))
        except InfeasiblePartition:
            continue
    raise AssertionError("no feasible session")


def test_config_defaults():
    c = ProtocolConfig(n=25)
    assert (c.subset_size, c.test_size) == (6, 5)


@pytest.mark.parametrize("kw", [
    {"n": 5},
    {"n": 10, "subset_size": 5},
    {"n": 10, "test_size": 11},
    {"n": 10, "ancillas": "tiny"},
    {"n": 10, "seed": -1},
])
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        ProtocolConfig(**kw)


def test_small_n_allowed_when_not_strict():
    assert ProtocolConfig(n=3, subset_size=1, test_size=1, strict=False).n == 3


@given(st.integers(0, 2**32), st.sampled_from(list(Variant)), st.sampled_from(list(BcMode)))
def test_honest_session_invariants(seed, variant, mode):
    config = ProtocolConfig(n=12, variant=variant, bc_mode=mode)
    r = honest(config, seed)
    assert not r.aborted
    J0, J1 = r.J
    assert len(J0) == len(J1) == config.subset_size
    assert not set(J0) & set(J1)
    assert not (set(J0) | set(J1)) & set(r.alice.R)
    for g, ok, truth in zip(r.guess, r.got, r.alice_bits):
        if ok:
            assert g == truth
    if variant is Variant.ONE_OUT_OF_TWO:
        assert sum(r.got) == 1
    assert len(r.transcript) == 7


def test_honest_matched_set_gives_no_errors():
    # When Bob holds the matched set, decoding is exact for every seed tried.
    hits = 0
    for seed in range(200):
        r = honest(ProtocolConfig(n=16), seed)
        if r.got[0]:
            hits += 1
            assert r.guess[0] == r.alice_bits[0]
    assert 70 < hits < 130


def test_session_is_deterministic():
    c = ProtocolConfig(n=12)
    a = honest(c, 7)
    b = honest(c, 7)
    assert a.to_text() == b.to_text()
    assert honest(c, 8).to_text() != a.to_text()


def test_streams_are_independent():
    alice, bob, nature = session_streams((1, 2))
    draws = [g.integers(0, 2**32, size=4).tolist() for g in (alice, bob, nature)]
    assert len({tuple(d) for d in draws}) == 3


def test_lying_unveiler_aborts_often():
    c = ProtocolConfig(n=12)
    aborts = sum(run_session(c, Strategy.LYING_UNVEILER, seed=(s, 0)).aborted for s in range(60))
    assert aborts > 45


def test_aborted_transcript_ends_with_abort():
    c = ProtocolConfig(n=12)
    for s in range(50):
        r = run_session(c, Strategy.LYING_UNVEILER, seed=(s, 0))
        if r.aborted:
            assert isinstance(r.transcript[-1], Abort)
            assert r.matched is None
            return
    pytest.fail("no abort observed")


def test_choose_subsets_infeasible():
    with pytest.raises(InfeasiblePartition):
        choose_subsets([0, 1], [2], 2, np.random.default_rng(0))


def _alice():
    return AliceState(a=(0, 1, 0, 1, 0, 1, 0, 1), g=(1, 1, 0, 0, 1, 0, 1, 0), b=(1, 0), R=(0,),
                      commitments=tuple((2 * i, 2 * i + 1) for i in range(8)))


@pytest.mark.parametrize("J0,J1", [
    ((1, 1), (2, 3)),      # repeated index
    ((1,), (2, 3)),        # wrong size
    ((1, 2), (2, 3)),      # overlap
    ((0, 2), (3, 4)),      # touches R
    ((1, 2), (3, 99)),     # out of range
])
def test_malformed_subsets(J0, J1):
    c = ProtocolConfig(n=8, subset_size=2, test_size=1)
    with pytest.raises(MalformedSubsets):
        alice_final(_alice(), SubsetsAnnounce(J0, J1), c, np.random.default_rng(0))


def test_final_messages():
    c = ProtocolConfig(n=8, subset_size=2, test_size=1)
    f = alice_final(_alice(), SubsetsAnnounce((1, 2), (3, 4)), c, np.random.default_rng(0))
    assert isinstance(f, FinalAoN)
    js = (1, 2) if f.s == 0 else (3, 4)
    g = _alice().g
    assert f.beta == 1 ^ g[js[0]] ^ g[js[1]]
    c12 = ProtocolConfig(n=8, subset_size=2, test_size=1, variant=Variant.ONE_OUT_OF_TWO)
    f12 = alice_final(_alice(), SubsetsAnnounce((1, 2), (3, 4)), c12, np.random.default_rng(0))
    assert isinstance(f12, Final12)
    assert (f12.beta0, f12.beta1) == (1 ^ 1 ^ 0, 0 ^ 0 ^ 1)


def test_alice_test_checks():
    al = _alice()
    ok = Unveil(((0, UnveilRecord(0, 0), UnveilRecord(1, 1)),))
    assert isinstance(alice_test(al, ok), Accept)
    bad = Unveil(((0, UnveilRecord(0, 0), UnveilRecord(1, 0)),))
    assert isinstance(alice_test(al, bad), Abort)
    # Mismatched bases are never tested.
    other = Unveil(((0, UnveilRecord(0, 1), UnveilRecord(1, 0)),))
    assert isinstance(alice_test(al, other), Accept)
    with pytest.raises(UnveilMismatch):
        alice_test(al, Unveil(((1, UnveilRecord(2, 0), UnveilRecord(3, 0)),)))
    with pytest.raises(UnveilMismatch):
        alice_test(al, Unveil(((0, UnveilRecord(4, 0), UnveilRecord(5, 1)),)))
