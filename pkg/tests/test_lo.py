from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import unitary_group

from qotlab.lo import (
    ConcealmentError,
    IdealProtocolModel,
    bcqot_dependence_check,
    build_ideal_ot,
    build_naive_ot,
    construct_switch_unitary,
    dependence_record,
    double_extraction,
    random_model,
    reduction_gap,
    summarize_dependence,
    verify_switch,
)
from qotlab.protocol import ProtocolConfig, Variant
from qotlab.session import Strategy


def test_ideal_model_outputs_the_chosen_message():
    m = build_ideal_ot()
    for i in range(m.n_inputs):
        for j in range(m.n_bob_inputs):
            rho = m.bob_state(i, j)
            assert abs(np.trace(rho) - 1) < 1e-12
    # Output register reads f(i, j) with certainty.
    rng = np.random.default_rng(0)
    for i in range(m.n_inputs):
        first, second = double_extraction(m, i, rng)
        assert (first, second) == (m.f[i][0], m.f[i][1])


def test_ideal_model_is_concealing():
    assert reduction_gap(build_ideal_ot(), 0, 1) < 1e-12


@pytest.mark.parametrize("model", [build_naive_ot(), random_model(1), random_model(7)])
def test_non_concealing_models_refuse_switch(model):
    assert reduction_gap(model, 0, 1) > 0.1
    with pytest.raises(ConcealmentError):
        construct_switch_unitary(model, 0, 1)


def test_switch_on_ideal_model():
    m = build_ideal_ot()
    sw = construct_switch_unitary(m, 0, 1)
    rep = verify_switch(m, sw)
    assert rep.ok
    assert rep.unitarity_error < 1e-12
    assert len(rep.per_input) == m.n_inputs
    assert np.isclose(np.sum(sw.schmidt**2), 1)


def test_reverse_switch_inverts_forward():
    m = build_ideal_ot()
    fwd = construct_switch_unitary(m, 0, 1).matrix
    back = construct_switch_unitary(m, 1, 0).matrix
    v0 = m.purified_final(0)
    full = np.kron(np.eye(m.n_inputs**2), back @ fwd)
    assert np.linalg.norm(full @ v0 - v0) < 1e-10


@given(st.integers(0, 2**32))
def test_switch_survives_bob_side_rotation(seed):
    # Post-composing with a Bob-local unitary keeps Alice's reductions equal.
    m = build_ideal_ot()
    v = unitary_group.rvs(m.dim_b, random_state=np.random.default_rng(seed))
    u = np.kron(np.eye(m.n_inputs), v) @ m.U
    rotated = IdealProtocolModel(u, m.n_inputs, m.bob_regs, m.output, m.f, name="rotated")
    assert reduction_gap(rotated, 0, 1) < 1e-9
    rep = verify_switch(rotated, construct_switch_unitary(rotated, 0, 1))
    assert rep.max_trace_distance < 1e-9 and rep.vector_error < 1e-9


def test_model_validation():
    m = build_ideal_ot()
    with pytest.raises(ValueError):
        IdealProtocolModel(np.eye(3), m.n_inputs, m.bob_regs, m.output, m.f)
    with pytest.raises(ValueError):
        IdealProtocolModel(2 * m.U, m.n_inputs, m.bob_regs, m.output, m.f)


def _fake(g, b, J, correct=(True, True), aborted=False):
    return SimpleNamespace(aborted=aborted, alice=SimpleNamespace(g=g, b=b), J=J, correct=correct)


def test_dependence_record_cases():
    g = (1, 0, 0, 0, 1, 0)
    # Parities 0 and 0: swapping J changes nothing.
    r = dependence_record(_fake(g, (0, 1), ((0, 4), (1, 2))))
    assert not r.eligible and not r.nonconstant
    # Parities 1 and 0.
    r = dependence_record(_fake(g, (0, 1), ((0, 1), (2, 3))))
    assert r.eligible and r.nonconstant
    assert r.records == ((1, 1), (0, 0))
    assert dependence_record(_fake(g, (0, 1), ((0,), (1,)), aborted=True)) is None


def test_summarize_dependence():
    g = (1, 0, 0, 0, 1, 0)
    recs = [
        dependence_record(_fake(g, (0, 1), ((0, 1), (2, 3)), correct=(True, False))),
        dependence_record(_fake(g, (0, 1), ((0, 4), (1, 2)))),
        None,
    ]
    rep = summarize_dependence(recs)
    assert (rep.sessions, rep.eligible, rep.nonconstant, rep.joint_correct) == (2, 1, 1, 1)
    assert rep.nonconstant_fraction == 1.0
    assert rep.joint_accuracy == 0.5
    assert not rep.projection_valid
    empty = summarize_dependence([])
    assert np.isnan(empty.nonconstant_fraction)


def test_bcqot_dependence_small_run():
    config = ProtocolConfig(n=12, variant=Variant.ONE_OUT_OF_TWO)
    rep = bcqot_dependence_check(config, 30, seed=5)
    assert rep.sessions == 30
    assert rep.eligible > 0 and rep.nonconstant == rep.eligible
    assert not rep.projection_valid
    honest = bcqot_dependence_check(config, 30, seed=5, strategy=Strategy.HONEST)
    assert honest.joint_accuracy <= 0.75
    with pytest.raises(ValueError):
        bcqot_dependence_check(ProtocolConfig(n=12), 1, seed=0)
