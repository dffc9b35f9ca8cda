"""Scenario presets, Monte Carlo aggregation and report output."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np
from scipy.stats import binomtest

from qotlab.adversary import RELIABILITY
from qotlab.commitment import BcMode
from qotlab.lo import (
    DependenceRecord,
    build_ideal_ot,
    construct_switch_unitary,
    dependence_record,
    double_extraction,
    summarize_dependence,
    verify_switch,
)
from qotlab.protocol import InfeasiblePartition, ProtocolConfig, ProtocolError, Variant
from qotlab.session import SessionResult, Strategy, run_session

MAX_ATTEMPTS = 1000

# name -> (strategy, variant, bc_mode, target)
PRESETS = {
    "honest-aon": (Strategy.HONEST, Variant.AON, BcMode.NON_BCCC, 0),
    "cheat-aon": (Strategy.ENTANGLING, Variant.AON, BcMode.NON_BCCC, 0),
    "cheat-aon-bccc": (Strategy.ENTANGLING, Variant.AON, BcMode.BCCC, 0),
    "honest-12ot": (Strategy.HONEST, Variant.ONE_OUT_OF_TWO, BcMode.NON_BCCC, 0),
    "cheat-12ot-t0": (Strategy.ENTANGLING, Variant.ONE_OUT_OF_TWO, BcMode.NON_BCCC, 0),
    "cheat-12ot-t1": (Strategy.ENTANGLING, Variant.ONE_OUT_OF_TWO, BcMode.NON_BCCC, 1),
    "lying-unveiler": (Strategy.LYING_UNVEILER, Variant.AON, BcMode.NON_BCCC, 0),
    "lo-ideal": (None, Variant.ONE_OUT_OF_TWO, BcMode.NON_BCCC, 0),
    "lo-bcqot": (Strategy.ENTANGLING, Variant.ONE_OUT_OF_TWO, BcMode.NON_BCCC, 0),
}
SCENARIOS = tuple(PRESETS)
DEFAULT_TRIALS = {name: (100 if name == "lo-ideal" else 10_000) for name in SCENARIOS}


class SessionFailure(RuntimeError):
    def __init__(self, index: int, cause: Exception):
        super().__init__(f"session {index}: {cause}")
        self.index = index
        self.cause = cause


@dataclass(frozen=True)
class Scenario:
    name: str
    config: ProtocolConfig
    trials: int
    strategy: Strategy | None = None
    target: int = 0

    def __post_init__(self):
        if self.name not in PRESETS:
            raise ValueError(f"unknown scenario {self.name!r}; choose from {', '.join(SCENARIOS)}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.target == 1 and self.config.variant is Variant.AON:
            raise ValueError(f"{self.name}: a second target needs the 1-2 OT variant")


def make_scenario(name: str, n: int = 25, trials: int | None = None, bc_mode: BcMode | None = None,
                  variant: Variant | None = None, **config_kw) -> Scenario:
    """Preset ``name`` with optional overrides for the protocol configuration."""
    if name not in PRESETS:
        raise ValueError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    strategy, v, mode, target = PRESETS[name]
    config = ProtocolConfig(n=n, variant=variant or v, bc_mode=bc_mode or mode, **config_kw)
    return Scenario(name, config, DEFAULT_TRIALS[name] if trials is None else trials, strategy, target)


@dataclass(frozen=True)
class RunSummary:
    scenario: str
    trials: int
    match_rate: float
    wilson95: tuple[float, float]
    abort_rate: float
    analytic_reference: float | None
    digest: str
    metrics: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = self.wilson95
        if not (lo - 1e-12 <= self.match_rate <= hi + 1e-12):
            raise ValueError(f"match rate {self.match_rate} outside its interval {self.wilson95}")


def wilson(successes: int, total: int) -> tuple[float, float]:
    if total == 0:
        return (0.0, 1.0)
    ci = binomtest(successes, total).proportion_ci(confidence_level=0.95, method="wilson")
    return (float(ci.low), float(ci.high))


def lying_abort_probability(test_size: int) -> float:
    """Abort probability for a Bob who commits every ``h_i`` flipped, by enumeration.

    Walks every ``(a, b, g, h)`` for one tested index with its exact
    probability and applies Alice's check; tested indices are independent,
    so the pass probability multiplies.
    """
    pass_one = Fraction(0)
    for a, b, g, h in product((0, 1), repeat=4):
        if a == b:
            p = Fraction(1, 8) if h == g else Fraction(0)
        else:
            p = Fraction(1, 16)
        committed = h ^ 1
        if not (a == b and committed != g):
            pass_one += p
    return float(1 - pass_one**test_size)


# ---------------------------------------------------------------- sessions


@dataclass(frozen=True)
class SessionOutcome:
    index: int
    attempts: int
    aborted: bool
    correct: tuple[bool, ...]
    p_correct: float | None
    digest: str
    coherent: bool | None = None
    dependence: DependenceRecord | None = None
    privacy: tuple[int, int, int] | None = None


def _privacy_features(res: SessionResult) -> tuple[int, int, int] | None:
    """Bob's ordering bit next to two things Alice can compute about ``J0``."""
    if res.aborted or res.bob_swapped is None:
        return None
    a, g = res.alice.a, res.alice.g
    j0 = res.J[0]
    ones = sum(a[i] for i in j0)
    gpar = 0
    for i in j0:
        gpar ^= g[i]
    return int(res.bob_swapped), ones, gpar


def _session_task(task) -> SessionOutcome:
    config, strategy, target, master_seed, index = task
    for attempt in range(MAX_ATTEMPTS):
        try:
            res = run_session(config, strategy, seed=(master_seed, index, attempt), target=target)
            break
        except InfeasiblePartition:
            continue
        except ProtocolError as exc:
            raise SessionFailure(index, exc) from exc
    else:
        raise SessionFailure(index, InfeasiblePartition(f"no feasible partition in {MAX_ATTEMPTS} attempts"))
    text = res.to_text()
    dep = dependence_record(res) if config.variant is Variant.ONE_OUT_OF_TWO else None
    return SessionOutcome(
        index=index,
        attempts=attempt + 1,
        aborted=res.aborted,
        correct=res.correct,
        p_correct=res.p_correct,
        digest=hashlib.sha256(text.encode()).hexdigest(),
        coherent=None if res.cheat is None else res.cheat.coherent,
        dependence=dep,
        privacy=_privacy_features(res),
    )


def worker_count() -> int:
    env = os.environ.get("QOTLAB_WORKERS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("QOTLAB_WORKERS must be at least 1")
        return n
    return os.cpu_count() or 1


def run_sessions(config: ProtocolConfig, strategy: Strategy, trials: int, master_seed: int,
                 target: int = 0, workers: int | None = None) -> list[SessionOutcome]:
    """Sessions ``0..trials-1``, each seeded from ``(master_seed, index, attempt)``."""
    workers = worker_count() if workers is None else workers
    tasks = [(config, strategy, target, master_seed, k) for k in range(trials)]
    if workers <= 1 or trials < 2:
        return [_session_task(t) for t in tasks]
    chunk = max(1, trials // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_session_task, tasks, chunksize=chunk))


def _digest(parts: Sequence[str]) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode())
    return h.hexdigest()


def _rate(k: int, n: int) -> float:
    return k / n if n else 0.0


def summarize(name: str, outcomes: Sequence[SessionOutcome], target: int = 0,
              reference: float | None = None) -> RunSummary:
    trials = len(outcomes)
    done = [o for o in outcomes if not o.aborted]
    aborts = trials - len(done)
    hits = sum(o.correct[target] for o in done)
    restarts = sum(o.attempts - 1 for o in outcomes)
    metrics = {
        "completed": len(done),
        "restart_rate": restarts / trials,
        "abort_wilson95": list(wilson(aborts, trials)),
    }
    ps = [o.p_correct for o in done if o.p_correct is not None]
    if ps:
        metrics["mean_p_correct"] = float(np.mean(ps))
        metrics["max_p_correct"] = float(np.max(ps))
    coh = [o.coherent for o in done if o.coherent is not None]
    if coh:
        metrics["coherent_fraction"] = sum(coh) / len(coh)
    if done and len(done[0].correct) == 2:
        other = 1 - target
        metrics["other_bit_accuracy"] = _rate(sum(o.correct[other] for o in done), len(done))
        joint = sum(all(o.correct) for o in done)
        metrics["joint_accuracy"] = _rate(joint, len(done))
        metrics["joint_wilson95"] = list(wilson(joint, len(done)))
    deps = [o.dependence for o in done if o.dependence is not None]
    if deps:
        rep = summarize_dependence(deps)
        metrics["dependence_eligible"] = rep.eligible
        metrics["dependence_nonconstant_fraction"] = rep.nonconstant_fraction
        metrics["projection_valid"] = rep.projection_valid
    rate = _rate(hits, len(done))
    return RunSummary(
        scenario=name,
        trials=trials,
        match_rate=rate,
        wilson95=wilson(hits, len(done)),
        abort_rate=aborts / trials,
        analytic_reference=reference,
        digest=_digest([o.digest for o in outcomes]),
        metrics=metrics,
    )


REFERENCES = {
    "honest-aon": 0.75,
    "cheat-aon": RELIABILITY,
    "cheat-aon-bccc": 0.75,
    "honest-12ot": 0.75,
    "cheat-12ot-t0": RELIABILITY,
    "cheat-12ot-t1": RELIABILITY,
    "lying-unveiler": 0.75,
    "lo-ideal": 1.0,
    "lo-bcqot": RELIABILITY / 2,
}


def _run_lo_ideal(sc: Scenario, master_seed: int) -> RunSummary:
    model = build_ideal_ot()
    sw = construct_switch_unitary(model, 0, 1)
    report = verify_switch(model, sw)
    hits, parts = 0, []
    for k in range(sc.trials):
        rng = np.random.default_rng(np.random.SeedSequence([master_seed, k]))
        for i in range(model.n_inputs):
            got = double_extraction(model, i, rng, sw)
            hits += got == model.f[i]
            parts.append(f"{k}:{i}:{got[0]}{got[1]};")
    total = sc.trials * model.n_inputs
    return RunSummary(
        scenario=sc.name,
        trials=sc.trials,
        match_rate=hits / total,
        wilson95=wilson(hits, total),
        abort_rate=0.0,
        analytic_reference=1.0,
        digest=_digest(parts),
        metrics={
            "extractions": total,
            "max_trace_distance": report.max_trace_distance,
            "switch_vector_error": report.vector_error,
            "switch_unitarity_error": report.unitarity_error,
        },
    )


def run_scenario(sc: Scenario, master_seed: int, workers: int | None = None,
                 cache: dict | None = None) -> RunSummary:
    """Deterministic in ``master_seed``; worker count does not change the result.

    ``cache`` (any dict) lets several scenarios that need the same batch of
    sessions share it.
    """

    def sessions(strategy, target):
        key = (sc.config, strategy, sc.trials, master_seed, target)
        if cache is not None and key in cache:
            return cache[key]
        out = run_sessions(sc.config, strategy, sc.trials, master_seed, target, workers)
        if cache is not None:
            cache[key] = out
        return out

    if sc.name == "lo-ideal":
        return _run_lo_ideal(sc, master_seed)
    outcomes = sessions(sc.strategy, sc.target)
    ref = REFERENCES[sc.name]
    if sc.config.bc_mode is BcMode.BCCC and sc.strategy is Strategy.ENTANGLING:
        ref = 0.75 if sc.name != "lo-bcqot" else 0.375
    if sc.name == "lo-bcqot":
        summary = summarize(sc.name, outcomes, sc.target, ref)
        done = [o for o in outcomes if not o.aborted]
        joint = sum(all(o.correct) for o in done)
        honest = sessions(Strategy.HONEST, 0)
        hdone = [o for o in honest if not o.aborted]
        metrics = dict(summary.metrics)
        metrics["targeted_accuracy"] = summary.match_rate
        metrics["honest_joint_accuracy"] = _rate(sum(all(o.correct) for o in hdone), len(hdone))
        return dataclasses.replace(summary, match_rate=_rate(joint, len(done)), wilson95=wilson(joint, len(done)),
                                   metrics=metrics)
    summary = summarize(sc.name, outcomes, sc.target, ref)
    if sc.strategy is Strategy.LYING_UNVEILER:
        metrics = dict(summary.metrics)
        metrics["abort_reference"] = lying_abort_probability(sc.config.test_size)
        summary = dataclasses.replace(summary, metrics=metrics)
    return summary


# ---------------------------------------------------------------- reports


def _fmt(x):
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return float(f"{x:.9g}")
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    if isinstance(x, dict):
        return {k: _fmt(v) for k, v in x.items()}
    if isinstance(x, np.generic):
        return _fmt(x.item())
    raise TypeError(f"cannot serialize {type(x).__name__}")


def summary_record(s: RunSummary) -> dict:
    return {
        "scenario": s.scenario,
        "trials": s.trials,
        "match_rate": _fmt(s.match_rate),
        "wilson95": _fmt(list(s.wilson95)),
        "abort_rate": _fmt(s.abort_rate),
        "analytic_reference": _fmt(s.analytic_reference),
        "digest": s.digest,
        "metrics": _fmt(s.metrics),
    }


CSV_HEADER = ["scenario", "trials", "match_rate", "wilson_lo", "wilson_hi", "abort_rate", "analytic_reference"]


def _csv_num(x: float | None) -> str:
    return "" if x is None else f"{x:.9g}"


def render_report(summaries: Sequence[RunSummary], fmt: str = "json") -> str:
    if not summaries:
        raise ValueError("no summaries to report")
    if fmt == "json":
        recs = [summary_record(s) for s in summaries]
        body = recs[0] if len(recs) == 1 else recs
        return json.dumps(body, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for s in summaries:
            w.writerow([s.scenario, s.trials, _csv_num(s.match_rate), _csv_num(s.wilson95[0]),
                        _csv_num(s.wilson95[1]), _csv_num(s.abort_rate), _csv_num(s.analytic_reference)])
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(summaries: Sequence[RunSummary], fmt: str, path: str | os.PathLike) -> None:
    """Write the report atomically: a failed write leaves no partial file."""
    text = render_report(summaries, fmt)
    path = os.fspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", prefix=".qotlab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
