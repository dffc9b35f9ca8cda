"""Named-register quantum state as a short sum of product branches.

A :class:`BranchedState` is ``Σ_k amp_k · ⊗_f |v_{k,f}>`` where every branch
covers all live registers with a partition into factors. The protocol states
handled here are a few branches of per-index products, so the cost stays
linear in the number of qubits. Factors keep their own register order;
:meth:`BranchedState.to_dense` expands to any requested order using the
left-factor-major Kronecker convention of :mod:`qotlab.linalg`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from qotlab.linalg import H, Z, ket

DEFAULT_BRANCH_CAP = 64
DEFAULT_DENSE_CAP = 2**14

_ZERO = 1e-14
_PARALLEL = 1e-12


class RegisterError(KeyError):
    pass


class BranchCapExceeded(RuntimeError):
    pass


class DenseCapExceeded(RuntimeError):
    pass


class NotProductError(ValueError):
    pass


@dataclass(frozen=True)
class RegisterId:
    label: str
    dim: int = 2


RegLike = Union[str, RegisterId]


def _label(r: RegLike) -> str:
    return r.label if isinstance(r, RegisterId) else r


@dataclass(frozen=True)
class MeasurementRecord:
    register: str
    outcome: int
    probability: float

    def __post_init__(self):
        if not -1e-12 <= self.probability <= 1 + 1e-12:
            raise ValueError(f"probability {self.probability} outside [0, 1]")


@dataclass(frozen=True, eq=False)
class Factor:
    regs: tuple[str, ...]
    vec: np.ndarray


@dataclass(frozen=True, eq=False)
class Branch:
    amp: complex
    factors: tuple[Factor, ...]

    def locate(self, reg: str) -> int:
        for k, f in enumerate(self.factors):
            if reg in f.regs:
                return k
        raise RegisterError(reg)

    def replace(self, k: int, new: Sequence[Factor], amp: complex | None = None) -> "Branch":
        factors = self.factors[:k] + tuple(new) + self.factors[k + 1 :]
        return Branch(self.amp if amp is None else amp, factors)


def prepare_bb84(a: int, g: int) -> np.ndarray:
    """State ``|a, g>``: basis ``a`` (0 computational, 1 diagonal), value ``g``.

    >>> prepare_bb84(1, 1).real.round(6).tolist()
    [0.707107, -0.707107]
    """
    if a not in (0, 1) or g not in (0, 1):
        raise ValueError(f"bits expected, got a={a!r} g={g!r}")
    v = ket(g)
    return H @ v if a else v


# ---------------------------------------------------------------- tensor helpers

_UNITARY_SEEN: dict[bytes, bool] = {}


def _check_unitary(u: np.ndarray) -> None:
    # The same few gates are applied thousands of times per run; check each once.
    key = u.tobytes()
    ok = _UNITARY_SEEN.get(key)
    if ok is None:
        ok = bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= 1e-10)
        if len(_UNITARY_SEEN) < 4096:
            _UNITARY_SEEN[key] = ok
    if not ok:
        raise ValueError("operator is not unitary within 1e-10")



def _dims_of(regs: Sequence[str], dims: Mapping[str, int]) -> list[int]:
    return [dims[r] for r in regs]


def _permute(vec: np.ndarray, regs: Sequence[str], order: Sequence[str], dims: Mapping[str, int]) -> np.ndarray:
    if tuple(regs) == tuple(order):
        return vec
    t = vec.reshape(_dims_of(regs, dims))
    t = np.transpose(t, [list(regs).index(r) for r in order])
    return t.reshape(-1)


@lru_cache(maxsize=8192)
def _plan(regs: tuple[str, ...], targets: tuple[str, ...], fd: tuple[int, ...]):
    axes = [regs.index(r) for r in targets]
    n = len(regs)
    dt = int(np.prod([fd[k] for k in axes]))
    if axes == list(range(n - len(axes), n)):
        return "suffix", dt, None, None
    if axes == list(range(len(axes))):
        return "prefix", dt, None, None
    perm = axes + [k for k in range(n) if k not in axes]
    return "general", dt, tuple(perm), tuple(int(k) for k in np.argsort(perm))


def _apply_local(f: Factor, targets: Sequence[str], u: np.ndarray, dims: Mapping[str, int]) -> Factor:
    """Apply ``u`` (acting on ``targets`` in that order) inside factor ``f``."""
    targets = tuple(targets)
    if targets == f.regs:
        return Factor(f.regs, u @ f.vec)
    fd = tuple(dims[r] for r in f.regs)
    kind, dt, perm, inv = _plan(f.regs, targets, fd)
    if kind == "suffix":
        return Factor(f.regs, (f.vec.reshape(-1, dt) @ u.T).reshape(-1))
    if kind == "prefix":
        return Factor(f.regs, (u @ f.vec.reshape(dt, -1)).reshape(-1))
    t = np.transpose(f.vec.reshape(fd), perm)
    shape = t.shape
    t = (u @ t.reshape(dt, -1)).reshape(shape)
    return Factor(f.regs, np.ascontiguousarray(np.transpose(t, inv)).reshape(-1))


def _local_weights(f: Factor, reg: str, dims: Mapping[str, int]) -> np.ndarray:
    """Squared norm of ``f`` restricted to each computational value of ``reg``."""
    fd = _dims_of(f.regs, dims)
    ax = f.regs.index(reg)
    t = np.moveaxis(f.vec.reshape(fd), ax, 0).reshape(fd[ax], -1)
    return np.einsum("ij,ij->i", t.conj(), t).real


def _rank_one(t: np.ndarray) -> tuple[np.ndarray, np.ndarray] | None:
    """Write ``t`` as ``outer(u, v)`` with unit ``u`` if its residual is below tolerance.

    Cheaper than an SVD: take the largest row as the direction of ``v`` and
    check what is left over, which bounds the second singular value.
    """
    norms = np.einsum("ij,ij->i", t.conj(), t).real
    j = int(np.argmax(norms))
    if norms[j] <= 0:
        return None
    row = t[j] / np.sqrt(norms[j])
    u = t @ row.conj()
    resid = t - np.outer(u, row)
    scale = max(float(np.sqrt(norms.sum())), 1.0)
    if np.sqrt(np.einsum("ij,ij->", resid.conj(), resid).real) > _PARALLEL * scale:
        return None
    w = np.linalg.norm(u)
    return u / w, w * row


def _peel(f: Factor, dims: Mapping[str, int], only: Iterable[str] | None = None) -> list[Factor]:
    """Split single registers off ``f`` wherever they are in a product state."""
    out: list[Factor] = []
    cur = f
    candidates = list(cur.regs if only is None else only)
    for reg in candidates:
        if len(cur.regs) == 1 or reg not in cur.regs:
            continue
        fd = _dims_of(cur.regs, dims)
        ax = cur.regs.index(reg)
        t = np.moveaxis(cur.vec.reshape(fd), ax, 0).reshape(fd[ax], -1)
        split = _rank_one(t)
        if split is None:
            continue
        local, rest = split
        rest_regs = cur.regs[:ax] + cur.regs[ax + 1 :]
        out.append(Factor((reg,), local))
        cur = Factor(rest_regs, rest)
    out.append(cur)
    return out


def _expand(factors: Sequence[Factor], order: Sequence[str], dims: Mapping[str, int]) -> np.ndarray:
    regs: list[str] = []
    vec = np.ones(1, dtype=complex)
    for f in factors:
        vec = np.outer(vec, f.vec).ravel()
        regs.extend(f.regs)
    return _permute(vec, regs, order, dims)


def _witness_orthogonal(x: Branch, y: Branch, skip: str | None) -> bool:
    """Cheap check: some single-register factor is orthogonal between branches."""
    if len(x.factors) == len(y.factors):
        # Branches produced by the same operations usually share their layout.
        aligned = True
        for fx, fy in zip(x.factors, y.factors):
            if fx is fy:
                continue
            if fx.regs != fy.regs:
                aligned = False
                break
            if len(fx.regs) == 1 and fx.regs[0] != skip and abs(np.vdot(fx.vec, fy.vec)) < _ZERO:
                return True
        if aligned:
            return False
    ysingle = {f.regs[0]: f.vec for f in y.factors if len(f.regs) == 1}
    for f in x.factors:
        if len(f.regs) == 1 and f.regs[0] != skip:
            other = ysingle.get(f.regs[0])
            if other is not None and abs(np.vdot(f.vec, other)) < _ZERO:
                return True
    return False


def _branch_overlap(x: Branch, y: Branch, dims: Mapping[str, int]) -> complex:
    """<x|y> including amplitudes, via the coarsest common partition."""
    if x is y:
        # factors are kept at unit norm, so the weight sits in the amplitude
        return abs(x.amp) ** 2
    if _witness_orthogonal(x, y, None):
        return 0.0
    if len(x.factors) == len(y.factors) and all(fx.regs == fy.regs for fx, fy in zip(x.factors, y.factors)):
        total = np.conj(x.amp) * y.amp
        for fx, fy in zip(x.factors, y.factors):
            if fx is not fy:
                total *= np.vdot(fx.vec, fy.vec)
        return total
    parent: dict[str, str] = {}

    def find(r: str) -> str:
        while parent.setdefault(r, r) != r:
            parent[r] = parent[parent[r]]
            r = parent[r]
        return r

    for br in (x, y):
        for f in br.factors:
            root = find(f.regs[0])
            for r in f.regs[1:]:
                parent[find(r)] = root
    blocks: dict[str, list[str]] = {}
    for r in dims:
        blocks.setdefault(find(r), []).append(r)
    total = np.conj(x.amp) * y.amp
    for regs in blocks.values():
        rs = set(regs)
        fx = [f for f in x.factors if f.regs[0] in rs]
        fy = [f for f in y.factors if f.regs[0] in rs]
        total *= np.vdot(_expand(fx, regs, dims), _expand(fy, regs, dims))
        if total == 0:
            break
    return total


# ---------------------------------------------------------------- the state


@dataclass(frozen=True, eq=False)
class BranchedState:
    branches: tuple[Branch, ...] = (Branch(1.0 + 0j, ()),)
    dims: Mapping[str, int] = field(default_factory=dict)
    cap: int = DEFAULT_BRANCH_CAP

    # -- bookkeeping -------------------------------------------------------

    @property
    def registers(self) -> list[RegisterId]:
        return [RegisterId(r, d) for r, d in self.dims.items()]

    def _with(self, branches: Sequence[Branch], dims: Mapping[str, int] | None = None) -> "BranchedState":
        branches = tuple(b for b in branches if abs(b.amp) > _ZERO)
        if not branches:
            raise ValueError("operation annihilated the state")
        if len(branches) > self.cap:
            raise BranchCapExceeded(f"{len(branches)} branches exceed cap {self.cap}")
        return BranchedState(branches, self.dims if dims is None else dims, self.cap)

    def _check_live(self, regs: Iterable[str]) -> None:
        for r in regs:
            if r not in self.dims:
                raise RegisterError(f"register {r!r} is not live")

    def add_register(self, reg: RegLike, vec: np.ndarray) -> "BranchedState":
        label = _label(reg)
        if label in self.dims:
            raise RegisterError(f"register {label!r} already exists")
        vec = np.asarray(vec, dtype=complex)
        if isinstance(reg, RegisterId) and reg.dim != vec.shape[0]:
            raise ValueError(f"{label}: vector of dimension {vec.shape[0]}, register dim {reg.dim}")
        n = np.sqrt(np.vdot(vec, vec).real)
        if abs(n - 1) > 1e-10:
            raise ValueError(f"{label}: initial vector not normalized (norm {n})")
        dims = dict(self.dims)
        dims[label] = vec.shape[0]
        f = Factor((label,), vec)
        return self._with([Branch(b.amp, b.factors + (f,)) for b in self.branches], dims)

    # -- unitaries ---------------------------------------------------------

    def apply(self, regs: Sequence[RegLike], u: np.ndarray, split_control: bool = False) -> "BranchedState":
        regs = [_label(r) for r in regs]
        self._check_live(regs)
        if len(set(regs)) != len(regs):
            raise ValueError(f"repeated register in {regs}")
        u = np.asarray(u, dtype=complex)
        d = int(np.prod(_dims_of(regs, self.dims)))
        if u.shape != (d, d):
            raise ValueError(f"operator shape {u.shape} does not match registers {regs} (dim {d})")
        _check_unitary(u)
        if split_control:
            if len(regs) < 2:
                raise ValueError("split_control needs a control and at least one target")
            d0 = self.dims[regs[0]]
            blocks = u.reshape(d0, d // d0, d0, d // d0)
            for v in range(d0):
                for w in range(d0):
                    if v != w and np.max(np.abs(blocks[v, :, w, :])) > 1e-12:
                        raise ValueError(f"operator is not block-diagonal in control {regs[0]!r}")
            out: list[Branch] = []
            for b in self.branches:
                k = b.locate(regs[0])
                fc = b.factors[k]
                if fc.regs != (regs[0],):
                    out.append(self._merge_apply(b, regs, u))
                    continue
                for v in range(d0):
                    c = fc.vec[v]
                    if abs(c) <= _ZERO:
                        continue
                    nb = b.replace(k, [Factor(fc.regs, ket(v, d0))], amp=b.amp * c)
                    out.append(self._merge_apply(nb, regs[1:], blocks[v, :, v, :]))
            return self._with(out)
        return self._with([self._merge_apply(b, regs, u) for b in self.branches])

    def _merge_apply(self, b: Branch, regs: Sequence[str], u: np.ndarray) -> Branch:
        idx = sorted({b.locate(r) for r in regs})
        if len(idx) == 1:
            k = idx[0]
            return b.replace(k, [_apply_local(b.factors[k], regs, u, self.dims)])
        merged_regs: list[str] = []
        vec = np.ones(1, dtype=complex)
        for k in idx:
            merged_regs.extend(b.factors[k].regs)
            vec = np.outer(vec, b.factors[k].vec).ravel()
        merged = _apply_local(Factor(tuple(merged_regs), vec), regs, u, self.dims)
        keep = [f for k, f in enumerate(b.factors) if k not in idx]
        return Branch(b.amp, tuple(keep[: idx[0]]) + (merged,) + tuple(keep[idx[0] :]))

    def apply_parity(self, controls: Sequence[RegLike], target: RegLike) -> "BranchedState":
        """XOR the computational values of ``controls`` into qubit ``target``.

        Uses ``Π_c CNOT(c, t) = I ⊗ |+><+|_t + (⊗_c Z_c) ⊗ |-><-|_t`` so a
        branch splits into at most two without merging any control factors.
        """
        controls = [_label(c) for c in controls]
        target = _label(target)
        self._check_live(controls + [target])
        if target in controls:
            raise ValueError("target cannot also be a control")
        if any(self.dims[r] != 2 for r in controls + [target]):
            raise ValueError("parity is defined on qubit registers only")
        plus = H @ ket(0)
        minus = H @ ket(1)
        out: list[Branch] = []
        for b in self.branches:
            k = b.locate(target)
            ft = b.factors[k]
            if ft.regs != (target,):
                cnot = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
                nb = b
                for c in controls:
                    nb = self._merge_apply(nb, [c, target], cnot)
                out.append(nb)
                continue
            cp, cm = np.vdot(plus, ft.vec), np.vdot(minus, ft.vec)
            if abs(cp) > _ZERO:
                out.append(b.replace(k, [Factor((target,), plus)], amp=b.amp * cp))
            if abs(cm) > _ZERO:
                nb = b.replace(k, [Factor((target,), minus)], amp=b.amp * cm)
                for c in controls:
                    j = nb.locate(c)
                    nb = nb.replace(j, [_apply_local(nb.factors[j], [c], Z, self.dims)])
                out.append(nb)
        return self._with(out).consolidate()

    # -- projections and measurement ---------------------------------------

    def project(self, reg: RegLike, outcome: int, peel: bool = True) -> "BranchedState":
        """Unnormalized projection onto ``|outcome>`` of ``reg``.

        The projected register is split off as its own factor; other
        registers stay merged. ``peel=False`` skips even that, which is all
        that is needed when only the norm is read.
        """
        reg = _label(reg)
        self._check_live([reg])
        d = self.dims[reg]
        if not 0 <= outcome < d:
            raise ValueError(f"outcome {outcome} out of range for {reg!r}")
        proj = np.zeros((d, d), dtype=complex)
        proj[outcome, outcome] = 1
        out: list[Branch] = []
        for b in self.branches:
            k = b.locate(reg)
            f = _apply_local(b.factors[k], [reg], proj, self.dims)
            w = np.linalg.norm(f.vec)
            if w <= _ZERO:
                continue
            f = Factor(f.regs, f.vec / w)
            pieces = _peel(f, self.dims, only=[reg]) if peel else [f]
            out.append(b.replace(k, pieces, amp=b.amp * w))
        if not out:
            return BranchedState((Branch(0j, ()),), self.dims, self.cap)
        return BranchedState(tuple(out), self.dims, self.cap)

    def inner(self, other: "BranchedState") -> complex:
        if set(self.dims) != set(other.dims):
            raise ValueError("states live on different registers")
        total = 0j
        for x in self.branches:
            for y in other.branches:
                if x.amp == 0 or y.amp == 0:
                    continue
                total += _branch_overlap(x, y, self.dims)
        return total

    def norm2(self) -> float:
        bs = self.branches
        if len(bs) == 1:
            return abs(bs[0].amp) ** 2
        total = 0.0
        for i, x in enumerate(bs):
            if x.amp == 0:
                continue
            total += float(np.real(_branch_overlap(x, x, self.dims)))
            for y in bs[i + 1 :]:
                if y.amp != 0:
                    total += 2 * float(np.real(_branch_overlap(x, y, self.dims)))
        return total

    def probabilities(self, reg: RegLike) -> np.ndarray:
        reg = _label(reg)
        self._check_live([reg])
        if len(self.branches) == 1:
            f = self.branches[0].factors[self.branches[0].locate(reg)]
            p = _local_weights(f, reg, self.dims)
            return np.clip(p / p.sum(), 0.0, 1.0)
        bs = self.branches
        if all(_witness_orthogonal(x, y, reg) for i, x in enumerate(bs) for y in bs[i + 1 :]):
            # Orthogonal outside ``reg`` stays orthogonal after projecting it.
            p = np.zeros(self.dims[reg])
            for b in bs:
                f = b.factors[b.locate(reg)]
                p += abs(b.amp) ** 2 * _local_weights(f, reg, self.dims)
            return np.clip(p / p.sum(), 0.0, 1.0)
        norm = self.norm2()
        p = np.array([self.project(reg, v, peel=False).norm2() for v in range(self.dims[reg])]) / norm
        return np.clip(p, 0.0, 1.0)

    def measure(self, reg: RegLike, rng: np.random.Generator | None = None, outcome: int | None = None):
        """Computational-basis measurement; returns ``(record, post_state)``.

        With ``outcome`` given the result is forced (used by oracles and
        trusted functionalities that already know it); otherwise Born
        sampling with ``rng``.
        """
        reg = _label(reg)
        if len(self.branches) == 1:
            b = self.branches[0]
            k = b.locate(reg)
            f = b.factors[k]
            if f.regs == (reg,):
                return self._measure_single(b, k, f, rng, outcome)
        p = self.probabilities(reg)
        if outcome is None:
            if rng is None:
                raise ValueError("measure needs an rng or a forced outcome")
            cdf = np.cumsum(p)
            outcome = min(int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right")), len(p) - 1)
        if p[outcome] <= 1e-15:
            raise ValueError(f"outcome {outcome} of {reg!r} has zero probability")
        post = self.project(reg, outcome)
        scale = 1 / np.sqrt(post.norm2())
        post = post._with([Branch(b.amp * scale, b.factors) for b in post.branches])
        return MeasurementRecord(reg, outcome, float(p[outcome])), post

    def _measure_single(self, b: Branch, k: int, f: Factor, rng, outcome):
        """Fast path: one branch and the register is its own factor."""
        v = f.vec
        w = [abs(c) ** 2 for c in v.tolist()]
        total = sum(w)
        p = [x / total for x in w]
        if outcome is None:
            if rng is None:
                raise ValueError("measure needs an rng or a forced outcome")
            r = rng.random()
            outcome, acc = len(p) - 1, 0.0
            for j, x in enumerate(p):
                acc += x
                if r < acc:
                    outcome = j
                    break
        if p[outcome] <= 1e-15:
            raise ValueError(f"outcome {outcome} of {f.regs[0]!r} has zero probability")
        c = v[outcome]
        amp = b.amp * c / (abs(b.amp) * abs(c))
        post = b.replace(k, [Factor(f.regs, ket(outcome, len(v)))], amp=amp)
        return MeasurementRecord(f.regs[0], outcome, float(p[outcome])), BranchedState((post,), self.dims, self.cap)

    # -- structure maintenance ---------------------------------------------

    def consolidate(self) -> "BranchedState":
        """Merge branches that agree (up to phase) on all but one factor."""
        branches = list(self.branches)
        merged = True
        while merged and len(branches) > 1:
            merged = False
            for i in range(len(branches)):
                for j in range(i + 1, len(branches)):
                    m = _try_merge(branches[i], branches[j])
                    if m is not None:
                        branches[i] = m
                        del branches[j]
                        merged = True
                        break
                if merged:
                    break
        branches = [b for b in branches if abs(b.amp) > _ZERO]
        if not branches:
            raise ValueError("branches cancelled completely")
        return self._with(branches)

    def discard(self, reg: RegLike) -> tuple["BranchedState", np.ndarray]:
        """Remove a register that is in the same pure product state in every branch."""
        reg = _label(reg)
        self._check_live([reg])
        ref: np.ndarray | None = None
        out: list[Branch] = []
        for b in self.branches:
            k = b.locate(reg)
            pieces = _peel(b.factors[k], self.dims, only=[reg])
            mine = [p for p in pieces if p.regs == (reg,)]
            if not mine:
                raise NotProductError(f"register {reg!r} is entangled")
            v = mine[0].vec
            amp = b.amp
            if ref is None:
                ref = v
            else:
                ov = np.vdot(ref, v)
                if abs(abs(ov) - 1) > 1e-9:
                    raise NotProductError(f"register {reg!r} differs between branches")
                amp = amp * ov
            out.append(b.replace(k, [p for p in pieces if p.regs != (reg,)], amp=amp))
        dims = {r: d for r, d in self.dims.items() if r != reg}
        return self._with(out, dims).consolidate(), ref

    # -- export ------------------------------------------------------------

    def to_dense(self, order: Sequence[RegLike] | None = None, cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
        order = list(self.dims) if order is None else [_label(r) for r in order]
        if sorted(order) != sorted(self.dims):
            raise RegisterError(f"order {order} does not list exactly the live registers")
        total = int(np.prod(_dims_of(order, self.dims))) if order else 1
        if total > cap:
            raise DenseCapExceeded(f"dense dimension {total} exceeds cap {cap}")
        out = np.zeros(total, dtype=complex)
        for b in self.branches:
            out += b.amp * _expand(b.factors, order, self.dims)
        return out

    def dump(self) -> str:
        """Deterministic text form, amplitudes to 12 significant digits."""

        def c(z: complex) -> str:
            z = complex(z)
            re = 0.0 if abs(z.real) < 5e-13 else z.real
            im = 0.0 if abs(z.imag) < 5e-13 else z.imag
            return f"{re:.12g}{im:+.12g}j"

        lines = ["registers " + " ".join(f"{r}:{d}" for r, d in self.dims.items())]
        for n, b in enumerate(self.branches):
            lines.append(f"branch {n} amp {c(b.amp)}")
            for f in b.factors:
                lines.append("  [" + ",".join(f.regs) + "] " + " ".join(c(z) for z in f.vec))
        return "\n".join(lines) + "\n"


def _try_merge(x: Branch, y: Branch) -> Branch | None:
    if len(x.factors) != len(y.factors):
        return None
    phase = 1.0 + 0j
    diff = -1
    for k, (fx, fy) in enumerate(zip(x.factors, y.factors)):
        if fx.regs != fy.regs:
            return None
        if fx is fy:
            continue
        ov = np.vdot(fx.vec, fy.vec)
        if abs(abs(ov) - 1) < _PARALLEL:
            phase *= ov
        elif diff < 0:
            diff = k
        else:
            return None
    if diff < 0:
        return Branch(x.amp + y.amp * phase, x.factors)
    v = x.amp * x.factors[diff].vec + y.amp * phase * y.factors[diff].vec
    w = np.linalg.norm(v)
    if w <= _ZERO:
        return Branch(0j, x.factors)
    return x.replace(diff, [Factor(x.factors[diff].regs, v / w)], amp=w)


def apply_joint_unitary(
    state: BranchedState, regs: Sequence[RegLike], u: np.ndarray, split_control: bool = False
) -> BranchedState:
    return state.apply(regs, u, split_control=split_control)


def measure_register(
    state: BranchedState, reg: RegLike, rng: np.random.Generator
) -> tuple[MeasurementRecord, BranchedState]:
    return state.measure(reg, rng)


def to_dense(state: BranchedState, order: Sequence[RegLike], cap: int = DEFAULT_DENSE_CAP) -> np.ndarray:
    return state.to_dense(order, cap=cap)
