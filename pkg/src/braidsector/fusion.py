"""Braided 6j fusion systems: data model, coherence checks, gauge, twists.

Conventions
-----------
``F^{abc}_d`` is stored with rows ``(e, mu, nu)`` and columns ``(f, rho, delta)``:
``mu`` labels the vertex ``ab -> e``, ``nu`` the vertex ``ec -> d``, ``rho`` the
vertex ``bc -> f`` and ``delta`` the vertex ``af -> d``.  The basis vector with
left bracketing ``((ab)_e c)_d`` expands as ``sum_f F[(e..),(f..)] (a(bc)_f)_d``.

``R^{ab}_c`` is diagonal, stored as a vector of phases, and sends the vertex
``ab -> c; mu`` to ``r_mu`` times ``ba -> c; mu``.  Its inverse move on leaves
``ab`` is ``conj(R^{ba}_c)``.

Multiplicity indices are 0-based.  Blocks with a vacuum among ``a, b, c`` are
the identity and are not stored.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

VACUUM = "0"
DEFAULT_TOL = 1e-9

Key3 = tuple[str, str, str]
Key4 = tuple[str, str, str, str]
Vertex = tuple[str, int, int]  # (intermediate label, inner multiplicity, outer multiplicity)


class MissingBlockError(KeyError):
    """A required F- or R-block is absent."""


class TwistSolveError(ValueError):
    """The ribbon constraints admit no solution."""


@dataclass(frozen=True, eq=False)
class FBlock:
    rows: tuple[Vertex, ...]
    cols: tuple[Vertex, ...]
    matrix: np.ndarray

    def __post_init__(self):
        rows = tuple((str(e), int(m), int(n)) for e, m, n in self.rows)
        cols = tuple((str(f), int(r), int(d)) for f, r, d in self.cols)
        mat = np.array(self.matrix, dtype=complex).reshape(len(rows), len(cols))
        mat.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "row_index", {r: i for i, r in enumerate(rows)})
        object.__setattr__(self, "col_index", {c: i for i, c in enumerate(cols)})

    def entry(self, row: Vertex, col: Vertex) -> complex:
        i = self.row_index.get(row)
        j = self.col_index.get(col)
        if i is None or j is None:
            return 0.0
        return self.matrix[i, j]


@dataclass(frozen=True, eq=False)
class FusionSystem:
    """Labels, duals, fusion coefficients, F-blocks and diagonal R-blocks.

    Structural problems (unknown labels, malformed blocks) raise at
    construction; axiom violations are left for :func:`validate` to report.
    ``vacuum_overrides`` admits explicit vacuum F-blocks, for test fixtures only.
    """

    labels: tuple[str, ...]
    dual: Mapping[str, str]
    N: Mapping[Key3, int]
    F: Mapping[Key4, FBlock]
    R: Mapping[Key3, np.ndarray]
    tol: float = DEFAULT_TOL
    name: str = ""
    vacuum_overrides: bool = False

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if not labels or labels[0] != VACUUM:
            raise ValueError(f"the first label must be the vacuum {VACUUM!r}")
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be distinct")
        known = set(labels)
        dual = {str(a): str(b) for a, b in self.dual.items()}
        for a, b in dual.items():
            if a not in known or b not in known:
                raise ValueError(f"dual entry {a}->{b} uses an unknown label")
        N = {}
        for key, v in self.N.items():
            a, b, c = (str(x) for x in key)
            if not {a, b, c} <= known:
                raise ValueError(f"N entry {key} uses an unknown label")
            if int(v) != v or v < 0:
                raise ValueError(f"N^{a}{b}_{c} must be a nonnegative integer, got {v}")
            if v:
                N[(a, b, c)] = int(v)
        F = {}
        for key, blk in self.F.items():
            key = tuple(str(x) for x in key)
            if not set(key) <= known:
                raise ValueError(f"F block {key} uses an unknown label")
            if VACUUM in key[:3] and not self.vacuum_overrides:
                raise ValueError(f"vacuum F block {key} is implicit and cannot be overridden")
            if not isinstance(blk, FBlock):
                blk = FBlock(*blk)
            F[key] = blk
        R = {}
        for key, ph in self.R.items():
            key = tuple(str(x) for x in key)
            if not set(key) <= known:
                raise ValueError(f"R block {key} uses an unknown label")
            arr = np.array(ph, dtype=complex).reshape(-1)
            arr.setflags(write=False)
            R[key] = arr
        if self.tol < 0:
            raise ValueError("tolerance must be nonnegative")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dual", dual)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "_fcache", {})

    # -- fusion rules -------------------------------------------------------

    @property
    def rank(self) -> int:
        return len(self.labels)

    def n(self, a: str, b: str, c: str) -> int:
        return self.N.get((a, b, c), 0)

    def outcomes(self, a: str, b: str) -> list[str]:
        return [c for c in self.labels if self.n(a, b, c)]

    def admissible_triples(self) -> list[Key3]:
        return [(a, b, c) for a in self.labels for b in self.labels for c in self.labels if self.n(a, b, c)]

    @property
    def multiplicity_free(self) -> bool:
        return all(v <= 1 for v in self.N.values())

    def bar(self, a: str) -> str:
        try:
            return self.dual[a]
        except KeyError:
            raise KeyError(f"label {a!r} has no dual") from None

    def label_index(self, a: str) -> int:
        return self.labels.index(a)

    # -- F and R access -----------------------------------------------------

    def f_rows(self, a: str, b: str, c: str, d: str) -> tuple[Vertex, ...]:
        return tuple(
            (e, mu, nu)
            for e in self.labels
            for mu in range(self.n(a, b, e))
            for nu in range(self.n(e, c, d))
        )

    def f_cols(self, a: str, b: str, c: str, d: str) -> tuple[Vertex, ...]:
        return tuple(
            (f, rho, de)
            for f in self.labels
            for rho in range(self.n(b, c, f))
            for de in range(self.n(a, f, d))
        )

    def _vacuum_block(self, a: str, b: str, c: str, d: str) -> FBlock:
        rows = self.f_rows(a, b, c, d)
        cols = self.f_cols(a, b, c, d)
        mat = np.zeros((len(rows), len(cols)), dtype=complex)
        col_index = {x: j for j, x in enumerate(cols)}
        for i, (e, mu, nu) in enumerate(rows):
            # the canonical identification of both bracketings when a slot is empty
            if a == VACUUM:
                target = (d, nu, 0)
            elif b == VACUUM:
                target = (c, 0, nu)
            else:
                target = (b, 0, mu)
            j = col_index.get(target)
            if j is not None:
                mat[i, j] = 1.0
        return FBlock(rows, cols, mat)

    def fblock(self, a: str, b: str, c: str, d: str) -> FBlock:
        key = (a, b, c, d)
        blk = self.F.get(key)
        if blk is not None:
            return blk
        cached = self._fcache.get(key)
        if cached is not None:
            return cached
        if VACUUM in key[:3]:
            blk = self._vacuum_block(a, b, c, d)
        else:
            rows = self.f_rows(a, b, c, d)
            cols = self.f_cols(a, b, c, d)
            if rows or cols:
                raise MissingBlockError(f"missing F block {key}")
            blk = FBlock((), (), np.zeros((0, 0)))
        self._fcache[key] = blk
        return blk

    def f_entry(self, a, b, c, d, row: Vertex, col: Vertex) -> complex:
        return self.fblock(a, b, c, d).entry(row, col)

    def r_phases(self, a: str, b: str, c: str) -> np.ndarray:
        ph = self.R.get((a, b, c))
        if ph is not None:
            return ph
        k = self.n(a, b, c)
        if k and (a == VACUUM or b == VACUUM):
            return np.ones(k, dtype=complex)
        if k:
            raise MissingBlockError(f"missing R block {(a, b, c)}")
        return np.zeros(0, dtype=complex)

    def r_inverse_phases(self, a: str, b: str, c: str) -> np.ndarray:
        """Phases of the anticlockwise move taking leaves ``ab`` to ``ba``."""
        return np.conj(self.r_phases(b, a, c))

    # -- construction helpers -----------------------------------------------

    def replace(self, **changes) -> FusionSystem:
        fields = dict(
            labels=self.labels,
            dual=self.dual,
            N=self.N,
            F=self.F,
            R=self.R,
            tol=self.tol,
            name=self.name,
            vacuum_overrides=self.vacuum_overrides,
        )
        fields.update(changes)
        return FusionSystem(**fields)


def nonvacuum_f_keys(sys: FusionSystem) -> list[Key4]:
    """All ``(a,b,c,d)`` with no vacuum in ``a,b,c`` and a nonempty block."""
    keys = []
    for a, b, c, d in itertools.product(sys.labels, repeat=4):
        if VACUUM in (a, b, c):
            continue
        if sys.f_rows(a, b, c, d):
            keys.append((a, b, c, d))
    return keys


# -- reports -----------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    residual: float = 0.0
    detail: str = ""

    def __post_init__(self):
        # numpy comparisons hand back np.bool_ and np.float64
        self.passed = bool(self.passed)
        self.residual = float(self.residual)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "residual": self.residual, "detail": self.detail}


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


# -- fusion-rule checks ------------------------------------------------------


def _unit_violations(sys: FusionSystem) -> list[str]:
    bad = []
    for q in sys.labels:
        for r in sys.labels:
            want = int(q == r)
            if sys.n(VACUUM, q, r) != want or sys.n(q, VACUUM, r) != want:
                bad.append(f"{q},{r}")
    return bad


def _symmetry_violations(sys: FusionSystem) -> list[Key3]:
    L = sys.labels
    return [(a, b, c) for a in L for b in L for c in L if sys.n(a, b, c) != sys.n(b, a, c)]


def _duality_violations(sys: FusionSystem) -> list[str]:
    bad = []
    for a in sys.labels:
        if a not in sys.dual:
            bad.append(f"no dual for {a}")
            continue
        ab = sys.dual[a]
        if sys.dual.get(ab) != a:
            bad.append(f"dual of {a} is not an involution")
        for b in sys.labels:
            if sys.n(a, b, VACUUM) != int(b == ab):
                bad.append(f"N^{a}{b}_0")
    if sys.dual.get(VACUUM, VACUUM) != VACUUM:
        bad.append("vacuum is not self-dual")
    return bad


def _associativity_violations(sys: FusionSystem) -> list[Key4]:
    L = sys.labels
    bad = []
    for a, b, c, d in itertools.product(L, repeat=4):
        left = sum(sys.n(a, b, e) * sys.n(e, c, d) for e in L)
        right = sum(sys.n(a, f, d) * sys.n(b, c, f) for f in L)
        if left != right:
            bad.append((a, b, c, d))
    return bad


def _dual_symmetry_violations(sys: FusionSystem) -> list[Key3]:
    L = sys.labels
    if any(a not in sys.dual for a in L):
        return [("?", "?", "?")]
    bar = sys.dual
    bad = []
    for a, b, c in itertools.product(L, repeat=3):
        v = sys.n(a, b, c)
        others = (
            sys.n(b, bar[c], bar[a]),
            sys.n(bar[c], a, bar[b]),
            sys.n(bar[b], bar[a], bar[c]),
        )
        if any(o != v for o in others):
            bad.append((a, b, c))
    return bad


def fusion_rules_ok(sys: FusionSystem) -> bool:
    return not (
        _unit_violations(sys)
        or _symmetry_violations(sys)
        or _duality_violations(sys)
        or _associativity_violations(sys)
    )


# -- coherence equations -----------------------------------------------------
#
# Each equation is a pair (lhs, rhs) of sums of monomials.  A monomial is a
# tuple of entry references:
#   ("F", (a,b,c,d), row, col)   an F-block entry
#   ("R", (a,b,c), mu)           the phase r^{ab}_c[mu]
#   ("Ri", (a,b,c), mu)          the anticlockwise phase conj(r^{ba}_c[mu])


def _Fp(a, b, c, d, target: Vertex, source: Vertex):
    # entry in "target, source" order, stored as F[source, target]
    return ("F", (a, b, c, d), source, target)


def pentagon_equations(sys: FusionSystem) -> Iterator[tuple[list, list]]:
    L = sys.labels
    n = sys.n
    for a, b, c, d, e in itertools.product(L, repeat=5):
        for p in L:
            if not n(a, b, p):
                continue
            for q in L:
                if not (n(p, c, q) and n(q, d, e)):
                    continue
                for r in L:
                    if not n(c, d, r):
                        continue
                    for s in L:
                        if not (n(b, r, s) and n(a, s, e)):
                            continue
                        for al, be, la, ga, de, rh in itertools.product(
                            range(n(a, b, p)),
                            range(n(p, c, q)),
                            range(n(q, d, e)),
                            range(n(c, d, r)),
                            range(n(b, r, s)),
                            range(n(a, s, e)),
                        ):
                            lhs = [
                                (
                                    _Fp(a, b, r, e, (s, de, rh), (p, al, sg)),
                                    _Fp(p, c, d, e, (r, ga, sg), (q, be, la)),
                                )
                                for sg in range(n(p, r, e))
                            ]
                            rhs = []
                            for t in L:
                                if not (n(b, c, t) and n(t, d, s) and n(a, t, q)):
                                    continue
                                for mu, nu, et in itertools.product(
                                    range(n(b, c, t)), range(n(a, t, q)), range(n(t, d, s))
                                ):
                                    rhs.append(
                                        (
                                            _Fp(b, c, d, s, (r, ga, de), (t, mu, et)),
                                            _Fp(a, t, d, e, (s, et, rh), (q, nu, la)),
                                            _Fp(a, b, c, q, (t, mu, nu), (p, al, be)),
                                        )
                                    )
                            yield lhs, rhs


def pentagon_equations_mf(sys: FusionSystem) -> Iterator[tuple[list, list]]:
    """Multiplicity-free pentagon; every multiplicity index is 0."""
    L = sys.labels
    n = sys.n
    for a, b, c, d, e in itertools.product(L, repeat=5):
        for p in L:
            if not n(a, b, p):
                continue
            for q in L:
                if not (n(p, c, q) and n(q, d, e)):
                    continue
                for r in L:
                    if not (n(c, d, r) and n(p, r, e)):
                        continue
                    for s in L:
                        if not (n(b, r, s) and n(a, s, e)):
                            continue
                        lhs = [(_Fp(a, b, r, e, (s, 0, 0), (p, 0, 0)), _Fp(p, c, d, e, (r, 0, 0), (q, 0, 0)))]
                        rhs = [
                            (
                                _Fp(b, c, d, s, (r, 0, 0), (t, 0, 0)),
                                _Fp(a, t, d, e, (s, 0, 0), (q, 0, 0)),
                                _Fp(a, b, c, q, (t, 0, 0), (p, 0, 0)),
                            )
                            for t in L
                            if n(b, c, t) and n(t, d, s) and n(a, t, q)
                        ]
                        yield lhs, rhs


def hexagon_equations(sys: FusionSystem, orientation: int = 1) -> Iterator[tuple[list, list]]:
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    kind = "R" if orientation == 1 else "Ri"
    L = sys.labels
    n = sys.n
    for a, b, c, d in itertools.product(L, repeat=4):
        for x in L:
            if not (n(a, b, x) and n(x, c, d)):
                continue
            for z in L:
                if not (n(c, a, z) and n(b, z, d)):
                    continue
                for al, la, ga, rh in itertools.product(
                    range(n(a, b, x)), range(n(x, c, d)), range(n(c, a, z)), range(n(b, z, d))
                ):
                    lhs = []
                    for y in L:
                        if not (n(b, c, y) and n(a, y, d)):
                            continue
                        for be, mu in itertools.product(range(n(b, c, y)), range(n(a, y, d))):
                            lhs.append(
                                (
                                    _Fp(b, c, a, d, (z, ga, rh), (y, be, mu)),
                                    (kind, (a, y, d), mu),
                                    _Fp(a, b, c, d, (y, be, mu), (x, al, la)),
                                )
                            )
                    rhs = [
                        (
                            (kind, (a, c, z), ga),
                            _Fp(b, a, c, d, (z, ga, rh), (x, al, la)),
                            (kind, (a, b, x), al),
                        )
                    ]
                    yield lhs, rhs


def entry_value(sys: FusionSystem, ref) -> complex:
    kind = ref[0]
    if kind == "F":
        _, key, row, col = ref
        return sys.f_entry(*key, row, col)
    _, (a, b, c), mu = ref
    if kind == "R":
        return sys.r_phases(a, b, c)[mu]
    return sys.r_inverse_phases(a, b, c)[mu]


def _eval_side(sys: FusionSystem, side: list) -> complex:
    total = 0.0 + 0.0j
    for mono in side:
        term = 1.0 + 0.0j
        for ref in mono:
            term *= entry_value(sys, ref)
        total += term
    return total


def _max_deviation(sys: FusionSystem, equations) -> float:
    worst = 0.0
    for lhs, rhs in equations:
        worst = max(worst, abs(_eval_side(sys, lhs) - _eval_side(sys, rhs)))
    return worst


def pentagon_residual(sys: FusionSystem) -> float:
    """Largest deviation over every entry of every pentagon instance."""
    eqs = pentagon_equations_mf(sys) if sys.multiplicity_free else pentagon_equations(sys)
    return _max_deviation(sys, eqs)


def hexagon_residual(sys: FusionSystem, orientation: int = 1) -> float:
    return _max_deviation(sys, hexagon_equations(sys, orientation))


def triangle_check(sys: FusionSystem) -> bool:
    """Every F-block with a vacuum in ``a``, ``b`` or ``c`` is the identity map."""
    L = sys.labels
    for a, b, c, d in itertools.product(L, repeat=4):
        if VACUUM not in (a, b, c):
            continue
        blk = sys.fblock(a, b, c, d)
        ref = sys._vacuum_block(a, b, c, d)
        if blk.rows != ref.rows or blk.cols != ref.cols:
            return False
        if blk.matrix.size and np.max(np.abs(blk.matrix - ref.matrix)) > sys.tol:
            return False
    return True


# -- validation --------------------------------------------------------------


def _unitarity_residual(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    if m.shape[0] != m.shape[1]:
        return float("inf")
    return float(np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0]))))


def validate(sys: FusionSystem) -> ValidationReport:
    rep = ValidationReport()
    tol = sys.tol

    def add(name, bad, residual=0.0, passed=None, detail=None):
        ok = (not bad) if passed is None else passed
        rep.checks.append(Check(name, ok, float(residual), detail if detail is not None else (str(bad[:5]) if bad else "")))

    add("labels", [] if sys.labels[0] == VACUUM else ["vacuum not first"])
    add("unit", _unit_violations(sys))
    add("symmetry", _symmetry_violations(sys))
    add("duality", _duality_violations(sys))
    add("associativity", _associativity_violations(sys))
    add("dual-symmetries", _dual_symmetry_violations(sys))
    rules_ok = rep.passed

    # block presence and shapes
    missing = []
    for key in nonvacuum_f_keys(sys):
        blk = sys.F.get(key)
        if blk is None:
            missing.append(key)
        elif blk.rows != sys.f_rows(*key) or blk.cols != sys.f_cols(*key):
            missing.append(key + ("shape",))
    for key in sys.F:
        if VACUUM not in key[:3] and not sys.f_rows(*key) and key not in missing:
            missing.append(key + ("inadmissible",))
    add("f-blocks", missing)

    worst_f = max((_unitarity_residual(b.matrix) for b in sys.F.values()), default=0.0)
    add("f-unitary", [], worst_f, passed=worst_f <= tol)

    bad_r = []
    worst_r = 0.0
    for a, b, c in sys.admissible_triples():
        if VACUUM in (a, b):
            continue
        ph = sys.R.get((a, b, c))
        if ph is None or len(ph) != sys.n(a, b, c):
            bad_r.append((a, b, c))
            continue
        worst_r = max(worst_r, float(np.max(np.abs(np.abs(ph) - 1.0))))
    for key in sys.R:
        if not sys.n(*key):
            bad_r.append(key + ("inadmissible",))
    add("r-blocks", bad_r)
    add("r-unitary", [], worst_r, passed=worst_r <= tol)

    worst_vac = 0.0
    for q in sys.labels:
        for key in ((q, VACUUM, q), (VACUUM, q, q)):
            if key in sys.R:
                worst_vac = max(worst_vac, float(np.max(np.abs(sys.R[key] - 1.0))))
    add("r-vacuum", [], worst_vac, passed=worst_vac <= tol)
    add("triangle", [], passed=triangle_check(sys))

    blocks_ok = not missing and not bad_r
    if rules_ok and blocks_ok:
        p = pentagon_residual(sys)
        add("pentagon", [], p, passed=p < tol)
        for o in (1, -1):
            h = hexagon_residual(sys, o)
            add(f"hexagon{'+' if o > 0 else '-'}", [], h, passed=h < tol)
    else:
        for name in ("pentagon", "hexagon+", "hexagon-"):
            add(name, ["skipped"], float("inf"), passed=False, detail="skipped: fusion rules or blocks invalid")
    return rep


# -- monodromy, transparency -------------------------------------------------


def monodromy_phases(sys: FusionSystem, a: str, b: str, c: str) -> np.ndarray:
    if not sys.n(a, b, c):
        raise ValueError(f"({a},{b},{c}) is not admissible")
    return sys.r_phases(b, a, c) * sys.r_phases(a, b, c)


def monodromy(sys: FusionSystem, a: str, b: str, c: str) -> complex:
    """``m^{ab}_c = r^{ba}_c r^{ab}_c``."""
    ph = monodromy_phases(sys, a, b, c)
    if np.max(np.abs(ph - ph[0])) > max(sys.tol, 1e-12):
        raise ValueError(f"monodromy on ({a},{b},{c}) is not a scalar")
    return complex(ph[0])


def transparent_labels(sys: FusionSystem) -> set[str]:
    out = set()
    for x in sys.labels:
        if all(
            abs(monodromy(sys, x, q, c) - 1.0) <= sys.tol
            for q in sys.labels
            for c in sys.outcomes(x, q)
        ):
            out.add(x)
    return out


def is_modular_candidate(sys: FusionSystem) -> bool:
    return transparent_labels(sys) == {VACUUM}


# -- gauge -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaugeTransformation:
    """Unitary basis change ``u^{ab}_c`` on every vertex space; identity when ``a`` or ``b`` is vacuum."""

    u: Mapping[Key3, np.ndarray]

    def block(self, sys: FusionSystem, a: str, b: str, c: str) -> np.ndarray:
        k = sys.n(a, b, c)
        m = self.u.get((a, b, c))
        if m is None:
            return np.eye(k, dtype=complex)
        return m


def identity_gauge() -> GaugeTransformation:
    return GaugeTransformation({})


def random_gauge(sys: FusionSystem, rng: np.random.Generator) -> GaugeTransformation:
    u = {}
    for a, b, c in sys.admissible_triples():
        if VACUUM in (a, b):
            continue
        k = sys.n(a, b, c)
        if k == 1:
            u[(a, b, c)] = np.array([[np.exp(2j * np.pi * rng.random())]])
        else:
            z = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2)
            q, r = np.linalg.qr(z)
            u[(a, b, c)] = q * (np.diag(r) / np.abs(np.diag(r)))
    return GaugeTransformation(u)


def _check_gauge(sys: FusionSystem, g: GaugeTransformation) -> None:
    for key, m in g.u.items():
        k = sys.n(*key)
        m = np.asarray(m)
        if m.shape != (k, k):
            raise ValueError(f"gauge block {key} has shape {m.shape}, expected {(k, k)}")
        if VACUUM in key[:2] and k and np.max(np.abs(m - np.eye(k))) > 1e-12:
            raise ValueError(f"gauge block {key} touches the vacuum and must be the identity")
        if _unitarity_residual(m) > 1e-9:
            raise ValueError(f"gauge block {key} is not unitary")


def apply_gauge(sys: FusionSystem, g: GaugeTransformation) -> FusionSystem:
    _check_gauge(sys, g)
    newF = {}
    for key, blk in sys.F.items():
        a, b, c, d = key
        W = np.zeros((len(blk.rows), len(blk.rows)), dtype=complex)
        for i, (e, mu, nu) in enumerate(blk.rows):
            for j, (e2, mu2, nu2) in enumerate(blk.rows):
                if e == e2:
                    W[i, j] = g.block(sys, a, b, e)[mu, mu2] * g.block(sys, e, c, d)[nu, nu2]
        V = np.zeros((len(blk.cols), len(blk.cols)), dtype=complex)
        for i, (f, rho, de) in enumerate(blk.cols):
            for j, (f2, rho2, de2) in enumerate(blk.cols):
                if f == f2:
                    V[i, j] = g.block(sys, b, c, f)[rho, rho2] * g.block(sys, a, f, d)[de, de2]
        # W[i,j] holds u[mu_i, mu_j]; the transformed block is W^T F conj(V)
        newF[key] = FBlock(blk.rows, blk.cols, W.T @ blk.matrix @ V.conj())
    newR = {}
    for (a, b, c), ph in sys.R.items():
        U = g.block(sys, a, b, c)
        Up = g.block(sys, b, a, c)
        m = Up.conj().T @ np.diag(ph) @ U
        off = m - np.diag(np.diag(m))
        if off.size and np.max(np.abs(off)) > 1e-9:
            raise ValueError(f"gauge makes R^{a}{b}_{c} non-diagonal")
        newR[(a, b, c)] = np.diag(m).copy()
    return sys.replace(F=newF, R=newR)


# -- twists ------------------------------------------------------------------


@dataclass(frozen=True)
class TwistAssignment:
    theta: Mapping[str, complex]

    def __post_init__(self):
        if abs(self.theta.get(VACUUM, 0) - 1.0) > 1e-9:
            raise ValueError("θ_0 must be 1")

    def __getitem__(self, q: str) -> complex:
        return self.theta[q]

    def as_tuple(self, labels: Sequence[str]) -> tuple[complex, ...]:
        return tuple(self.theta[q] for q in labels)


def quantum_dimensions(sys: FusionSystem) -> dict[str, float]:
    """Perron-Frobenius eigenvalue of each fusion matrix."""
    L = sys.labels
    out = {}
    for a in L:
        M = np.array([[sys.n(a, b, c) for c in L] for b in L], dtype=float)
        out[a] = float(np.max(np.abs(np.linalg.eigvals(M))))
    return out


def root_of_unity_order(z: complex, cap: int, tol: float) -> int | None:
    for k in range(1, cap + 1):
        if abs(z**k - 1.0) <= tol * k:
            return k
    return None


def twist_order_cap(sys: FusionSystem) -> int:
    return 2 * sys.rank * 8


def ribbon_residual(sys: FusionSystem, theta: Mapping[str, complex]) -> float:
    worst = 0.0
    for a, b, c in sys.admissible_triples():
        ph = monodromy_phases(sys, a, b, c)
        worst = max(worst, float(np.max(np.abs(ph - theta[c] / (theta[a] * theta[b])))))
    return worst


def _propagate(sys, theta, squares, triples):
    theta = dict(theta)
    changed = True
    while changed:
        changed = False
        for a, b, c, m in triples:
            if c in theta:
                continue
            if a in theta and b in theta:
                theta[c] = m * theta[a] * theta[b]
                changed = True
            elif a == b and a in squares:
                theta[c] = m * squares[a]
                changed = True
    return theta


def solve_twists(sys: FusionSystem) -> TwistAssignment:
    """Topological spins from the monodromy constraints ``m^{ab}_c = θ_c/(θ_aθ_b)``.

    ``θ_q^2`` comes from ``m^{q q̄}_0`` (spins of dual labels agree); chains
    ``m^{ab}_c`` fix the rest.  Remaining sign choices are enumerated, and
    among consistent assignments the one matching the quantum trace
    ``θ_a = Σ_c (d_c/d_a) tr R^{aa}_c`` is returned.
    """
    tol = sys.tol
    triples = [(a, b, c, monodromy(sys, a, b, c)) for a, b, c in sys.admissible_triples()]
    squares = {}
    for q in sys.labels:
        m0 = monodromy(sys, q, sys.bar(q), VACUUM)
        squares[q] = 1.0 / m0
    candidates = []
    stack = [{VACUUM: 1.0 + 0.0j}]
    while stack:
        theta = _propagate(sys, stack.pop(), squares, triples)
        free = [q for q in sys.labels if q not in theta]
        if not free:
            candidates.append(theta)
            continue
        root = np.sqrt(complex(squares[free[0]]))
        for sgn in (1, -1):
            stack.append({**theta, free[0]: sgn * root})
    cap = twist_order_cap(sys)
    good = []
    for theta in candidates:
        if ribbon_residual(sys, theta) > tol:
            continue
        if any(abs(abs(t) - 1.0) > tol for t in theta.values()):
            continue
        if any(root_of_unity_order(t, cap, tol) is None for t in theta.values()):
            continue
        if any(abs(theta[q] - theta[sys.bar(q)]) > tol for q in sys.labels):
            continue
        good.append(theta)
    if not good:
        raise TwistSolveError("no twist assignment satisfies every monodromy constraint")
    dims = quantum_dimensions(sys)
    trace = {
        a: sum(dims[c] * complex(np.sum(sys.r_phases(a, a, c))) for c in sys.outcomes(a, a)) / dims[a]
        for a in sys.labels
    }
    best = min(good, key=lambda th: max(abs(th[a] - trace[a]) for a in sys.labels))
    return TwistAssignment({q: complex(best[q]) for q in sys.labels})


# -- fusion algebra ----------------------------------------------------------


def n_tensor(sys: FusionSystem) -> np.ndarray:
    L = sys.labels
    return np.array([[[sys.n(a, b, c) for c in L] for b in L] for a in L], dtype=int)


def fusion_algebra_check(N: FusionSystem | np.ndarray) -> bool:
    """Fusion-algebra axioms on structure constants ``c[i,j,k]`` with unit at index 0.

    (i) unit, (ii) associativity, (iii) every product nonzero, (iv) an
    involution ``i*`` with ``c^{ij}_0 = c^{ji}_0 = δ_{i*j}``, (v) commutativity.
    """
    c = n_tensor(N) if isinstance(N, FusionSystem) else np.asarray(N)
    if c.ndim != 3 or len(set(c.shape)) != 1 or np.any(c < 0):
        return False
    r = c.shape[0]
    eye = np.eye(r, dtype=c.dtype)
    if not (np.array_equal(c[0], eye) and np.array_equal(c[:, 0, :], eye)):
        return False
    left = np.einsum("ijp,pku->ijku", c, c)
    right = np.einsum("iru,jkr->ijku", c, c)
    if not np.array_equal(left, right):
        return False
    if np.any(c.sum(axis=2) <= 0):
        return False
    star = []
    for i in range(r):
        col = c[i, :, 0]
        if sorted(col.tolist()) != [0] * (r - 1) + [1] or not np.array_equal(col, c[:, i, 0]):
            return False
        star.append(int(np.argmax(col)))
    if any(star[star[i]] != i for i in range(r)):
        return False
    return bool(np.array_equal(c, c.transpose(1, 0, 2)))


def is_group_like(N: FusionSystem | np.ndarray) -> bool:
    """Every product of two labels is a single label: the labels form a group."""
    c = n_tensor(N) if isinstance(N, FusionSystem) else np.asarray(N)
    return bool(np.all(c.sum(axis=2) == 1) and np.all(c.max(axis=2) == 1))


# -- JSON --------------------------------------------------------------------

_TOP_FIELDS = {"labels", "dual", "N", "F", "R", "tol"}
_F_FIELDS = {"a", "b", "c", "d", "rows", "cols", "entries"}
_R_FIELDS = {"a", "b", "c", "phases"}


def _reject_unknown(obj: Mapping, allowed: set[str], where: str) -> None:
    extra = set(obj) - allowed
    if extra:
        raise ValueError(f"unknown field(s) {sorted(extra)} in {where}")


def _cplx(pair) -> complex:
    re, im = pair
    return complex(float(re), float(im))


def from_dict(data: Mapping, name: str = "") -> FusionSystem:
    if not isinstance(data, Mapping):
        raise ValueError("model must be a JSON object")
    _reject_unknown(data, _TOP_FIELDS, "model")
    for key in ("labels", "dual", "N"):
        if key not in data:
            raise ValueError(f"model lacks field {key!r}")
    N = {}
    for row in data["N"]:
        a, b, c, v = row
        N[(str(a), str(b), str(c))] = int(v)
    F = {}
    for rec in data.get("F", []):
        _reject_unknown(rec, _F_FIELDS, "F record")
        rows = [tuple(r) for r in rec["rows"]]
        cols = [tuple(r) for r in rec["cols"]]
        entries = np.array([_cplx(z) for z in rec["entries"]], dtype=complex)
        if entries.size != len(rows) * len(cols):
            raise ValueError(f"F record {rec['a'], rec['b'], rec['c'], rec['d']} has the wrong entry count")
        F[(rec["a"], rec["b"], rec["c"], rec["d"])] = FBlock(rows, cols, entries.reshape(len(rows), len(cols)))
    R = {}
    for rec in data.get("R", []):
        _reject_unknown(rec, _R_FIELDS, "R record")
        R[(rec["a"], rec["b"], rec["c"])] = np.array([_cplx(z) for z in rec["phases"]], dtype=complex)
    return FusionSystem(
        labels=tuple(data["labels"]),
        dual=dict(data["dual"]),
        N=N,
        F=F,
        R=R,
        tol=float(data.get("tol", DEFAULT_TOL)),
        name=name,
    )


def to_dict(sys: FusionSystem) -> dict:
    order = {q: i for i, q in enumerate(sys.labels)}

    def k(key):
        return tuple(order[x] for x in key)

    return {
        "labels": list(sys.labels),
        "dual": {q: sys.dual[q] for q in sys.labels if q in sys.dual},
        "N": [[a, b, c, v] for (a, b, c), v in sorted(sys.N.items(), key=lambda kv: k(kv[0]))],
        "F": [
            {
                "a": a,
                "b": b,
                "c": c,
                "d": d,
                "rows": [list(r) for r in blk.rows],
                "cols": [list(c_) for c_ in blk.cols],
                "entries": [[float(z.real), float(z.imag)] for z in blk.matrix.reshape(-1)],
            }
            for (a, b, c, d), blk in sorted(sys.F.items(), key=lambda kv: k(kv[0]))
        ],
        "R": [
            {"a": a, "b": b, "c": c, "phases": [[float(z.real), float(z.imag)] for z in ph]}
            for (a, b, c), ph in sorted(sys.R.items(), key=lambda kv: k(kv[0]))
        ],
        "tol": sys.tol,
    }


def load(path: str | Path) -> FusionSystem:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        data = json.load(fh)
    return from_dict(data, name=path.stem)


def dump(sys: FusionSystem, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(to_dict(sys), fh, indent=1, ensure_ascii=False)
        fh.write("\n")
