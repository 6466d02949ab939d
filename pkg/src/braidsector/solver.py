"""Numerical derivation of F- and R-data from fusion rules.

The pentagon, both hexagons and unitarity are compiled into a polynomial
system in the unknown entries, solved by least squares from random starts,
and the result is moved into a symmetric gauge.  Gauge-invariant braiding
phases ``r^{aa}_c`` are pinned by the caller to select one Galois branch.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.optimize import least_squares

from .fusion import (
    VACUUM,
    FBlock,
    FusionSystem,
    GaugeTransformation,
    Key3,
    apply_gauge,
    hexagon_equations,
    monodromy,
    nonvacuum_f_keys,
    pentagon_equations,
    validate,
)


@dataclass(frozen=True)
class ModelSpec:
    """Fusion rules plus pinned phases ``r^{aa}_c`` for one model."""

    name: str
    labels: tuple[str, ...]
    dual: Mapping[str, str]
    N: Mapping[Key3, int]
    pinned: Mapping[Key3, complex]


def _skeleton(spec: ModelSpec) -> FusionSystem:
    base = FusionSystem(labels=spec.labels, dual=spec.dual, N=spec.N, F={}, R={}, name=spec.name)
    F = {}
    for key in nonvacuum_f_keys(base):
        rows, cols = base.f_rows(*key), base.f_cols(*key)
        F[key] = FBlock(rows, cols, np.zeros((len(rows), len(cols))))
    R = {}
    for a, b, c in base.admissible_triples():
        if VACUUM not in (a, b):
            R[(a, b, c)] = np.ones(base.n(a, b, c))
    return base.replace(F=F, R=R)


class _Compiled:
    """Equations as monomials over a slot vector ``[z, conj(z), constants]``."""

    def __init__(self, skel: FusionSystem, pinned: Mapping[Key3, complex]):
        self.skel = skel
        self.var_index: dict = {}
        for key, blk in skel.F.items():
            for i, j in itertools.product(range(len(blk.rows)), range(len(blk.cols))):
                self.var_index[("F", key, blk.rows[i], blk.cols[j])] = len(self.var_index)
        for key, ph in skel.R.items():
            for mu in range(len(ph)):
                if key not in pinned:
                    self.var_index[("R", key, mu)] = len(self.var_index)
        self.m = len(self.var_index)
        self.pinned = {k: np.atleast_1d(np.asarray(v, dtype=complex)) for k, v in pinned.items()}
        self.consts: list[complex] = [1.0]
        self._const_index: dict = {1.0: 0}
        monos, eq_ids = [], []
        eq = 0
        eqs = itertools.chain(
            pentagon_equations(skel), hexagon_equations(skel, 1), hexagon_equations(skel, -1)
        )
        for lhs, rhs in eqs:
            for sign, side in ((1, lhs), (-1, rhs)):
                for mono in side:
                    slots = self._slots(mono)
                    if slots is None:
                        continue
                    if sign < 0:
                        slots.append(self._const(-1.0))
                    # pad to a fixed degree with the constant 1
                    slots += [self._const(1.0)] * (4 - len(slots))
                    monos.append(slots)
                    eq_ids.append(eq)
            eq += 1
        self.n_eq = eq
        self.slots = np.array(monos, dtype=int).reshape(-1, 4)
        self.eq_ids = np.array(eq_ids, dtype=int)
        self.const_arr = np.array(self.consts, dtype=complex)

    def _const(self, v: complex) -> int:
        idx = self._const_index.get(v)
        if idx is None:
            idx = len(self.consts)
            self.consts.append(v)
            self._const_index[v] = idx
        return 2 * self.m + idx

    def _slots(self, mono) -> list[int] | None:
        slots = []
        for ref in mono:
            kind = ref[0]
            if kind == "F":
                _, key, row, col = ref
                if key in self.skel.F:
                    slots.append(self.var_index[ref])
                else:
                    val = self.skel.f_entry(*key, row, col)
                    if val == 0:
                        return None
                    slots.append(self._const(complex(val)))
                continue
            _, (a, b, c), mu = ref
            conj = kind == "Ri"
            if conj:
                a, b = b, a
            key = (a, b, c)
            if VACUUM in (a, b):
                slots.append(self._const(1.0))
            elif key in self.pinned:
                v = self.pinned[key][mu]
                slots.append(self._const(complex(np.conj(v) if conj else v)))
            else:
                idx = self.var_index[("R", key, mu)]
                slots.append(self.m + idx if conj else idx)
        return slots

    def residuals(self, z: np.ndarray) -> np.ndarray:
        e = np.concatenate([z, np.conj(z), self.const_arr])
        terms = np.prod(e[self.slots], axis=1)
        re = np.bincount(self.eq_ids, terms.real, self.n_eq)
        im = np.bincount(self.eq_ids, terms.imag, self.n_eq)
        return re + 1j * im


def _from_vector(skel: FusionSystem, comp: _Compiled, z: np.ndarray, pinned) -> FusionSystem:
    F = {}
    for key, blk in skel.F.items():
        mat = np.array(
            [[z[comp.var_index[("F", key, r, c)]] for c in blk.cols] for r in blk.rows], dtype=complex
        )
        F[key] = FBlock(blk.rows, blk.cols, mat)
    R = {}
    for key, ph in skel.R.items():
        if key in pinned:
            R[key] = np.atleast_1d(np.asarray(pinned[key], dtype=complex))
        else:
            R[key] = np.array([z[comp.var_index[("R", key, mu)]] for mu in range(len(ph))])
    return skel.replace(F=F, R=R)


def solve_model(spec: ModelSpec, seed: int = 0, attempts: int = 40, target: float = 1e-13) -> FusionSystem:
    """Least-squares solution of pentagon, hexagons and unitarity."""
    skel = _skeleton(spec)
    comp = _Compiled(skel, spec.pinned)
    m = comp.m
    if m == 0:
        return _from_vector(skel, comp, np.zeros(0), spec.pinned)
    f_blocks = [
        np.array([[comp.var_index[("F", key, r, c)] for c in blk.cols] for r in blk.rows])
        for key, blk in skel.F.items()
    ]
    r_idx = np.array([i for ref, i in comp.var_index.items() if ref[0] == "R"], dtype=int)

    def fun(x):
        z = x[:m] + 1j * x[m:]
        eqv = comp.residuals(z)
        parts = [eqv.real, eqv.imag]
        for idx in f_blocks:
            M = z[idx]
            U = M @ M.conj().T - np.eye(len(M))
            parts += [U.real.ravel(), U.imag.ravel()]
        if len(r_idx):
            parts.append(np.abs(z[r_idx]) ** 2 - 1.0)
        return np.concatenate(parts)

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(attempts):
        x0 = rng.standard_normal(2 * m)
        sol = least_squares(fun, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000)
        worst = float(np.max(np.abs(fun(sol.x))))
        if best is None or worst < best[0]:
            best = (worst, sol.x)
        if worst < target:
            break
    worst, x = best
    # polish with a more accurate finite-difference Jacobian
    sol = least_squares(fun, x, method="trf", jac="3-point", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    if float(np.max(np.abs(fun(sol.x)))) < worst:
        x = sol.x
        worst = float(np.max(np.abs(fun(x))))
    if worst > 1e-10:
        raise RuntimeError(f"{spec.name}: no solution found, best residual {worst:.3e}")
    return _from_vector(skel, comp, x[:m] + 1j * x[m:], spec.pinned)


def _vertex_phases(sys: FusionSystem) -> dict[str, complex]:
    """Phases ``φ`` with ``φ_0 = 1``, ``r^{aa}_c = φ_c/φ_a²`` and ``(φ_c/(φ_aφ_b))² = m^{ab}_c``."""
    labels = [q for q in sys.labels if q != VACUUM]
    opts = []
    for q in labels:
        sq = 1.0 / sys.r_phases(q, q, VACUUM)[0] if sys.n(q, q, VACUUM) else None
        if sq is None:
            # a label fusing with itself to something else: take φ_q² from any r^{qq}_c with known φ_c later
            opts.append(None)
        else:
            root = np.sqrt(complex(sq))
            opts.append((root, -root))
    if any(o is None for o in opts):
        raise NotImplementedError("vertex phases need every label to be self-dual")
    for choice in itertools.product(*opts):
        phi = {VACUUM: 1.0 + 0j, **dict(zip(labels, choice))}
        ok = True
        for a, b, c in sys.admissible_triples():
            v = phi[c] / (phi[a] * phi[b])
            if a == b and abs(sys.r_phases(a, a, c)[0] - v) > 1e-9:
                ok = False
            if abs(v * v - monodromy(sys, a, b, c)) > 1e-9:
                ok = False
            if not ok:
                break
        if ok:
            return phi
    raise RuntimeError("no consistent vertex phases")


def symmetric_gauge(sys: FusionSystem) -> FusionSystem:
    """Gauge with ``r^{ab}_c = r^{ba}_c = φ_c/(φ_aφ_b)`` for multiplicity-free data."""
    if not sys.multiplicity_free:
        raise NotImplementedError("symmetric gauge fixing is implemented for multiplicity-free data")
    phi = _vertex_phases(sys)
    order = {q: i for i, q in enumerate(sys.labels)}
    u = {}
    for a, b, c in sys.admissible_triples():
        if VACUUM in (a, b) or order[a] >= order[b]:
            continue
        want = phi[c] / (phi[a] * phi[b])
        u[(a, b, c)] = np.array([[want / sys.r_phases(a, b, c)[0]]])
    return apply_gauge(sys, GaugeTransformation(u))


def _clean(sys: FusionSystem, eps: float = 1e-14) -> FusionSystem:
    def c(arr):
        arr = np.array(arr, dtype=complex)
        re, im = arr.real.copy(), arr.imag.copy()
        re[np.abs(re) < eps] = 0.0
        im[np.abs(im) < eps] = 0.0
        return re + 1j * im

    F = {k: FBlock(b.rows, b.cols, c(b.matrix)) for k, b in sys.F.items()}
    R = {k: c(v) for k, v in sys.R.items()}
    return sys.replace(F=F, R=R)


def derive(spec: ModelSpec, seed: int = 0) -> FusionSystem:
    sys = solve_model(spec, seed=seed)
    if sys.R:
        sys = symmetric_gauge(sys)
    sys = _clean(sys)
    rep = validate(sys)
    if not rep.passed:
        raise RuntimeError(f"{spec.name}: derived data fails {rep.failed()}")
    return sys


# -- the bundled models --------------------------------------------------------


def _group_rules(labels, mult) -> dict:
    return {(a, b, mult(a, b)): 1 for a in labels for b in labels}


def _z2(a, b):
    return "0" if a == b else "1"


def _klein(a, b):
    bits = {"0": 0, "e": 1, "m": 2, "f": 3}
    inv = {v: k for k, v in bits.items()}
    return inv[bits[a] ^ bits[b]]


def _fib_rules() -> dict:
    N = {("0", "0", "0"): 1, ("0", "tau", "tau"): 1, ("tau", "0", "tau"): 1}
    N[("tau", "tau", "0")] = 1
    N[("tau", "tau", "tau")] = 1
    return N


def _ising_rules() -> dict:
    N = {}
    for q in ("0", "sigma", "psi"):
        N[("0", q, q)] = N[(q, "0", q)] = 1
    N[("sigma", "sigma", "0")] = N[("sigma", "sigma", "psi")] = 1
    N[("sigma", "psi", "sigma")] = N[("psi", "sigma", "sigma")] = 1
    N[("psi", "psi", "0")] = 1
    return N


def _e(frac: float) -> complex:
    return complex(np.exp(1j * np.pi * frac))


MODEL_SPECS: dict[str, ModelSpec] = {
    "trivial": ModelSpec("trivial", ("0",), {"0": "0"}, {("0", "0", "0"): 1}, {}),
    "z2boson": ModelSpec(
        "z2boson", ("0", "1"), {"0": "0", "1": "1"}, _group_rules(("0", "1"), _z2), {("1", "1", "0"): 1.0}
    ),
    "semion": ModelSpec(
        "semion",
        ("0", "s"),
        {"0": "0", "s": "s"},
        {(a.replace("1", "s"), b.replace("1", "s"), c.replace("1", "s")): 1 for (a, b, c) in _group_rules(("0", "1"), _z2)},
        {("s", "s", "0"): 1j},
    ),
    "toric": ModelSpec(
        "toric",
        ("0", "e", "m", "f"),
        {q: q for q in ("0", "e", "m", "f")},
        _group_rules(("0", "e", "m", "f"), _klein),
        {("e", "e", "0"): 1.0, ("m", "m", "0"): 1.0, ("f", "f", "0"): -1.0},
    ),
    "fibonacci": ModelSpec(
        "fibonacci",
        ("0", "tau"),
        {"0": "0", "tau": "tau"},
        _fib_rules(),
        {("tau", "tau", "0"): _e(-4 / 5), ("tau", "tau", "tau"): _e(3 / 5)},
    ),
    "ising": ModelSpec(
        "ising",
        ("0", "sigma", "psi"),
        {"0": "0", "sigma": "sigma", "psi": "psi"},
        _ising_rules(),
        {
            ("sigma", "sigma", "0"): _e(-1 / 8),
            ("sigma", "sigma", "psi"): _e(3 / 8),
            ("psi", "psi", "0"): -1.0,
        },
    ),
}


def main(argv: list[str] | None = None) -> int:
    import argparse
    from pathlib import Path

    from .fusion import dump

    parser = argparse.ArgumentParser(description="Derive the bundled model data files.")
    parser.add_argument("--out", type=Path, default=Path(__file__).parent / "models")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("names", nargs="*", default=sorted(MODEL_SPECS))
    args = parser.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    for name in args.names:
        sys = derive(MODEL_SPECS[name], seed=args.seed)
        dump(sys, args.out / f"{name}.json")
        print(f"{name}: max residual {validate(sys).max_residual:.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
