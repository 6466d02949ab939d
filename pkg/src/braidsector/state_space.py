"""Fusion-tree bases and the unitary action of braids on them.

A shape is a full binary tree over leaf positions ``0..n-1`` written as nested
pairs, e.g. ``((0, 1), 2)``; its in-order leaves are always ``0..n-1``.  A
labelled tree carries a label on each leaf and a charge and multiplicity
index on each internal vertex.  Matrices map source columns to target rows.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

from .braid import (
    BraidWord,
    beta,
    canonical_word,
    compose,
    equal_in_group,
    invert,
    normal_form,
    permutation,
    power,
    t_braid,
    u_braid,
    words_up_to,
)
from .fusion import FusionSystem, TwistAssignment, solve_twists

Shape = Union[int, tuple]

UNIQUENESS_WORD_CAP = 200_000


class SpectrumError(ValueError):
    """The superselection braid is not block-scalar on the given data."""


# -- shapes ------------------------------------------------------------------


def enumerate_shapes(n: int) -> list[Shape]:
    """All full binary trees with ``n`` ordered leaves; there are ``C_{n-1}``."""
    if n < 1:
        raise ValueError("a tree needs at least one leaf")

    @lru_cache(maxsize=None)
    def build(lo: int, hi: int) -> tuple:
        if hi - lo == 1:
            return (lo,)
        out = []
        for mid in range(lo + 1, hi):
            for left in build(lo, mid):
                for right in build(mid, hi):
                    out.append((left, right))
        return tuple(out)

    return list(build(0, n))


def left_comb(n: int, offset: int = 0) -> Shape:
    if n < 1:
        raise ValueError("a tree needs at least one leaf")
    acc: Shape = offset
    for p in range(offset + 1, offset + n):
        acc = (acc, p)
    return acc


def right_comb(n: int, offset: int = 0) -> Shape:
    if n < 1:
        raise ValueError("a tree needs at least one leaf")
    acc: Shape = offset + n - 1
    for p in range(offset + n - 2, offset - 1, -1):
        acc = (p, acc)
    return acc


def shape_leaves(shape: Shape) -> list[int]:
    if isinstance(shape, int):
        return [shape]
    return shape_leaves(shape[0]) + shape_leaves(shape[1])


def shape_size(shape: Shape) -> int:
    return len(shape_leaves(shape))


def _renumber(shape: Shape, start: int = 0) -> tuple[Shape, int]:
    if isinstance(shape, int):
        return start, start + 1
    left, mid = _renumber(shape[0], start)
    right, end = _renumber(shape[1], mid)
    return (left, right), end


def shift_shape(shape: Shape, by: int) -> Shape:
    if isinstance(shape, int):
        return shape + by
    return (shift_shape(shape[0], by), shift_shape(shape[1], by))


def mirror_shape(shape: Shape) -> Shape:
    """Reverse every vertex; leaf ``p`` moves to ``n-1-p``."""
    n = shape_size(shape)

    def go(s):
        if isinstance(s, int):
            return n - 1 - s
        return (go(s[1]), go(s[0]))

    return go(shape)


def shape_str(shape: Shape) -> str:
    if isinstance(shape, int):
        return str(shape)
    return f"({shape_str(shape[0])},{shape_str(shape[1])})"


def _subshape(shape: Shape, path: tuple[int, ...]) -> Shape:
    for step in path:
        shape = shape[step]
    return shape


def _replace_shape(shape: Shape, path: tuple[int, ...], new: Shape) -> Shape:
    if not path:
        return new
    parts = list(shape)
    parts[path[0]] = _replace_shape(shape[path[0]], path[1:], new)
    return tuple(parts)


def _vertex_paths(shape: Shape, prefix: tuple[int, ...] = ()) -> list[tuple[int, ...]]:
    if isinstance(shape, int):
        return []
    return [prefix] + _vertex_paths(shape[0], prefix + (0,)) + _vertex_paths(shape[1], prefix + (1,))


# -- labelled trees ----------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    pos: int
    label: str

    @property
    def charge(self) -> str:
        return self.label

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class Node:
    left: "FusionTree"
    right: "FusionTree"
    charge: str
    mult: int = 0

    def __str__(self) -> str:
        tag = f"#{self.mult}" if self.mult else ""
        return f"({self.left},{self.right})->{self.charge}{tag}"


FusionTree = Union[Leaf, Node]


def tree_shape(t: FusionTree) -> Shape:
    if isinstance(t, Leaf):
        return t.pos
    return (tree_shape(t.left), tree_shape(t.right))


def tree_leaves(t: FusionTree) -> list[Leaf]:
    if isinstance(t, Leaf):
        return [t]
    return tree_leaves(t.left) + tree_leaves(t.right)


def tree_vertices(t: FusionTree) -> list[tuple[str, str, str, int]]:
    """``(a, b, c, mu)`` for every internal vertex, in pre-order."""
    if isinstance(t, Leaf):
        return []
    return [(t.left.charge, t.right.charge, t.charge, t.mult)] + tree_vertices(t.left) + tree_vertices(t.right)


def _subtree(t: FusionTree, path: tuple[int, ...]) -> FusionTree:
    for step in path:
        t = t.left if step == 0 else t.right
    return t


def _replace_subtree(t: FusionTree, path: tuple[int, ...], new: FusionTree) -> FusionTree:
    if not path:
        return new
    if path[0] == 0:
        return Node(_replace_subtree(t.left, path[1:], new), t.right, t.charge, t.mult)
    return Node(t.left, _replace_subtree(t.right, path[1:], new), t.charge, t.mult)


def shift_tree(t: FusionTree, by: int) -> FusionTree:
    if isinstance(t, Leaf):
        return Leaf(t.pos + by, t.label)
    return Node(shift_tree(t.left, by), shift_tree(t.right, by), t.charge, t.mult)


def mirror_tree(t: FusionTree, n: int) -> FusionTree:
    if isinstance(t, Leaf):
        return Leaf(n - 1 - t.pos, t.label)
    return Node(mirror_tree(t.right, n), mirror_tree(t.left, n), t.charge, t.mult)


def _renumber_tree(t: FusionTree, start: int = 0) -> tuple[FusionTree, int]:
    if isinstance(t, Leaf):
        return Leaf(start, t.label), start + 1
    left, mid = _renumber_tree(t.left, start)
    right, end = _renumber_tree(t.right, mid)
    return Node(left, right, t.charge, t.mult), end


def flip_tree(t: FusionTree, flips: frozenset, path: tuple[int, ...] = ()) -> FusionTree:
    """Swap the children of every vertex whose path is in ``flips``, then renumber leaves."""

    def go(s, p):
        if isinstance(s, Leaf):
            return s
        left, right = go(s.left, p + (0,)), go(s.right, p + (1,))
        if p in flips:
            left, right = right, left
        return Node(left, right, s.charge, s.mult)

    return _renumber_tree(go(t, path))[0]


def vertex_product(sys: FusionSystem, t: FusionTree) -> complex:
    """Product of ``r^{ab}_c`` over the vertices of a labelled tree."""
    out = 1.0 + 0.0j
    for a, b, c, mu in tree_vertices(t):
        out *= sys.r_phases(a, b, c)[mu]
    return out


# -- bases -------------------------------------------------------------------


def _label_trees(sys: FusionSystem, shape: Shape, labels: tuple[str, ...]) -> list[FusionTree]:
    if isinstance(shape, int):
        return [Leaf(shape, labels[shape])]
    out = []
    for left in _label_trees(sys, shape[0], labels):
        for right in _label_trees(sys, shape[1], labels):
            for c in sys.outcomes(left.charge, right.charge):
                for mu in range(sys.n(left.charge, right.charge, c)):
                    out.append(Node(left, right, c, mu))
    return out


@dataclass(frozen=True, eq=False)
class FusionBasis:
    shape: Shape
    leaf_labels: tuple[str, ...]
    vectors: tuple[FusionTree, ...]
    root_filter: str | None = None
    index: dict = field(init=False, repr=False)
    charge_ranges: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.vectors)})
        ranges: dict = {}
        for i, t in enumerate(self.vectors):
            lo, hi = ranges.get(t.charge, (i, i))
            ranges[t.charge] = (lo, i + 1)
        object.__setattr__(self, "charge_ranges", {q: slice(lo, hi) for q, (lo, hi) in ranges.items()})

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def n(self) -> int:
        return len(self.leaf_labels)

    def same_space(self, other: FusionBasis) -> bool:
        return self.leaf_labels == other.leaf_labels and self.root_filter == other.root_filter

    def describe(self) -> dict:
        return {
            "shape": shape_str(self.shape),
            "leaves": list(self.leaf_labels),
            "root": self.root_filter,
            "vectors": [str(t) for t in self.vectors],
        }


@lru_cache(maxsize=8192)
def _cached_basis(sys: FusionSystem, shape: Shape, labels: tuple[str, ...], root: str | None) -> FusionBasis:
    order = {q: i for i, q in enumerate(sys.labels)}
    trees = _label_trees(sys, shape, labels)
    if root is not None:
        trees = [t for t in trees if t.charge == root]

    def key(t):
        verts = tree_vertices(t)
        return (order[t.charge], tuple(order[c] for _, _, c, _ in verts), tuple(m for *_, m in verts))

    trees.sort(key=key)
    return FusionBasis(shape, labels, tuple(trees), root)


def build_basis(
    sys: FusionSystem, shape: Shape, leaf_labels: Sequence[str], root_filter: str | None = None
) -> FusionBasis:
    labels = tuple(str(q) for q in leaf_labels)
    unknown = [q for q in labels if q not in sys.labels]
    if unknown:
        raise ValueError(f"unknown leaf labels {unknown}")
    if root_filter is not None and root_filter not in sys.labels:
        raise ValueError(f"unknown root label {root_filter!r}")
    if sorted(shape_leaves(shape)) != list(range(len(labels))) or shape_leaves(shape) != list(range(len(labels))):
        raise ValueError(f"shape {shape_str(shape)} does not fit {len(labels)} leaves")
    return _cached_basis(sys, shape, labels, root_filter)


# -- block maps --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class UnitaryBlockMap:
    source: FusionBasis
    target: FusionBasis
    matrix: np.ndarray

    def __matmul__(self, other: UnitaryBlockMap) -> UnitaryBlockMap:
        """``self ∘ other``."""
        if other.target is not self.source and not (
            other.target.shape == self.source.shape and other.target.same_space(self.source)
        ):
            raise ValueError("maps do not compose: bases differ")
        return UnitaryBlockMap(other.source, self.target, self.matrix @ other.matrix)

    def adjoint(self) -> UnitaryBlockMap:
        return UnitaryBlockMap(self.target, self.source, self.matrix.conj().T)

    @property
    def charge_blocks(self) -> dict[str, tuple[slice, slice]]:
        """Root charge ``Q`` to its (target rows, source columns)."""
        return {
            q: (self.target.charge_ranges[q], sl)
            for q, sl in self.source.charge_ranges.items()
            if q in self.target.charge_ranges
        }

    def block(self, q: str) -> np.ndarray:
        rows, cols = self.charge_blocks[q]
        return self.matrix[rows, cols]

    def unitarity_residual(self) -> float:
        m = self.matrix
        if m.size == 0:
            return 0.0
        return float(np.max(np.abs(m @ m.conj().T - np.eye(len(m)))))

    def cross_block_residual(self) -> float:
        mask = np.ones(self.matrix.shape, dtype=bool)
        for rows, cols in self.charge_blocks.values():
            mask[rows, cols] = False
        return float(np.max(np.abs(self.matrix[mask]), initial=0.0))

    def to_dict(self) -> dict:
        return {
            "source": self.source.describe(),
            "target": self.target.describe(),
            "entries": [[float(z.real), float(z.imag)] for z in self.matrix.reshape(-1)],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def identity_map(basis: FusionBasis) -> UnitaryBlockMap:
    return UnitaryBlockMap(basis, basis, np.eye(len(basis), dtype=complex))


# -- F-moves and basis changes -----------------------------------------------


def f_move(sys: FusionSystem, basis: FusionBasis, vertex: tuple[int, ...] = (), direction: int = 1) -> UnitaryBlockMap:
    """Reassociate at ``vertex``: ``((A,B),C) -> (A,(B,C))`` for ``direction=1``, the reverse for ``-1``."""
    vertex = tuple(vertex)
    try:
        local = _subshape(basis.shape, vertex)
    except (TypeError, IndexError):
        raise ValueError(f"no vertex at path {vertex}") from None
    if direction == 1:
        if isinstance(local, int) or isinstance(local[0], int):
            raise ValueError(f"vertex {vertex} is not of the form ((A,B),C)")
        (sa, sb), sc = local
        new_local = (sa, (sb, sc))
    elif direction == -1:
        if isinstance(local, int) or isinstance(local[1], int):
            raise ValueError(f"vertex {vertex} is not of the form (A,(B,C))")
        sa, (sb, sc) = local
        new_local = ((sa, sb), sc)
    else:
        raise ValueError("direction must be +1 or -1")
    target = build_basis(sys, _replace_shape(basis.shape, vertex, new_local), basis.leaf_labels, basis.root_filter)
    M = np.zeros((len(target), len(basis)), dtype=complex)
    for j, t in enumerate(basis.vectors):
        sub = _subtree(t, vertex)
        d = sub.charge
        if direction == 1:
            inner, C = sub.left, sub.right
            A, B = inner.left, inner.right
            a, b, c = A.charge, B.charge, C.charge
            blk = sys.fblock(a, b, c, d)
            row = (inner.charge, inner.mult, sub.mult)
            for f, rho, de in blk.cols:
                amp = blk.entry(row, (f, rho, de))
                if amp != 0:
                    new = Node(A, Node(B, C, f, rho), d, de)
                    M[target.index[_replace_subtree(t, vertex, new)], j] += amp
        else:
            A, inner = sub.left, sub.right
            B, C = inner.left, inner.right
            a, b, c = A.charge, B.charge, C.charge
            blk = sys.fblock(a, b, c, d)
            col = (inner.charge, inner.mult, sub.mult)
            for e, mu, nu in blk.rows:
                amp = np.conj(blk.entry((e, mu, nu), col))
                if amp != 0:
                    new = Node(Node(A, B, e, mu), C, d, nu)
                    M[target.index[_replace_subtree(t, vertex, new)], j] += amp
    return UnitaryBlockMap(basis, target, M)


def _route_to_comb(shape: Shape) -> list[tuple[tuple[int, ...], int]]:
    """F-moves ``(X,(B,C)) -> ((X,B),C)`` that turn ``shape`` into the left comb."""
    moves = []
    while True:
        for path in _vertex_paths(shape):
            local = _subshape(shape, path)
            if not isinstance(local[1], int):
                sa, (sb, sc) = local
                shape = _replace_shape(shape, path, ((sa, sb), sc))
                moves.append((path, -1))
                break
        else:
            return moves


def _apply_moves(sys: FusionSystem, basis: FusionBasis, moves) -> UnitaryBlockMap:
    acc = identity_map(basis)
    for path, direction in moves:
        acc = f_move(sys, acc.target, path, direction) @ acc
    return acc


def _check_same_space(src: FusionBasis, dst: FusionBasis) -> None:
    if src.leaf_labels != dst.leaf_labels:
        raise ValueError(f"leaf labels differ: {src.leaf_labels} vs {dst.leaf_labels}")
    if src.root_filter != dst.root_filter:
        raise ValueError("root filters differ")


def basis_change(sys: FusionSystem, src: FusionBasis, dst: FusionBasis) -> UnitaryBlockMap:
    """Change of fusion basis, routed through the left comb."""
    _check_same_space(src, dst)
    if src.shape == dst.shape:
        return identity_map(src) if src is dst else UnitaryBlockMap(src, dst, np.eye(len(src), dtype=complex))
    return _cached_change(sys, src.shape, dst.shape, src.leaf_labels, src.root_filter)


@lru_cache(maxsize=8192)
def _cached_change(sys, src_shape, dst_shape, labels, root) -> UnitaryBlockMap:
    src = build_basis(sys, src_shape, labels, root)
    dst = build_basis(sys, dst_shape, labels, root)
    to_comb = _apply_moves(sys, src, _route_to_comb(src_shape))
    from_comb = _apply_moves(sys, dst, _route_to_comb(dst_shape)).adjoint()
    return UnitaryBlockMap(src, dst, from_comb.matrix @ to_comb.matrix)


def _neighbour_moves(shape: Shape):
    for path in _vertex_paths(shape):
        local = _subshape(shape, path)
        if not isinstance(local[0], int):
            (sa, sb), sc = local
            yield (path, 1), _replace_shape(shape, path, (sa, (sb, sc)))
        if not isinstance(local[1], int):
            sa, (sb, sc) = local
            yield (path, -1), _replace_shape(shape, path, ((sa, sb), sc))


def basis_change_direct(sys: FusionSystem, src: FusionBasis, dst: FusionBasis) -> UnitaryBlockMap:
    """Basis change along a shortest sequence of single F-moves, avoiding the comb route."""
    _check_same_space(src, dst)
    prev = {src.shape: None}
    queue = deque([src.shape])
    while queue:
        s = queue.popleft()
        if s == dst.shape:
            break
        for move, nxt in _neighbour_moves(s):
            if nxt not in prev:
                prev[nxt] = (s, move)
                queue.append(nxt)
    moves = []
    s = dst.shape
    while prev[s] is not None:
        s, move = prev[s]
        moves.append(move)
    return _apply_moves(sys, src, reversed(moves))


# -- braiding ----------------------------------------------------------------


def pair_shape(n: int, i: int) -> Shape:
    """Left comb in which leaves ``i-1`` and ``i`` (0-based) fuse directly."""
    items: list[Shape] = list(range(n))
    items[i - 1 : i + 1] = [(i - 1, i)]
    acc = items[0]
    for x in items[1:]:
        acc = (acc, x)
    return acc


def _find_pair(t: FusionTree, p: int, path=()) -> tuple[int, ...]:
    if isinstance(t, Leaf):
        raise LookupError
    if isinstance(t.left, Leaf) and isinstance(t.right, Leaf) and t.left.pos == p:
        return path
    try:
        return _find_pair(t.left, p, path + (0,))
    except LookupError:
        return _find_pair(t.right, p, path + (1,))


def _r_move(sys: FusionSystem, basis: FusionBasis, i: int, sign: int) -> UnitaryBlockMap:
    labels = list(basis.leaf_labels)
    labels[i - 1], labels[i] = labels[i], labels[i - 1]
    target = build_basis(sys, basis.shape, labels, basis.root_filter)
    M = np.zeros((len(target), len(basis)), dtype=complex)
    path = None
    for j, t in enumerate(basis.vectors):
        if path is None:
            path = _find_pair(t, i - 1)
        node = _subtree(t, path)
        a, b, c, mu = node.left.label, node.right.label, node.charge, node.mult
        if sign == 1:
            phase = sys.r_phases(a, b, c)[mu]
        else:
            phase = sys.r_inverse_phases(a, b, c)[mu]
        new = Node(Leaf(i - 1, b), Leaf(i, a), c, mu)
        M[target.index[_replace_subtree(t, path, new)], j] = phase
    return UnitaryBlockMap(basis, target, M)


@lru_cache(maxsize=16384)
def _generator(sys, shape, labels, root, i, sign) -> UnitaryBlockMap:
    basis = build_basis(sys, shape, labels, root)
    n = len(labels)
    ps = pair_shape(n, i)
    to_pair = basis_change(sys, basis, build_basis(sys, ps, labels, root))
    r = _r_move(sys, to_pair.target, i, sign)
    back = basis_change(sys, r.target, build_basis(sys, shape, r.target.leaf_labels, root))
    return UnitaryBlockMap(basis, back.target, back.matrix @ r.matrix @ to_pair.matrix)


def braid_generator_map(sys: FusionSystem, basis: FusionBasis, i: int, sign: int = 1) -> UnitaryBlockMap:
    """Action of ``σ_i^{sign}``; the target basis has leaves ``i, i+1`` exchanged."""
    if not 1 <= i <= basis.n - 1:
        raise ValueError(f"generator index {i} out of range for {basis.n} leaves")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return _generator(sys, basis.shape, basis.leaf_labels, basis.root_filter, i, sign)


def braid_map(sys: FusionSystem, basis: FusionBasis, w: BraidWord) -> UnitaryBlockMap:
    """Action of ``w`` on ``basis``; the rightmost letter acts first."""
    if w.n != basis.n:
        raise ValueError(f"braid on {w.n} strands cannot act on {basis.n} leaves")
    acc = identity_map(basis)
    for i, sign in reversed(w.letters):
        acc = braid_generator_map(sys, acc.target, i, sign) @ acc
    return acc


# -- superselection phases ---------------------------------------------------


def _scalar_blocks(M: np.ndarray, src: FusionBasis, dst: FusionBasis, ident, tol: float) -> dict[str, complex]:
    """Per-charge scalar of ``M`` under the tree identification ``ident``, or raise."""
    phases: dict[str, complex] = {}
    for j, t in enumerate(src.vectors):
        i = dst.index.get(ident(t))
        if i is None:
            raise SpectrumError(f"tree {t} has no counterpart in the target basis")
        z = M[i, j]
        col = M[:, j].copy()
        col[i] = 0.0
        if np.max(np.abs(col), initial=0.0) > tol:
            raise SpectrumError(f"column {t} is not diagonal under the identification")
        q = t.charge
        if q in phases:
            if abs(phases[q] - z) > tol:
                raise SpectrumError(f"charge {q} block is not scalar")
        else:
            if abs(abs(z) - 1.0) > tol:
                raise SpectrumError(f"charge {q} entry is not a phase")
            phases[q] = complex(z)
    return phases


def superselection_spectrum(sys: FusionSystem, basis: FusionBasis, check_vertex_product: bool = True) -> dict[str, complex]:
    """Per-charge phase of the superselection braid ``β_n``.

    ``β_n`` maps the basis to one on the reversed leaf string; that basis is
    re-expressed on the mirrored shape and each tree is paired with its mirror
    image.  Every charge block must then be a scalar multiple of the identity.
    """
    n = basis.n
    M = braid_map(sys, basis, beta(n))
    mirror = build_basis(sys, mirror_shape(basis.shape), M.target.leaf_labels, basis.root_filter)
    B = basis_change(sys, M.target, mirror) @ M
    tol = max(sys.tol, 1e-12)
    phases = _scalar_blocks(B.matrix, basis, mirror, lambda t: mirror_tree(t, n), tol)
    if check_vertex_product:
        for t in basis.vectors:
            if abs(vertex_product(sys, t) - phases[t.charge]) > tol:
                raise SpectrumError(f"vertex product of {t} disagrees with the block phase")
    return phases


def _expected_square(twists: TwistAssignment, labels: Sequence[str], q: str) -> complex:
    denom = 1.0 + 0.0j
    for x in labels:
        denom *= twists[x]
    return twists[q] / denom


def verify_pure_square(sys: FusionSystem, basis: FusionBasis, twists: TwistAssignment | None = None) -> bool:
    """``β_n²`` acts on each charge block as ``θ_Q / Π θ_{q_i}``."""
    twists = twists or solve_twists(sys)
    M = braid_map(sys, basis, power(beta(basis.n), 2))
    want = np.diag([_expected_square(twists, basis.leaf_labels, t.charge) for t in basis.vectors])
    if M.matrix.size == 0:
        return True
    return bool(np.max(np.abs(M.matrix - want)) <= max(sys.tol, 1e-12))


@dataclass
class ExchangeReport:
    """Observed and predicted scalars of the composite exchange per ``(x, y, Q)``."""

    k: int
    l: int
    single: dict = field(default_factory=dict)
    inverse: dict = field(default_factory=dict)
    double: dict = field(default_factory=dict)
    predicted: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors


def _block_comb(k: int, offset: int) -> Shape:
    return left_comb(k, offset)


def composite_exchange_report(sys: FusionSystem, leaf_labels: Sequence[str], k: int, l: int) -> ExchangeReport:
    labels = tuple(leaf_labels)
    n = len(labels)
    if k < 1 or l < 1 or k + l != n:
        raise ValueError(f"need k, l >= 1 with k + l = {n}")
    tol = max(sys.tol, 1e-12)
    rep = ExchangeReport(k, l)
    full = superselection_spectrum(sys, build_basis(sys, left_comb(n), labels))
    ux = superselection_spectrum(sys, build_basis(sys, left_comb(k), labels[:k]))
    uy = superselection_spectrum(sys, build_basis(sys, left_comb(l), labels[k:]))

    src = build_basis(sys, (_block_comb(k, 0), _block_comb(l, k)), labels)
    swapped = labels[k:] + labels[:k]
    dst = build_basis(sys, (_block_comb(l, 0), _block_comb(k, l)), swapped)

    def ident(t):
        return Node(shift_tree(t.right, -k), shift_tree(t.left, l), t.charge, t.mult)

    def key(t):
        return (t.left.charge, t.right.charge, t.charge)

    for t in src.vectors:
        x, y, q = key(t)
        rep.predicted[(x, y, q)] = full[q] / (ux[x] * uy[y])

    for word, store, conj in ((t_braid(k, l), rep.single, False), (u_braid(k, l), rep.inverse, True)):
        M = braid_map(sys, src, word)
        X = (basis_change(sys, M.target, dst) @ M).matrix
        for j, t in enumerate(src.vectors):
            i = dst.index[ident(t)]
            col = X[:, j].copy()
            z = col[i]
            col[i] = 0.0
            pred = rep.predicted[key(t)]
            pred = np.conj(pred) if conj else pred
            store[key(t)] = complex(z)
            if np.max(np.abs(col), initial=0.0) > tol or abs(z - pred) > tol:
                rep.errors.append((str(word), str(t)))

    D = braid_map(sys, src, compose(t_braid(l, k), t_braid(k, l))).matrix
    for j, t in enumerate(src.vectors):
        col = D[:, j].copy()
        z = col[j]
        col[j] = 0.0
        rep.double[key(t)] = complex(z)
        if np.max(np.abs(col), initial=0.0) > tol or abs(z - rep.single[key(t)] ** 2) > tol:
            rep.errors.append(("double", str(t)))
    return rep


def verify_composite_exchange(sys: FusionSystem, leaf_labels: Sequence[str], k: int, l: int) -> bool:
    """Exchanging a block of ``k`` leaves past ``l`` leaves acts as ``e^{i(u_Q-u_x-u_y)}``."""
    return composite_exchange_report(sys, leaf_labels, k, l).passed


# -- uniqueness --------------------------------------------------------------


def _flip_permutation(shape: Shape, flips: frozenset) -> tuple[int, ...]:
    n = shape_size(shape)
    probe = _label_shape_tree(shape)
    flipped = flip_tree(probe, flips)
    out = [0] * n
    for leaf in tree_leaves(flipped):
        out[int(leaf.label)] = leaf.pos
    return tuple(out)


def _label_shape_tree(shape: Shape) -> FusionTree:
    if isinstance(shape, int):
        return Leaf(shape, str(shape))
    return Node(_label_shape_tree(shape[0]), _label_shape_tree(shape[1]), "", 0)


def realizing_flips(shape: Shape, perm: Sequence[int]) -> frozenset | None:
    """The vertex set whose flips move leaf ``j`` to ``perm[j]`` (0-based), if any."""
    paths = _vertex_paths(shape)
    target = tuple(perm)
    for r in range(len(paths) + 1):
        for combo in itertools.combinations(paths, r):
            flips = frozenset(combo)
            if _flip_permutation(shape, flips) == target:
                return flips
    return None


def _flip_shape(shape: Shape, flips: frozenset) -> Shape:
    return tree_shape(flip_tree(_label_shape_tree(shape), flips))


def _sector_phases(sys, w: BraidWord, shape: Shape, flips, labels) -> dict[str, complex] | None:
    basis = build_basis(sys, shape, labels)
    if not len(basis):
        return {}
    M = braid_map(sys, basis, w)
    dst = build_basis(sys, _flip_shape(shape, flips), M.target.leaf_labels)
    X = (basis_change(sys, M.target, dst) @ M).matrix
    try:
        return _scalar_blocks(X, basis, dst, lambda t: flip_tree(t, flips), max(sys.tol, 1e-12))
    except SpectrumError:
        return None


def is_sector_resolving(systems: Sequence[FusionSystem], w: BraidWord) -> bool:
    """``w`` acts on every fusion space as a charge-only phase, after relabelling leaves by its permutation."""
    n = w.n
    perm = permutation(w)
    perm0 = tuple(perm(j + 1) - 1 for j in range(n))
    shapes = enumerate_shapes(n)
    flips = {}
    for s in shapes:
        f = realizing_flips(s, perm0)
        if f is None:
            return False
        flips[s] = f
    for sys in systems:
        tol = max(sys.tol, 1e-12)
        seen: dict = {}
        for labels in itertools.product(sys.labels, repeat=n):
            for s in shapes:
                ph = _sector_phases(sys, w, s, flips[s], labels)
                if ph is None:
                    return False
                ref = seen.setdefault(tuple(sorted(labels)), ph)
                if ref.keys() != ph.keys() or any(abs(ref[q] - ph[q]) > tol for q in ph):
                    return False
    return True


def uniqueness_search(
    systems: FusionSystem | Iterable[FusionSystem], n: int, max_len: int, word_cap: int = UNIQUENESS_WORD_CAP
) -> set[BraidWord]:
    """Primitive nontrivial braids of length at most ``max_len`` that resolve every sector.

    A braid that is a proper power ``h^k`` (``|k| >= 2``) of another passing braid
    is dropped.  The search is exhaustive up to the length bound only.
    """
    systems = [systems] if isinstance(systems, FusionSystem) else list(systems)
    if n < 1 or max_len < 0:
        raise ValueError("need n >= 1 and max_len >= 0")
    count = sum((2 * (n - 1)) ** k for k in range(max_len + 1))
    if count > word_cap:
        raise OverflowError(f"{count} words exceed the search cap {word_cap}")
    reps: dict = {}
    for w in words_up_to(n, max_len):
        reps.setdefault(normal_form(w), w)
    passing = []
    for nf, w in reps.items():
        if nf.inf == 0 and not nf.factors:
            continue
        if is_sector_resolving(systems, w):
            passing.append(w)
    primitive = []
    for g in passing:
        proper_power = any(
            equal_in_group(power(h, k), g)
            for h in passing
            if not equal_in_group(h, g)
            for k in range(-len(g), len(g) + 1)
            if abs(k) >= 2
        )
        if not proper_power:
            primitive.append(g)
    return {canonical_word(g) for g in primitive}


def clear_caches() -> None:
    _cached_basis.cache_clear()
    _cached_change.cache_clear()
    _generator.cache_clear()
