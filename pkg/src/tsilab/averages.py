"""Admissible averaging trees: construction, shrinking, subtrees, verification.

A tree has levels M (root) down to 0 (leaves, a subsequence of the base
block sequence).  Each internal node is the arithmetic average of its
immediate successors, those successors form a 1-admissible family with
respect to the base enumeration, and the average lengths grow rapidly: node
i at level j averages k > 2 * N^j_{i-1} / eps^j_i many successors, where
N^j_{i-1} is the previous same-level node's maximum coordinate (N^j_0 = N).
With the refine flag the stronger bound k > 6 * (N^j_{i-1})^2 / (theta_1 *
eps^j_i) is enforced; the sharper growth is what the tree-estimate checks
require.

Construction is a deterministic left-to-right depth-first sweep: every node
takes the minimal admissible length (floor(bound) + 1) and leaves are drawn
consecutively from the base as far left as admissibility allows, so a given
parameter set always produces the same tree.  Per-level epsilon tables are
clamped nonincreasing, which the re-indexing of lengths inside subtrees
relies on.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from . import schreier
from .budget import BudgetExceededError
from .rationals import parse_ratio, ratio_str
from .thetaseq import ThetaSeq
from .vectors import FinVec, interval_splits


@dataclass(frozen=True)
class BlockBasis:
    """A lazily extendable normalized block sequence.

    kind "unit" yields e_{s+shift}; kind "explicit" serves a finite list of
    prepared blocks (handy for shrink tests), erroring past its end.
    """

    kind: str = "unit"
    shift: int = 0
    blocks: tuple[FinVec, ...] = ()

    def vec(self, s: int) -> FinVec:
        if s < 1:
            raise ValueError("base indices are 1-based")
        if self.kind == "unit":
            return FinVec.unit(s + self.shift)
        if s > len(self.blocks):
            raise BudgetExceededError(
                f"explicit base exhausted: index {s} > {len(self.blocks)}")
        return self.blocks[s - 1]

    def base_id(self) -> str:
        if self.kind == "unit":
            return f"unit+{self.shift}" if self.shift else "unit"
        return f"explicit[{len(self.blocks)}]"


def parse_basis(spec) -> BlockBasis:
    if isinstance(spec, BlockBasis):
        return spec
    if spec in (None, "unit"):
        return BlockBasis()
    if isinstance(spec, str) and spec.startswith("unit+"):
        return BlockBasis(shift=int(spec[5:]))
    raise ValueError(f"unknown base spec {spec!r}")


@dataclass
class AvgNode:
    level: int
    index: int                      # 1-based position within its level
    vec: FinVec
    k: Optional[int] = None         # average length (None for leaves)
    eps: Optional[Fraction] = None  # the epsilon actually used
    child_span: Optional[tuple[int, int]] = None  # I^j_i in level j-1, 1-based
    base_range: tuple[int, int] = (0, 0)          # ran w.r.t. the base enumeration

    @property
    def ran(self) -> tuple[int, int]:
        r = self.vec.ran
        assert r is not None
        return r


@dataclass
class AvgTree:
    M: int
    N: int
    refine: bool
    base: BlockBasis
    levels: list[list[AvgNode]]     # levels[j], left to right
    maxcoords: list[list[int]]      # maxcoords[j] = [N, N^j_1, N^j_2, ...]
    space_id: Optional[str] = None

    @property
    def root(self) -> AvgNode:
        return self.levels[self.M][0]

    def children(self, node: AvgNode) -> list[AvgNode]:
        if node.level == 0:
            return []
        lo, hi = node.child_span
        return self.levels[node.level - 1][lo - 1 : hi]

    def nodes(self):
        for level in reversed(self.levels):
            yield from level

    def eps_total(self) -> Fraction:
        """Sum of eps^j_i over all internal nodes."""
        return sum((nd.eps for level in self.levels[1:] for nd in level), Fraction(0))

    def maxcoord_before(self, node: AvgNode) -> int:
        """N^j_{i-1} for the node (N^j_0 = N)."""
        return self.maxcoords[node.level][node.index - 1]

    def leaf_weights(self) -> list[tuple[AvgNode, Fraction]]:
        """The convex weights a_s with root = sum a_s x^0_s."""
        out: list[tuple[AvgNode, Fraction]] = []

        def walk(node: AvgNode, w: Fraction):
            if node.level == 0:
                out.append((node, w))
                return
            for ch in self.children(node):
                walk(ch, w / node.k)

        walk(self.root, Fraction(1))
        return out

    # -- serialisation ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "M": self.M,
            "N": self.N,
            "refine": self.refine,
            "base": self.base.base_id(),
            "space_id": self.space_id,
            "maxcoords": self.maxcoords,
            "levels": [
                [
                    {
                        "level": nd.level,
                        "index": nd.index,
                        "vec": nd.vec.to_json(),
                        "k": nd.k,
                        "eps": ratio_str(nd.eps) if nd.eps is not None else None,
                        "child_span": list(nd.child_span) if nd.child_span else None,
                        "base_range": list(nd.base_range),
                    }
                    for nd in level
                ]
                for level in self.levels
            ],
        }

    @staticmethod
    def from_json(obj) -> "AvgTree":
        if isinstance(obj, str):
            obj = json.loads(obj)
        levels = [
            [
                AvgNode(
                    level=nd["level"],
                    index=nd["index"],
                    vec=FinVec.from_json(nd["vec"]),
                    k=nd["k"],
                    eps=Fraction(nd["eps"]) if nd["eps"] else None,
                    child_span=tuple(nd["child_span"]) if nd["child_span"] else None,
                    base_range=tuple(nd["base_range"]),
                )
                for nd in level
            ]
            for level in obj["levels"]
        ]
        return AvgTree(
            M=obj["M"], N=obj["N"], refine=obj["refine"],
            base=parse_basis(obj["base"]), levels=levels,
            maxcoords=[list(m) for m in obj["maxcoords"]],
            space_id=obj.get("space_id"),
        )


# ---------------------------------------------------------------------------
# construction


def _eps_resolver(eps) -> Callable[[int, int], Fraction]:
    if callable(eps):
        return lambda j, i: parse_ratio(eps(j, i))
    if isinstance(eps, dict):
        table = {k: parse_ratio(v) for k, v in eps.items()}
        return lambda j, i: table.get((j, i), table.get(j, next(iter(table.values()))))
    value = parse_ratio(eps)
    return lambda j, i: value


def construct_average(base, M: int, N: int, eps, refine: bool = False,
                      space: Optional[ThetaSeq] = None,
                      support_budget: int = 3000) -> AvgTree:
    """Build an (M, (eps^j_i), N) admissible averaging tree, minimal lengths.

    Every node takes k = floor(growth bound) + 1 and pulls base vectors as
    far left as 1-admissibility permits, so trees are reproducible.  If the
    projected leaf count overruns `support_budget` the construction aborts
    with the projected size (the caller reports the run as inconclusive).
    """
    if M < 0 or N < 1:
        raise ValueError("need M >= 0 and N >= 1")
    if refine and space is None:
        raise ValueError("the refined growth bound needs the space (theta_1)")
    basis = parse_basis(base)
    eps_fn = _eps_resolver(eps)

    levels: list[list[AvgNode]] = [[] for _ in range(M + 1)]
    maxcoords: list[list[int]] = [[N] for _ in range(M + 1)]
    eps_prev: list[Optional[Fraction]] = [None] * (M + 1)
    state = {"base_ptr": 1}

    def next_leaf() -> AvgNode:
        s = state["base_ptr"]
        state["base_ptr"] = s + 1
        vec = basis.vec(s)
        node = AvgNode(level=0, index=len(levels[0]) + 1, vec=vec, base_range=(s, s))
        levels[0].append(node)
        maxcoords[0].append(vec.ran[1])
        return node

    def build(j: int) -> AvgNode:
        if j == 0:
            return next_leaf()
        i = len(levels[j]) + 1
        e = eps_fn(j, i)
        if not 0 < e < 1:
            raise ValueError(f"eps^{j}_{i} = {e} outside (0,1)")
        if eps_prev[j] is not None and e > eps_prev[j]:
            e = eps_prev[j]  # clamp: per-level epsilons nonincreasing
        eps_prev[j] = e
        N_prev = maxcoords[j][-1]
        if refine:
            bound = Fraction(6) * N_prev * N_prev / (space.theta(1) * e)
        else:
            bound = Fraction(2) * N_prev / e
        k = int(bound) + 1
        if j == 1 and len(levels[0]) + k > support_budget:
            raise BudgetExceededError(
                f"projected leaf count exceeds the support budget "
                f"{support_budget} (next average length {k})")
        # 1-admissibility w.r.t. the base: the first descendant leaf must sit
        # at base index >= k
        state["base_ptr"] = max(state["base_ptr"], k)
        first_child_pos = len(levels[j - 1]) + 1
        children = [build(j - 1) for _ in range(k)]
        # children are successive, so their entries concatenate in order
        inv_k = Fraction(1, k)
        vec = FinVec(tuple((idx, c * inv_k)
                           for ch in children for idx, c in ch.vec.entries))
        node = AvgNode(
            level=j, index=i, vec=vec, k=k, eps=e,
            child_span=(first_child_pos, first_child_pos + k - 1),
            base_range=(children[0].base_range[0], children[-1].base_range[1]),
        )
        levels[j].append(node)
        maxcoords[j].append(vec.ran[1])
        return node

    build(M)
    return AvgTree(M=M, N=N, refine=refine, base=basis, levels=levels,
                   maxcoords=maxcoords,
                   space_id=space.space_id() if space else None)


# ---------------------------------------------------------------------------
# minimal shrinking


def minimal_shrink(intervals: Sequence[tuple[int, int]],
                   block_rans: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    """Remove from each interval the ranges of blocks it splits.

    Returns the nonempty remainders in order; no output interval splits any
    block.  Since blocks are successive, an interval can split at most the
    two blocks covering its endpoints, so each remainder is an interval.
    """
    schreier.check_intervals(intervals)
    out: list[tuple[int, int]] = []
    for a, b in intervals:
        lo, hi = a, b
        for r in block_rans:
            if interval_splits((a, b), r):
                if r[0] <= lo <= r[1]:
                    lo = r[1] + 1
                if r[0] <= hi <= r[1]:
                    hi = r[0] - 1
        if lo <= hi:
            assert not any(interval_splits((lo, hi), r) for r in block_rans)
            out.append((lo, hi))
    return out


# ---------------------------------------------------------------------------
# subtrees


def subtree(tree: AvgTree, node: AvgNode, k: int,
            F: Optional[tuple[int, int]] = None,
            strict: bool = False) -> list[AvgNode]:
    """Nodes of the depth-k subtree below `node` (levels l .. l-k+1).

    strict=True omits the node itself; F (an interval that must not split
    any immediate successor of the node) keeps only descendants with range
    inside F.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if F is not None:
        for ch in tree.children(node):
            if interval_splits(F, ch.ran):
                raise ValueError(f"F={F} splits an immediate successor of the node")
    floor_level = node.level - k + 1
    out: list[AvgNode] = []
    if not strict:
        out.append(node)

    def walk(nd: AvgNode):
        for ch in tree.children(nd):
            if ch.level < floor_level:
                continue
            if F is None or (F[0] <= ch.ran[0] and ch.ran[1] <= F[1]):
                out.append(ch)
            walk(ch)

    if node.level > floor_level:
        walk(node)
    return out


def eps_penalty(tree: AvgTree, nodes: Sequence[AvgNode]) -> Fraction:
    """Sum of eps^k_s / N^k_{s-1} over the internal nodes of a subtree."""
    total = Fraction(0)
    for nd in nodes:
        if nd.level >= 1:
            total += nd.eps / tree.maxcoord_before(nd)
    return total


def eps_sum(tree: AvgTree, nodes: Sequence[AvgNode]) -> Fraction:
    return sum((nd.eps for nd in nodes if nd.level >= 1), Fraction(0))


# ---------------------------------------------------------------------------
# verification of the defining properties


def verify_remark_properties(tree: AvgTree, evaluator, seed: int = 0,
                             rounds: int = 2, max_intervals: int = 6) -> dict:
    """Check the three defining consequences of the growth conditions.

    (1) the root is a convex combination of base vectors (exact weights);
    (2) the root's base support lies in S_M;
    (3) for adversarially sampled interval systems (one per internal node,
        endpoints deliberately splitting children), the total norm lost to
        minimal shrinking stays strictly below the sum of the epsilons.
    All comparisons are exact.
    """
    failures: list[str] = []

    # (1) convex combination
    weights = tree.leaf_weights()
    total_w = sum((w for _, w in weights), Fraction(0))
    if total_w != 1 or any(w <= 0 for _, w in weights):
        failures.append("weights: not a convex combination")
    recombined = FinVec()
    for leaf, w in weights:
        recombined = recombined + leaf.vec.scale(w)
    if recombined != tree.root.vec:
        failures.append("weights: recombination does not reproduce the root")

    # (2) M-admissibility w.r.t. the base
    base_supp = tuple(leaf.base_range[0] for leaf, _ in weights)
    if not schreier.is_member(base_supp, tree.M):
        failures.append(f"root base support not in S_{tree.M}")

    # structural invariants: growth bounds and 1-admissible child families
    for level in tree.levels[1:]:
        for nd in level:
            N_prev = tree.maxcoord_before(nd)
            if tree.refine:
                ok = nd.k * evaluator.theta(1) * nd.eps > 6 * N_prev * N_prev
            else:
                ok = nd.k * nd.eps > 2 * N_prev
            if not ok:
                failures.append(f"growth bound fails at level {nd.level} node {nd.index}")
            mins = tuple(ch.base_range[0] for ch in tree.children(nd))
            if not schreier.is_member(mins, 1):
                failures.append(f"children of level {nd.level} node {nd.index} not 1-admissible")

    # (3) shrink-loss bound, sampled adversarially
    rng = random.Random(seed)
    shrink_rounds = []
    for rnd in range(rounds):
        lhs = Fraction(0)
        for level in tree.levels[1:]:
            for nd in level:
                kids = tree.children(nd)
                rans = [ch.ran for ch in kids]
                count = min(tree.maxcoord_before(nd), max_intervals)
                cuts = set()
                for _ in range(2 * count):
                    ch = kids[rng.randrange(len(kids))]
                    a, b = ch.ran
                    cuts.add(rng.randint(a, b))
                cuts = sorted(cuts)[: 2 * count]
                intervals = []
                for a, b in zip(cuts[::2], cuts[1::2]):
                    if intervals and a <= intervals[-1][1]:
                        continue
                    if a <= b:
                        intervals.append((a, b))
                intervals = intervals[:count]
                if not intervals:
                    continue
                for a, b in intervals:
                    rem = minimal_shrink([(a, b)], rans)
                    lost_set = set(range(a, b + 1))
                    for lo2, hi2 in rem:
                        lost_set -= set(range(lo2, hi2 + 1))
                    lost_vec = nd.vec.restrict_set(lost_set)
                    lhs += evaluator.norm(lost_vec)
        rhs = tree.eps_total()
        ok = lhs < rhs if tree.M >= 1 else lhs == 0
        shrink_rounds.append({"round": rnd, "lhs": ratio_str(lhs), "rhs": ratio_str(rhs), "ok": ok})
        if not ok:
            failures.append(f"shrink loss round {rnd}: {lhs} !< {rhs}")

    return {
        "failures": failures,
        "ok": not failures,
        "weights_sum": ratio_str(total_w),
        "base_support": list(base_supp),
        "shrink_rounds": shrink_rounds,
    }
