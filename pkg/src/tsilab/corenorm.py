"""Exact evaluation of the implicit mixed Tsirelson norm and its relatives.

The norm on c00 is the least solution of

    ||x|| = ||x||_inf  v  sup_q sup { theta_q * sum_i ||E_i x|| },

the inner sup running over q-admissible successive interval families.  On a
finitely supported vector it is computed by recursion over interval
restrictions.  Three exact reductions keep the search finite and small:

* interval endpoints may be anchored at support points (shrinking an interval
  to start at a support point raises its minimum, and the families are
  spreading, so admissibility is preserved and values are unchanged); given
  the minima, each interval extends maximally to the next minimum because
  restriction to a larger interval never lowers a norm;
* the single-interval family covering all of supp(x) is dropped: its value
  theta_q * ||x|| is always beaten by ||x|| itself, and dropping it makes the
  recursion terminate;
* levels are truncated: any level-q candidate is at most theta_q * ||x||_l1,
  so once theta_q * ||x||_l1 is no better than the best candidate found, no
  level >= q matters (theta is nonincreasing).  In particular the level cap
  q_max(x) = least q with theta_q * ||x||_l1 <= ||x||_inf is sound.

Two further exact shortcuts serve large structured vectors.  If supp(x) lies
in S_1 (|supp| <= min supp), every family value is at most theta_1 * ||x||_l1
and the all-singleton family attains it, so ||x|| = max(||x||_inf,
theta_1 * ||x||_l1).  Likewise a level-q family search returns ||x||_l1-type
saturation outright whenever supp(x) in S_q.  Remaining large level-1
searches run a chain dynamic program over support positions whose piece
values start as upper bounds (max(||.||_inf, theta_1 * ||.||_l1)) and are
refined to exact values along candidate-optimal chains until the optimum is
certified; ties prefer chains with fewer unrefined pieces, so saturated
optima certify immediately.

All arithmetic is rational; no floating point enters anywhere.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Callable, Optional

from . import budget, schreier
from .rationals import ratio_str
from .thetaseq import ThetaSeq
from .vectors import FinVec

Items = tuple[tuple[int, Fraction], ...]


def _items_of(x: FinVec) -> Items:
    # absolute values: the norm is 1-unconditional, and keys canonicalise that way
    return tuple((i, abs(c)) for i, c in x.entries)


class NormEvaluator:
    """Memoising exact evaluator of one space's norm family.

    Results are deterministic and independent of cache state; the memo maps a
    canonical restricted vector (absolute coefficients, absolute positions) to
    its exact norm, and concurrent idempotent insertion is harmless (equal
    keys always receive equal values), so instances may be shared.
    """

    def __init__(self, space: ThetaSeq, enum_limit: int = 13, support_cap: int = 600):
        space.require_nonincreasing()
        self.space = space
        self.enum_limit = enum_limit
        self.support_cap = support_cap
        self._memo: dict[Items, Fraction] = {}
        self._memo_p: dict[tuple[Items, int], Fraction] = {}

    # ------------------------------------------------------------------ basics

    def theta(self, q: int) -> Fraction:
        return self.space.theta(q)

    @property
    def q_limit(self) -> Optional[int]:
        return self.space.q_limit

    def q_max(self, x: FinVec) -> int:
        """Least q with theta_q * ||x||_l1 <= ||x||_inf (capped for tables)."""
        items = _items_of(x)
        if not items:
            return 1
        l1 = sum(c for _, c in items)
        sup = max(c for _, c in items)
        return self._level_cap(l1, sup)

    def _level_cap(self, l1: Fraction, floor: Fraction) -> int:
        """Least q with theta_q * l1 <= floor; larger levels cannot beat floor."""
        q = 1
        while self.theta(q) * l1 > floor:
            if self.q_limit is not None and q >= self.q_limit:
                return self.q_limit
            q += 1
        return q

    def _useful_levels(self, l1: Fraction, floor: Fraction) -> int:
        """Largest level q with theta_q * l1 > floor (0 if none), capped for tables."""
        q = 0
        while (self.q_limit is None or q < self.q_limit) and self.theta(q + 1) * l1 > floor:
            q += 1
        return q

    # ------------------------------------------------------------------ norms

    def norm(self, x: FinVec) -> Fraction:
        """The implicit norm, exactly.  norm(0) = 0 by convention."""
        return self._norm(_items_of(x))

    def norm_p(self, x: FinVec, p: int) -> Fraction:
        """theta_p * (best p-admissible family sum); ||.||_0 = ||.||."""
        if p < 0:
            raise ValueError("p must be >= 0")
        if p == 0:
            return self.norm(x)
        return self._norm_p(_items_of(x), p)

    def norm_Np(self, x: FinVec, N: int, p: int) -> Fraction:
        """sup of sums of ||E_i x||_p over <= N successive intervals with min >= N."""
        if N < 1:
            raise ValueError("N must be >= 1")
        items = tuple(e for e in _items_of(x) if e[0] >= N)
        if not items:
            return Fraction(0)
        value, _ = self._chain_capped(items, N, self._piece_fn(p), p)
        return value

    def norm_SNp(self, x: FinVec, N: int, p: int) -> Fraction:
        """sup of sums of ||E_i x||_p over S_N-admissible interval families."""
        if N < 0:
            raise ValueError("N must be >= 0")
        if N == 0:
            # S_0 families are single intervals; ||.||_p is monotone under
            # interval restriction, so the whole range is optimal
            return self.norm_p(x, p)
        items = _items_of(x)
        if not items:
            return Fraction(0)
        return self._family_best(items, N, self._piece_fn(p), p)

    # ------------------------------------------------------------- the recursion

    def _piece_fn(self, p: int) -> Callable[[Items], Fraction]:
        if p == 0:
            return self._norm
        return lambda items: self._norm_p(items, p)

    @staticmethod
    def _canon(items: Items) -> tuple[Items, Fraction]:
        """Scale the leading coefficient to 1 (the norm is homogeneous)."""
        c0 = items[0][1]
        if c0 == 1:
            return items, c0
        return tuple((i, c / c0) for i, c in items), c0

    def _norm(self, items: Items) -> Fraction:
        if not items:
            return Fraction(0)
        items, scale = self._canon(items)
        cached = self._memo.get(items)
        if cached is not None:
            return cached * scale
        n = len(items)
        if n > self.support_cap:
            raise budget.BudgetExceededError(
                f"support of {n} points exceeds the evaluator cap {self.support_cap}")
        sup = max(c for _, c in items)
        if n == 1:
            self._memo[items] = sup
            return sup * scale
        l1 = sum(c for _, c in items)
        if n <= items[0][0]:
            # supp in S_1: every family value is <= theta_1 * l1 and the
            # all-singleton family attains it
            best = max(sup, self.theta(1) * l1)
        elif n <= self.enum_limit:
            best = self._norm_small(items, sup, l1)
        else:
            best = self._norm_big(items, sup, l1)
        self._memo[items] = best
        return best * scale

    def _norm_small(self, items: Items, sup: Fraction, l1: Fraction) -> Fraction:
        n = len(items)
        idxs = tuple(i for i, _ in items)
        cap = self._useful_levels(l1, sup)  # levels beyond cap cannot beat sup
        best = sup
        if cap < 1:
            return best
        budget.checkpoint()
        for mask in range(2, 1 << n):  # mask 1 is the full single-interval cover
            positions = [t for t in range(n) if mask >> t & 1]
            rank = schreier.member_rank(tuple(idxs[t] for t in positions), cap)
            if rank is None:
                continue
            total = Fraction(0)
            bounds = positions + [n]
            for a, b in zip(bounds, bounds[1:]):
                total += self._norm(items[a:b])
            cand = self.theta(rank) * total
            if cand > best:
                best = cand
        return best

    def _norm_big(self, items: Items, sup: Fraction, l1: Fraction) -> Fraction:
        best = sup
        amax = None  # unconstrained chain optimum: bounds every level from above
        q = 1
        while (self.q_limit is None or q <= self.q_limit) and self.theta(q) * l1 > best:
            if q >= 2:
                if amax is None:
                    n = len(items)
                    caps = [n - t for t in range(n)]
                    amax, _ = self._chain_dp(items, caps, self._norm, 0, True)
                if self.theta(q) * amax <= best:
                    break
            A = self._family_best(items, q, self._norm, 0, exclude_full=True)
            cand = self.theta(q) * A
            if cand > best:
                best = cand
            q += 1
        return best

    def _norm_p(self, items: Items, p: int) -> Fraction:
        if not items:
            return Fraction(0)
        items, scale = self._canon(items)
        key = (items, p)
        cached = self._memo_p.get(key)
        if cached is not None:
            return cached * scale
        theta_p = self.theta(p)  # raises for table spaces beyond their range
        A = self._family_best(items, p, self._norm, 0)
        value = theta_p * A
        self._memo_p[key] = value
        return value * scale

    # ------------------------------------------------- family optimisation engines

    def _family_best(self, items: Items, level: int,
                     piece_fn: Callable[[Items], Fraction],
                     piece_level: int, exclude_full: bool = False) -> Fraction:
        """Best sum of piece values over S_level-admissible min-chains."""
        if len(items) <= self.enum_limit:
            return self._family_enum(items, level, piece_fn, exclude_full)
        return self._family_big(items, level, piece_fn, piece_level, exclude_full)

    def _family_enum(self, items: Items, level: int,
                     piece_fn: Callable[[Items], Fraction],
                     exclude_full: bool) -> Fraction:
        n = len(items)
        idxs = tuple(i for i, _ in items)
        best = Fraction(0)
        budget.checkpoint()
        start = 2 if exclude_full else 1
        for mask in range(start, 1 << n):
            positions = [t for t in range(n) if mask >> t & 1]
            if not schreier.is_member(tuple(idxs[t] for t in positions), level):
                continue
            total = Fraction(0)
            bounds = positions + [n]
            for a, b in zip(bounds, bounds[1:]):
                total += piece_fn(items[a:b])
            if total > best:
                best = total
        return best

    def _family_big(self, items: Items, level: int,
                    piece_fn: Callable[[Items], Fraction],
                    piece_level: int, exclude_full: bool) -> Fraction:
        supp = tuple(i for i, _ in items)
        if schreier.is_member(supp, level):
            # saturated: piece values are bounded by their l1 mass, so the
            # all-singleton family is optimal
            return sum(piece_fn(items[t : t + 1]) for t in range(len(items)))
        if level == 1:
            n = len(items)
            caps = [min(supp[t], n - t) for t in range(n)]
            value, _ = self._chain_dp(items, caps, piece_fn, piece_level, exclude_full)
            return value
        return self._span_best(items, level, piece_fn, exclude_full)

    def _span_best(self, items: Items, level: int,
                   piece_fn: Callable[[Items], Fraction],
                   exclude_full: bool) -> Fraction:
        """Generic S_level chain optimum via span decomposition.

        An S_q min-set splits into at most min(F) successive S_{q-1} blocks;
        each block's pieces live between its first min and the next block's
        first min.  D(q, t, u) is the best S_q chain whose first min sits at
        position t with coverage up to u; blocks recurse one level down.
        Slower than the level-1 DP (exact piece values throughout) but only
        reached when the saturation shortcut fails.

        The excluded full cover is exactly the chain whose single piece is
        [0, n); that piece gets a sentinel value below every real one, and it
        can never occur inside a sum (sums always split before the end).
        """
        n = len(items)
        idxs = tuple(i for i, _ in items)
        sentinel = Fraction(-1)

        def pf(t: int, u: int) -> Fraction:
            if exclude_full and t == 0 and u == n:
                return sentinel
            return piece_fn(items[t:u])

        Dmemo: dict[tuple[int, int, int], Fraction] = {}

        def D(q: int, t: int, u: int) -> Fraction:
            if q == 0:
                return pf(t, u)
            key = (q, t, u)
            got = Dmemo.get(key)
            if got is not None:
                return got
            budget.checkpoint()
            cap = min(idxs[t], u - t)
            # best split of [t, u) into <= cap spans, each an S_{q-1} block
            g: dict[tuple[int, int], Fraction] = {}

            def best_from(v: int, r: int) -> Fraction:
                gkey = (v, r)
                res = g.get(gkey)
                if res is not None:
                    return res
                res = D(q - 1, v, u)
                if r >= 2:
                    for w in range(v + 1, u):
                        cand = D(q - 1, v, w) + best_from(w, r - 1)
                        if cand > res:
                            res = cand
                g[gkey] = res
                return res

            out = best_from(t, cap)
            Dmemo[key] = out
            return out

        best = Fraction(0)
        for t in range(n):
            cand = D(level, t, n)
            if cand > best:
                best = cand
        return best

    def _build_piece_tables(self, items: Items, level: int):
        """Upper-bound tables for pieces [t, u), O(1) per cell via prefix sums.

        level 0 (full-norm pieces): UB = max(sup, theta_1 * l1), exact when
        the piece lies in S_1 (saturation).  level p >= 1: UB = theta_p * l1,
        exact when the piece support lies in S_p.
        """
        n = len(items)
        idxs = [i for i, _ in items]
        prefix = [Fraction(0)]
        for _, c in items:
            prefix.append(prefix[-1] + c)
        V: list[list] = [[None] * (n + 1) for _ in range(n)]
        EX: list[list[bool]] = [[False] * (n + 1) for _ in range(n)]
        if level == 0:
            th1 = self.theta(1)
            for t in range(n):
                m = Fraction(0)
                cap_len = idxs[t]
                Vt, Et = V[t], EX[t]
                for u in range(t + 1, n + 1):
                    c = items[u - 1][1]
                    if c > m:
                        m = c
                    v = th1 * (prefix[u] - prefix[t])
                    Vt[u] = v if v > m else m
                    Et[u] = (u - t) <= cap_len
        else:
            th = self.theta(level)
            for t in range(n):
                cap_len = idxs[t]
                Vt, Et = V[t], EX[t]
                for u in range(t + 1, n + 1):
                    Vt[u] = th * (prefix[u] - prefix[t])
                    Et[u] = (u - t) <= cap_len or schreier.is_member(
                        tuple(idxs[t:u]), level)
        return V, EX

    def _chain_capped(self, items: Items, cap: int,
                      piece_fn: Callable[[Items], Fraction],
                      piece_level: int) -> tuple[Fraction, list[int]]:
        """Best chain with at most `cap` minima (no family-shape constraint)."""
        n = len(items)
        if n <= self.enum_limit:
            best = Fraction(0)
            chain: list[int] = []
            for mask in range(1, 1 << n):
                positions = [t for t in range(n) if mask >> t & 1]
                if len(positions) > cap:
                    continue
                total = Fraction(0)
                bounds = positions + [n]
                for a, b in zip(bounds, bounds[1:]):
                    total += piece_fn(items[a:b])
                if total > best:
                    best, chain = total, positions
            return best, chain
        caps = [min(cap, n - t) for t in range(n)]
        return self._chain_dp(items, caps, piece_fn, piece_level, False)

    def _chain_dp(self, items: Items, caps: list[int],
                  piece_fn: Callable[[Items], Fraction],
                  piece_level: int,
                  exclude_full: bool) -> tuple[Fraction, list[int]]:
        """Exact chain optimum via upper-bound refinement.

        Piece values start as certified upper bounds (flagged exact where
        the bound is provably attained); the DP optimum is recomputed and the
        pieces of the winning chain are refined to exact values until the
        winner is fully certified.  Since upper bounds never understate a chain, the first
        fully exact winner is the true optimum.  Ties prefer fewer unrefined
        pieces, so saturated optima certify without any refinement.

        Each DP round runs over lcm-scaled integers; the scaling is exact, so
        no precision is lost anywhere.
        """
        n = len(items)
        V, EX = self._build_piece_tables(items, piece_level)

        rmax = max(caps)
        while True:
            budget.checkpoint()
            # exact integer scaling of the current piece values
            denom = 1
            for t in range(n):
                for u in range(t + 1, n + 1):
                    denom = denom * V[t][u].denominator // math.gcd(denom, V[t][u].denominator)
            Vi = [[0] * (n + 1) for _ in range(n)]
            for t in range(n):
                row, rowi = V[t], Vi[t]
                for u in range(t + 1, n + 1):
                    f = row[u]
                    rowi[u] = f.numerator * (denom // f.denominator)

            # h[r][t]: best (value, -#unrefined pieces) over chains starting
            # at position t with at most r minima; choice[r][t] records the
            # continuation (None = stop, the last piece runs to the end)
            h: list[list[tuple[int, int]]] = [[(0, 0)] * n for _ in range(rmax + 1)]
            choice: list[list[Optional[int]]] = [[None] * n for _ in range(rmax + 1)]
            for t in range(n):
                h[1][t] = (Vi[t][n], 0 if EX[t][n] else -1)
            for r in range(2, rmax + 1):
                changed = False
                h_prev, h_cur, choice_cur = h[r - 1], h[r], choice[r]
                for t in range(n):
                    best = h[1][t]
                    pick: Optional[int] = None
                    vrow, exrow = Vi[t], EX[t]
                    for u in range(t + 1, n):
                        sv, sub = h_prev[u]
                        cand = (vrow[u] + sv, (0 if exrow[u] else -1) + sub)
                        if cand > best:
                            best, pick = cand, u
                    h_cur[t] = best
                    choice_cur[t] = pick
                    if best != h_prev[t]:
                        changed = True
                if not changed:
                    for rr in range(r + 1, rmax + 1):
                        h[rr] = h[r]
                        choice[rr] = choice[r]
                    break

            best_val = None
            best_start = None
            for t in range(n):
                r = caps[t]
                if r < 1:
                    continue
                if exclude_full and t == 0:
                    # the immediate-stop chain {0} is the excluded full cover;
                    # force at least one cut (needs capacity >= 2)
                    if r < 2:
                        continue
                    for u in range(1, n):
                        sv, sub = h[r - 1][u]
                        cand = (Vi[0][u] + sv, (0 if EX[0][u] else -1) + sub)
                        if best_val is None or cand > best_val:
                            best_val, best_start = cand, (0, u, r - 1)
                elif best_val is None or h[r][t] > best_val:
                    best_val, best_start = h[r][t], (t, None, r)

            if best_start is None:
                return Fraction(0), []

            chain = self._reconstruct(choice, best_start)
            pieces = list(zip(chain, chain[1:] + [n]))
            pending = [(a, b) for a, b in pieces if not EX[a][b]]
            if not pending:
                total = sum((V[a][b] for a, b in pieces), Fraction(0))
                return total, chain
            for a, b in pending:
                V[a][b], EX[a][b] = piece_fn(items[a:b]), True

    @staticmethod
    def _reconstruct(choice, best_start) -> list[int]:
        t, forced, r = best_start
        chain = [t]
        if forced is not None:
            chain.append(forced)
            t = forced
        while r >= 2:
            u = choice[r][t]
            if u is None:
                break
            chain.append(u)
            t, r = u, r - 1
        return chain

    # ---------------------------------------------------------------- witnesses

    def witness(self, x: FinVec) -> dict:
        """An optimising partition tree; recomputing it reproduces norm(x)."""
        return self._wit(_items_of(x))

    def _wit(self, items: Items) -> dict:
        value = self._norm(items)
        node = {"value": ratio_str(value)}
        if not items:
            node["kind"] = "zero"
            return node
        sup = max(c for _, c in items)
        if value == sup:
            node["kind"] = "sup"
            return node
        n = len(items)
        idxs = tuple(i for i, _ in items)
        found = self._wit_family(items, value)
        if found is None:
            # only reachable when the optimum came from a large level >= 2
            # span search, whose chains are not recorded
            raise budget.BudgetExceededError(
                "witness extraction for this optimum exceeds the recorded search")
        rank, positions = found
        bounds = positions + [n]
        node["kind"] = "split"
        node["q"] = rank
        node["intervals"] = [[idxs[a], idxs[b - 1]] for a, b in zip(bounds, bounds[1:])]
        node["children"] = [self._wit(items[a:b]) for a, b in zip(bounds, bounds[1:])]
        return node

    def _wit_family(self, items: Items, value: Fraction):
        n = len(items)
        idxs = tuple(i for i, _ in items)
        l1 = sum(c for _, c in items)
        if n <= items[0][0] and value == self.theta(1) * l1:
            return 1, list(range(n))
        if n <= self.enum_limit:
            sup = max(c for _, c in items)
            cap = self._useful_levels(l1, sup)
            for mask in range(2, 1 << n):
                positions = [t for t in range(n) if mask >> t & 1]
                rank = schreier.member_rank(tuple(idxs[t] for t in positions), max(cap, 1))
                if rank is None:
                    continue
                total = Fraction(0)
                bounds = positions + [n]
                for a, b in zip(bounds, bounds[1:]):
                    total += self._norm(items[a:b])
                if self.theta(rank) * total == value:
                    return rank, positions
            return None
        q = 1
        while self.q_limit is None or q <= self.q_limit:
            if self.theta(q) * l1 < value:
                return None
            supp = idxs
            if schreier.is_member(supp, q):
                if self.theta(q) * l1 == value:
                    return q, list(range(n))
            elif q == 1:
                caps = [min(supp[t], n - t) for t in range(n)]
                total, chain = self._chain_dp(items, caps, self._norm, 0, True)
                if self.theta(1) * total == value:
                    return 1, chain
            q += 1
        return None

    # ---------------------------------------------------------------- cache I/O

    def save_cache(self, path: str) -> None:
        payload = {
            "space": self.space.space_id(),
            "entries": [
                [[[i, ratio_str(c)] for i, c in key], ratio_str(v)]
                for key, v in sorted(self._memo.items())
            ],
        }
        with open(path, "w") as fh:
            json.dump(payload, fh)

    def load_cache(self, path: str) -> int:
        """Load a persisted memo; entries for another space id are discarded."""
        try:
            with open(path) as fh:
                payload = json.load(fh)
        except FileNotFoundError:
            return 0
        if payload.get("space") != self.space.space_id():
            return 0
        count = 0
        for key_entries, v in payload.get("entries", []):
            key = tuple((int(i), Fraction(c)) for i, c in key_entries)
            self._memo[key] = Fraction(v)
            count += 1
        return count


def witness_value_in(space: ThetaSeq, x: FinVec, node: dict) -> Fraction:
    """Recompute a witness tree's value against a space (exact)."""
    items = _items_of(x)

    def walk(items: Items, node: dict) -> Fraction:
        kind = node["kind"]
        if kind == "zero":
            return Fraction(0)
        if kind == "sup":
            return max(c for _, c in items)
        total = Fraction(0)
        for (a, b), child in zip(node["intervals"], node["children"]):
            piece = tuple(e for e in items if a <= e[0] <= b)
            total += walk(piece, child)
        return space.theta(node["q"]) * total

    return walk(items, node)


# ---------------------------------------------------------------------------
# the independent brute-force oracle


def brute_force_norm(space: ThetaSeq, x: FinVec, support_cap: int = 8) -> Fraction:
    """Evaluate the implicit equation by complete enumeration.

    No memoisation across calls and no support-point anchoring: every
    successive family of integer intervals inside ran(x) is tried (intervals
    with empty restriction are skipped, and starts left of min supp are
    clipped; both reductions provably preserve the maximum: dropping an empty
    interval keeps a family admissible by heredity with the same sum, and
    clipping a start upward only eases admissibility by spreading).  Within
    one call each distinct subinterval is evaluated once and families sum the
    resulting local table; that is plain common-subexpression hoisting, the
    semantics stay a complete enumeration.  Used to validate
    NormEvaluator.norm.
    """
    items = _items_of(x)
    if len(items) > support_cap:
        raise ValueError(f"brute force support cap is {support_cap}, got {len(items)}")
    q_limit = space.q_limit

    def bf(items: Items) -> Fraction:
        if not items:
            return Fraction(0)
        budget.checkpoint()
        sup = max(c for _, c in items)
        l1 = sum(c for _, c in items)
        best = sup
        lo, hi = items[0][0], items[-1][0]
        # sound truncation: theta_q * l1 <= sup kills all levels >= q
        qcap = 1
        while space.theta(qcap) * l1 > sup:
            if q_limit is not None and qcap >= q_limit:
                break
            qcap += 1
        if space.theta(1) * l1 <= sup:
            return best  # no family can beat the sup norm

        # local piece table: proper subintervals with nonempty restriction
        # (full-cover intervals stay out; a family containing one is either
        # the excluded single cover or has an empty companion interval)
        piece_val: dict[tuple[int, int], Fraction] = {}
        for a in range(lo, hi + 1):
            for b in range(a, hi + 1):
                piece = tuple(e for e in items if a <= e[0] <= b)
                if piece and piece != items:
                    piece_val[(a, b)] = bf(piece)

        qtop = qcap if q_limit is None else min(qcap, q_limit)

        def walk(start: int, mins: tuple[int, ...], total: Fraction):
            nonlocal best
            if mins:
                for q in range(1, qtop + 1):
                    if schreier.is_member(mins, q):
                        cand = space.theta(q) * total
                        if cand > best:
                            best = cand
                        break  # theta decreasing: higher admissible q are worse
            for a in range(start, hi + 1):
                for b in range(a, hi + 1):
                    v = piece_val.get((a, b))
                    if v is None:
                        continue  # empty restriction, or the excluded full cover
                    walk(b + 1, mins + (a,), total + v)

        walk(lo, (), Fraction(0))
        return best

    return bf(items)
