"""Anytime exact maximizer for 0/1 linear models over a pod-by-node grid.

The model holds binary variables x[pod, node] (node ids 1..N; "unplaced" is
the absence of any assignment), linear <=/==/>= constraints, and a linear
maximization objective. Solving is depth-first branch and bound: one decision
per pod over its candidate nodes plus unplaced, constraint propagation on
running activities, and pruning with the tighter of a per-pod objective bound
and fractional knapsack relaxations recovered from per-node capacity
constraint families. All bound arithmetic is integer (floored division), so
the reported bound never underestimates the true optimum.

Search is deterministic for a fixed model and parameters; the deadline is the
only wall-clock dependence and is checked cooperatively every few dozen
search nodes.
"""

from __future__ import annotations

import math
import sys
import time
from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

_BIG = 1 << 62


class Relation(Enum):
    LE = "<="
    EQ = "=="
    GE = ">="


class SolveStatus(Enum):
    OPTIMAL = "OPTIMAL"
    FEASIBLE = "FEASIBLE"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class LinearConstraint:
    """sum(coef * x[pod, node] for terms) relation bound."""

    terms: tuple[tuple[int, int, int], ...]  # (pod, node, coef)
    relation: Relation
    bound: int


@dataclass(frozen=True)
class LinearExpression:
    """Linear form over assignment variables, used as a maximization objective."""

    terms: tuple[tuple[int, int, int], ...]  # (pod, node, coef)

    def value(self, where) -> int:
        """Evaluate against an assignment vector pod -> node id (0 = unplaced)."""
        total = 0
        for pod, node, coef in self.terms:
            if where[pod] == node:
                total += coef
        return total


@dataclass(frozen=True)
class SolveParams:
    deadline: float  # seconds of wall clock for this solve
    hint: tuple[int, ...] | None = None  # full pod -> node assignment to seed the incumbent
    seed: int = 0
    workers: int = 1  # kept for interface stability; search runs sequentially

    def __post_init__(self) -> None:
        if self.deadline <= 0:
            raise ValueError("deadline must be positive")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class SolveStats:
    nodes_explored: int
    wall_time: float


@dataclass(frozen=True)
class Solution:
    status: SolveStatus
    assignment: tuple[int, ...] | None
    objective_value: int | None
    best_bound: float  # int-valued unless -inf for a proven-infeasible model
    stats: SolveStats
    infeasible: bool = False
    incumbent_trace: tuple[int, ...] = ()


class _Deadline(Exception):
    pass


class _Proven(Exception):
    pass


class Model:
    """Mutable constraint store over a dense pod-by-node variable grid.

    Constraints are append-only. Pods can be frozen (all their variables fixed
    to 0) and later unfrozen, which is how callers activate priority tiers
    without retracting anything.
    """

    def __init__(self, num_pods: int, num_nodes: int) -> None:
        if num_pods < 0 or num_nodes < 0:
            raise ValueError("num_pods and num_nodes must be non-negative")
        self.num_pods = num_pods
        self.num_nodes = num_nodes
        self.constraints: list[LinearConstraint] = []
        self.objective = LinearExpression(())
        self.active = [True] * num_pods
        self.branch_priority: list[int] | None = None  # optional pod branching order
        self._compiled: list[tuple[dict[int, list[int]], bool, int | None]] = []

    def _check_terms(self, terms) -> None:
        for pod, node, _coef in terms:
            if not 0 <= pod < self.num_pods:
                raise ValueError(f"unknown pod index {pod}")
            if not 1 <= node <= self.num_nodes:
                raise ValueError(f"unknown node index {node}")

    def add_constraint(self, con: LinearConstraint) -> None:
        self._check_terms(con.terms)
        rows: dict[int, list[int]] = {}
        has_negative = False
        node_set = set()
        for pod, node, coef in con.terms:
            row = rows.get(pod)
            if row is None:
                row = [0] * (self.num_nodes + 1)
                rows[pod] = row
            row[node] += coef
            node_set.add(node)
        for row in rows.values():
            if any(c < 0 for c in row):
                has_negative = True
                break
        single_node = node_set.pop() if len(node_set) == 1 else None
        self.constraints.append(con)
        self._compiled.append((rows, has_negative, single_node))

    def add_constraints(self, cons) -> None:
        for con in cons:
            self.add_constraint(con)

    def maximize(self, expr: LinearExpression) -> None:
        self._check_terms(expr.terms)
        self.objective = expr

    def freeze(self, pod_id: int) -> None:
        self.active[pod_id] = False

    def unfreeze(self, pod_id: int) -> None:
        self.active[pod_id] = True

    def freeze_all(self) -> None:
        self.active = [False] * self.num_pods

    def to_lp_text(self) -> str:
        """Plain-text dump of the model for inspection."""

        def render(terms):
            return " ".join(f"{c:+d} x[{i},{j}]" for i, j, c in terms) or "0"

        lines = [f"max: {render(self.objective.terms)}", "subject to:"]
        for k, con in enumerate(self.constraints):
            lines.append(f"  c{k}: {render(con.terms)} {con.relation.value} {con.bound}")
        frozen = [i for i, a in enumerate(self.active) if not a]
        if frozen:
            lines.append(f"frozen pods (all variables fixed to 0): {frozen}")
        lines.append(f"binary x[i,j] for i in 0..{self.num_pods - 1}, j in 1..{self.num_nodes}")
        return "\n".join(lines)


_REL_CODE = {Relation.LE: 0, Relation.EQ: 1, Relation.GE: 2}


def solve_max(model: Model, params: SolveParams) -> Solution:
    """Maximize the model's objective; anytime, exact on exhaustion.

    Returns OPTIMAL when the search tree was exhausted or the incumbent met
    the root bound, FEASIBLE when the deadline cut the search with an
    incumbent in hand, and UNKNOWN otherwise (with ``infeasible`` set when
    infeasibility was proven rather than the deadline reached).
    """
    t_start = time.monotonic()
    deadline = t_start + params.deadline
    monotonic = time.monotonic

    P, N = model.num_pods, model.num_nodes
    K = len(model.constraints)
    active = list(model.active)
    bounds = [con.bound for con in model.constraints]
    rels = [_REL_CODE[con.relation] for con in model.constraints]

    def result(status, incumbent, best_obj, best_bound, nodes, trace, infeasible=False):
        wall = monotonic() - t_start
        return Solution(
            status=status,
            assignment=None if incumbent is None else tuple(incumbent),
            objective_value=None if incumbent is None else best_obj,
            best_bound=best_bound,
            stats=SolveStats(nodes_explored=nodes, wall_time=wall),
            infeasible=infeasible,
            incumbent_trace=tuple(trace),
        )

    # --- per-solve compilation against the current frozen mask ---
    simple_le = [False] * K
    act = [0] * K
    min_rem = [0] * K
    max_rem = [0] * K
    # per pod: tracked constraints (GE/EQ/negative-coefficient LE) and, for
    # plain non-negative LE rows, the nonzero coefficients bucketed by choice
    tracked_cons: list[list] = [[] for _ in range(P)]
    simple_by_choice: list[list[list]] = [[] for _ in range(P)]
    relevant = [False] * P
    node_simple: list[list[int]] = [[] for _ in range(N + 1)]

    for k in range(K):
        if (k & 255) == 0 and monotonic() >= deadline:
            return result(SolveStatus.UNKNOWN, None, 0, math.inf, 0, [])
        rows, has_negative, single_node = model._compiled[k]
        simple = rels[k] == 0 and not has_negative
        simple_le[k] = simple
        if simple and single_node is not None:
            node_simple[single_node].append(k)
        for i, row in rows.items():
            if not active[i]:
                continue  # frozen pods contribute their fixed 0 choice
            if any(row):
                relevant[i] = True
            if simple:
                if not simple_by_choice[i]:
                    simple_by_choice[i] = [[] for _ in range(N + 1)]
                for c in range(N + 1):
                    if row[c]:
                        simple_by_choice[i][c].append((k, row[c]))
            else:
                mn = min(row)
                mx = max(row)
                tracked_cons[i].append((k, row, mn, mx))
                min_rem[k] += mn
                max_rem[k] += mx

    # root feasibility (covers constraints whose pods are all frozen or absent)
    for k in range(K):
        if simple_le[k]:
            if bounds[k] < 0:
                return result(SolveStatus.UNKNOWN, None, 0, -math.inf, 0, [], infeasible=True)
        else:
            r = rels[k]
            if (r in (0, 1) and min_rem[k] > bounds[k]) or (r in (1, 2) and max_rem[k] < bounds[k]):
                return result(SolveStatus.UNKNOWN, None, 0, -math.inf, 0, [], infeasible=True)

    # objective rows
    obj_row_map: dict[int, list[int]] = {}
    for i, j, coef in model.objective.terms:
        if not 0 <= i < P or not 1 <= j <= N:
            raise ValueError(f"objective references unknown variable x[{i},{j}]")
        row = obj_row_map.get(i)
        if row is None:
            row = [0] * (N + 1)
            obj_row_map[i] = row
        row[j] += coef
    zero_row = [0] * (N + 1)
    obj_coefs = [obj_row_map.get(i, zero_row) for i in range(P)]
    obj_max = [0] * P
    for i in range(P):
        if active[i] and i in obj_row_map:
            relevant[i] = True
            obj_max[i] = max(obj_coefs[i])

    # exchangeable pods: identical columns in every constraint and in the
    # objective mean any permutation of their assignments is equivalent, so
    # the search may force them into non-decreasing node order (unplaced last)
    group_prev = [-1] * P
    group_of: dict[int, list[int]] = {}
    sig_heads: dict = {}
    for i in range(P):
        if not (active[i] and relevant[i]):
            continue
        sbc = simple_by_choice[i]
        sig = (
            tuple(obj_coefs[i]),
            tuple(tuple(bucket) for bucket in sbc) if sbc else (),
            tuple((k, tuple(row)) for k, row, _, _ in tracked_cons[i]),
        )
        head = sig_heads.get(sig)
        if head is None:
            sig_heads[sig] = i
            group_of[i] = [i]
        else:
            members = group_of[head]
            group_prev[i] = members[-1]
            members.append(i)
            group_of[i] = members

    # knapsack families: complete sets of identical per-node capacity rows
    groups: dict[tuple[int, ...], dict[int, int]] = {}
    for j in range(1, N + 1):
        for k in node_simple[j]:
            rows, _, _ = model._compiled[k]
            profile = tuple(rows[i][j] if i in rows else 0 for i in range(P))
            per_node = groups.setdefault(profile, {})
            per_node[j] = min(per_node.get(j, _BIG), bounds[k])
    families = []
    for profile, per_node in groups.items():
        if len(per_node) == N and N > 0:
            families.append((list(profile), sum(per_node.values())))
    # drop families whose bound is implied by a pointwise-heavier, tighter one
    kept = []
    for a, (wa, ca) in enumerate(families):
        dominated = False
        for b, (wb, cb) in enumerate(families):
            if a == b:
                continue
            if cb <= ca and all(x >= y for x, y in zip(wb, wa)):
                if (cb, wb) != (ca, wa) or b < a:
                    dominated = True
                    break
        if not dominated:
            kept.append((wa, ca))
    fam_w = []
    fam_cap = []
    fam_order = []
    fam_node_cons: list[list[int] | None] = []  # one capacity row per node, for count bounds
    fam_value: list[int | None] = []  # the common item value when the objective is uniform
    pod_fams: list[list[tuple[int, int]]] = [[] for _ in range(P)]
    for w, cap in kept:
        fid = len(fam_w)
        items = [i for i in range(P) if active[i] and obj_max[i] > 0]
        # exact ratio order: the greedy prefix is only an upper bound if the
        # value/weight sort never misorders, so avoid float division here
        items.sort(key=lambda i: (0 if w[i] == 0 else 1,
                                  -Fraction(obj_max[i], w[i]) if w[i] else 0, i))
        fam_w.append(w)
        fam_cap.append(cap)
        fam_order.append(items)
        weighted_values = {obj_max[i] for i in items if w[i] > 0}
        uniform = weighted_values.pop() if len(weighted_values) == 1 else None
        per_node = groups[tuple(w)]
        node_cons = [-1] * (N + 1)
        for j, bound in per_node.items():
            for k in node_simple[j]:
                rows, _, _ = model._compiled[k]
                if bounds[k] == bound and all(
                        (rows[i][j] if i in rows else 0) == w[i] for i in range(P)):
                    node_cons[j] = k
                    break
        if any(k == -1 for k in node_cons[1:]):
            uniform = None  # count bound needs one capacity row per node
        fam_value.append(uniform)
        fam_node_cons.append(node_cons)
        for i in range(P):
            if active[i] and w[i] > 0:
                pod_fams[i].append((fid, w[i]))
    fam_act = [0] * len(fam_w)

    # branching order over pods that matter
    order = []
    if model.branch_priority is not None:
        seen = set()
        for i in model.branch_priority:
            if 0 <= i < P and relevant[i] and i not in seen:
                order.append(i)
                seen.add(i)
        order.extend(i for i in range(P) if relevant[i] and i not in seen)
    else:
        def hardness(i):
            frac = 0.0
            for fid, w in pod_fams[i]:
                cap = fam_cap[fid]
                if cap > 0:
                    frac = max(frac, w / cap)
            return (-frac, i)

        order = sorted((i for i in range(P) if relevant[i]), key=hardness)
    # keep exchangeable pods adjacent (id order) so the canonical-order chain
    # always refers to an already-decided predecessor
    regrouped = []
    emitted = set()
    for i in order:
        if i in emitted:
            continue
        for member in group_of.get(i, [i]):
            regrouped.append(member)
            emitted.add(member)
    order = regrouped
    n_order = len(order)

    assignment = [0] * P
    for i in order:
        assignment[i] = -1
    obj_act = 0
    obj_max_rem = sum(obj_max[i] for i in order)

    def fam_remaining(fid: int) -> int:
        rem = fam_cap[fid] - fam_act[fid]
        w = fam_w[fid]
        total = 0
        for i in fam_order[fid]:
            if assignment[i] != -1:
                continue
            wi = w[i]
            v = obj_max[i]
            if wi == 0:
                total += v
            elif wi <= rem:
                total += v
                rem -= wi
            else:
                total += v * rem // wi
                break
        return total

    def upper_bound() -> int:
        ub = obj_act + obj_max_rem
        for fid in range(len(fam_w)):
            b = obj_act + fam_remaining(fid)
            if b < ub:
                ub = b
        return ub

    count_fams = [fid for fid in range(len(fam_w)) if fam_value[fid] is not None]

    def fam_count_bound(fid: int) -> int:
        """Pod-count refinement: node j can host at most as many items as the
        globally smallest undecided weights that fit its residual capacity.
        Only valid when all weighted items share one objective value."""
        w = fam_w[fid]
        free = 0
        weights = []
        for i in fam_order[fid]:
            if assignment[i] != -1:
                continue
            wi = w[i]
            if wi == 0:
                free += obj_max[i]
            else:
                weights.append(wi)  # ascending: equal values sort by weight
        if not weights:
            return free
        prefix = []
        running = 0
        for x in weights:
            running += x
            prefix.append(running)
        node_cons = fam_node_cons[fid]
        count = 0
        for j in range(1, N + 1):
            k = node_cons[j]
            count += bisect_right(prefix, bounds[k] - act[k])
            if count >= len(weights):
                break
        return free + fam_value[fid] * min(count, len(weights))

    # seed the incumbent from the hint: frozen pods are clamped to 0 (the one
    # repair applied), anything still violating a constraint is discarded
    incumbent = None
    best_obj = 0
    trace: list[int] = []
    if params.hint is not None:
        h = list(params.hint)
        if len(h) != P:
            raise ValueError(f"hint assigns {len(h)} pods, model has {P}")
        for i, c in enumerate(h):
            if not 0 <= c <= N:
                raise ValueError(f"hint maps pod {i} to unknown node {c}")
            if not active[i]:
                h[i] = 0
            elif not relevant[i]:
                h[i] = 0  # irrelevant pods are pinned unplaced
        vals = [0] * K
        for k in range(K):
            rows, _, _ = model._compiled[k]
            vals[k] = sum(row[h[i]] for i, row in rows.items())
        ok = True
        for k in range(K):
            r = rels[k]
            if (r == 0 and vals[k] > bounds[k]) or (r == 2 and vals[k] < bounds[k]) \
                    or (r == 1 and vals[k] != bounds[k]):
                ok = False
                break
        if ok:
            incumbent = h
            best_obj = sum(obj_coefs[i][h[i]] for i in range(P))
            trace.append(best_obj)

    root_ub = upper_bound()
    for fid in count_fams:
        root_ub = min(root_ub, obj_act + fam_count_bound(fid))
    if incumbent is not None and best_obj >= root_ub:
        return result(SolveStatus.OPTIMAL, incumbent, best_obj, best_obj, 0, trace)

    if sys.getrecursionlimit() < n_order + 1000:
        sys.setrecursionlimit(n_order + 2000)

    node_count = 0

    def search(depth: int) -> None:
        nonlocal node_count, incumbent, best_obj, obj_act, obj_max_rem
        node_count += 1
        if (node_count & 63) == 0 and monotonic() >= deadline:
            raise _Deadline
        if depth == n_order:
            if incumbent is None or obj_act > best_obj:
                best_obj = obj_act
                incumbent = assignment.copy()
                trace.append(best_obj)
                if best_obj >= root_ub:
                    raise _Proven
            return
        if incumbent is not None:
            ub = upper_bound()
            if ub <= best_obj:
                return
            # the count refinement is costlier, so try it only when the cheap
            # bound would otherwise let the node expand
            for fid in count_fams:
                if obj_act + fam_count_bound(fid) <= best_obj:
                    return
        i = order[depth]
        sbc = simple_by_choice[i]
        tbases = [
            (k, row, act[k], min_rem[k] - mn, max_rem[k] - mx, rels[k])
            for k, row, mn, mx in tracked_cons[i]
        ]
        obj_row = obj_coefs[i]
        prev = group_prev[i]
        if prev != -1:
            cp = assignment[prev]
            min_rank = cp if cp >= 1 else N + 1
        else:
            min_rank = 0
        cands = []
        for c in range(N + 1):
            if (c if c >= 1 else N + 1) < min_rank:
                continue  # canonical order within an exchangeable group
            ok = True
            if sbc:
                for k, coef in sbc[c]:
                    if act[k] + coef > bounds[k]:
                        ok = False
                        break
            if ok:
                for k, row, base_act, bmin, bmax, r in tbases:
                    v = base_act + row[c]
                    if r == 0:
                        if v + bmin > bounds[k]:
                            ok = False
                            break
                    elif r == 2:
                        if v + bmax < bounds[k]:
                            ok = False
                            break
                    else:
                        if v + bmin > bounds[k] or v + bmax < bounds[k]:
                            ok = False
                            break
            if not ok:
                continue
            if c == 0:
                res = -1
            else:
                res = _BIG
                for k in node_simple[c]:
                    slack = bounds[k] - act[k]
                    if slack < res:
                        res = slack
            cands.append((-obj_row[c], -res, c))
        cands.sort()
        tcons = tracked_cons[i]
        pf = pod_fams[i]
        omax = obj_max[i]
        for _negobj, _negres, c in cands:
            assignment[i] = c
            obj_act += obj_row[c]
            obj_max_rem -= omax
            if sbc:
                for k, coef in sbc[c]:
                    act[k] += coef
            for k, row, mn, mx in tcons:
                act[k] += row[c]
                min_rem[k] -= mn
                max_rem[k] -= mx
            if c and pf:
                for fid, w in pf:
                    fam_act[fid] += w
            try:
                search(depth + 1)
            finally:
                assignment[i] = -1
                obj_act -= obj_row[c]
                obj_max_rem += omax
                if sbc:
                    for k, coef in sbc[c]:
                        act[k] -= coef
                for k, row, mn, mx in tcons:
                    act[k] -= row[c]
                    min_rem[k] += mn
                    max_rem[k] += mx
                if c and pf:
                    for fid, w in pf:
                        fam_act[fid] -= w

    try:
        search(0)
    except _Deadline:
        if incumbent is not None:
            return result(SolveStatus.FEASIBLE, incumbent, best_obj, root_ub, node_count, trace)
        return result(SolveStatus.UNKNOWN, None, 0, root_ub, node_count, trace)
    except _Proven:
        return result(SolveStatus.OPTIMAL, incumbent, best_obj, best_obj, node_count, trace)
    if incumbent is None:
        return result(SolveStatus.UNKNOWN, None, 0, -math.inf, node_count, trace, infeasible=True)
    return result(SolveStatus.OPTIMAL, incumbent, best_obj, best_obj, node_count, trace)


def brute_force_oracle(model: Model, limit: int = 10**7) -> tuple[int, tuple[int, ...]] | None:
    """Exhaustively enumerate every assignment and return the true maximum.

    Independent of the branch-and-bound path: plain vectorized enumeration of
    all pod -> (node or unplaced) maps, filtered by direct constraint
    evaluation. Returns None when no assignment is feasible. Pod 0 is the
    most significant digit of the enumeration, so ties resolve to the
    lexicographically smallest assignment.
    """
    P, N = model.num_pods, model.num_nodes
    sizes = [(N + 1) if model.active[i] else 1 for i in range(P)]
    total = 1
    for s in sizes:
        total *= s
        if total > limit:
            raise ValueError(f"enumeration of {total}+ assignments exceeds limit {limit}")

    best_val: int | None = None
    best_assign: tuple[int, ...] | None = None
    chunk = 1 << 18
    for lo in range(0, total, chunk):
        hi = min(total, lo + chunk)
        idx = np.arange(lo, hi, dtype=np.int64)
        cols = np.empty((hi - lo, P), dtype=np.int64)
        rem = idx
        for i in range(P - 1, -1, -1):
            s = sizes[i]
            cols[:, i] = rem % s
            rem = rem // s
        feasible = np.ones(hi - lo, dtype=bool)
        for con in model.constraints:
            val = np.zeros(hi - lo, dtype=np.int64)
            for pod, node, coef in con.terms:
                if sizes[pod] == 1:
                    continue  # frozen pod never selects a node
                val += coef * (cols[:, pod] == node)
            if con.relation is Relation.LE:
                feasible &= val <= con.bound
            elif con.relation is Relation.GE:
                feasible &= val >= con.bound
            else:
                feasible &= val == con.bound
        if not feasible.any():
            continue
        obj = np.zeros(hi - lo, dtype=np.int64)
        for pod, node, coef in model.objective.terms:
            if sizes[pod] == 1:
                continue
            obj += coef * (cols[:, pod] == node)
        obj = np.where(feasible, obj, np.iinfo(np.int64).min)
        pos = int(np.argmax(obj))
        val = int(obj[pos])
        if best_val is None or val > best_val:
            best_val = val
            best_assign = tuple(int(x) for x in cols[pos])
    if best_val is None:
        return None
    return best_val, best_assign
