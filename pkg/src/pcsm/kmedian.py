"""Two-distance capacitated k-median via a submodular reduction.

With client-facility distances restricted to {a, b}, the number of clients
servable at the near distance by an open set F' is a monotone submodular
function (a capacitated matching value, computed by max flow).  Minimizing
cost is then maximizing that function subject to |F'| <= k and total open
capacity >= #clients, which the cardinality DP solves; the b > 3a and a = 0
regimes decompose into zero/near-distance clusters and are solved exactly
by a small knapsack-style DP.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

from .core import SubmodularOracle, iter_bits, make_instance


@dataclass(frozen=True)
class TwoDistInstance:
    capacities: tuple        # one positive int per facility
    num_clients: int
    near_pairs: frozenset    # (client, facility) pairs at distance a
    a: object                # near distance, 0 <= a <= b
    b: object
    k: int

    def __post_init__(self):
        if any(u < 1 for u in self.capacities):
            raise ValueError("capacities must be positive integers")
        if not 0 <= self.a <= self.b:
            raise ValueError("distances must satisfy 0 <= a <= b")
        if self.k < 0:
            raise ValueError("k must be non-negative")
        for cl, fa in self.near_pairs:
            if not (0 <= cl < self.num_clients and 0 <= fa < len(self.capacities)):
                raise ValueError("near pair out of range")

    @property
    def num_facilities(self) -> int:
        return len(self.capacities)


def two_dist_from_json_obj(obj: dict) -> TwoDistInstance:
    return TwoDistInstance(
        capacities=tuple(f["cap"] for f in obj["facilities"]),
        num_clients=obj["clients"],
        near_pairs=frozenset((c, f) for c, f in obj["dist_a_pairs"]),
        a=obj["a"],
        b=obj["b"],
        k=obj["k"],
    )


def load_two_dist(path) -> TwoDistInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return two_dist_from_json_obj(json.load(fh))


# ---------------------------------------------------------------------------
# max-flow matching value


class _Dinic:
    def __init__(self, size):
        self.size = size
        self.graph = [[] for _ in range(size)]

    def add_edge(self, u, v, cap):
        self.graph[u].append([v, cap, len(self.graph[v])])
        self.graph[v].append([u, 0, len(self.graph[u]) - 1])

    def max_flow(self, s, t):
        flow = 0
        while True:
            level = [-1] * self.size
            level[s] = 0
            dq = deque([s])
            while dq:
                u = dq.popleft()
                for e in self.graph[u]:
                    if e[1] > 0 and level[e[0]] < 0:
                        level[e[0]] = level[u] + 1
                        dq.append(e[0])
            if level[t] < 0:
                return flow
            it = [0] * self.size

            def dfs(u, pushed):
                if u == t:
                    return pushed
                while it[u] < len(self.graph[u]):
                    e = self.graph[u][it[u]]
                    v = e[0]
                    if e[1] > 0 and level[v] == level[u] + 1:
                        got = dfs(v, min(pushed, e[1]))
                        if got:
                            e[1] -= got
                            self.graph[v][e[2]][1] += got
                            return got
                    it[u] += 1
                return 0

            while True:
                pushed = dfs(s, 1 << 60)
                if not pushed:
                    break
                flow += pushed


def match_value(inst: TwoDistInstance, f_mask: int) -> int:
    """Maximum number of clients assignable at the near distance to the open
    facilities, respecting capacities."""
    open_facs = list(iter_bits(f_mask))
    if not open_facs:
        return 0
    nc = inst.num_clients
    pos = {f: j for j, f in enumerate(open_facs)}
    net = _Dinic(2 + nc + len(open_facs))
    src, sink = 0, 1
    for cl in range(nc):
        net.add_edge(src, 2 + cl, 1)
    for f in open_facs:
        net.add_edge(2 + nc + pos[f], sink, inst.capacities[f])
    for (cl, f) in inst.near_pairs:
        if f in pos:
            net.add_edge(2 + cl, 2 + nc + pos[f], 1)
    return net.max_flow(src, sink)


def match_assignment(inst: TwoDistInstance, f_mask: int) -> dict:
    """One maximum near-distance assignment client -> facility."""
    open_facs = list(iter_bits(f_mask))
    nc = inst.num_clients
    pos = {f: j for j, f in enumerate(open_facs)}
    net = _Dinic(2 + nc + len(open_facs))
    src, sink = 0, 1
    for cl in range(nc):
        net.add_edge(src, 2 + cl, 1)
    for f in open_facs:
        net.add_edge(2 + nc + pos[f], sink, inst.capacities[f])
    for (cl, f) in sorted(inst.near_pairs):
        if f in pos:
            net.add_edge(2 + cl, 2 + nc + pos[f], 1)
    net.max_flow(src, sink)
    assign = {}
    for cl in range(nc):
        for e in net.graph[2 + cl]:
            v, cap, _ = e
            if v >= 2 + nc and cap == 0:      # saturated client->facility edge
                assign[cl] = open_facs[v - 2 - nc]
                break
    return assign


class MatchOracle(SubmodularOracle):
    """match_value as a value oracle over facility subsets (memoized)."""

    kind = "match"

    def __init__(self, inst: TwoDistInstance):
        self.inst = inst
        self.n = inst.num_facilities
        self._cache: dict = {}

    def eval(self, mask: int) -> int:
        got = self._cache.get(mask)
        if got is None:
            got = self._cache[mask] = match_value(self.inst, mask)
        return got

    def to_json_obj(self) -> dict:
        raise TypeError("match oracle is not serializable")


# ---------------------------------------------------------------------------
# solver


@dataclass
class KMedianResult:
    found: bool
    open_mask: int
    assignment: dict         # client -> facility
    matched: int             # clients served at distance a
    cost: object


def _check_capacity_feasible(inst: TwoDistInstance) -> bool:
    caps = sorted(inst.capacities, reverse=True)[: inst.k]
    return sum(caps) >= inst.num_clients


def _near_components(inst: TwoDistInstance):
    """Connected components of the near-distance bipartite graph; verifies
    the complete-bipartite structure that a two-distance metric forces when
    b > 3a (or a = 0)."""
    nf, nc = inst.num_facilities, inst.num_clients
    parent = list(range(nf + nc))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        parent[find(x)] = find(y)

    for cl, fa in inst.near_pairs:
        union(fa, nf + cl)
    comps: dict = {}
    for fa in range(nf):
        comps.setdefault(find(fa), [[], []])[0].append(fa)
    for cl in range(nc):
        comps.setdefault(find(nf + cl), [[], []])[1].append(cl)
    out = list(comps.values())
    for facs, clients in out:
        expected = {(cl, fa) for fa in facs for cl in clients}
        present = {(cl, fa) for (cl, fa) in inst.near_pairs
                   if fa in set(facs) and cl in set(clients)}
        if facs and clients and present != expected:
            raise ValueError(
                "near-distance graph is not a union of complete bipartite "
                "clusters; the input is not a two-distance metric")
    return out


def _solve_clustered(inst: TwoDistInstance) -> KMedianResult:
    """Exact DP for the decomposable regimes (a = 0 or b > 3a): distribute k
    facilities over clusters, maximizing clients served at the near distance
    subject to total opened capacity >= number of clients."""
    comps = _near_components(inst)
    n = inst.num_clients
    cap_goal = n
    # options[g] = list of (facilities used, capacity (saturated), served, mask)
    options = []
    for facs, clients in comps:
        facs_sorted = sorted(facs, key=lambda f: (-inst.capacities[f], f))
        opts = []
        cum_cap = 0
        mask = 0
        opts.append((0, 0, 0, 0))
        for i, f in enumerate(facs_sorted, start=1):
            cum_cap += inst.capacities[f]
            mask |= 1 << f
            opts.append((i, min(cum_cap, cap_goal), min(cum_cap, len(clients)), mask))
        options.append(opts)

    # DP over clusters: state (facilities used, capacity saturated at goal)
    states = {(0, 0): (0, 0)}       # -> (served, mask)
    for opts in options:
        nxt: dict = {}
        for (used, cap), (served, mask) in states.items():
            for extra, ecap, eserved, emask in opts:
                nu = used + extra
                if nu > inst.k:
                    continue
                key = (nu, min(cap + ecap, cap_goal))
                cand = (served + eserved, mask | emask)
                cur = nxt.get(key)
                if cur is None or cand[0] > cur[0]:
                    nxt[key] = cand
        states = nxt
    best = None
    for (used, cap), (served, mask) in states.items():
        if cap >= cap_goal:
            if best is None or served > best[0]:
                best = (served, mask)
    if best is None:
        return KMedianResult(False, 0, {}, 0, 0)
    served, mask = best
    return _finish(inst, mask)


def _finish(inst: TwoDistInstance, open_mask: int) -> KMedianResult:
    assign = match_assignment(inst, open_mask)
    matched = len(assign)
    residual = {f: inst.capacities[f] for f in iter_bits(open_mask)}
    for f in assign.values():
        residual[f] -= 1
    for cl in range(inst.num_clients):
        if cl in assign:
            continue
        far = next(f for f, r in sorted(residual.items()) if r > 0)
        residual[far] -= 1
        assign[cl] = far
    cost = inst.a * matched + inst.b * (inst.num_clients - matched)
    return KMedianResult(True, open_mask, assign, matched, cost)


def solve_two_distance(inst: TwoDistInstance) -> KMedianResult:
    """Open at most k facilities and assign every client, minimizing total
    connection cost."""
    if not _check_capacity_feasible(inst):
        return KMedianResult(False, 0, {}, 0, 0)
    if inst.num_clients == 0:
        return KMedianResult(True, 0, {}, 0, 0)
    if inst.a == 0 or inst.b > 3 * inst.a:
        return _solve_clustered(inst)
    oracle = MatchOracle(inst)
    nf = inst.num_facilities
    reduction = make_instance(
        packing=[[1] * nf],
        covering=[list(inst.capacities)],
        pack_bound=[inst.k],
        cover_bound=[inst.num_clients],
        objective=oracle,
    )
    from .forbidden_dp import cardinality_solve
    outcome = cardinality_solve(reduction, inst.k)
    if not outcome.found:
        return KMedianResult(False, 0, {}, 0, 0)
    return _finish(inst, outcome.best_set)
