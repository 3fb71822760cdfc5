"""Brute-force reference implementations used only by the test suite.

Everything here trades speed for obviousness and shares no code with the
package under test: adjacency is a list of Python sets, paths are
tuples, searches enumerate full path states.  Keep it that way; the
point is an independent route to the same answers.
"""

from __future__ import annotations

from collections import deque
from itertools import combinations


def rotations_of(adj: list[set[int]], pivots: set[int], path: tuple[int, ...]):
    """Yield every path one pivot-restricted rotation away (fixed end path[0])."""
    length = len(path)
    w = path[-1]
    for i in range(1, length - 2):
        x = path[i]
        if x in pivots and w in adj[x]:
            yield path[:i + 1] + tuple(reversed(path[i + 1:]))


def closure_endpoints_bruteforce(
    adj: list[set[int]],
    pivots: set[int],
    path: tuple[int, ...],
) -> set[int]:
    """Endpoints reachable by rotation sequences, deduplicating by FULL
    path state (every distinct path is explored, not just every distinct
    endpoint).  The ground truth the fast closure is measured against.
    """
    seen = {path}
    queue = deque([path])
    endpoints = {path[-1]}
    while queue:
        p = queue.popleft()
        for q in rotations_of(adj, pivots, p):
            if q not in seen:
                seen.add(q)
                endpoints.add(q[-1])
                queue.append(q)
    return endpoints


def closure_family_bruteforce(
    adj: list[set[int]],
    pivots: set[int],
    path: tuple[int, ...],
) -> list[tuple[int, ...]]:
    """Every path reachable by rotation sequences fixing path[0]."""
    seen = {path}
    queue = deque([path])
    family = [path]
    while queue:
        p = queue.popleft()
        for q in rotations_of(adj, pivots, p):
            if q not in seen:
                seen.add(q)
                family.append(q)
                queue.append(q)
    return family


def endpoint_pairs_bruteforce(
    adj: list[set[int]],
    pivots: set[int],
    path: tuple[int, ...],
) -> set[tuple[int, int]]:
    """Two-level pair construction: for EVERY path in the first-level
    family (not one witness per endpoint), close over its free end.
    The union over all first-level paths is what makes the set
    independent of search order."""
    pairs: set[tuple[int, int]] = set()
    for wit in closure_family_bruteforce(adj, pivots, path):
        u = wit[-1]
        rev = tuple(reversed(wit))
        for w in closure_endpoints_bruteforce(adj, pivots, rev):
            pairs.add((u, w) if u <= w else (w, u))
    return pairs


def longest_path_through(adj: list[set[int]], anchor: int) -> int:
    """Vertex count of a longest simple path through `anchor`, by subset
    DP.  Exponential; callers keep n <= 14.

    reach[mask] is the set (as a bitmask) of endpoints v such that some
    path covering exactly `mask` ends at v.  Extensions only add bits,
    so scanning masks in ascending integer order sees every predecessor
    first.
    """
    n = len(adj)
    reach = [0] * (1 << n)
    for v in range(n):
        reach[1 << v] = 1 << v
    best = 1
    abit = 1 << anchor
    for mask in range(1, 1 << n):
        ends = reach[mask]
        if not ends:
            continue
        if mask & abit:
            best = max(best, bin(mask).count("1"))
        e = ends
        while e:
            low = e & -e
            v = low.bit_length() - 1
            e ^= low
            for u in adj[v]:
                ub = 1 << u
                if not mask & ub:
                    reach[mask | ub] |= ub
    return best


def hamilton_cycle_exists(adj: list[set[int]]) -> bool:
    """Exact Hamilton cycle decision by subset DP from vertex 0 (n <= 14)."""
    n = len(adj)
    if n < 3:
        return False
    full = (1 << n) - 1
    reach = [0] * (1 << n)
    reach[1] = 1
    for mask in range(1, full + 1):
        ends = reach[mask]
        if not ends:
            continue
        e = ends
        while e:
            low = e & -e
            v = low.bit_length() - 1
            e ^= low
            for u in adj[v]:
                ub = 1 << u
                if not mask & ub:
                    reach[mask | ub] |= ub
    e = reach[full]
    while e:
        low = e & -e
        v = low.bit_length() - 1
        e ^= low
        if 0 in adj[v]:
            return True
    return False


def random_maker_graph(rng, n: int, extra_edges: int):
    """A random graph made of a few paths plus extra chords: the shape
    rotation inputs actually take.  Returns (adj sets, one path)."""
    verts = list(range(n))
    rng.shuffle(verts)
    adj: list[set[int]] = [set() for _ in range(n)]
    cut = rng.randint(2, n)
    base = verts[:cut]
    for a, b in zip(base, base[1:]):
        adj[a].add(b)
        adj[b].add(a)
    pool = [(a, b) for a, b in combinations(range(n), 2) if b not in adj[a]]
    rng.shuffle(pool)
    for a, b in pool[:extra_edges]:
        adj[a].add(b)
        adj[b].add(a)
    return adj, tuple(base)
