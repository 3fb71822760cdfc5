"""Rotation-extension machinery for Maker's tracked path.

A rotation takes a path v..x,y..w plus a Maker edge wx and produces the
path v..x,w..y (delete xy, add wx): same vertex set, new endpoint y.
Rotations here are pivot-restricted: the pivot x must lie in a
caller-supplied vertex set (the settled set, under which the successor
y of a pivot is always settled or a family-path endpoint).

The closure explores full path states breadth-first, deduplicating by
the exact vertex sequence.  Deduplicating by endpoint alone is cheaper
but provably lossy (a second witness for a known endpoint can rotate to
endpoints the first witness cannot reach), and the contract here is the
true reachable set.  Exactness is paid for with an optional state
budget: searches stop deterministically at `max_states` explored paths
and flag the result as truncated.  Engine-scale callers set a budget;
verification-scale callers leave it unbounded.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .board import bits


class RotationError(ValueError):
    """Bad input to a rotation operation (not a Maker path, repeated vertex)."""


class NormalizeError(RuntimeError):
    """The endpoint-normalization case analysis found no applicable move.

    Structurally impossible while the strategy's invariants hold; raising
    it (and recording a strategy failure) is how breakage surfaces.
    """


@dataclass
class TrackedPath:
    """Maker's distinguished path: vertex order, membership mask, flags.

    cycle_closed means Maker also owns an edge joining the two ends, so
    her graph contains a cycle on exactly this vertex set.
    """

    order: list[int]
    mask: int
    cycle_closed: bool = False
    generation: int = 0

    @classmethod
    def seed(cls, v: int, turn: int = 0) -> "TrackedPath":
        return cls(order=[v], mask=1 << v, generation=turn)

    def __len__(self) -> int:
        return len(self.order)


class RotationClosure:
    """Paths reachable from one path by rotations keeping one end fixed.

    endpoints lists each reachable free end once, in discovery order;
    states lists every distinct reachable path (as int32 arrays starting
    at the fixed end); the witness kept per endpoint is the first path
    that reached it.
    """

    __slots__ = ("fixed", "endpoints", "states", "truncated", "_witness")

    def __init__(self, fixed: int) -> None:
        self.fixed = fixed
        self.endpoints: list[int] = []
        self.states: list[np.ndarray] = []
        self.truncated = False
        self._witness: dict[int, np.ndarray] = {}

    def witness_order(self, w: int) -> np.ndarray:
        """Witness path array from the fixed end to w."""
        return self._witness[w]

    def witness_path(self, w: int) -> list[int]:
        return [int(x) for x in self._witness[w]]

    def __contains__(self, w: int) -> bool:
        return w in self._witness

    def __len__(self) -> int:
        return len(self._witness)


def _as_order_array(order) -> np.ndarray:
    arr = np.asarray(order, dtype=np.int32)
    if arr.ndim != 1 or len(arr) == 0:
        raise RotationError("path must be a non-empty vertex sequence")
    return arr


def _validate_path(maker_adj: list[int], order: np.ndarray) -> None:
    seen = 0
    for v in order:
        bit = 1 << int(v)
        if seen & bit:
            raise RotationError(f"repeated vertex {v}")
        seen |= bit
    for a, c in zip(order[:-1], order[1:]):
        if not (maker_adj[int(a)] >> int(c)) & 1:
            raise RotationError(f"({a}, {c}) is not a Maker edge")


def limited_rotation_closure(
    maker_adj: list[int],
    pivot_mask: int,
    order,
    *,
    validate: bool = True,
    max_states: int = 0,
    stop_at=None,
) -> RotationClosure:
    """All endpoints reachable by pivot-restricted rotations fixing order[0].

    The endpoint set always contains the original free end order[-1]
    (zero rotations).  max_states > 0 bounds the number of explored path
    states; hitting the bound sets .truncated.  stop_at, if given, is a
    predicate on endpoints: the search stops early once a newly found
    endpoint satisfies it (used by callers that only need one hit).
    """
    n = len(maker_adj)
    arr = _as_order_array(order)
    if len(arr) < 2:
        raise RotationError("closure needs a path on >= 2 vertices")
    if validate:
        _validate_path(maker_adj, arr)
    length = len(arr)
    closure = RotationClosure(int(arr[0]))
    start = int(arr[-1])
    pos0 = np.full(n, -1, dtype=np.int32)
    pos0[arr] = np.arange(length, dtype=np.int32)
    closure.endpoints.append(start)
    closure.states.append(arr)
    closure._witness[start] = arr
    if length < 4 or (stop_at is not None and stop_at(start)):
        return closure
    path_mask = 0
    for v in arr:
        path_mask |= 1 << int(v)
    seen: set[bytes] = {arr.tobytes()}
    queue: deque[tuple[np.ndarray, np.ndarray]] = deque([(arr, pos0)])
    usable = pivot_mask & path_mask
    master_range = np.arange(length, dtype=np.int32)
    witness = closure._witness
    while queue:
        o, p = queue.popleft()
        w = int(o[-1])
        for x in bits(maker_adj[w] & usable):
            i = int(p[x])
            if i < 1 or i > length - 3:
                continue
            new_o = o.copy()
            new_o[i + 1:] = o[length - 1:i:-1]
            key = new_o.tobytes()
            if key in seen:
                continue
            seen.add(key)
            y = int(new_o[-1])
            closure.states.append(new_o)
            if y not in witness:
                witness[y] = new_o
                closure.endpoints.append(y)
                if stop_at is not None and stop_at(y):
                    return closure
            if max_states and len(closure.states) >= max_states:
                closure.truncated = True
                return closure
            new_p = p.copy()
            new_p[new_o[i + 1:]] = master_range[i + 1:]
            queue.append((new_o, new_p))
    return closure


def endpoint_pairs_scan(
    maker_adj: list[int],
    pivot_mask: int,
    order,
    *,
    validate: bool = True,
    max_states: int = 0,
    total_states: int = 0,
) -> tuple[set[tuple[int, int]], bool]:
    """(pairs, truncated) behind endpoint_pairs; see there for semantics.

    total_states > 0 additionally bounds the states explored across the
    whole two-level scan.
    """
    budget = total_states
    first = limited_rotation_closure(
        maker_adj, pivot_mask, order, validate=validate,
        max_states=_cap(max_states, budget))
    pairs: set[tuple[int, int]] = set()
    truncated = first.truncated
    if budget:
        budget -= len(first.states)
    for state in first.states:
        if total_states and budget <= 0:
            truncated = True
            break
        u = int(state[-1])
        second = limited_rotation_closure(
            maker_adj, pivot_mask, state[::-1].copy(),
            validate=False, max_states=_cap(max_states, budget))
        truncated = truncated or second.truncated
        if budget:
            budget -= len(second.states)
        for w in second.endpoints:
            pairs.add((u, w) if u <= w else (w, u))
    return pairs, truncated


def _cap(max_states: int, remaining: int) -> int:
    if remaining <= 0:
        return max_states
    if max_states <= 0:
        return remaining
    return min(max_states, remaining)


def endpoint_pairs(
    maker_adj: list[int],
    pivot_mask: int,
    order,
    *,
    validate: bool = True,
    max_states: int = 0,
) -> set[tuple[int, int]]:
    """Unordered endpoint pairs realizable on V(P) by the two-level
    rotation construction: close over one end, then for each reachable
    path close over its free end.

    The union runs over every first-level path state, not one witness
    per endpoint: second-level reachability genuinely depends on which
    witness you rotate, and only the union over all of them is
    independent of search order.  Every returned pair is realized by a
    concrete path on V(P).

    The input path must already have both endpoints in the anchor set
    (run normalize_endpoints first when it may not).
    """
    pairs, _ = endpoint_pairs_scan(
        maker_adj, pivot_mask, order, validate=validate, max_states=max_states)
    return pairs


def normalize_endpoints(
    maker_adj: list[int],
    anchor_mask: int,
    order,
) -> list[int]:
    """Rewrite a path on V(P) until both endpoints are anchors.

    Two moves, mirroring why such a path always exists: a non-anchor
    endpoint is interior to a family path, so it has exactly two Maker
    edges and both lie on P.  If its second edge reaches the other end
    of P, close the cycle and reopen it at the first edge whose ends are
    both anchors; otherwise exchange that edge for the path edge after
    its far attachment, which lands the endpoint on an anchor.  Raises
    NormalizeError when neither move applies.
    """
    path = [int(v) for v in order]
    if len(path) == 1:
        if anchor_mask >> path[0] & 1:
            return path
        raise NormalizeError(f"singleton {path[0]} is not an anchor")
    for _ in range(6):
        last_ok = bool(anchor_mask >> path[-1] & 1)
        first_ok = bool(anchor_mask >> path[0] & 1)
        if last_ok and first_ok:
            return path
        if last_ok:
            path.reverse()
        w = path[-1]
        length = len(path)
        if (maker_adj[w] >> path[0] & 1) and length >= 3:
            # Cycle move: reopen at the first anchor-anchor edge.
            cut = -1
            for i in range(length):
                a, c = path[i], path[(i + 1) % length]
                if (anchor_mask >> a & 1) and (anchor_mask >> c & 1):
                    cut = i
                    break
            if cut == -1:
                raise NormalizeError("cycle without an anchor-anchor edge")
            path = path[cut + 1:] + path[:cut + 1]
            continue
        # Exchange move: w's second Maker edge must land inside the path.
        z = -1
        inner = path[-2]
        for x in bits(maker_adj[w]):
            if x != inner and any(x == q for q in path[:-2]):
                z = x
                break
        if z == -1 or z == path[0]:
            raise NormalizeError(f"endpoint {w} admits no normalization move")
        j = path.index(z)
        path = path[:j + 1] + path[j + 1:][::-1]
    raise NormalizeError("normalization did not converge")


def find_closing_pair(
    maker_adj: list[int],
    breaker_adj: list[int],
    pivot_mask: int,
    hub_mask: int,
    order,
    *,
    max_states: int = 0,
    total_states: int = 0,
) -> tuple[tuple[int, int, list[int]] | None, bool]:
    """Least hub-hub endpoint pair whose edge is claimable, with witness.

    Enumerates the same two-level pair family as endpoint_pairs but only
    descends into first-level states whose free end is a hub with at
    least one claimable hub partner on the path, keeps pairs with both
    members hubs and the joining edge unclaimed by either player, and
    takes the lexicographically least as (u, w) with u < w.

    Returns ((u, w, witness path from u to w) or None, truncated); a
    None hit with truncated=True means the budgeted search ran out, not
    that no pair exists.
    """
    arr = _as_order_array(order)
    path_mask = 0
    for v in arr:
        path_mask |= 1 << int(v)
    budget = total_states
    first = limited_rotation_closure(
        maker_adj, pivot_mask, arr, validate=False,
        max_states=_cap(max_states, budget))
    truncated = first.truncated
    if budget:
        budget -= len(first.states)
    best: tuple[int, int] | None = None
    best_witness: list[int] | None = None
    for state in first.states:
        if total_states and budget <= 0:
            truncated = True
            break
        u = int(state[-1])
        if not (hub_mask >> u & 1):
            continue
        # A claimable partner must be a hub on the path that neither
        # player owns an edge to; skip the whole descent when none can
        # exist.
        partner_cand = (hub_mask & path_mask
                        & ~breaker_adj[u] & ~maker_adj[u] & ~(1 << u))
        if not partner_cand:
            continue
        second = limited_rotation_closure(
            maker_adj, pivot_mask, state[::-1].copy(),
            validate=False, max_states=_cap(max_states, budget))
        truncated = truncated or second.truncated
        if budget:
            budget -= len(second.states)
        for w in second.endpoints:
            if not (partner_cand >> w & 1):
                continue
            pair = (u, w) if u < w else (w, u)
            if best is None or pair < best:
                best = pair
                best_witness = second.witness_path(w)
    if best is None:
        return None, truncated
    return (best[0], best[1], best_witness), truncated


def advance_tracked_path(
    maker_adj: list[int],
    pivot_mask: int,
    anchor_mask: int,
    tracked: TrackedPath,
    turn: int = 0,
    *,
    max_states: int = 0,
) -> tuple[TrackedPath, bool]:
    """Grow the tracked path as far as the search finds.

    Search moves, repeated until none fires: (a) while an endpoint has a
    Maker neighbor off the path, extend there (lowest index first);
    (b) when both ends are stuck, take the pivot-restricted closure at
    each end and adopt the first reachable endpoint that extends;
    (c) when the cycle is closed, try reopening it at each anchor-anchor
    cycle edge in order and rerun (a)/(b); an opening that yields no
    growth is rolled back, and if none grows the path stays closed.
    The vertex set never shrinks.  Returns (tracked, grew).
    """
    order = list(tracked.order)
    mask = tracked.mask
    closed = tracked.cycle_closed
    start_len = len(order)

    def extend(seq: list[int], m: int) -> tuple[list[int], int, bool]:
        grew = False
        while True:
            out = maker_adj[seq[-1]] & ~m
            if out:
                y = (out & -out).bit_length() - 1
                seq.append(y)
                m |= 1 << y
                grew = True
                continue
            out = maker_adj[seq[0]] & ~m
            if out:
                y = (out & -out).bit_length() - 1
                seq.insert(0, y)
                m |= 1 << y
                grew = True
                continue
            return seq, m, grew

    def rotate_and_extend(seq: list[int], m: int) -> tuple[list[int], int, bool]:
        # (a) then (b) at both ends until neither move applies.
        seq, m, grew = extend(seq, m)
        while len(seq) >= 4:
            reach = 0
            for v in seq:
                reach |= maker_adj[v]
            if not (reach & ~m):
                break
            adopted = False
            for flip in (False, True):
                base = seq[::-1] if flip else seq
                closure = limited_rotation_closure(
                    maker_adj, pivot_mask, np.asarray(base, dtype=np.int32),
                    validate=False, max_states=max_states,
                    stop_at=lambda e: bool(maker_adj[e] & ~m))
                tip = closure.endpoints[-1]
                if maker_adj[tip] & ~m:
                    seq = closure.witness_path(tip)
                    seq, m, _ = extend(seq, m)
                    adopted = True
                    grew = True
                    break
            if not adopted:
                break
        return seq, m, grew

    if closed:
        # No opening can grow unless some path vertex still has a Maker
        # edge leaving the path; the check is cheap and skips the whole
        # trial loop on spanning cycles.
        reach = 0
        for v in order:
            reach |= maker_adj[v]
        if reach & ~mask:
            length = len(order)
            for idx in range(length):
                a, c = order[idx], order[(idx + 1) % length]
                if not ((anchor_mask >> a & 1) and (anchor_mask >> c & 1)):
                    continue
                # Opening the cycle between positions idx and idx+1
                # leaves a path from c around to a.
                trial = order[idx + 1:] + order[:idx + 1]
                new_seq, new_mask, grew = rotate_and_extend(list(trial), mask)
                if grew:
                    order, mask, closed = new_seq, new_mask, False
                    break
    else:
        order, mask, _ = rotate_and_extend(order, mask)
    grew_total = len(order) > start_len
    tracked.order = order
    tracked.mask = mask
    tracked.cycle_closed = closed
    if grew_total:
        tracked.generation = turn
    return tracked, grew_total
