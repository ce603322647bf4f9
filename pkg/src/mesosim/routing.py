"""Shortest-path routines over integer-microsecond link weights.

Integer weights keep path costs exact, so engine results can be compared
against an independent oracle with equality rather than tolerances.
"""

from __future__ import annotations

import heapq

from .network import Graph


def dijkstra(graph: Graph, weights: dict[int, int], src: int, dst: int):
    """Return (cost_us, link-id path) or None if unreachable."""
    if src == dst:
        return 0, ()
    dist = {src: 0}
    pred: dict[int, int] = {}
    heap = [(0, src)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        if u == dst:
            break
        done.add(u)
        for lid in graph.out_links[u]:
            v = graph.links[lid].to
            nd = d + weights[lid]
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                pred[v] = lid
                heapq.heappush(heap, (nd, v))
    if dst not in dist:
        return None
    path = []
    v = dst
    while v != src:
        lid = pred[v]
        path.append(lid)
        v = graph.links[lid].frm
    return dist[dst], tuple(reversed(path))


def dist_from(graph: Graph, weights: dict[int, int], src: int, reverse: bool = False) -> dict[int, int]:
    """All-target distances from ``src`` (or to it, with ``reverse``)."""
    dist = {src: 0}
    heap = [(0, src)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        lids = graph.in_links[u] if reverse else graph.out_links[u]
        for lid in lids:
            link = graph.links[lid]
            v = link.frm if reverse else link.to
            nd = d + weights[lid]
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def lexmin_shortest_path(graph: Graph, weights: dict[int, int], src: int, dst: int):
    """Shortest path with ties broken by smallest lexicographic link-id sequence.

    Built by walking forward from ``src``, always taking the smallest link id
    that stays on some shortest path (verified against reverse distances).
    """
    to_dst = dist_from(graph, weights, dst, reverse=True)
    if src not in to_dst:
        return None
    path = []
    u = src
    while u != dst:
        for lid in graph.out_links[u]:  # out_links are id-sorted
            link = graph.links[lid]
            if link.to in to_dst and weights[lid] + to_dst[link.to] == to_dst[u]:
                path.append(lid)
                u = link.to
                break
        else:  # pragma: no cover - unreachable if to_dst is consistent
            raise AssertionError("shortest-path walk lost the gradient")
    return to_dst[src], tuple(path)


def freespeed_weights(graph: Graph) -> dict[int, int]:
    return {lid: link.tf_us for lid, link in graph.links.items()}
