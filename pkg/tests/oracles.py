"""Brute-force reference implementations the tests check the engine against.

Everything here is deliberately naive — exhaustive enumeration, plain BFS,
quadratic scans — and shares no code with the package under test.
"""
from __future__ import annotations

import random
from fractions import Fraction

from showrunner import EventSpec, PipelineDef


def bf_has_cycle(deps: dict[str, set[str]]) -> bool:
    """DFS three-colour cycle detection over dependency edges."""
    WHITE, GREY, BLACK = 0, 1, 2
    colour = {node: WHITE for node in deps}

    def visit(node: str) -> bool:
        colour[node] = GREY
        for dep in deps[node]:
            if colour[dep] == GREY:
                return True
            if colour[dep] == WHITE and visit(dep):
                return True
        colour[node] = BLACK
        return False

    return any(colour[n] == WHITE and visit(n) for n in deps)


def bf_dependents(deps: dict[str, set[str]], start: str) -> set[str]:
    """Reachability along dependency->dependent edges via plain BFS."""
    children: dict[str, set[str]] = {n: set() for n in deps}
    for node, node_deps in deps.items():
        for dep in node_deps:
            children[dep].add(node)
    seen: set[str] = set()
    queue = [start]
    while queue:
        node = queue.pop(0)
        for child in children[node]:
            if child not in seen:
                seen.add(child)
                queue.append(child)
    return seen


def bf_all_chains(deps: dict[str, set[str]]) -> list[list[str]]:
    """Every root-to-sink dependency chain, by exhaustive extension."""
    children: dict[str, set[str]] = {n: set() for n in deps}
    for node, node_deps in deps.items():
        for dep in node_deps:
            children[dep].add(node)
    roots = [n for n in deps if not deps[n]]
    chains: list[list[str]] = []

    def extend(path: list[str]):
        tail = path[-1]
        if not children[tail]:
            chains.append(path)
            return
        for child in sorted(children[tail]):
            extend(path + [child])

    for root in sorted(roots):
        extend([root])
    return chains


def bf_critical_path(deps: dict[str, set[str]],
                     durations: dict[str, float]) -> tuple[float, list[str]]:
    """Longest chain by enumeration; equal lengths break to the smallest ids."""
    best_len: float | None = None
    best_path: list[str] | None = None
    for chain in bf_all_chains(deps):
        length = sum(durations[n] for n in chain)
        if best_len is None or length > best_len or \
                (length == best_len and chain < best_path):
            best_len, best_path = length, chain
    return best_len, best_path


def bf_serial(durations: dict[str, float]) -> float:
    total = 0.0
    for value in durations.values():
        total += value
    return total


def bf_shot_frames(duration: float, fps: float) -> int:
    """Smallest frame count covering the voiceover, by linear search."""
    product = Fraction(duration) * Fraction(fps)
    n = max(1, int(product))
    while Fraction(n) < product:
        n += 1
    return max(1, n)


def bf_extension_lengths(target: int, segment: int) -> list[int]:
    """Segment lengths by simulating rounds until coverage reaches the target."""
    lengths = [min(segment, target)]
    covered = lengths[0]
    while covered < target:
        lengths.append(segment - 1)
        covered += segment - 1
    return lengths


def random_dag(rng: random.Random, max_nodes: int = 12,
               max_duration: int = 20, zero_ok: bool = True) -> PipelineDef:
    """Random DAG with forward-only edges, so acyclicity holds by construction."""
    n = rng.randint(1, max_nodes)
    names = [f"e{i:02d}" for i in range(n)]
    rng.shuffle(names)
    events = []
    for i, name in enumerate(names):
        pool = names[:i]
        k = rng.randint(0, min(3, len(pool)))
        deps = rng.sample(pool, k) if k else []
        low = 0 if zero_ok else 1
        events.append(EventSpec(
            id=name,
            role=rng.choice(["scriptwriter", "artist", "actors", "crew"]),
            dependencies=frozenset(deps),
            duration=float(rng.randint(low, max_duration)),
        ))
    return PipelineDef(name=f"random-{rng.randint(0, 10**6)}", events=tuple(events))


def deps_of(pipeline: PipelineDef) -> dict[str, set[str]]:
    return {e.id: set(e.dependencies) for e in pipeline.events}
