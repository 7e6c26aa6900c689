"""Shared helpers for seeded random test objects."""

import random

from setiso.perm import Permutation, PermGroup


def rand_perm(rng: random.Random, n: int) -> Permutation:
    images = list(range(n))
    rng.shuffle(images)
    return Permutation(images)


def rand_group(rng: random.Random, n: int, max_gens: int = 2,
               order_cap: int = 10080) -> PermGroup:
    """Group from up to ``max_gens`` random permutations, resampled until the
    order fits under ``order_cap`` (keeps brute-force oracles feasible)."""
    while True:
        k = rng.randint(0, max_gens)
        gens = [rand_perm(rng, n) for _ in range(k)]
        g = PermGroup(gens, n)
        if g.order() <= order_cap:
            return g
        # retry with smaller support: derange only a few points
        pts = rng.sample(range(n), rng.randint(2, max(2, n // 2)))
        images = list(range(n))
        shuffled = pts[:]
        rng.shuffle(shuffled)
        for a, b in zip(pts, shuffled):
            images[a] = b
        try:
            g = PermGroup([Permutation(images)], n)
        except ValueError:
            continue
        if g.order() <= order_cap:
            return g


def closure(gens, n, cap=2_000_000):
    """Plain BFS closure; independent of the stabilizer-chain machinery."""
    ident = tuple(range(n))
    seen = {ident}
    queue = [ident]
    tables = [g.images for g in gens]
    while queue:
        cur = queue.pop()
        for t in tables:
            nxt = tuple(t[i] for i in cur)
            if nxt not in seen:
                if len(seen) >= cap:
                    raise RuntimeError("closure cap exceeded")
                seen.add(nxt)
                queue.append(nxt)
    return seen
