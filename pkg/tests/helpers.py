"""Shared scripted inputs for the test suite."""

from __future__ import annotations

import random

from indivisible.oracles import sparse


def scripted_normalizer_oracles(count: int = 10, top: int = 120):
    """Deterministic mixes of isolated, matched, clique and star vertices below ``top``.

    Each oracle has at least 20 isolated and 20 non-isolated vertices below
    ``top``; blocks are drawn at random positions, so many vertices start
    isolated and are joined much later.
    """
    out = []
    for i in range(count):
        rng = random.Random(1000 + i)
        pool = list(range(1, top))
        rng.shuffle(pool)
        chosen = pool[: 40 + 2 * i]
        edges = []
        k = 0
        while k < len(chosen):
            kind = rng.choice(["match", "clique", "star"])
            size = 2 if kind == "match" else rng.randint(3, 4)
            block = sorted(chosen[k:k + size])
            k += size
            if len(block) < 2:
                edges.append((block[0], (block[0] + 1) % top or 1))
                continue
            if kind == "star":
                centre = block[-1]
                edges.extend((v, centre) for v in block[:-1])
            else:
                edges.extend((u, v) for j, u in enumerate(block) for v in block[j + 1:])
        edges = sorted({tuple(sorted(e)) for e in edges if e[0] != e[1]})
        g = sparse(edges, description=f"scripted-{i}")
        non_isolated = {v for e in edges for v in e}
        assert len(non_isolated) >= 20 and top - len(non_isolated) >= 20
        out.append(g)
    return out
