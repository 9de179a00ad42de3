"""Pure-Python graph kernels (fallback for the compiled module).

All kernels work on CSR adjacency: the successors of node u are
indices[indptr[u]:indptr[u+1]].  Boolean vectors are uint8 numpy arrays.
"""

import numpy as np


def box(indptr, indices, truth):
    """out[u] = 1 iff truth holds at every successor of u."""
    ptr = indptr.tolist()
    idx = indices.tolist()
    t = truth.tolist()
    n = len(ptr) - 1
    out = [1] * n
    for u in range(n):
        for k in range(ptr[u], ptr[u + 1]):
            if not t[idx[k]]:
                out[u] = 0
                break
    return np.array(out, dtype=np.uint8)


def reach(indptr, indices, seeds):
    """Nodes reachable from a seed in zero or more steps."""
    ptr = indptr.tolist()
    idx = indices.tolist()
    seen = seeds.astype(np.uint8).tolist()
    stack = [u for u, s in enumerate(seen) if s]
    while stack:
        u = stack.pop()
        for k in range(ptr[u], ptr[u + 1]):
            v = idx[k]
            if not seen[v]:
                seen[v] = 1
                stack.append(v)
    return np.array(seen, dtype=np.uint8)


def _renumber(block):
    ids = {}
    return [ids.setdefault(b, len(ids)) for b in block]


def refine(init, indptr, indices, labels):
    """Coarsest stable refinement of `init` for labelled edges.

    Blocks in the result are numbered by first occurrence.
    """
    ptr = indptr.tolist()
    idx = indices.tolist()
    lab = labels.tolist()
    n = len(ptr) - 1
    block = _renumber(init.tolist())
    count = len(set(block))
    while True:
        sigs = {}
        new = []
        for u in range(n):
            succ = sorted({(lab[k], block[idx[k]]) for k in range(ptr[u], ptr[u + 1])})
            key = (block[u], tuple(succ))
            new.append(sigs.setdefault(key, len(sigs)))
        block = _renumber(new)
        if len(sigs) == count:
            break
        count = len(sigs)
    return np.array(block, dtype=np.int32)
