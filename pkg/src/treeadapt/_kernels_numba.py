"""Compiled learning kernels.

Array conventions shared with ``_kernels_numpy``:

plans      (n, k_max, d) padded plan values, agent-indexed
counts     (n,) number of valid plans per agent
order      agents in bottom-up order (children before parents)
child_ptr  (n + 1,) CSR offsets into ``child_idx`` (agent ids)
topdown    agents in breadth-first order, root first
parent     (n,) parent agent, -1 for the root
"""

import numpy as np
from numba import njit


@njit(cache=True)
def variance(x):
    d = x.shape[0]
    total = 0.0
    for i in range(d):
        total += x[i]
    mean = total / d
    acc = 0.0
    for i in range(d):
        diff = x[i] - mean
        acc += diff * diff
    return acc / d


@njit(cache=True)
def aggregate_subtrees(plans, order, child_ptr, child_idx, selected):
    n = plans.shape[0]
    d = plans.shape[2]
    subtree = np.empty((n, d))
    for a in order:
        for x in range(d):
            subtree[a, x] = plans[a, selected[a], x]
        for c in child_idx[child_ptr[a]:child_ptr[a + 1]]:
            for x in range(d):
                subtree[a, x] += subtree[c, x]
    return subtree


@njit(cache=True)
def _best_plan(base_a, base_b, plans, a, count, cand):
    """Lowest-variance plan for context ``base_a + base_b``; lowest index wins ties."""
    d = cand.shape[0]
    best = -1
    best_cost = np.inf
    for p in range(count):
        for x in range(d):
            cand[x] = base_a[x] + base_b[x] + plans[a, p, x]
        cost = variance(cand)
        if cost < best_cost:
            best = p
            best_cost = cost
    return best, best_cost


@njit(cache=True)
def _sum_children(children, accept, new_subtree, subtree, out):
    d = out.shape[0]
    for x in range(d):
        out[x] = 0.0
    for i in range(children.shape[0]):
        c = children[i]
        if accept[i]:
            for x in range(d):
                out[x] += new_subtree[c, x]
        else:
            for x in range(d):
                out[x] += subtree[c, x]


@njit(cache=True)
def learning_step(plans, counts, order, child_ptr, child_idx, topdown, parent, selected, subtree, g_prev, cost_prev):
    n = plans.shape[0]
    d = plans.shape[2]
    new_selected = selected.copy()
    new_subtree = np.empty_like(subtree)
    retain = np.zeros(n, dtype=np.bool_)
    others = np.empty(d)
    children_sum = np.empty(d)
    trial = np.empty(d)
    cand = np.empty(d)
    root = topdown[0]

    for a in order:
        children = child_idx[child_ptr[a]:child_ptr[a + 1]]
        nc = children.shape[0]
        for x in range(d):
            others[x] = g_prev[x] - subtree[a, x]

        # approve children's updates greedily: start from all approved and
        # flip the single approval that lowers the cost most, until none does
        accept = np.ones(nc, dtype=np.bool_)
        _sum_children(children, accept, new_subtree, subtree, children_sum)
        best, best_cost = _best_plan(others, children_sum, plans, a, counts[a], cand)
        for _ in range(4 * nc):
            flip = -1
            flip_cost = best_cost
            for i in range(nc):
                c = children[i]
                for x in range(d):
                    if accept[i]:
                        trial[x] = children_sum[x] - new_subtree[c, x] + subtree[c, x]
                    else:
                        trial[x] = children_sum[x] - subtree[c, x] + new_subtree[c, x]
                _, cost = _best_plan(others, trial, plans, a, counts[a], cand)
                if cost < flip_cost:
                    flip = i
                    flip_cost = cost
            if flip < 0:
                break
            accept[flip] = not accept[flip]
            _sum_children(children, accept, new_subtree, subtree, children_sum)
            best, best_cost = _best_plan(others, children_sum, plans, a, counts[a], cand)

        if a == root:
            keep_cost = cost_prev
        else:
            for x in range(d):
                cand[x] = others[x] + subtree[a, x]
            keep_cost = variance(cand)
        if best_cost < keep_cost:
            new_selected[a] = best
            for x in range(d):
                new_subtree[a, x] = children_sum[x] + plans[a, best, x]
            for i in range(nc):
                if not accept[i]:
                    retain[children[i]] = True
        else:
            retain[a] = True
            for x in range(d):
                new_subtree[a, x] = subtree[a, x]

    for a in topdown:
        p = parent[a]
        if p >= 0 and retain[p]:
            retain[a] = True
        if retain[a]:
            new_selected[a] = selected[a]
            for x in range(d):
                new_subtree[a, x] = subtree[a, x]

    if retain[root]:
        return new_selected, new_subtree, g_prev.copy(), cost_prev
    g_new = new_subtree[root].copy()
    return new_selected, new_subtree, g_new, variance(g_new)
