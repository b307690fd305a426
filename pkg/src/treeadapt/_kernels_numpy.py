"""Pure-numpy learning kernels; same contract as ``_kernels_numba``.

Agents are still visited one by one (the bottom-up order is the algorithm),
but each agent's plan evaluation is vectorized over its plans.
"""

import numpy as np


def variance(x):
    x = np.asarray(x)
    mean = x.mean(axis=-1, keepdims=True)
    return ((x - mean) ** 2).mean(axis=-1)


def aggregate_subtrees(plans, order, child_ptr, child_idx, selected):
    n, _, d = plans.shape
    subtree = np.empty((n, d))
    for a in order:
        acc = plans[a, selected[a]].copy()
        for c in child_idx[child_ptr[a]:child_ptr[a + 1]]:
            acc += subtree[c]
        subtree[a] = acc
    return subtree


def _best_plan(context, plans_a):
    costs = variance(context + plans_a)
    best = int(np.argmin(costs))
    return best, float(costs[best])


def _sum_children(children, accept, new_subtree, subtree, d):
    out = np.zeros(d)
    for c, ok in zip(children, accept):
        out += new_subtree[c] if ok else subtree[c]
    return out


def learning_step(plans, counts, order, child_ptr, child_idx, topdown, parent, selected, subtree, g_prev, cost_prev):
    n, _, d = plans.shape
    new_selected = selected.copy()
    new_subtree = np.empty_like(subtree)
    retain = np.zeros(n, dtype=bool)
    root = topdown[0]

    for a in order:
        children = child_idx[child_ptr[a]:child_ptr[a + 1]]
        plans_a = plans[a, : counts[a]]
        others = g_prev - subtree[a]

        accept = np.ones(len(children), dtype=bool)
        children_sum = _sum_children(children, accept, new_subtree, subtree, d)
        best, best_cost = _best_plan(others + children_sum, plans_a)
        for _ in range(4 * len(children)):
            if len(children) == 0:
                break
            # all single-approval flips at once: (nc, d) trial child sums
            delta = np.where(accept[:, None], subtree[children] - new_subtree[children],
                             new_subtree[children] - subtree[children])
            trials = (others + children_sum)[None, None, :] + delta[:, None, :] + plans_a[None, :, :]
            flip_costs = variance(trials).min(axis=1)
            flip = int(np.argmin(flip_costs))
            if not flip_costs[flip] < best_cost:
                break
            accept[flip] = not accept[flip]
            children_sum = _sum_children(children, accept, new_subtree, subtree, d)
            best, best_cost = _best_plan(others + children_sum, plans_a)

        # the root compares against the recorded cost so that recorded costs never rise
        keep_cost = cost_prev if a == root else float(variance(others + subtree[a]))
        if best_cost < keep_cost:
            new_selected[a] = best
            new_subtree[a] = children_sum + plans_a[best]
            retain[children[~accept]] = True
            if a == root:
                root_cost = best_cost
        else:
            retain[a] = True
            new_subtree[a] = subtree[a]

    for a in topdown:
        p = parent[a]
        if p >= 0 and retain[p]:
            retain[a] = True
        if retain[a]:
            new_selected[a] = selected[a]
            new_subtree[a] = subtree[a]

    if retain[root]:
        return new_selected, new_subtree, g_prev.copy(), cost_prev
    return new_selected, new_subtree, new_subtree[root].copy(), root_cost
