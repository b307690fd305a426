"""Slow, direct reference implementations used as test oracles.

Written with plain Python loops and the math module so they share no code
with the package under test.
"""

import cmath
import itertools
import math


def mean(xs):
    xs = list(xs)
    return sum(xs) / len(xs)


def pstdev(xs):
    m = mean(xs)
    return math.sqrt(sum((x - m) ** 2 for x in xs) / len(xs))


def variance(xs):
    m = mean(xs)
    return sum((x - m) ** 2 for x in xs) / len(xs)


def average_ranks(xs):
    ranks = [0.0] * len(xs)
    for i, x in enumerate(xs):
        below = sum(1 for y in xs if y < x)
        equal = sum(1 for y in xs if y == x)
        ranks[i] = below + (equal + 1) / 2
    return ranks


def _z(p):
    if max(p) == min(p):
        return [0.0] * len(p)
    m, s = mean(p), pstdev(p)
    return [(x - m) / s for x in p]


def corr_pearson(p1, p2):
    z1, z2 = _z(p1), _z(p2)
    return [a * b for a, b in zip(z1, z2)]


def corr_spearman(p1, p2):
    return corr_pearson(average_ranks(p1), average_ranks(p2))


def _sign(x):
    return (x > 0) - (x < 0)


def corr_kendall(p1, p2):
    d = len(p1)
    if d < 2:
        return [0.0] * d
    out = []
    for j in range(d):
        s = sum(_sign((p1[j] - p1[i]) * (p2[j] - p2[i])) for i in range(d) if i != j)
        out.append(s / (d - 1))
    return out


CORR = {"pearson": corr_pearson, "kendall": corr_kendall, "spearman": corr_spearman}


def dct(kind, x):
    n = len(x)
    out = []
    for k in range(n):
        if kind == 1:
            if n == 1:
                out.append(x[0])
                continue
            s = 0.5 * (x[0] + (-1) ** k * x[-1])
            s += sum(x[i] * math.cos(math.pi * i * k / (n - 1)) for i in range(1, n - 1))
        elif kind == 2:
            s = sum(x[i] * math.cos(math.pi / n * (i + 0.5) * k) for i in range(n))
        else:
            s = 0.5 * x[0] + sum(x[i] * math.cos(math.pi / n * i * (k + 0.5)) for i in range(1, n))
        out.append(s)
    return out


def dst(kind, x):
    n = len(x)
    out = []
    for k in range(n):
        if kind == 1:
            s = sum(x[i] * math.sin(math.pi * (i + 1) * (k + 1) / (n + 1)) for i in range(n))
        elif kind == 2:
            s = sum(x[i] * math.sin(math.pi / n * (i + 0.5) * (k + 1)) for i in range(n))
        else:
            s = 0.5 * (-1) ** k * x[-1]
            s += sum(x[i] * math.sin(math.pi / n * (i + 1) * (k + 0.5)) for i in range(n - 1))
        out.append(s)
    return out


def dft(x):
    n = len(x)
    return [sum(x[t] * cmath.exp(-2j * math.pi * k * t / n) for t in range(n)) for k in range(n)]


def complex_std(zs):
    m = sum(zs) / len(zs)
    return math.sqrt(sum(abs(z - m) ** 2 for z in zs) / len(zs))


_AGG = {"avg": mean, "max": max, "min": min}


def metric(name, plans):
    """Direct evaluation of one named metric on a list of plans (lists of floats)."""
    plans = [list(map(float, p)) for p in plans]
    if name == "avg-stdev":
        return mean(pstdev(p) for p in plans)
    if name == "max-stdev":
        return max(pstdev(p) for p in plans)
    if name == "min-stdev":
        return min(pstdev(p) for p in plans)
    if name == "max-value":
        return max(v for p in plans for v in p)
    if name == "min-value":
        return min(v for p in plans for v in p)
    for kind, fn in CORR.items():
        if name.endswith("corr-" + kind):
            prefix = name[: -len("-corr-" + kind)]
            outer, inner = {
                "avg": ("avg", "avg"),
                "max-avg": ("max", "avg"),
                "min-avg": ("min", "avg"),
                "avg-max": ("avg", "max"),
                "avg-min": ("avg", "min"),
                "max": ("max", "min"),
                "min": ("min", "min"),
            }[prefix]
            per_pair = [_AGG[inner](fn(p1, p2)) for p1, p2 in itertools.product(plans, plans)]
            return _AGG[outer](per_pair)
    for tname, tfn in (("dct", dct), ("dst", dst)):
        for kind in (1, 2, 3):
            suffix = f"{tname}{kind}-coeff"
            if name.endswith(suffix):
                prefix = name[: -len(suffix) - 1]
                outer, inner = {
                    "avg": ("avg", "avg"),
                    "max": ("max", "max"),
                    "min": ("min", "min"),
                    "avg-max": ("avg", "max"),
                    "avg-min": ("avg", "min"),
                }[prefix]
                return _AGG[outer]([_AGG[inner](tfn(kind, p)) for p in plans])
    coeffs = [dft(p) for p in plans]
    if name == "sum-of-0-dft-coeff":
        return abs(sum(c[0] for c in coeffs))
    if name == "max-of-0-dft-coeff":
        return abs(max(c[0].real for c in coeffs))
    if name == "sum-non0-dft-coeff":
        return abs(sum(v for c in coeffs for v in c[1:]))
    if name == "max-non0-dft-coeff":
        rest = [v for c in coeffs for v in c[1:]]
        if not rest:
            return 0.0
        best = rest[0]
        for v in rest[1:]:
            if abs(v) > abs(best):
                best = v
        return abs(best)
    if name == "sum-all-dft-coeff":
        return abs(sum(v for c in coeffs for v in c))
    if name == "avg-stdev-dft-coeff":
        return abs(mean(complex_std(c) for c in coeffs))
    raise KeyError(name)


def brute_force_minimum(plan_sets):
    """Exhaustive minimum of the variance of the summed selection."""
    best = math.inf
    for choice in itertools.product(*[range(len(ps)) for ps in plan_sets]):
        total = [sum(plan_sets[a][c][j] for a, c in enumerate(choice)) for j in range(len(plan_sets[0][0]))]
        best = min(best, variance(total))
    return best


def leaves_of_complete_tree(n, m):
    children = [0] * n
    for i in range(1, n):
        children[(i - 1) // m] += 1
    return sum(1 for c in children if c == 0)


def gaussian_kde(points, bandwidth, x):
    c = 1.0 / (len(points) * bandwidth * math.sqrt(2 * math.pi))
    return c * sum(math.exp(-0.5 * ((x - p) / bandwidth) ** 2) for p in points)
