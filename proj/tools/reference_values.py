#!/usr/bin/env python3
"""Recompute the constants frozen into the C++ tests at 40 significant digits.

Independent of the library: closed forms are evaluated with mpmath and the
spread examples by brute-force enumeration of arc realizations.
"""

import itertools

from mpmath import ceil, e, exp, ln, mp, mpf, pi, sqrt

mp.dps = 40


def radii(t, d, m, D, v):
    t, d, m = mpf(t), mpf(d), mpf(m)
    alpha = sqrt(d * ln(1 + t * m / d) + 4 * ln(t)) + D
    beta = v * alpha * (sqrt(2 * ln(2 * t)) + sqrt(2 * ln(m) + 4 * ln(t)))
    return alpha, beta


def bound(n, m, d, T, v, D, eta):
    alpha, beta = radii(T, d, m, D, v)
    n, m, d, T, v = (mpf(x) for x in (n, m, d, T, v))
    growth = (alpha + beta) * n * m / eta * sqrt(d * T * ln(1 + m * T / d) / ln(2))
    constant = n * (4 * m * sqrt(pi) * exp(1 / (2 * v * v)) / v + pi**2 / 3)
    return growth + constant


def sample_size(n, l, eps, opt_lower):
    n = mpf(n)
    raw = 7 * n * (l * ln(n) + n * ln(2)) / (opt_lower * mpf(eps) ** 2)
    return raw, ceil(raw)


def exact_spread(n, arcs, w, seeds):
    total = mpf(0)
    for live in itertools.product([0, 1], repeat=len(arcs)):
        p = mpf(1)
        for bit, we in zip(live, w):
            p *= we if bit else 1 - we
        reached = set(seeds)
        frontier = list(seeds)
        while frontier:
            u = frontier.pop()
            for (a, b), bit in zip(arcs, live):
                if bit and a == u and b not in reached:
                    reached.add(b)
                    frontier.append(b)
        total += p * len(reached)
    return total


def main():
    print("alpha, beta (t=1, d=1, m=1, D=0, v=1):", *radii(1, 1, 1, 0, 1))
    print("alpha, beta (t=1, d=10, m=319, D=1, v=1):", *radii(1, 10, 319, 1, 1))
    print("bound (n=25, m=319, d=10, T=5000, v=1, D=1):", bound(25, 319, 10, 5000, 1, 1, 1 - 1 / e))
    print("sample size (n=25, l=1, eps=0.6, opt_lower=25):", *sample_size(25, 1, 0.6, 25))
    half = [mpf("0.5")] * 4
    print("path a->b->c:", exact_spread(3, [(0, 1), (1, 2)], half[:2], [0]))
    print("diamond:", exact_spread(4, [(0, 1), (0, 2), (1, 3), (2, 3)], half, [0]))


if __name__ == "__main__":
    main()
