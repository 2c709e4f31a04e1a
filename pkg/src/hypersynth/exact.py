"""Exact rational chain analysis, used as a test oracle.

Every float has an exact Fraction value, so converting a chain's rows to
Fractions and solving the linear systems with exact Gaussian elimination
yields the mathematically exact answer for the chain as stored.  Quadratic
memory and cubic time in rationals: intended for models of around ten
states, not for production checking.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import MissingRewardsError, ModelError
from .model import Mc, TargetSet


def solve_fractions(a, b):
    """Solve a x = b by Gaussian elimination over Fractions.

    a is a list of rows, b a list; both are copied.  Raises ModelError on a
    singular matrix.
    """

    n = len(b)
    m = [list(map(Fraction, row)) + [Fraction(x)] for row, x in zip(a, b)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            raise ModelError("singular system in exact solve")
        m[col], m[pivot] = m[pivot], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


def _rows(mc: Mc):
    return [[(t, Fraction(p)) for t, p in mc.trans[s]] for s in range(mc.num_states)]


def _target(mc, target):
    if isinstance(target, TargetSet):
        return frozenset(target.states)
    return frozenset(target)


def _backward(mc, seeds):
    pred = [[] for _ in range(mc.num_states)]
    for s in range(mc.num_states):
        for t, _ in mc.trans[s]:
            pred[t].append(s)
    seen = set(seeds)
    stack = list(seeds)
    while stack:
        x = stack.pop()
        for s in pred[x]:
            if s not in seen:
                seen.add(s)
                stack.append(s)
    return seen


def reach_probs_exact(mc: Mc, target) -> list[Fraction]:
    """Exact reachability probabilities of the chain as stored."""

    t = _target(mc, target)
    rows = _rows(mc)
    n = mc.num_states
    out = [Fraction(0)] * n
    for s in t:
        out[s] = Fraction(1)
    mid = sorted(_backward(mc, t) - t)
    if not mid:
        return out
    idx = {s: i for i, s in enumerate(mid)}
    a = [[Fraction(1 if i == j else 0) for j in range(len(mid))] for i in range(len(mid))]
    b = [Fraction(0)] * len(mid)
    for s in mid:
        for succ, p in rows[s]:
            if succ in t:
                b[idx[s]] += p
            elif succ in idx:
                a[idx[s]][idx[succ]] -= p
    x = solve_fractions(a, b)
    for s in mid:
        out[s] = x[idx[s]]
    return out


def expected_reward_exact(mc: Mc, target):
    """Exact expected rewards; None marks states where the target is not
    almost surely reached (the float engine reports +inf there)."""

    if mc.rewards is None:
        raise MissingRewardsError("no rewards")
    t = _target(mc, target)
    reach = reach_probs_exact(mc, target)
    n = mc.num_states
    out: list[Fraction | None] = [None] * n
    for s in t:
        out[s] = Fraction(0)
    mid = sorted(s for s in range(n) if s not in t and reach[s] == 1)
    if not mid:
        return out
    rows = _rows(mc)
    idx = {s: i for i, s in enumerate(mid)}
    a = [[Fraction(1 if i == j else 0) for j in range(len(mid))] for i in range(len(mid))]
    b = [Fraction(mc.rewards[s]) for s in mid]
    for s in mid:
        for succ, p in rows[s]:
            if succ in idx:
                a[idx[s]][idx[succ]] -= p
    x = solve_fractions(a, b)
    for s in mid:
        out[s] = x[idx[s]]
    return out


def expected_visits_exact(mc: Mc, from_state: int):
    """Exact expected visit counts for transient states; None marks states
    of a bottom SCC hit with positive probability (the float engine caps
    them), 0 marks unreachable ones."""

    n = mc.num_states
    # bottom SCCs by Tarjan would be overkill here: reuse the float module's
    # graph helpers, which are exact set computations
    from .analysis import _mc_bottom_scc_states, _mc_forward_reach

    bottoms = _mc_bottom_scc_states(mc)
    reachable = _mc_forward_reach(mc, from_state)
    rows = _rows(mc)
    transient = sorted(s for s in range(n) if s not in bottoms)
    out: list[Fraction | None] = [Fraction(0)] * n
    if transient:
        idx = {s: i for i, s in enumerate(transient)}
        a = [[Fraction(1 if i == j else 0) for j in range(len(transient))] for i in range(len(transient))]
        b = [Fraction(0)] * len(transient)
        if from_state in idx:
            b[idx[from_state]] = Fraction(1)
        for s in transient:
            for succ, p in rows[s]:
                if succ in idx:
                    a[idx[succ]][idx[s]] -= p
        x = solve_fractions(a, b)
        for s in transient:
            out[s] = x[idx[s]] if s in reachable else Fraction(0)
    for s in bottoms:
        out[s] = None if s in reachable else Fraction(0)
    return out
