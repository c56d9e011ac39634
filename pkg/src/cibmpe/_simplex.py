"""Exact feasibility LP (phase-one simplex with Bland's rule) over Fractions."""

from __future__ import annotations

from fractions import Fraction

from .rational import ONE, ZERO


def feasible_point(n: int, eq: list[tuple[list, Fraction]], ub: list[tuple[list, Fraction]]) -> list[Fraction] | None:
    """A point x >= 0 with ``a.x == b`` for each eq row and ``a.x <= b`` for each ub row, or None.

    Rows are ``(coefficients of length n, rhs)``.
    """
    rows = []
    n_slack = len(ub)
    for a, b in eq:
        rows.append(([Fraction(v) for v in a] + [ZERO] * n_slack, Fraction(b)))
    for j, (a, b) in enumerate(ub):
        slack = [ZERO] * n_slack
        slack[j] = ONE
        rows.append(([Fraction(v) for v in a] + slack, Fraction(b)))
    m = len(rows)
    width = n + n_slack
    if m == 0:
        return [ZERO] * n

    # tableau rows: coefficients over structural+slack+artificial columns, then rhs
    total = width + m
    tab = []
    for r, (a, b) in enumerate(rows):
        if b < 0:
            a, b = [-v for v in a], -b
        art = [ZERO] * m
        art[r] = ONE
        tab.append(a + art + [b])
    basis = [width + r for r in range(m)]

    # phase-one objective: minimize the sum of artificials, written as reduced costs
    obj = [ZERO] * (total + 1)
    for row in tab:
        for c in range(width):
            obj[c] -= row[c]
        obj[total] -= row[total]

    while True:
        enter = next((c for c in range(total) if obj[c] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for r, row in enumerate(tab):
            if row[enter] > 0:
                ratio = row[total] / row[enter]
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                    leave, best = r, ratio
        if leave is None:  # cannot happen in phase one: objective bounded below by 0
            break
        _pivot(tab, obj, leave, enter)
        basis[leave] = enter

    if obj[total] != 0:
        return None
    x = [ZERO] * total
    for r, c in enumerate(basis):
        x[c] = tab[r][total]
    return x[:n]


def _pivot(tab: list, obj: list, r: int, c: int) -> None:
    row = tab[r]
    piv = row[c]
    if piv != ONE:
        tab[r] = row = [v / piv for v in row]
    for k, other in enumerate(tab):
        if k != r and other[c]:
            f = other[c]
            tab[k] = [v - f * w for v, w in zip(other, row)]
    if obj[c]:
        f = obj[c]
        obj[:] = [v - f * w for v, w in zip(obj, row)]
