"""Exponential Bell polynomials and potential polynomials evaluated at given
arguments. Values stay exact when the arguments are exact."""
from math import comb
from typing import Any, List, Sequence

from sympy.polys.domains import QQ_I

from eigenwkb.services.poly_core import exact, falling_factorial_scalar, is_exact, to_mp
from eigenwkb.utils.errors import ArgsTooShort


def _normalize(xs: Sequence[Any]) -> List[Any]:
    if all(is_exact(x) for x in xs):
        return [exact(x) for x in xs]
    return list(xs)


def _unit(xs: Sequence[Any]):
    if xs and not is_exact(xs[0]):
        return xs[0] * 0 + 1
    return QQ_I.one


def bell_table(n: int, xs: Sequence[Any]) -> List[List[Any]]:
    """Triangle B[m][k] for 0 <= k <= m <= n, built with
    B_{m,k} = sum_{j=1}^{m-k+1} C(m-1, j-1) x_j B_{m-j,k-1}."""
    xs = _normalize(xs)
    one = _unit(xs)
    zero = one * 0
    # Entries needing x_j beyond the supplied arguments stay None.
    table = [[None] * (n + 1) for _ in range(n + 1)]
    table[0][0] = one
    for m in range(1, n + 1):
        table[m][0] = zero
        for k in range(1, m + 1):
            if m - k + 1 > len(xs):
                continue
            acc = zero
            for j in range(1, m - k + 2):
                previous = table[m - j][k - 1]
                if previous is None:
                    continue
                acc = acc + xs[j - 1] * comb(m - 1, j - 1) * previous
            table[m][k] = acc
    return table


def bell_partial(n: int, k: int, xs: Sequence[Any]):
    """Partial Bell polynomial B_{n,k}(x_1, ..., x_{n-k+1})."""
    if not 0 <= k <= n:
        raise ValueError("bell_partial needs 0 <= k <= n")
    if n == 0:
        return _unit(_normalize(xs))
    if k == 0:
        return _unit(_normalize(xs)) * 0
    if len(xs) < n - k + 1:
        raise ArgsTooShort(n - k + 1, len(xs))
    return bell_table(n, xs)[n][k]


def bell_complete(n: int, xs: Sequence[Any]):
    """Complete Bell polynomial Y_n = sum_k B_{n,k}, Y_0 = 1."""
    if n < 0:
        raise ValueError("bell_complete needs n >= 0")
    if n == 0:
        return _unit(_normalize(xs))
    if len(xs) < n:
        raise ArgsTooShort(n, len(xs))
    row = bell_table(n, xs)[n]
    acc = row[0]
    for k in range(1, n + 1):
        acc = acc + row[k]
    return acc


def bell_complete_partial_derivative(n: int, k: int, xs: Sequence[Any]):
    """dY_n/dx_k = C(n, k) Y_{n-k}."""
    if not 1 <= k <= n:
        raise ValueError("bell_complete_partial_derivative needs 1 <= k <= n")
    return bell_complete(n - k, xs) * comb(n, k)


def potential(r: Any, n: int, xs: Sequence[Any]):
    """Potential polynomial P^{(r)}_n = sum_k (r)_k B_{n,k}, i.e. n! times the
    t^n coefficient of (1 + sum_m x_m t^m / m!)^r."""
    if n < 0:
        raise ValueError("potential needs n >= 0")
    if n == 0:
        return _unit(_normalize(xs))
    if len(xs) < n:
        raise ArgsTooShort(n, len(xs))
    row = bell_table(n, xs)[n]
    ctx = None if is_exact(row[n]) else row[n].context
    acc = row[0]
    for k in range(1, n + 1):
        ff = falling_factorial_scalar(r, k)
        if ctx is not None:
            ff = to_mp(ff, ctx)
        acc = acc + ff * row[k]
    return acc
