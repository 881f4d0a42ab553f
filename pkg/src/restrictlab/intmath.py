"""Exact integer helpers shared by the enumeration and arc machinery."""

from __future__ import annotations

import math


def ikroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) computed exactly for n >= 0, k >= 1."""
    if n < 0:
        raise ValueError("ikroot needs n >= 0")
    if k < 1:
        raise ValueError("ikroot needs k >= 1")
    if n in (0, 1) or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    # float seed, then exact adjustment; Newton would also do but the
    # seed is already within a few units at desk scale
    r = int(round(n ** (1.0 / k)))
    while r > 0 and r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def ceil_kroot(n: int, k: int) -> int:
    """ceil(n ** (1/k)) exactly."""
    r = ikroot(n, k)
    return r if r**k == n else r + 1


def ceil_log2(n: int) -> int:
    """ceil(log2 n) for n >= 1."""
    if n < 1:
        raise ValueError("ceil_log2 needs n >= 1")
    return (n - 1).bit_length()
