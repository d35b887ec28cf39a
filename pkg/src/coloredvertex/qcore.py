"""Numeric tower, q-special-function primitives, and composition combinatorics.

Exact values are arbitrary-precision rationals (gmpy2.mpq when available,
fractions.Fraction otherwise).  All weight formulas elsewhere in the package
are written polymorphically, so passing floats yields float evaluation and
passing rationals yields exact evaluation.

Color vectors (arrow multiplicity vectors) are plain tuples of nonnegative
integers; helpers below provide unit vectors, interval sums, and arithmetic.
An ``NComposition`` is an n-block composition with weakly decreasing parts in
each block, carrying the multiplicity counters used by the strip partition
functions and line ensembles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

try:
    from gmpy2 import mpq as _mpq

    def QQ(num, den=1):
        """Exact rational constructor."""
        return _mpq(num, den)

    _EXACT_TYPES = (int, Fraction, type(_mpq(0)))
except ImportError:  # pragma: no cover - gmpy2 is normally present
    def QQ(num, den=1):
        """Exact rational constructor."""
        return Fraction(num, den)

    _EXACT_TYPES = (int, Fraction)


class PoleError(ZeroDivisionError):
    """A weight or series was evaluated at a pole of its parameters."""


class UnsupportedEvaluationError(ValueError):
    """The requested evaluation mode is not defined (e.g. exact infinite products)."""


class DimensionError(ValueError):
    """Vector arguments have mismatched lengths."""


def is_exact(value) -> bool:
    """Return True when ``value`` is an exact rational (int/Fraction/mpq)."""
    return isinstance(value, _EXACT_TYPES)


def as_float(value) -> float:
    """Convert an exact or float scalar to float."""
    return float(value)


# ---------------------------------------------------------------------------
# q-special functions
# ---------------------------------------------------------------------------

#: Relative tail threshold for infinite q-Pochhammer truncation (float mode).
POCHHAMMER_INF_TAIL = 1e-16


def q_pochhammer(a, q, k, convention: str = "reciprocal"):
    """q-Pochhammer symbol (a; q)_k.

    For k >= 0 returns prod_{j=0}^{k-1} (1 - a q^j); (a; q)_0 = 1.

    For k < 0 the default ``convention="reciprocal"`` returns the standard
    1 / (a q^k; q)_{-k}; ``convention="literal"`` instead returns the product
    prod_{j=1}^{-k} (1 - a q^{-j}).

    k = math.inf is supported in float mode only and requires |q| < 1; the
    product is truncated once the remaining factors differ from 1 by less
    than ``POCHHAMMER_INF_TAIL`` relative.
    """
    if k == math.inf:
        if is_exact(a) and is_exact(q):
            raise UnsupportedEvaluationError(
                "infinite q-Pochhammer requires float mode")
        a = float(a)
        q = float(q)
        if abs(q) >= 1.0:
            raise UnsupportedEvaluationError(
                "infinite q-Pochhammer requires |q| < 1")
        prod = 1.0
        term = a
        while abs(term) >= POCHHAMMER_INF_TAIL:
            prod *= 1.0 - term
            term *= q
        return prod
    k = int(k)
    if k >= 0:
        prod = a - a + 1  # one, in the arithmetic of a
        factor = a
        for _ in range(k):
            prod *= 1 - factor
            factor *= q
        return prod
    m = -k
    if convention == "literal":
        prod = a - a + 1
        qinv = 1 / QQ(q) if is_exact(q) else 1.0 / q
        factor = a * qinv
        for _ in range(m):
            prod *= 1 - factor
            factor *= qinv
        return prod
    if convention == "reciprocal":
        shifted = a * (1 / QQ(q) if is_exact(q) else 1.0 / q) ** m
        denom = q_pochhammer(shifted, q, m)
        if denom == 0:
            raise PoleError("(a q^k; q)_{-k} vanishes")
        return 1 / denom
    raise ValueError(f"unknown convention {convention!r}")


def phi_form(X, Y) -> int:
    """Strictly-upper bilinear form phi(X, Y) = sum_{i < j} X_i Y_j."""
    if len(X) != len(Y):
        raise DimensionError(f"length mismatch: {len(X)} vs {len(Y)}")
    total = 0
    suffix = sum(Y)
    for i in range(len(X)):
        suffix -= Y[i]
        total += X[i] * suffix
    return total


def hypergeometric_terminating(m: int, a_list, b_list, q, z):
    """Terminating basic hypergeometric sum.

    Returns sum_{i=0}^{m} z^i (q^{-m}; q)_i / (q; q)_i
    prod_j (a_j; q)_i / (b_j; q)_i.

    Raises PoleError naming the offending (b_j, i) when a denominator
    Pochhammer factor vanishes for some i in 0..m.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    one = q - q + 1
    qinv_m = one / q ** m if is_exact(q) else 1.0 / q ** m
    total = one * 1
    term = one * 1
    for i in range(1, m + 1):
        # multiply the i-1 -> i increment of every Pochhammer ratio
        term *= z * (1 - qinv_m * q ** (i - 1)) / (1 - q ** i)
        for a in a_list:
            term *= 1 - a * q ** (i - 1)
        for b in b_list:
            factor = 1 - b * q ** (i - 1)
            if factor == 0:
                raise PoleError(
                    f"denominator Pochhammer (b={b}; q)_{i} vanishes")
            term /= factor
        total += term
    return total


# ---------------------------------------------------------------------------
# Color vectors
# ---------------------------------------------------------------------------

def unit(n: int, i: int):
    """Unit vector e_i of length n; e_0 is the zero vector."""
    if not 0 <= i <= n:
        raise DimensionError(f"color {i} out of range [0, {n}]")
    return tuple(1 if k == i - 1 else 0 for k in range(n))


def vec_add(X, Y):
    """Entrywise sum of two equal-length integer vectors."""
    if len(X) != len(Y):
        raise DimensionError(f"length mismatch: {len(X)} vs {len(Y)}")
    return tuple(x + y for x, y in zip(X, Y))


def vec_sub(X, Y):
    """Entrywise difference X - Y (may contain negative entries)."""
    if len(X) != len(Y):
        raise DimensionError(f"length mismatch: {len(X)} vs {len(Y)}")
    return tuple(x - y for x, y in zip(X, Y))


def vec_ge(X, Y) -> bool:
    """True when X >= Y entrywise."""
    return all(x >= y for x, y in zip(X, Y))


def vec_total(X) -> int:
    """|X| = sum of entries."""
    return sum(X)


def block_sum(X, i: int, j: int) -> int:
    """X_{[i, j]} = sum_{k=i}^{j} X_k (1-based, inclusive); 0 when i > j."""
    if i > j:
        return 0
    return sum(X[i - 1: j])


def iter_vectors_below(bound):
    """Iterate all integer vectors 0 <= V <= bound entrywise."""
    if not bound:
        yield ()
        return
    for head in range(bound[0] + 1):
        for tail in iter_vectors_below(bound[1:]):
            yield (head,) + tail


# ---------------------------------------------------------------------------
# n-compositions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NComposition:
    """An n-block composition mu = (mu^(1) | ... | mu^(n)).

    Each block is a weakly decreasing tuple of nonnegative integers.  The
    block index is the color of the corresponding arrows; multiplicity
    counters m_k, m_{<=k} and their >=c restrictions are provided.
    """

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(int(p) for p in block) for block in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        for c, block in enumerate(blocks, start=1):
            for a, b in zip(block, block[1:]):
                if a < b:
                    raise ValueError(
                        f"block {c} is not weakly decreasing: {block}")
            if block and block[-1] < 0:
                raise ValueError(f"block {c} has negative parts: {block}")

    @property
    def n(self) -> int:
        return len(self.blocks)

    @property
    def length(self) -> int:
        """ell(mu) = total number of parts."""
        return sum(len(block) for block in self.blocks)

    def block_length(self, c: int) -> int:
        """ell(mu^(c))."""
        return len(self.blocks[c - 1])

    def lengths(self) -> tuple:
        """The color-count vector (ell(mu^(1)), ..., ell(mu^(n)))."""
        return tuple(len(block) for block in self.blocks)

    @property
    def max_part(self) -> int:
        return max((block[0] for block in self.blocks if block), default=0)

    def m(self, k: int, c: int) -> int:
        """Multiplicity m_k(mu^(c))."""
        return sum(1 for p in self.blocks[c - 1] if p == k)

    def m_le(self, k: int, c: int) -> int:
        """m_{<=k}(mu^(c)) = number of parts of mu^(c) that are <= k."""
        return sum(1 for p in self.blocks[c - 1] if p <= k)

    def m_ge_color(self, k: int, c: int) -> int:
        """m_k^{>=c}(mu) = sum_{i=c}^{n} m_k(mu^(i))."""
        return sum(self.m(k, i) for i in range(c, self.n + 1))

    def m_le_ge_color(self, k: int, c: int) -> int:
        """m_{<=k}^{>=c}(mu) = sum_{i=c}^{n} m_{<=k}(mu^(i))."""
        return sum(self.m_le(k, i) for i in range(c, self.n + 1))

    def column_vector(self, k: int):
        """The color multiplicity vector (m_k(mu^(1)), ..., m_k(mu^(n)))."""
        return tuple(self.m(k, c) for c in range(1, self.n + 1))

    def add_part(self, c: int, value: int) -> "NComposition":
        """Insert a part into block c, keeping the block sorted."""
        block = sorted(self.blocks[c - 1] + (value,), reverse=True)
        blocks = list(self.blocks)
        blocks[c - 1] = tuple(block)
        return NComposition(tuple(blocks))

    @classmethod
    def empty(cls, n: int) -> "NComposition":
        return cls(tuple(() for _ in range(n)))

    @classmethod
    def from_columns(cls, columns) -> "NComposition":
        """Build from per-position color vectors: columns[k] = m-vector at k."""
        if not columns:
            raise ValueError("need at least one column vector")
        n = len(columns[0])
        blocks = []
        for c in range(n):
            parts = []
            for k in range(len(columns) - 1, -1, -1):
                parts.extend([k] * columns[k][c])
            parts.sort(reverse=True)
            blocks.append(tuple(parts))
        return cls(tuple(blocks))


def multiplicity(mu: NComposition, k: int, c="all", mode: str = "at") -> int:
    """Multiplicity counters of an n-composition.

    mode "at" counts parts equal to k, mode "le" counts parts <= k; c is a
    block index 1..n or "all" (restricting to colors >= 1, i.e. every block).
    Counting over colors >= c is obtained by passing ``c=("ge", c0)``.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if isinstance(c, tuple) and c[0] == "ge":
        c0 = c[1]
        return (mu.m_ge_color(k, c0) if mode == "at"
                else mu.m_le_ge_color(k, c0))
    if c == "all":
        return (mu.m_ge_color(k, 1) if mode == "at"
                else mu.m_le_ge_color(k, 1))
    if not 1 <= c <= mu.n:
        raise DimensionError(f"color {c} out of range [1, {mu.n}]")
    return mu.m(k, c) if mode == "at" else mu.m_le(k, c)


def iter_compositions(n: int, length: int, max_part: int):
    """Iterate all n-compositions with the given total length and part bound.

    Enumeration is over all splits of ``length`` into n block lengths and all
    weakly decreasing blocks with parts in [0, max_part].
    """
    def splits(total, bins):
        if bins == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for tail in splits(total - head, bins - 1):
                yield (head,) + tail

    def blocks_of(count, cap):
        if count == 0:
            yield ()
            return
        for top in range(cap, -1, -1):
            for rest in blocks_of(count - 1, top):
                yield (top,) + rest

    for lens in splits(length, n):
        for combo in _product_blocks(lens, max_part, blocks_of):
            yield NComposition(combo)


def _product_blocks(lens, max_part, blocks_of):
    if not lens:
        yield ()
        return
    for head in blocks_of(lens[0], max_part):
        for tail in _product_blocks(lens[1:], max_part, blocks_of):
            yield (head,) + tail
