"""Exact verification of Yang-Baxter equations and weight-level identities.

Both sides of each identity are rational functions of the parameters, so
equality is certified by exact evaluation at random rational points
(Schwartz-Zippel style genericity) rather than by symbolic manipulation.
Internal states are enumerated within conservation bounds, which makes
every sum provably finite.
"""

from dataclasses import dataclass

from .qcore import (
    QQ,
    iter_vectors_below,
    unit,
    vec_add,
    vec_ge,
    vec_sub,
)
from .kernels import weight_L, weight_R, weight_U, weight_W

__all__ = [
    "CheckReport",
    "check_color_merge_weights",
    "check_fusion",
    "check_ybe_basic",
    "check_ybe_fused",
    "merge_color",
    "merge_vector",
    "random_rational",
]


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one identity check: both sides and their difference."""

    ok: bool
    lhs: object
    rhs: object
    difference: object
    detail: str = ""


def random_rational(rng, bound: int = 97, signed: bool = False):
    """Random rational with numerator and denominator at most ``bound``."""
    num = rng.randint(1, bound)
    den = rng.randint(1, bound)
    if signed and rng.random() < 0.5:
        num = -num
    return QQ(num, den)


def _e(n: int, c: int):
    """Unit vector e_c in n coordinates, with e_0 the zero vector."""
    return unit(n, c)


def check_ybe_basic(q, x, y, z, s, boundary, variant: str = "RRR"):
    """Check one instance of the basic Yang-Baxter equation.

    variant:
        RRR  -- three R vertices; ``boundary`` is six colors
                (i1, j1, k1, i3, j3, k3).
        RLL  -- one R vertex and two L rows; ``boundary`` is
                (i1, j1, K1, i3, j3, K3) with K1, K3 color vectors.
        RLhL -- as RLL with the x-row L weights normalized.

    Returns a :class:`CheckReport` whose difference must be exactly 0.
    """
    if variant == "RRR":
        i1, j1, k1, i3, j3, k3 = boundary
        n = max(boundary)
        lhs = q * 0
        rhs = q * 0
        for i2 in range(n + 1):
            for j2 in range(n + 1):
                for k2 in range(n + 1):
                    lhs = lhs + (
                        weight_R(q, y / x, i1, j1, i2, j2)
                        * weight_R(q, z / x, k1, j2, k2, j3)
                        * weight_R(q, z / y, k2, i2, k3, i3))
                    rhs = rhs + (
                        weight_R(q, z / y, k1, i1, k2, i2)
                        * weight_R(q, z / x, k2, j1, k3, j2)
                        * weight_R(q, y / x, i2, j2, i3, j3))
    elif variant in ("RLL", "RLhL"):
        i1, j1, K1, i3, j3, K3 = boundary
        K1, K3 = tuple(K1), tuple(K3)
        n = len(K1)
        hat = variant == "RLhL"
        lhs = q * 0
        rhs = q * 0
        for i2 in range(n + 1):
            for j2 in range(n + 1):
                bound_l = vec_add(K1, _e(n, j2))
                for K2 in iter_vectors_below(bound_l):
                    lhs = lhs + (
                        weight_R(q, y / x, i1, j1, i2, j2)
                        * weight_L(q, x, s, K1, j2, K2, j3, normalized=hat)
                        * weight_L(q, y, s, K2, i2, K3, i3))
                bound_r = vec_add(K1, _e(n, i1))
                for K2 in iter_vectors_below(bound_r):
                    rhs = rhs + (
                        weight_L(q, y, s, K1, i1, K2, i2)
                        * weight_L(q, x, s, K2, j1, K3, j2, normalized=hat)
                        * weight_R(q, y / x, i2, j2, i3, j3))
    else:
        raise ValueError(f"unknown basic YBE variant {variant!r}")
    diff = lhs - rhs
    return CheckReport(ok=(diff == 0), lhs=lhs, rhs=rhs, difference=diff,
                       detail=variant)


def check_ybe_fused(q, x, y, z, r2, s, t, boundary, variant: str = "UUU",
                    R: int | None = None):
    """Check one instance of the fused Yang-Baxter equation.

    ``boundary`` is six color vectors (I1, J1, K1, I3, J3, K3).  The spin
    parameter r enters only through its square, passed as ``r2``; this
    keeps evaluation exact when r is a half-integer power of q.

    variant:
        UUU  -- three fused stochastic vertices.
        UWhW -- the x-row vertices carry the normalized W weight;
                requires r2 = q^{-R} for the given integer R.  The outer
                vertices carry the unnormalized W weight with spin pair
                (s, t) on the incoming side and the plain U weight on
                the outgoing side; this is the unique gauge-consistent
                arrangement (the W gauge factors cancel only because
                color conservation fixes their total exponent).

    Returns a :class:`CheckReport` whose difference must be exactly 0.
    """
    I1, J1, K1, I3, J3, K3 = (tuple(V) for V in boundary)
    s2 = s * s

    if variant == "UUU":
        t2 = t * t

        def lhs_term(i_2, j_2, k_2):
            return (weight_U(q, x / y, I1, J1, i_2, j_2, r2, s2)
                    * weight_U(q, x / z, K1, j_2, k_2, J3, r2, t2)
                    * weight_U(q, y / z, k_2, i_2, K3, I3, s2, t2))

        def rhs_term(i_2, j_2, k_2):
            return (weight_U(q, y / z, K1, I1, k_2, i_2, s2, t2)
                    * weight_U(q, x / z, k_2, J1, K3, j_2, r2, t2)
                    * weight_U(q, x / y, i_2, j_2, I3, J3, r2, s2))
    elif variant == "UWhW":
        if R is None or r2 * q ** R != 1:
            raise ValueError("UWhW requires r2 = q^{-R} for an integer R")

        def lhs_term(i_2, j_2, k_2):
            return (weight_U(q, x / y, I1, J1, i_2, j_2, r2, s2)
                    * weight_W(q, x / z, K1, j_2, k_2, J3, r2=r2, s=t,
                               variant="normalized", R=R)
                    * weight_W(q, y / z, k_2, i_2, K3, I3, r2=s2, s=t))

        def rhs_term(i_2, j_2, k_2):
            return (weight_W(q, y / z, K1, I1, k_2, i_2, r2=s2, s=t)
                    * weight_W(q, x / z, k_2, J1, K3, j_2, r2=r2, s=t,
                               variant="normalized", R=R)
                    * weight_U(q, x / y, i_2, j_2, I3, J3, r2, s2))
    else:
        raise ValueError(f"unknown fused YBE variant {variant!r}")

    lhs = q * 0
    for I2 in iter_vectors_below(vec_add(I1, J1)):
        J2 = vec_sub(vec_add(I1, J1), I2)
        K2 = vec_add(K1, vec_sub(J2, J3))
        if min(K2) < 0:
            continue
        lhs = lhs + lhs_term(I2, J2, K2)

    rhs = q * 0
    for I2 in iter_vectors_below(vec_add(K1, I1)):
        K2 = vec_sub(vec_add(K1, I1), I2)
        J2 = vec_add(K2, vec_sub(J1, K3))
        if min(J2) < 0:
            continue
        rhs = rhs + rhs_term(I2, J2, K2)

    diff = lhs - rhs
    return CheckReport(ok=(diff == 0), lhs=lhs, rhs=rhs, difference=diff,
                       detail=variant)


def merge_color(c: int) -> int:
    """Identify colors 1 and 2: 0 -> 0, {1, 2} -> 1, i -> i - 1 for i >= 3."""
    if c <= 1:
        return c
    return c - 1


def merge_vector(I):
    """Identify colors 1 and 2 in a color vector (needs n >= 2)."""
    I = tuple(I)
    if len(I) < 2:
        raise ValueError("merging needs at least two colors")
    return (I[0] + I[1],) + I[2:]


def _split_colors(c_merged: int, n: int):
    """Colors in 0..n mapping to ``c_merged`` under color merging."""
    if c_merged == 0:
        return (0,)
    if c_merged == 1:
        return (1, 2)
    return (c_merged + 1,)


def _split_vectors(I_merged):
    """Vectors in n coordinates mapping to ``I_merged`` under merging."""
    I_merged = tuple(I_merged)
    head = I_merged[0]
    for k in range(head + 1):
        yield (k, head - k) + I_merged[1:]


def check_color_merge_weights(q, x, s, A, b: int, C_merged, d_merged: int):
    """Check that identifying colors 1 and 2 merges L weights.

    ``A`` and ``b`` are an n-color input configuration (n >= 2);
    ``C_merged`` and ``d_merged`` fix the merged (n-1)-color outputs.
    The sum of n-color weights over all output configurations merging to
    (C_merged, d_merged) must equal the (n-1)-color weight of the merged
    inputs, both for the raw and for the normalized L weights.

    Returns a :class:`CheckReport` with per-weight dictionaries.
    """
    A = tuple(A)
    n = len(A)
    C_merged = tuple(C_merged)
    A_merged = merge_vector(A)
    b_merged = merge_color(b)
    lhs = {}
    rhs = {}
    for name, hat in (("L", False), ("Lhat", True)):
        total = q * 0
        for C in _split_vectors(C_merged):
            for d in _split_colors(d_merged, n):
                total = total + weight_L(q, x, s, A, b, C, d,
                                         normalized=hat)
        lhs[name] = total
        rhs[name] = weight_L(q, x, s, A_merged, b_merged, C_merged,
                             d_merged, normalized=hat)
    diff = {name: lhs[name] - rhs[name] for name in lhs}
    ok = all(v == 0 for v in diff.values())
    return CheckReport(ok=ok, lhs=lhs, rhs=rhs, difference=diff,
                       detail="color merge")


def check_fusion(q, x, s, R: int, mu, nu, sigma):
    """Check that a fused one-row partition function at level R equals the
    unfused one on the geometric spectral string x, qx, ..., q^{R-1}x.

    Delegates evaluation to :mod:`coloredvertex.strip`.
    """
    from . import strip

    return strip.check_fusion_row(q, x, s, R, mu, nu, sigma)
