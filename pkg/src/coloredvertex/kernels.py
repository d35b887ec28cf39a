"""Vertex weight families, stochasticity checks, and transition sampling.

Every weight family is evaluated by a pure function that is polymorphic in
its scalar arguments: exact rationals give exact values, floats give float
values.  Multiplicity vectors are tuples of nonnegative integers; single
colors are integers in [0, n] with 0 meaning "no arrow".

Families:
    R                  -- colored six-vertex weights R_z(a, b; c, d).
    L / L-hat          -- higher spin row weights L_{x;s}, normalized variant.
    U                  -- fused weights U_{z;r,s}(A, B; C, D).
    W                  -- W_{x;r,s} = (-s)^{-d} U_{x/s;r,s} and its
                          normalized / s = 0 / q-Hahn / q-boson variants.
    hs / dqb           -- higher spin single-arrow fused weights and the
                          discrete time q-boson specialization.
    complemented       -- top-color complemented weights (full, q-discrete
                          polymer, q-discrete boundary).
"""

from __future__ import annotations

import math

from .qcore import (
    PoleError,
    block_sum,
    iter_vectors_below,
    phi_form,
    q_pochhammer,
    unit,
    vec_add,
    vec_ge,
    vec_sub,
    vec_total,
)


def _binom2(k: int) -> int:
    return k * (k - 1) // 2


def _qq(q, m: int):
    """(q; q)_m for m >= 0; None signals a vanishing reciprocal (m < 0)."""
    if m < 0:
        return None
    return q_pochhammer(q, q, m)


def _conserves_single(A, b, C, d) -> bool:
    n = len(A)
    if not (0 <= b <= n and 0 <= d <= n):
        return False
    return vec_add(A, unit(n, b)) == vec_add(C, unit(n, d))


# ---------------------------------------------------------------------------
# Six-vertex R weights
# ---------------------------------------------------------------------------

def weight_R(q, z, a: int, b: int, c: int, d: int):
    """Colored stochastic six-vertex weight R_z(a, b; c, d)."""
    denom = 1 - q * z
    if denom == 0:
        raise PoleError("qz = 1 is a pole of the R weight")
    if a == b:
        return q - q + 1 if (c, d) == (a, b) else q * 0
    if (c, d) == (a, b):
        # crossing preserved
        return q * (1 - z) / denom if a > b else (1 - z) / denom
    if (c, d) == (b, a):
        # colors swapped
        return (1 - q) / denom if a > b else z * (1 - q) / denom
    return q * 0


# ---------------------------------------------------------------------------
# Higher spin L weights
# ---------------------------------------------------------------------------

def weight_L(q, x, s, A, b: int, C, d: int, normalized: bool = False):
    """Higher spin weight L_{x;s}(A, b; C, d); ``normalized`` gives L-hat.

    L-hat multiplies by (1 - sx)/(x - s), so that
    L-hat(e_0, i; e_0, i) = 1 for every color i >= 1.
    """
    n = len(A)
    denom = 1 - s * x
    if denom == 0:
        raise PoleError("sx = 1 is a pole of the L weight")
    if normalized and x == s:
        raise PoleError("x = s is a pole of the normalized L weight")
    if not _conserves_single(A, b, C, d):
        return q * 0
    if b == 0 and d == 0:
        value = (1 - s * x * q ** block_sum(A, 1, n)) / denom
    elif b == 0 and d >= 1:
        i = d
        value = x * (1 - q ** A[i - 1]) * q ** block_sum(A, i + 1, n) / denom
    elif b >= 1 and d == 0:
        value = (1 - s * s * q ** block_sum(A, 1, n)) / denom
    elif b == d:
        i = b
        value = (x - s * q ** A[i - 1]) * q ** block_sum(A, i + 1, n) / denom
    elif b < d:
        j = d
        value = x * (1 - q ** A[j - 1]) * q ** block_sum(A, j + 1, n) / denom
    else:
        i = d
        value = s * (1 - q ** A[i - 1]) * q ** block_sum(A, i + 1, n) / denom
    if normalized:
        value = value * (1 - s * x) / (x - s)
    return value


# ---------------------------------------------------------------------------
# Fused U and W weights
# ---------------------------------------------------------------------------

def weight_U(q, z, A, B, C, D, r2, s2):
    """Fused stochastic weight U_{z;r,s}(A, B; C, D).

    ``r2`` and ``s2`` are the squares of the spin parameters r and s; only
    these squares enter the formula, which keeps rational evaluation exact
    for half-integer powers of q.
    """
    if vec_add(A, B) != vec_add(C, D):
        return q * 0
    a, b, c, d = (vec_total(V) for V in (A, B, C, D))
    denom_rb = q_pochhammer(r2, q, b)
    if denom_rb == 0:
        raise PoleError("(r^2; q)_b vanishes")
    prefactor = (
        z ** (d - b) * r2 ** (c - a) * s2 ** d * q ** phi_form(D, C)
        * q_pochhammer(r2, q, d) / denom_rb
    )
    bound = tuple(min(x, y) for x, y in zip(B, C))
    total = q * 0
    for p in range(min(b, c) + 1):
        denom_sz = q_pochhammer(s2 * z, q, c + d - p)
        if denom_sz == 0:
            raise PoleError("(s^2 z; q)_{c+d-p} vanishes")
        outer = (
            (z / r2) ** p
            * q_pochhammer(s2 * z / r2, q, c - p)
            * q_pochhammer(r2 / z, q, p)
            * q_pochhammer(z, q, b - p)
            / denom_sz
        )
        inner = q * 0
        for P in iter_vectors_below(bound):
            if vec_total(P) != p:
                continue
            term = q ** phi_form(vec_sub(vec_sub(B, D), P), P)
            for i in range(len(A)):
                term = term * _qq(q, C[i] + D[i] - P[i]) / (
                    _qq(q, D[i]) * _qq(q, C[i] - P[i]))
                term = term * _qq(q, B[i]) / (
                    _qq(q, P[i]) * _qq(q, B[i] - P[i]))
            inner = inner + term
        total = total + outer * inner
    return prefactor * total


def weight_W(q, x, A, B, C, D, r2=None, s=None, t2=None, nu=None,
             variant: str = "generic", R: int | None = None):
    """Fused weight W_{x;r,s}(A, B; C, D) and its named variants.

    variant:
        generic    -- (-s)^{-d} U_{x/s; r, s}; requires ``r2`` and ``s``.
        normalized -- W-hat: generic times (-s)^{-R} (sx; q)_R/(x/s; q)_R,
                      requires r2 = q^{-R} for the given integer R.
        s_zero     -- the s -> 0 limit of generic, in closed form.
        q_hahn     -- W_{s;t,s} at x = s; requires ``t2`` (= t^2) and
                      interprets ``x`` as the parameter s.
        boson      -- the q-boson weight, requires ``nu``.
    """
    if vec_add(A, B) != vec_add(C, D):
        return q * 0
    a, b, c, d = (vec_total(V) for V in (A, B, C, D))

    if variant in ("generic", "normalized"):
        if r2 is None or s is None:
            raise ValueError("generic W requires r2 and s")
        value = (-s) ** (-d) * weight_U(q, x / s, A, B, C, D, r2, s * s)
        if variant == "normalized":
            if R is None or R < 1 or r2 * q ** R != 1:
                raise ValueError("normalized W requires r2 = q^{-R}, R >= 1")
            denom = q_pochhammer(x / s, q, R)
            if denom == 0:
                raise PoleError("(x/s; q)_R vanishes")
            value = value * (-s) ** (-R) * q_pochhammer(s * x, q, R) / denom
        return value

    if variant == "s_zero":
        if r2 is None:
            raise ValueError("s_zero W requires r2")
        denom_rb = q_pochhammer(r2, q, b)
        if denom_rb == 0:
            raise PoleError("(r^2; q)_b vanishes")
        value = (
            (-1) ** (b - d) * x ** d * r2 ** (c - a)
            * q ** (phi_form(D, C) + _binom2(b))
            * q_pochhammer(r2, q, d) / denom_rb
        )
        n = len(A)
        for i in range(1, n + 1):
            Bi, Ci, Di = B[i - 1], C[i - 1], D[i - 1]
            factor = q * 0
            for p in range(min(Bi, Ci) + 1):
                factor = factor + (
                    (-1) ** p / r2 ** p
                    * q ** (_binom2(p + 1)
                            - p * (block_sum(B, i, n) + block_sum(D, 1, i - 1)))
                    * _qq(q, Ci + Di - p) / (_qq(q, Ci - p) * _qq(q, Di))
                    * _qq(q, Bi) / (_qq(q, Bi - p) * _qq(q, p))
                )
            value = value * factor
        return value

    if variant == "q_hahn":
        if t2 is None:
            raise ValueError("q_hahn W requires t2")
        s_par = x
        if not vec_ge(A, D):
            return q * 0
        denom = q_pochhammer(s_par * s_par, q, a)
        if denom == 0:
            raise PoleError("(s^2; q)_a vanishes")
        value = (
            (-s_par / t2) ** d * q ** phi_form(D, vec_sub(A, D))
            * q_pochhammer(s_par * s_par / t2, q, a - d)
            * q_pochhammer(t2, q, d) / denom
        )
        for i in range(len(A)):
            value = value * _qq(q, A[i]) / (
                _qq(q, A[i] - D[i]) * _qq(q, D[i]))
        return value

    if variant == "boson":
        if nu is None:
            raise ValueError("boson W requires nu")
        if not vec_ge(A, D):
            return q * 0
        value = (
            q ** phi_form(D, vec_sub(A, D)) * nu ** (-d)
            * q_pochhammer(-nu, q, d)
        )
        for i in range(len(A)):
            value = value * _qq(q, A[i]) / (
                _qq(q, A[i] - D[i]) * _qq(q, D[i]))
        return value

    raise ValueError(f"unknown W variant {variant!r}")


def weight_hs(q, x, A, b: int, C, d: int, s2=None, nu=None,
              variant: str = "higher_spin"):
    """Higher spin fused weight U^hs_{x;s}(A, b; C, d) in closed form.

    Equals U_{x; q^{-1/2}, s}(A, e_b; C, e_d); only s^2 enters, passed as
    ``s2``.  The ``dqb`` variant is the discrete time q-boson case x = 1,
    s^2 = -nu.
    """
    if variant == "dqb":
        if nu is None:
            raise ValueError("dqb requires nu")
        x = nu - nu + 1
        s2 = -nu
    elif s2 is None:
        raise ValueError("higher_spin requires s2")
    n = len(A)
    denom = 1 - s2 * x
    if denom == 0:
        raise PoleError("s^2 x = 1 is a pole of the higher spin weight")
    if not _conserves_single(A, b, C, d):
        return q * 0
    if b == 0 and d == 0:
        return (1 - s2 * x * q ** block_sum(A, 1, n)) / denom
    if b == 0 and d >= 1:
        i = d
        return s2 * x * (q ** A[i - 1] - 1) * q ** block_sum(A, i + 1, n) / denom
    if b >= 1 and d == 0:
        return (1 - s2 * q ** block_sum(A, 1, n)) / denom
    if b == d:
        i = b
        return s2 * (q ** A[i - 1] - x) * q ** block_sum(A, i + 1, n) / denom
    if b < d:
        j = d
        return s2 * x * (q ** A[j - 1] - 1) * q ** block_sum(A, j + 1, n) / denom
    i = d
    return s2 * (q ** A[i - 1] - 1) * q ** block_sum(A, i + 1, n) / denom


# ---------------------------------------------------------------------------
# Complemented weights
# ---------------------------------------------------------------------------

def _poch_ratio_inf(a_num, a_den, q, L=None):
    """(a_num; q)_inf / (a_den; q)_inf, exact when a_den = a_num q^L."""
    if L is not None:
        # (a; q)_inf / (a q^L; q)_inf = (a; q)_L
        return q_pochhammer(a_num, q, L)
    return (q_pochhammer(a_num, q, math.inf)
            / q_pochhammer(a_den, q, math.inf))


def weight_complemented_full(q, qM, qN, A, Bbar, Bn: int, C, Dbar, Dn: int,
                             L: int | None = None, qL=None):
    """Complemented fused weight on top-color-complemented configurations.

    Arguments follow the complementation convention: ``A`` and ``C`` are the
    n-vectors of vertical multiplicities, ``Bbar``/``Dbar`` the first n-1
    horizontal multiplicities, and ``Bn``/``Dn`` the complemented top-color
    counts.  ``qM``/``qN`` are the values of q^M and q^N (any scalars);
    pass an integer ``L`` for exact evaluation at qL = q^L, or a generic
    ``qL`` for float evaluation.
    """
    if L is not None:
        qL = q ** L
    elif qL is None:
        raise ValueError("provide either L or qL")
    n = len(A)
    if len(Bbar) != n - 1 or len(Dbar) != n - 1 or len(C) != n:
        raise ValueError("complemented configuration has wrong dimensions")
    Abar, Cbar = A[:-1], C[:-1]
    bbar, dbar = vec_total(Bbar), vec_total(Dbar)
    sb = Bn - bbar
    sd = Dn - dbar
    a, c = vec_total(A), vec_total(C)
    cbar = vec_total(Cbar)
    Cn = C[-1]
    if sb < 0 or sd < 0:
        return q * 0
    if vec_add(Abar, Bbar) != vec_add(Cbar, Dbar) or sb - a != sd - c:
        return q * 0

    value = (
        (-1) ** Cn
        * q ** (phi_form(Dbar, Cbar) + _binom2(Cn + 1) + cbar * sd)
        * qL ** Cn
        * _qq(q, sb) / _qq(q, sd)
        * q_pochhammer(qM / qN * q ** (-c), q, sd) / _qq(q, Cn)
        * q_pochhammer(q ** (Dn - Cn) / qL, q, Cn)
        / q_pochhammer(1 / qN, q, sb)
        * _poch_ratio_inf(1 / qN, qL / qN, q, L)
        / _poch_ratio_inf(qM / qN, qL * qM / qN, q, L)
    )
    for j in range(n - 1):
        value = value * _qq(q, Bbar[j]) / _qq(q, Dbar[j])

    bound = tuple(min(x, y) for x, y in zip(Bbar, Cbar))
    total = q * 0
    for P in iter_vectors_below(bound):
        p = vec_total(P)
        term = (
            (-1) ** p
            * q ** phi_form(vec_sub(vec_sub(Bbar, Dbar), P), P)
            * q_pochhammer(1 / (q * qN), q, p)
            * q_pochhammer(qM / qN * q ** (sd - c), q, p)
            / q_pochhammer(qM / qN * q ** (-c), q, p)
            / q_pochhammer(q ** sb / qN, q, p)
            * q ** (p * (sb - sd + 1) + _binom2(p))
        )
        for j in range(n - 1):
            term = term * _qq(q, Cbar[j] + Dbar[j] - P[j]) / (
                _qq(q, Cbar[j] - P[j]) * _qq(q, P[j])
                * _qq(q, Bbar[j] - P[j]))
        term = term * _phi43(
            q, Cn,
            (q ** Bn / qL, q ** (p - 1) / qN, qM / qN * q ** (sd - c + p)),
            (qM / qN * q ** (p - c), q ** (sb + p) / qN,
             q ** (Dn - Cn) / qL),
            q)
        total = total + term
    return value * total


def _phi43(q, m, a_list, b_list, z):
    from .qcore import hypergeometric_terminating
    return hypergeometric_terminating(m, a_list, b_list, q, z)


def weight_complemented_qdp(q, gamma, A, Bbar, Bn: int, C, Dbar, Dn: int):
    """q-discrete polymer weight on complemented configurations (float)."""
    n = len(A)
    Abar, Cbar = A[:-1], C[:-1]
    bbar, dbar = vec_total(Bbar), vec_total(Dbar)
    sb = Bn - bbar
    sd = Dn - dbar
    a, c = vec_total(A), vec_total(C)
    cbar = vec_total(Cbar)
    An, Cn = A[-1], C[-1]
    if sb < 0 or sd < 0:
        return 0.0
    if vec_add(Abar, Bbar) != vec_add(Cbar, Dbar) or sb - a != sd - c:
        return 0.0
    m0 = Bn - An - dbar
    if m0 < 0:
        return 0.0
    q = float(q)
    gamma = float(gamma)
    value = (
        q ** (phi_form(Dbar, Cbar) + cbar * m0)
        * q_pochhammer(gamma, q, math.inf)
        * _qq(q, sb) / _qq(q, m0)
    )
    for j in range(n - 1):
        value = value * _qq(q, Cbar[j] + Dbar[j]) / (
            _qq(q, Cbar[j]) * _qq(q, Dbar[j]))

    inner_p = 0.0
    outer = 0.0
    bound = tuple(min(x, y) for x, y in zip(Bbar, Cbar))
    for k in range(Cn + 1):
        if k > An:
            # (q^{A_n-k+1}; q)_k contains the factor 1 - q^0 = 0
            break
        k_term = (
            gamma ** (Cn - k) / _qq(q, Cn - k)
            * q_pochhammer(q ** (An - k + 1), q, k)
            / (_qq(q, k) * q_pochhammer(q ** (m0 + 1), q, k))
            * q ** (k * (Bn - An + cbar + k))
        )
        inner_p = 0.0
        for P in iter_vectors_below(bound):
            p = vec_total(P)
            term = q ** (p * (An - k + 1) + phi_form(P, vec_sub(Dbar, Bbar)))
            for j in range(n - 1):
                term = term * (
                    q_pochhammer(q ** (-Bbar[j]), q, P[j])
                    * q_pochhammer(q ** (-Cbar[j]), q, P[j])
                    / (_qq(q, P[j])
                       * q_pochhammer(q ** (-Cbar[j] - Dbar[j]), q, P[j]))
                )
            inner_p += term
        outer += k_term * inner_p
    return value * outer


def weight_complemented_bq(q, z, k: int, L=None):
    """q-discrete boundary weight; ``L=None`` gives the L = infinity form.

    The infinite-level weight is z^{-k} (z^{-1}; q)_inf / (q; q)_k, the
    limit of the finite-level form as q^L grows; summing the q-exponential
    series shows it is stochastic for z > 1.  (Float mode only, through the
    infinite Pochhammer factor.)
    """
    if k < 0:
        return q * 0
    if L is None:
        qf, zf = float(q), float(z)
        return (zf ** (-k) * q_pochhammer(1.0 / zf, qf, math.inf)
                / _qq(qf, k))
    denom = q_pochhammer(q ** (-L) / z, q, L)
    if denom == 0:
        raise PoleError("(q^{-L} z^{-1}; q)_L vanishes")
    return (z ** (-k) / denom
            * q_pochhammer(q ** (-L), q, k) / _qq(q, k))


# ---------------------------------------------------------------------------
# Output enumeration, stochastic sums, sampling
# ---------------------------------------------------------------------------

def outputs_R(n: int, a: int, b: int):
    """Admissible outputs (c, d) of the R family for incoming (a, b)."""
    if a == b:
        return [(a, b)]
    return [(a, b), (b, a)]


def outputs_L(A, b: int):
    """Admissible outputs (C, d) of the L / higher spin families."""
    n = len(A)
    out = []
    for d in range(n + 1):
        C = vec_sub(vec_add(A, unit(n, b)), unit(n, d))
        if all(x >= 0 for x in C):
            out.append((C, d))
    return out


def outputs_fused(A, B):
    """Admissible outputs (C, D) of the U / W families."""
    total = vec_add(A, B)
    return [(C, vec_sub(total, C)) for C in iter_vectors_below(total)]


def _family_weight(family, params, incoming, outgoing):
    q = params["q"]
    if family == "R":
        a, b = incoming
        c, d = outgoing
        return weight_R(q, params["z"], a, b, c, d)
    if family == "L":
        A, b = incoming
        C, d = outgoing
        return weight_L(q, params["x"], params["s"], A, b, C, d,
                        normalized=params.get("normalized", False))
    if family == "U":
        A, B = incoming
        C, D = outgoing
        return weight_U(q, params["z"], A, B, C, D,
                        params["r2"], params["s2"])
    if family == "W":
        A, B = incoming
        C, D = outgoing
        return weight_W(q, params.get("x"), A, B, C, D,
                        r2=params.get("r2"), s=params.get("s"),
                        t2=params.get("t2"), nu=params.get("nu"),
                        variant=params.get("variant", "generic"),
                        R=params.get("R"))
    if family == "q_hahn":
        # stochastic q-Hahn kernel: (-s)^d W_{s;t,s} = U_{1;t,s}
        A, B = incoming
        C, D = outgoing
        s_par = params["s"]
        w = weight_W(q, s_par, A, B, C, D, t2=params["t2"],
                     variant="q_hahn")
        return (-s_par) ** vec_total(D) * w
    if family in ("hs", "dqb"):
        A, b = incoming
        C, d = outgoing
        return weight_hs(q, params.get("x"), A, b, C, d,
                         s2=params.get("s2"), nu=params.get("nu"),
                         variant="dqb" if family == "dqb" else "higher_spin")
    raise ValueError(f"unknown finite family {family!r}")


def enumerate_outputs(family, params, incoming):
    """All (outgoing, weight) pairs for a finite-support family."""
    if family == "R":
        a, b = incoming
        outs = outputs_R(params["n"], a, b)
    elif family in ("L", "hs", "dqb"):
        outs = outputs_L(*incoming)
    elif family in ("U", "W", "q_hahn"):
        outs = outputs_fused(*incoming)
    else:
        raise ValueError(f"unknown finite family {family!r}")
    return [(out, _family_weight(family, params, incoming, out))
            for out in outs]


class DivergenceError(ValueError):
    """An infinite output sum fails its geometric tail condition."""


def _qdp_outputs(params, incoming, tol):
    """Lazily enumerate qdp outputs with a certified geometric tail bound."""
    q = float(params["q"])
    gamma = float(params["gamma"])
    if abs(gamma) >= 1:
        raise DivergenceError("|gamma| >= 1: qdp output sum diverges")
    A, Bbar, Bn = incoming
    n = len(A)
    An = A[-1]
    entries = []
    bound = vec_add(A[:-1], Bbar)
    # C_n ranges over nonnegative integers; weights decay like gamma^{C_n}
    cn = 0
    stale = 0
    while True:
        shell = 0.0
        for Dbar in iter_vectors_below(bound):
            Cbar = vec_sub(bound, Dbar)
            C = Cbar + (cn,)
            sd = (Bn - vec_total(Bbar)) - vec_total(A) + vec_total(C)
            Dn = sd + vec_total(Dbar)
            if sd < 0:
                continue
            w = weight_complemented_qdp(q, gamma, A, Bbar, Bn, C, Dbar, Dn)
            if w != 0.0:
                entries.append(((C, Dbar, Dn), w))
                shell += abs(w)
        cn += 1
        if shell < tol * max(abs(gamma), 1e-300):
            stale += 1
        else:
            stale = 0
        if stale >= 2 and cn > An + 1:
            break
        if cn > 400:
            break
    tail = abs(gamma) ** cn / (1 - abs(gamma))
    return entries, tail


def _bq_outputs(params, tol):
    q = params["q"]
    z = params["z"]
    L = params.get("L")
    entries = []
    if L is not None:
        for k in range(L + 1):
            entries.append((k, weight_complemented_bq(q, z, k, L)))
        return entries, 0.0
    if abs(float(z)) <= 1:
        raise DivergenceError("|z| <= 1: bq output sum diverges")
    qf, zf = abs(float(q)), abs(float(z))
    k = 0
    while True:
        w = weight_complemented_bq(q, z, k)
        entries.append((k, w))
        # successive term ratio is 1/(z (1 - q^{k+1})), eventually < 1
        ratio = 1.0 / (zf * (1.0 - qf ** (k + 1)))
        if ratio < 1.0 and k > 4 and abs(float(w)) * ratio / (1 - ratio) < tol:
            break
        k += 1
        if k > 100000:
            break
    ratio = 1.0 / (zf * (1.0 - qf ** (k + 1)))
    tail = abs(float(entries[-1][1])) * ratio / max(1.0 - ratio, 1e-12)
    return entries, tail


def stochastic_sum(family, params, incoming, tol: float = 1e-14):
    """Sum of weights over all admissible outputs for fixed inputs.

    Returns (total, tail_bound); tail_bound is 0 for finite families and a
    certified geometric bound for the infinite-support ones (qdp over the
    top-color output count, bq over k).
    """
    if family == "qdp":
        entries, tail = _qdp_outputs(params, incoming, tol)
        return sum(w for _, w in entries), tail
    if family == "bq":
        entries, tail = _bq_outputs(params, tol)
        return sum(w for _, w in entries), tail
    entries = enumerate_outputs(family, params, incoming)
    total = params["q"] * 0
    for _, w in entries:
        total = total + w
    return total, 0.0


class NegativeWeightError(ValueError):
    """A sampling step encountered a negative transition weight."""


SAMPLE_TAIL = 1e-12


def sample_output(family, params, incoming, rng):
    """Sample an outgoing configuration with probability equal to its weight.

    Weights must be nonnegative; infinite-support families are truncated by
    inverse CDF at cumulative tail SAMPLE_TAIL.
    """
    if family == "qdp":
        entries, _ = _qdp_outputs(params, incoming, SAMPLE_TAIL)
    elif family == "bq":
        entries, _ = _bq_outputs(params, SAMPLE_TAIL)
    else:
        entries = enumerate_outputs(family, params, incoming)
    weights = []
    for out, w in entries:
        wf = float(w)
        if wf < -1e-12:
            raise NegativeWeightError(
                f"negative weight {wf} at output {out!r} (family {family})")
        weights.append((out, max(wf, 0.0)))
    u = rng.random()
    acc = 0.0
    best = None
    for out, wf in weights:
        acc += wf
        best = out
        if u < acc:
            return out
    return best
