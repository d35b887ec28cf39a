"""Half-strip partition functions f and G and their ascending measures.

The functions are evaluated by a column-by-column transfer sweep over the
window [-K, 0] of the half strip.  The state on a vertical cut is the
tuple of horizontal colors crossing it, one per row.  Bulk columns carry
the spin-s weights (normalized for f, plain for G); column 0 carries the
s = 0 weights.  G evaluations are exact once K reaches the largest part;
multi-row f evaluations truncate leftward excursions and certify
convergence by doubling K.
"""

import math
from dataclasses import dataclass, field

from .qcore import (
    NComposition,
    PoleError,
    as_float,
    is_exact,
    iter_compositions,
    iter_vectors_below,
    q_pochhammer,
    unit,
    vec_add,
    vec_sub,
    vec_total,
)
from .kernels import weight_L, weight_W

__all__ = [
    "EvalResult",
    "FGMeasure",
    "StripSpec",
    "TruncationPolicy",
    "check_branching",
    "check_cauchy",
    "check_fusion_row",
    "check_merge_functions",
    "check_symmetry_G",
    "eval_partition",
    "fused_cauchy_ratio",
    "measure_fG",
    "merge_composition",
    "merge_sigma",
]


@dataclass(frozen=True)
class StripSpec:
    """One f- or G-type strip evaluation problem.

    kind "f": ``nu`` enters the bottom row, ``mu`` exits the top row, and
    one arrow of color sigma(j) enters row j from the far left; requires
    len(mu) = len(nu) + N.  kind "G": ``mu`` enters the bottom, ``nu``
    exits the top, no horizontal boundary arrows; len(mu) = len(nu).

    Fused variants carry bundles of arrows per horizontal edge.  An
    f-type spec with fusion levels ``R`` admits R_j arrows of color
    sigma(j) into row j, carries the squared row spin q^{-R_j}, and
    requires len(mu) = len(nu) + sum(R).  A G-type spec with squared row
    spins ``r2`` uses the two-spin fused weights with arbitrary r2.
    """

    kind: str
    n: int
    s: object
    x: tuple
    mu: NComposition
    nu: NComposition
    sigma: tuple | None = None
    R: tuple | None = None
    r2: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("f", "G"):
            raise ValueError(f"unknown strip kind {self.kind!r}")
        N = len(self.x)
        if self.kind == "f":
            if self.r2 is not None:
                raise ValueError("f-type strips take fusion levels R, "
                                 "not free row spins r2")
            if self.sigma is None or len(self.sigma) != N:
                raise ValueError("f-type strip needs sigma of length N")
            rows = sum(self.R) if self.R is not None else N
            if self.R is not None and len(self.R) != N:
                raise ValueError("f-type strip needs one fusion level "
                                 "per row")
            if self.mu.length != self.nu.length + rows:
                raise ValueError(
                    "f-type strip needs len(mu) = len(nu) + #arrows")
        else:
            if self.R is not None:
                raise ValueError("G-type strips take row spins r2, "
                                 "not fusion levels R")
            if self.r2 is not None and len(self.r2) != N:
                raise ValueError("G-type strip needs one row spin per row")
            if self.mu.length != self.nu.length:
                raise ValueError("G-type strip needs len(mu) = len(nu)")
        if self.mu.n != self.n or self.nu.n != self.n:
            raise ValueError("composition color count mismatch")

    @property
    def fused(self) -> bool:
        return self.R is not None or self.r2 is not None


@dataclass(frozen=True)
class TruncationPolicy:
    """Window and cutoff controls for truncated evaluations."""

    K: int | None = None
    part_cutoff: int | None = None
    tol: float = 1e-9
    certify: bool = True


@dataclass(frozen=True)
class EvalResult:
    """Value of a truncated evaluation with its certification data."""

    value: object
    exact: bool
    residual: float
    K: int

    def __float__(self):
        return as_float(self.value)


def _sweep(q, spec: StripSpec, K: int):
    """Transfer sweep over columns -K..0; returns the window weight."""
    n, N = spec.n, len(spec.x)
    zero = q * 0
    if spec.kind == "f":
        bottom, top = spec.nu, spec.mu
        left = tuple(spec.sigma)
    else:
        bottom, top = spec.mu, spec.nu
        left = (0,) * N
    states = {left: zero + 1}
    for k in range(K, -1, -1):
        a_in = bottom.column_vector(k)
        c_out = top.column_vector(k)
        new_states = {}

        def descend(j, A, h_in, h_out, w):
            if j == N:
                if A == c_out:
                    key = tuple(h_out)
                    new_states[key] = new_states.get(key, zero) + w
                return
            b = h_in[j]
            for d in range(n + 1):
                C = vec_sub(vec_add(A, unit(n, b)), unit(n, d))
                if min(C) < 0:
                    continue
                if k > 0:
                    wt = weight_L(q, spec.x[j], spec.s, A, b, C, d,
                                  normalized=(spec.kind == "f"))
                else:
                    wt = weight_L(q, spec.x[j], zero, A, b, C, d)
                if wt == 0:
                    continue
                h_out.append(d)
                descend(j + 1, C, h_in, h_out, w * wt)
                h_out.pop()

        for h_in, w in states.items():
            descend(0, a_in, h_in, [], w)
        states = new_states
    return states.get((0,) * N, zero)


def _sweep_fused(q, spec: StripSpec, K: int):
    """Fused transfer sweep; the state is one color vector per row."""
    n, N = spec.n, len(spec.x)
    zero = q * 0
    empty = (0,) * n
    if spec.kind == "f":
        bottom, top = spec.nu, spec.mu
        left = tuple(tuple(spec.R[j] * unit(n, spec.sigma[j])[c]
                           for c in range(n)) for j in range(N))
        caps = spec.R
    else:
        bottom, top = spec.mu, spec.nu
        left = (empty,) * N
        caps = (None,) * N

    def row_weight(j, k, A, B, C, D):
        if spec.kind == "f":
            if k > 0:
                return weight_W(q, spec.x[j], A, B, C, D,
                                r2=q ** -spec.R[j], s=spec.s,
                                variant="normalized", R=spec.R[j])
            return weight_W(q, spec.x[j], A, B, C, D,
                            r2=q ** -spec.R[j], variant="s_zero")
        r2j = spec.r2[j]
        if k > 0:
            return weight_W(q, spec.x[j], A, B, C, D, r2=r2j, s=spec.s)
        return weight_W(q, spec.x[j], A, B, C, D, r2=r2j,
                        variant="s_zero")

    states = {left: zero + 1}
    for k in range(K, -1, -1):
        a_in = bottom.column_vector(k)
        c_out = top.column_vector(k)
        new_states = {}

        def descend(j, A, h_in, h_out, w):
            if j == N:
                if A == c_out:
                    key = tuple(h_out)
                    new_states[key] = new_states.get(key, zero) + w
                return
            B = h_in[j]
            for D in iter_vectors_below(vec_add(A, B)):
                if caps[j] is not None and vec_total(D) > caps[j]:
                    continue
                C = vec_sub(vec_add(A, B), D)
                wt = row_weight(j, k, A, B, C, D)
                if wt == 0:
                    continue
                h_out.append(D)
                descend(j + 1, C, h_in, h_out, w * wt)
                h_out.pop()

        for h_in, w in states.items():
            descend(0, a_in, h_in, [], w)
        states = new_states
    return states.get((empty,) * N, zero)


def _auto_K(spec: StripSpec, trunc: TruncationPolicy):
    base = max(spec.mu.max_part, spec.nu.max_part)
    if trunc.K is not None:
        return max(trunc.K, base)
    return base


def eval_partition(q, spec: StripSpec, trunc: TruncationPolicy = TruncationPolicy()):
    """Evaluate the strip partition function for ``spec``.

    G-type strips and single-row f-type strips have finite support inside
    the window, so the result is exact.  Multi-row f-type strips allow
    arbitrarily deep leftward excursions; the sweep truncates them at
    column -K and, when certification is on, reports the K-doubling
    residual.
    """
    K = _auto_K(spec, trunc)
    finite = spec.kind == "G" or len(spec.x) == 1
    sweep = _sweep_fused if spec.fused else _sweep
    value = sweep(q, spec, K)
    if finite:
        return EvalResult(value=value, exact=is_exact(value) if value != 0
                          else is_exact(q), residual=0.0, K=K)
    if not trunc.certify:
        return EvalResult(value=value, exact=False, residual=math.inf, K=K)
    K2 = 2 * K + 4
    value2 = sweep(q, spec, K2)
    residual = abs(as_float(value2 - value))
    return EvalResult(value=value2, exact=False, residual=residual, K=K2)


def _color_lengths(sigma, upto=None, R=None):
    counts = {}
    for j, c in enumerate(sigma):
        if upto is not None and j >= upto:
            break
        counts[c] = counts.get(c, 0) + (1 if R is None else R[j])
    return counts


def _compositions_with_lengths(n, lengths, max_part):
    """All NCompositions with given per-color lengths and bounded parts."""

    def per_color(c):
        length = lengths.get(c, 0)
        sigs = []

        def build(prefix, low):
            if len(prefix) == length:
                sigs.append(tuple(prefix))
                return
            for v in range(low, max_part + 1):
                build(prefix + [v], v)

        build([], 0)
        return [tuple(reversed(s)) for s in sigs]

    pools = [per_color(c) for c in range(1, n + 1)]
    out = []

    def assemble(i, blocks):
        if i == len(pools):
            out.append(NComposition(tuple(blocks)))
            return
        for sig in pools[i]:
            assemble(i + 1, blocks + [sig])

    assemble(0, [])
    return out


def check_branching(q, spec: StripSpec, k: int,
                    trunc: TruncationPolicy = TruncationPolicy()):
    """Check the branching identity at the split row ``k``.

    Compares the full strip evaluation against the sum over intermediate
    compositions kappa of the two partial evaluations, with kappa parts
    bounded by the truncation part cutoff.
    """
    from .ybe import CheckReport

    N = len(spec.x)
    if not 1 <= k <= N:
        raise ValueError("split row out of range")
    whole = eval_partition(q, spec, trunc)
    if spec.kind == "f":
        lengths = _color_lengths(spec.sigma, upto=k, R=spec.R)
        for c in range(1, spec.n + 1):
            lengths[c] = lengths.get(c, 0) + len(spec.nu.blocks[c - 1])
        cutoff = trunc.part_cutoff
        if cutoff is None:
            cutoff = max(spec.mu.max_part, spec.nu.max_part) + 4
    else:
        lengths = {c: len(spec.nu.blocks[c - 1])
                   for c in range(1, spec.n + 1)}
        # intermediate parts are bounded by the entering composition
        cutoff = spec.mu.max_part
    R1, R2 = ((spec.R[:k], spec.R[k:]) if spec.R is not None
              else (None, None))
    t1, t2 = ((spec.r2[:k], spec.r2[k:]) if spec.r2 is not None
              else (None, None))
    total = q * 0
    residual = whole.residual
    for kappa in _compositions_with_lengths(spec.n, lengths, cutoff):
        if spec.kind == "f":
            first = eval_partition(q, StripSpec(
                "f", spec.n, spec.s, spec.x[:k], kappa, spec.nu,
                spec.sigma[:k], R=R1), trunc)
            if first.value == 0:
                continue
            second = eval_partition(q, StripSpec(
                "f", spec.n, spec.s, spec.x[k:], spec.mu, kappa,
                spec.sigma[k:], R=R2), trunc)
        else:
            first = eval_partition(q, StripSpec(
                "G", spec.n, spec.s, spec.x[:k], spec.mu, kappa,
                r2=t1), trunc)
            if first.value == 0:
                continue
            second = eval_partition(q, StripSpec(
                "G", spec.n, spec.s, spec.x[k:], kappa, spec.nu,
                r2=t2), trunc)
        total = total + first.value * second.value
        residual = max(residual, first.residual, second.residual)
    diff = whole.value - total
    exact = whole.exact and residual == 0.0
    ok = diff == 0 if exact else abs(as_float(diff)) <= max(
        trunc.tol, 10 * residual)
    return CheckReport(ok=ok, lhs=whole.value, rhs=total, difference=diff,
                       detail=f"branching split={k} exact={exact}")


def cauchy_ratio(s, x, y):
    """Convergence factor for the Cauchy identity; must be < 1."""
    worst = 0.0
    for xj in x:
        for yi in y:
            num = abs(as_float((1 - s * xj) / (xj - s)))
            den = abs(as_float((yi - s) / (1 - s * yi)))
            worst = max(worst, num * den)
    return worst


def fused_cauchy_ratio(q, s, x, y, R, b_cap: int = 10 ** 4):
    """Convergence factor for the fused Cauchy identity; must be < 1.

    Maximizes, over all row/column pairs and all diagonal occupancies
    (b, b') except the frozen one, the absolute ratio of the diagonal
    frozen weights.  The occupancy b of the column rows is unbounded; it
    is scanned numerically up to ``b_cap`` with early exit once the
    scanned factor is negligible.
    """
    qf, sf = as_float(q), as_float(s)
    worst = 0.0
    for yi in y:
        yf = as_float(yi)
        # A(b) = |(-s)^b (y/s; q)_b / (s y; q)_b|, A(0) = 1
        a_vals = [1.0]
        a = 1.0
        for b in range(1, b_cap + 1):
            num = 1 - yf / sf * qf ** (b - 1)
            den = 1 - sf * yf * qf ** (b - 1)
            if den == 0:
                raise PoleError("(s y; q)_b vanishes")
            a *= abs(sf) * abs(num / den)
            a_vals.append(a)
            if a < 1e-30 and b > 8:
                break
        a_sup = max(a_vals)
        a_sup_pos = max(a_vals[1:])
        for xj, Rj in zip(x, R):
            xf = as_float(xj)
            b_vals = [1.0]
            bv = 1.0
            for bp in range(1, Rj + 1):
                num = 1 - xf / sf * qf ** (bp - 1)
                den = 1 - sf * xf * qf ** (bp - 1)
                if den == 0:
                    raise PoleError("(s x; q)_b vanishes")
                bv *= abs(sf) * abs(num / den)
                b_vals.append(bv)
            scale = 1.0 / b_vals[Rj]
            # exclude only the frozen pair (b, b') = (0, R_j)
            for bp, bval in enumerate(b_vals):
                sup_a = a_sup_pos if bp == Rj else a_sup
                worst = max(worst, sup_a * bval * scale)
    return worst


def check_cauchy(q, n, sigma, x, y, s,
                 trunc: TruncationPolicy = TruncationPolicy(),
                 R=None, t2=None):
    """Check the Cauchy identity sum f G = closed-form product.

    Unfused, the product is prod (x_j - q y_i)/(x_j - y_i); with fusion
    levels ``R`` and squared column-row spins ``t2`` it becomes
    prod (t2_i x_j / y_i; q)_{R_j} / (t2_i^{R_j} (x_j / y_i; q)_{R_j}).
    At the exact point where every y_i equals s, the sum has finite
    support (parts at most M) and the identity is checked exactly;
    otherwise the convergence factor must be below 1 and the truncated
    sum is compared within tolerance.
    """
    from .ybe import CheckReport

    N, M = len(x), len(y)
    fused = R is not None
    if fused:
        R = tuple(R)
        if t2 is None or len(t2) != M:
            raise ValueError("fused Cauchy needs one squared spin t2 "
                             "per column row")
        t2 = tuple(t2)
    exact_point = all(yi == s for yi in y) and is_exact(s) and is_exact(q)
    if not exact_point:
        ratio = (fused_cauchy_ratio(q, s, x, y, R) if fused
                 else cauchy_ratio(s, x, y))
        if ratio >= 1:
            raise ValueError(
                f"Cauchy convergence factor {ratio:.3f} >= 1; "
                "truncated float evaluation would not converge")
        if fused and ratio > 0.99:
            raise ValueError(
                f"Cauchy convergence factor {ratio:.6f} is too close "
                "to 1 for a reliable truncated evaluation")
    product = q * 0 + 1
    for j, xj in enumerate(x):
        for i, yi in enumerate(y):
            if fused:
                if any(xj == q ** -m * yi for m in range(R[j])):
                    raise PoleError(
                        "x_j in q^{-m} y_i is a pole of the product")
                product = product * (
                    q_pochhammer(t2[i] * xj / yi, q, R[j])
                    / (t2[i] ** R[j]
                       * q_pochhammer(xj / yi, q, R[j])))
            else:
                if xj == yi:
                    raise PoleError(
                        "x_j = y_i is a pole of the Cauchy product")
                product = product * (xj - q * yi) / (xj - yi)
    lengths = _color_lengths(sigma, R=R)
    cutoff = M if exact_point else (trunc.part_cutoff or 4 * M + 8)
    sigma = tuple(sigma)
    zeros = NComposition(tuple(
        (0,) * lengths.get(c, 0) for c in range(1, n + 1)))

    def truncated_sum(cut):
        total = q * 0
        worst = 0.0
        for mu in _compositions_with_lengths(n, lengths, cut):
            fval = eval_partition(q, StripSpec(
                "f", n, s, tuple(x), mu, NComposition.empty(n), sigma,
                R=R), trunc)
            if fval.value == 0:
                continue
            gval = eval_partition(q, StripSpec(
                "G", n, s, tuple(y), mu, zeros, r2=t2), trunc)
            total = total + fval.value * gval.value
            worst = max(worst, fval.residual, gval.residual)
        return total, worst

    total, worst = truncated_sum(cutoff)
    if exact_point:
        diff = total - product
        return CheckReport(ok=(diff == 0), lhs=total, rhs=product,
                           difference=diff, detail="cauchy exact")
    total2, worst2 = truncated_sum(cutoff + 2)
    tail = abs(as_float(total2 - total))
    diff = as_float(total2 - product)
    ok = abs(diff) <= max(trunc.tol, 10 * (tail + worst2))
    return CheckReport(ok=ok, lhs=total2, rhs=product, difference=diff,
                       detail=f"cauchy float tail={tail:.2e}")


def check_symmetry_G(q, spec: StripSpec, perm,
                     trunc: TruncationPolicy = TruncationPolicy()):
    """Check that a G evaluation is invariant under permuting the rows.

    Fused specs permute the row spins r2 together with the x's.
    """
    from .ybe import CheckReport

    if spec.kind != "G":
        raise ValueError("symmetry check applies to G-type strips")
    base = eval_partition(q, spec, trunc)
    permuted_x = tuple(spec.x[p] for p in perm)
    permuted_r2 = (tuple(spec.r2[p] for p in perm)
                   if spec.r2 is not None else None)
    other = eval_partition(q, StripSpec(
        "G", spec.n, spec.s, permuted_x, spec.mu, spec.nu,
        r2=permuted_r2), trunc)
    diff = base.value - other.value
    exact = base.exact and other.exact
    ok = diff == 0 if exact else abs(as_float(diff)) <= trunc.tol
    return CheckReport(ok=ok, lhs=base.value, rhs=other.value,
                       difference=diff, detail=f"G symmetry exact={exact}")


# ---------------------------------------------------------------------------
# Ascending measures
# ---------------------------------------------------------------------------

@dataclass
class FGMeasure:
    """Explicit atom table of an ascending measure.

    ``atoms`` maps sequences of compositions (as tuples) to exact or
    float probabilities; ``Z`` is the closed-form normalization and
    ``mass`` the accumulated probability (1 up to truncation).
    """

    n: int
    M: int
    N: int
    sigma: tuple
    atoms: list = field(default_factory=list)
    Z: object = None
    mass: object = None
    R: tuple | None = None

    def exit_colors(self, seq):
        """Colors crossing the cut between columns -1 and 0, by row."""
        out = []
        for i in range(1, self.M + self.N + 1):
            prev, cur = seq[i - 1], seq[i]
            color = 0
            for c in range(1, self.n + 1):
                if cur.m_le(0, c) == prev.m_le(0, c) + 1:
                    color = c
                    break
            out.append(color)
        return tuple(out)

    def exit_vectors(self, seq):
        """Color counts crossing the cut between columns -1 and 0."""
        out = []
        for i in range(1, self.M + self.N + 1):
            prev, cur = seq[i - 1], seq[i]
            out.append(tuple(cur.m_le(0, c) - prev.m_le(0, c)
                             for c in range(1, self.n + 1)))
        return tuple(out)

    def exit_color_law(self):
        law = {}
        for seq, p in self.atoms:
            key = (self.exit_vectors(seq) if self.R is not None
                   else self.exit_colors(seq))
            law[key] = law.get(key, 0 * p) + p
        return law

    def pushforward_merge(self):
        """Distribution of the sequence after identifying colors 1 and 2."""
        law = {}
        for seq, p in self.atoms:
            key = tuple(merge_composition(mu) for mu in seq)
            law[key] = law.get(key, 0 * p) + p
        return law


def measure_fG(q, n, M, N, sigma, x, y, s,
               trunc: TruncationPolicy = TruncationPolicy(),
               R=None, t2=None):
    """Materialize the ascending measure built from f and G steps.

    Enumerates sequences mu(0..M+N) with single-row step weights, divides
    by the closed-form normalization, and reports the total mass (exactly
    1 at the point where all y_i = s, up to truncation otherwise).  With
    fusion levels ``R`` and squared column-row spins ``t2``, the steps
    use the fused single-row functions.
    """
    sigma = tuple(sigma)
    x, y = tuple(x), tuple(y)
    fused = R is not None
    if fused:
        R = tuple(R)
        t2 = tuple(t2)
    exact_point = all(yi == s for yi in y) and is_exact(s) and is_exact(q)
    cutoff = trunc.part_cutoff
    if cutoff is None:
        cutoff = M if exact_point else 2 * M + 6
    Z = q * 0 + 1
    for j, xj in enumerate(x):
        for i, yi in enumerate(y):
            if fused:
                Z = Z * (q_pochhammer(t2[i] * xj / yi, q, R[j])
                         / (t2[i] ** R[j]
                            * q_pochhammer(xj / yi, q, R[j])))
            else:
                Z = Z * (xj - q * yi) / (xj - yi)

    sequences = [((NComposition.empty(n),), q * 0 + 1)]
    # f steps: R_j new parts of color sigma(j) per row (one if unfused)
    for j in range(1, N + 1):
        lengths = _color_lengths(sigma, upto=j, R=R)
        candidates = _compositions_with_lengths(n, lengths, cutoff)
        step_R = (R[j - 1],) if fused else None
        new_seqs = []
        for seq, w in sequences:
            prev = seq[-1]
            for mu in candidates:
                step = eval_partition(q, StripSpec(
                    "f", n, s, (x[j - 1],), mu, prev, (sigma[j - 1],),
                    R=step_R), trunc)
                if step.value == 0:
                    continue
                new_seqs.append((seq + (mu,), w * step.value))
        sequences = new_seqs
    # G steps: compositions descend to all zeros
    lengths = _color_lengths(sigma, R=R)
    candidates = _compositions_with_lengths(n, lengths, cutoff)
    for i in range(1, M + 1):
        step_t2 = (t2[i - 1],) if fused else None
        new_seqs = []
        for seq, w in sequences:
            prev = seq[-1]
            for mu in (candidates if i < M else
                       [NComposition(tuple((0,) * lengths.get(c, 0)
                                           for c in range(1, n + 1)))]):
                step = eval_partition(q, StripSpec(
                    "G", n, s, (y[i - 1],), prev, mu, r2=step_t2), trunc)
                if step.value == 0:
                    continue
                new_seqs.append((seq + (mu,), w * step.value))
        sequences = new_seqs
    atoms = [(seq, w / Z) for seq, w in sequences]
    mass = q * 0
    for _, p in atoms:
        mass = mass + p
    return FGMeasure(n=n, M=M, N=N, sigma=sigma, atoms=atoms, Z=Z,
                     mass=mass, R=R)


# ---------------------------------------------------------------------------
# Color merging of compositions and functions
# ---------------------------------------------------------------------------

def merge_composition(mu: NComposition) -> NComposition:
    """Identify colors 1 and 2 of an n-composition (n >= 2)."""
    if mu.n < 2:
        raise ValueError("merging needs at least two colors")
    joined = tuple(sorted(mu.blocks[0] + mu.blocks[1], reverse=True))
    return NComposition((joined,) + mu.blocks[2:])


def merge_sigma(sigma):
    from .ybe import merge_color

    return tuple(merge_color(c) for c in sigma)


def check_merge_functions(q, spec: StripSpec,
                          trunc: TruncationPolicy = TruncationPolicy()):
    """Check that summing over color splittings of the top composition
    reproduces the merged-color evaluation.

    For an f-type spec, sums f over all mu with the given merged image;
    for G-type, sums G over all top compositions (nu) with the given
    merged image.  The merged evaluation uses one fewer color.
    """
    from .ybe import CheckReport

    split_target = spec.mu if spec.kind == "f" else spec.nu
    merged_target = merge_composition(split_target)
    total = q * 0
    residual = 0.0
    exact = True
    joined = merged_target.blocks[0]
    rest = merged_target.blocks[1:]
    # enumerate ways to color the joined block with colors 1 and 2
    seen = set()
    for mask in range(1 << len(joined)):
        first = tuple(joined[i] for i in range(len(joined))
                      if not mask >> i & 1)
        second = tuple(joined[i] for i in range(len(joined))
                       if mask >> i & 1)
        key = (first, second)
        if key in seen:
            continue
        seen.add(key)
        candidate = NComposition((first, second) + rest)
        if spec.kind == "f":
            res = eval_partition(q, StripSpec(
                "f", spec.n, spec.s, spec.x, candidate, spec.nu,
                spec.sigma, R=spec.R), trunc)
        else:
            res = eval_partition(q, StripSpec(
                "G", spec.n, spec.s, spec.x, spec.mu, candidate,
                r2=spec.r2), trunc)
        total = total + res.value
        residual = max(residual, res.residual)
        exact = exact and res.exact
    if spec.kind == "f":
        merged = eval_partition(q, StripSpec(
            "f", spec.n - 1, spec.s, spec.x, merged_target,
            merge_composition(spec.nu), merge_sigma(spec.sigma),
            R=spec.R), trunc)
    else:
        merged = eval_partition(q, StripSpec(
            "G", spec.n - 1, spec.s, spec.x, merge_composition(spec.mu),
            merged_target, r2=spec.r2), trunc)
    residual = max(residual, merged.residual)
    exact = exact and merged.exact
    diff = total - merged.value
    ok = diff == 0 if exact else abs(as_float(diff)) <= max(
        trunc.tol, 10 * residual)
    return CheckReport(ok=ok, lhs=total, rhs=merged.value, difference=diff,
                       detail=f"function merge exact={exact}")


# ---------------------------------------------------------------------------
# Fusion of a bundled row into a geometric string of simple rows
# ---------------------------------------------------------------------------

def check_fusion_row(q, x, s, R: int, mu, nu, sigma: int,
                     trunc: TruncationPolicy = TruncationPolicy()):
    """Check that one fused row at level R equals R simple rows.

    Compares the single-row bundled evaluation with spectral parameter x
    and R entering arrows of color ``sigma`` against the plain R-row
    evaluation on the geometric string (x, qx, ..., q^{R-1} x) with the
    same color on every row.  The bundled side is exact; the plain side
    is exact for R = 1 and truncation-certified otherwise.
    """
    from .ybe import CheckReport

    fused = eval_partition(q, StripSpec(
        "f", mu.n, s, (x,), mu, nu, (sigma,), R=(R,)), trunc)
    string = tuple(q ** m * x for m in range(R))
    plain = eval_partition(q, StripSpec(
        "f", mu.n, s, string, mu, nu, (sigma,) * R), trunc)
    diff = fused.value - plain.value
    exact = fused.exact and plain.exact
    residual = max(fused.residual, plain.residual)
    ok = diff == 0 if exact else abs(as_float(diff)) <= max(
        trunc.tol, 10 * residual)
    return CheckReport(ok=ok, lhs=fused.value, rhs=plain.value,
                       difference=diff, detail=f"fusion R={R} exact={exact}")
