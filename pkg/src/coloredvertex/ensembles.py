"""Colored line ensembles built from ascending composition sequences.

Provides the curve construction from a sequence, the inverse map back to
arrow configurations, window resampling laws (generic, fused, n = 1,
q = 0, and q-boson variants) with an oracle verifier against the global
ascending measure, the top-curve law comparison, and color merging at
the ensemble level.
"""

from dataclasses import dataclass

from .kernels import weight_L, weight_W
from .qcore import NComposition, as_float, is_exact
from .strip import TruncationPolicy, measure_fG, merge_sigma


# ---------------------------------------------------------------------------
# Colored line ensembles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ColoredLineEnsemble:
    """A finite family of integer curves indexed by color and depth.

    ``curves[c - 1][k - 1][i]`` is the value of curve k of color c at
    abscissa i in [0, length].  Only finitely many depths are stored;
    every deeper curve equals the last stored one, and trailing
    duplicates are trimmed so that equal ensembles compare equal.
    """

    n: int
    length: int
    curves: tuple

    def __post_init__(self):
        canon = []
        for family in self.curves:
            family = [tuple(int(v) for v in curve) for curve in family]
            if not family:
                raise ValueError("each color needs at least one curve")
            while len(family) > 1 and family[-1] == family[-2]:
                family.pop()
            canon.append(tuple(family))
        object.__setattr__(self, "curves", tuple(canon))

    @property
    def k_depth(self) -> int:
        return max(len(family) for family in self.curves)

    def L(self, c: int, k: int, i: int) -> int:
        """Curve value; color n + 1 is the zero curve, depth saturates."""
        if c == self.n + 1:
            return 0
        family = self.curves[c - 1]
        return family[min(k, len(family)) - 1][i]

    def Lambda(self, c: int, k: int, i: int) -> int:
        return self.L(c, k, i) - self.L(c + 1, k, i)

    @property
    def simple(self) -> bool:
        return all(curve[i] - curve[i + 1] in (0, 1)
                   for family in self.curves for curve in family
                   for i in range(self.length))

    def check_valid(self) -> bool:
        """Ordering in depth and abscissa, for the curves and for the
        consecutive-color differences."""
        depth = self.k_depth + 1
        for c in range(1, self.n + 1):
            for k in range(1, depth + 1):
                for i in range(self.length + 1):
                    if self.L(c, k, i) < self.L(c, k + 1, i):
                        return False
                    if self.Lambda(c, k, i) < self.Lambda(c, k + 1, i):
                        return False
                    if i < self.length:
                        if self.L(c, k, i) < self.L(c, k, i + 1):
                            return False
                        if self.Lambda(c, k, i) < self.Lambda(c, k, i + 1):
                            return False
        return True

    def to_jsonable(self):
        return {
            "n": self.n,
            "interval": [0, self.length],
            "curves": {str(c): {str(k): list(curve)
                                for k, curve in enumerate(family, start=1)}
                       for c, family in enumerate(self.curves, start=1)},
        }

    @classmethod
    def from_jsonable(cls, data) -> "ColoredLineEnsemble":
        curves = []
        for c in range(1, data["n"] + 1):
            family = data["curves"][str(c)]
            curves.append(tuple(tuple(family[str(k)])
                                for k in range(1, len(family) + 1)))
        return cls(data["n"], data["interval"][1], tuple(curves))


@dataclass(frozen=True)
class WindowSpec:
    """Resampling window: curves k_lo..k_hi are freed at abscissas u..v."""

    k_lo: int
    k_hi: int
    u: int
    v: int

    def __post_init__(self):
        if not (1 <= self.k_lo <= self.k_hi and 1 <= self.u <= self.v):
            raise ValueError("window bounds must satisfy "
                             "1 <= k_lo <= k_hi and 1 <= u <= v")

    def contains(self, k: int, m: int) -> bool:
        return self.k_lo <= k <= self.k_hi and self.u <= m <= self.v


# ---------------------------------------------------------------------------
# Construction from ascending sequences and the inverse map
# ---------------------------------------------------------------------------

def ensemble_from_sequence(seq, lengths=None) -> ColoredLineEnsemble:
    """Curves of an ascending sequence of compositions.

    Curve k of color c at abscissa i is the total color count of colors
    >= c minus the number of parts < k of those colors in seq[i].  The
    result is validated; a sequence that is not ascending produces
    curves violating the ordering constraints and raises ValueError.
    """
    seq = tuple(seq)
    if not seq:
        raise ValueError("need at least mu(0)")
    n = seq[0].n
    if lengths is None:
        lengths = seq[-1].lengths()
    length = len(seq) - 1
    totals = [sum(lengths[c - 1:]) for c in range(1, n + 2)]
    k_cap = max(max((mu.max_part for mu in seq), default=0) + 1, 1)
    curves = tuple(
        tuple(tuple(totals[c - 1] - mu.m_le_ge_color(k - 1, c) for mu in seq)
              for k in range(1, k_cap + 1))
        for c in range(1, n + 1))
    ens = ColoredLineEnsemble(n, length, curves)
    if not ens.check_valid():
        raise ValueError("sequence is not ascending: curve ordering fails")
    return ens


def configs_from_ensemble(ens: ColoredLineEnsemble, vertex, fused=False):
    """Arrow configuration read off the curves at ``vertex`` = (-k, i).

    Returns (A, b; C, d) with single-color edge labels in the default
    mode (which requires a simple ensemble), or vector-valued
    (A, B; C, D) with ``fused=True``.
    """
    k, i = -vertex[0], vertex[1]
    if k < 1 or not 1 <= i <= ens.length:
        raise ValueError(f"vertex {vertex} outside the domain")
    n = ens.n
    A = tuple(ens.Lambda(c, k, i - 1) - ens.Lambda(c, k + 1, i - 1)
              for c in range(1, n + 1))
    C = tuple(ens.Lambda(c, k, i) - ens.Lambda(c, k + 1, i)
              for c in range(1, n + 1))
    if fused:
        B = tuple(ens.Lambda(c, k + 1, i - 1) - ens.Lambda(c, k + 1, i)
                  for c in range(1, n + 1))
        D = tuple(ens.Lambda(c, k, i - 1) - ens.Lambda(c, k, i)
                  for c in range(1, n + 1))
        return A, B, C, D
    if not ens.simple:
        raise ValueError("single-color configurations need a simple ensemble")
    b = max((c for c in range(1, n + 1)
             if ens.L(c, k + 1, i - 1) - ens.L(c, k + 1, i) == 1), default=0)
    d = max((c for c in range(1, n + 1)
             if ens.L(c, k, i - 1) - ens.L(c, k, i) == 1), default=0)
    return A, b, C, d


# ---------------------------------------------------------------------------
# Window enumeration and conditional laws
# ---------------------------------------------------------------------------

def _value_grid(ens: ColoredLineEnsemble, k_need: int):
    """Curve values as nested lists, materialized down to depth k_need."""
    return [[[ens.L(c, k, i) for i in range(ens.length + 1)]
             for k in range(1, k_need + 1)]
            for c in range(1, ens.n + 1)]


def compatible_ensembles(ens: ColoredLineEnsemble, window: WindowSpec,
                         simple: bool = False):
    """All valid ensembles agreeing with ``ens`` outside the window."""
    if window.v > ens.length - 1:
        raise ValueError("window abscissas must stay inside [1, length-1]")
    n, length = ens.n, ens.length
    k_need = max(window.k_hi + 1, ens.k_depth)
    grid = _value_grid(ens, k_need)
    cells = [(c, k, m)
             for m in range(window.u, window.v + 1)
             for k in range(window.k_lo, window.k_hi + 1)
             for c in range(1, n + 1)]
    found = []

    def fill(idx):
        if idx == len(cells):
            cand = ColoredLineEnsemble(
                n, length,
                tuple(tuple(tuple(row) for row in family)
                      for family in grid))
            if cand.check_valid() and (not simple or cand.simple):
                found.append(cand)
            return
        c, k, m = cells[idx]
        lo = grid[c - 1][k - 1][window.v + 1]
        hi = grid[c - 1][k - 1][m - 1]
        if k >= 2:
            hi = min(hi, grid[c - 1][k - 2][m])
        if simple:
            lo = max(lo, grid[c - 1][k - 1][m - 1] - 1)
        for value in range(lo, hi + 1):
            grid[c - 1][k - 1][m] = value
            fill(idx + 1)
        grid[c - 1][k - 1][m] = ens.L(c, k, m)

    fill(0)
    return found


def _ipow(base, e: int):
    return base ** e if e >= 0 else 1 / base ** (-e)


def _weight_rows(window: WindowSpec):
    return range(max(window.k_lo - 1, 1), window.k_hi + 1)


def _score_generic(cand, window, q, s, x, y):
    N = len(x)
    total = q * 0 + 1
    for k in _weight_rows(window):
        for m in range(window.u, window.v + 2):
            A, b, C, d = configs_from_ensemble(cand, (-k, m))
            rap = x[m - 1] if m <= N else y[m - N - 1]
            total = total * weight_L(q, rap, s, A, b, C, d)
            if total == 0:
                return total
    return total


def _score_fused(cand, window, q, s, x, y, r2, t2):
    N = len(x)
    total = q * 0 + 1
    for k in _weight_rows(window):
        for m in range(window.u, window.v + 2):
            A, B, C, D = configs_from_ensemble(cand, (-k, m), fused=True)
            if m <= N:
                w = weight_W(q, x[m - 1], A, B, C, D, r2=r2[m - 1], s=s)
            else:
                w = weight_W(q, y[m - N - 1], A, B, C, D,
                             r2=t2[m - N - 1], s=s)
            total = total * w
            if total == 0:
                return total
    return total


def _score_n1(cand, window, q, x, y, N):
    u0 = max(window.u - 1, N)
    v0 = min(window.v + 1, N)
    total = q * 0 + 1
    for k in range(window.k_lo, window.k_hi + 1):
        total = total * _ipow(x, -cand.L(1, k, v0)) * _ipow(y, cand.L(1, k, u0))
    for k in _weight_rows(window):
        for m in range(window.u, window.v + 2):
            delta_prev = cand.L(1, k, m - 1) - cand.L(1, k + 1, m - 1)
            delta = cand.L(1, k, m) - cand.L(1, k + 1, m)
            if delta_prev - delta == 1:
                total = total * (1 - q ** delta_prev)
            if total == 0:
                return total
    return total


def q0_constraint_violations(ens: ColoredLineEnsemble,
                             k_range=None, m_range=None):
    """Sites (c, k, m) where a strictly separated next-color pair fails
    to step in parallel with the current color.

    The constraint: whenever curve k of color c+1 sits strictly above
    curve k+1 of color c+1 at m, the decrements of curves k of colors c
    and c+1 across (m-1, m) must agree.
    """
    if k_range is None:
        k_range = range(1, ens.k_depth + 2)
    if m_range is None:
        m_range = range(1, ens.length + 1)
    bad = []
    for c in range(1, ens.n):
        for k in k_range:
            for m in m_range:
                if ens.L(c + 1, k, m) <= ens.L(c + 1, k + 1, m):
                    continue
                step_c = ens.L(c, k, m - 1) - ens.L(c, k, m)
                step_c1 = ens.L(c + 1, k, m - 1) - ens.L(c + 1, k, m)
                if step_c != step_c1:
                    bad.append((c, k, m))
    return bad


def _score_q0(cand, window):
    rows = _weight_rows(window)
    cols = range(window.u, window.v + 2)
    return 0 if q0_constraint_violations(cand, rows, cols) else 1


def _score_qboson(cand, window, q, nu, N):
    total = q * 0 + 1
    one = q * 0 + 1
    for k in _weight_rows(window):
        for m in range(window.u, window.v + 2):
            A, B, C, D = configs_from_ensemble(cand, (-k, m), fused=True)
            total = total * weight_W(q, one, A, B, C, D,
                                     nu=nu[m - N - 1], variant="boson")
            if total == 0:
                return total
    return total


def gibbs_conditional_law(ens: ColoredLineEnsemble, window: WindowSpec,
                          variant: str, params: dict):
    """Conditional law of the windowed curves given everything else.

    Enumerates the ensembles compatible with ``ens`` off the window and
    scores each by the product of vertex weights over the rows touching
    the window, normalized to total mass one.  Variants:

        generic -- single-arrow weights; params q, s, x, y.
        fused   -- vector weights; params q, s, x, y, r2, t2.
        n1      -- one color, weights reduced to curve gaps with the
                   boundary rapidity factor; params q, x, y, N.
        q0      -- uniform on the parallel-step constraint set; params N.
        qboson  -- params q, nu (window right of the N cut).

    Returns a dict mapping compatible ensembles to probabilities.
    """
    if variant in ("generic", "n1", "q0"):
        simple = True
    elif variant in ("fused", "qboson"):
        simple = False
    else:
        raise ValueError(f"unknown variant {variant!r}")

    if variant in ("generic", "fused"):
        N = len(params["x"])
        M = len(params["y"])
        if M + N != ens.length:
            raise ValueError("rapidity counts do not match the interval")
    elif variant == "qboson":
        N = ens.length - len(params["nu"])
        if window.u <= N:
            raise ValueError("q-boson window must lie right of the N cut")
    else:
        N = params["N"]
    if variant == "q0" and window.u <= N <= window.v:
        raise ValueError("q0 window must avoid the N cut")

    candidates = compatible_ensembles(ens, window, simple=simple)
    if not candidates:
        raise ValueError("window admits no compatible ensemble")

    if variant == "generic":
        scores = [_score_generic(c, window, params["q"], params["s"],
                                 params["x"], params["y"])
                  for c in candidates]
    elif variant == "fused":
        scores = [_score_fused(c, window, params["q"], params["s"],
                               params["x"], params["y"],
                               params["r2"], params["t2"])
                  for c in candidates]
    elif variant == "n1":
        scores = [_score_n1(c, window, params["q"], params["x"],
                            params["y"], N)
                  for c in candidates]
    elif variant == "q0":
        scores = [_score_q0(c, window) for c in candidates]
    else:
        scores = [_score_qboson(c, window, params["q"], params["nu"], N)
                  for c in candidates]

    Z = sum(scores)
    if Z == 0:
        raise ValueError("all compatible ensembles have zero weight")
    return {cand: w / Z for cand, w in zip(candidates, scores) if w != 0}


# ---------------------------------------------------------------------------
# Oracle checks against the ascending measure
# ---------------------------------------------------------------------------

def _window_key(grid, window):
    return tuple(grid[c][k - 1][m]
                 for c in range(len(grid))
                 for k in range(window.k_lo, window.k_hi + 1)
                 for m in range(window.u, window.v + 1))


def _frozen_key(grid, window):
    out = []
    for c in range(len(grid)):
        for k, row in enumerate(grid[c], start=1):
            for m, value in enumerate(row):
                if not window.contains(k, m):
                    out.append(value)
    return tuple(out)


def verify_gibbs(q, n, M, N, sigma, x, y, s, window: WindowSpec,
                 variant: str = "generic", R=None, t2=None,
                 trunc: TruncationPolicy = TruncationPolicy()):
    """Compare window conditionals with exact Bayes conditioning.

    Materializes the ascending measure, pushes every atom to its curve
    family, groups atoms by the off-window curve data, and compares each
    group's renormalized law with gibbs_conditional_law on a group
    representative, atom by atom.
    """
    from .ybe import CheckReport

    fused = R is not None
    measure = measure_fG(q, n, M, N, sigma, x, y, s, trunc, R=R, t2=t2)
    atoms = [(ensemble_from_sequence(seq), p) for seq, p in measure.atoms]
    if window.v > M + N - 1:
        raise ValueError("window abscissas must stay inside [1, M+N-1]")

    if variant == "generic":
        params = {"q": q, "s": s, "x": tuple(x), "y": tuple(y)}
    elif variant == "fused":
        params = {"q": q, "s": s, "x": tuple(x), "y": tuple(y),
                  "r2": tuple(1 / q ** r for r in R), "t2": tuple(t2)}
    elif variant == "n1":
        if s != 0:
            raise ValueError("n1 variant needs s = 0")
        if len(set(x)) > 1 or len(set(y)) > 1:
            raise ValueError("n1 variant needs homogeneous rapidities")
        params = {"q": q, "x": x[0], "y": y[0], "N": N}
    elif variant == "q0":
        if q != 0 or s != 0:
            raise ValueError("q0 variant needs q = 0 and s = 0")
        raps = {x[m - 1] if m <= N else y[m - N - 1]
                for m in range(window.u, window.v + 2)}
        if len(raps) > 1:
            raise ValueError("q0 variant needs one rapidity across the "
                             "window columns")
        params = {"N": N}
    else:
        raise ValueError(f"variant {variant!r} has no measure-side oracle")

    k_need = max(window.k_hi + 1, max(e.k_depth for e, _ in atoms))
    groups = {}
    for ens, p in atoms:
        grid = _value_grid(ens, k_need)
        key = _frozen_key(grid, window)
        groups.setdefault(key, []).append((ens, grid, p))

    worst = 0.0
    checked = 0
    for members in groups.values():
        mass = sum(p for _, _, p in members)
        if mass == 0:
            continue
        bayes = {}
        for _, grid, p in members:
            wkey = _window_key(grid, window)
            bayes[wkey] = bayes.get(wkey, p * 0) + p / mass
        law = gibbs_conditional_law(members[0][0], window, variant, params)
        gibbs = {}
        for cand, p in law.items():
            wkey = _window_key(_value_grid(cand, k_need), window)
            gibbs[wkey] = gibbs.get(wkey, p * 0) + p
        for wkey in set(bayes) | set(gibbs):
            gap = abs(as_float(bayes.get(wkey, 0) - gibbs.get(wkey, 0)))
            worst = max(worst, gap)
        checked += 1

    exact = is_exact(q) and all(yi == s for yi in y)
    threshold = max(trunc.tol, 10.0 * abs(1.0 - as_float(measure.mass)))
    ok = worst == 0.0 if exact else worst <= threshold
    return CheckReport(ok=ok, lhs=variant, rhs="bayes", difference=worst,
                       detail=f"gibbs worst={worst:.3g} over {checked} "
                              "conditioning classes")


def verify_top_curves(q, n, M, N, sigma, x, y, s,
                      trunc: TruncationPolicy = TruncationPolicy(),
                      R=None, t2=None):
    """Joint law of the depth-one curves against the rectangle exit law.

    The measure is built on the reversed column data (level N + i of the
    strip carries the rapidity of model column M - i + 1); the model-side
    height functions are read along the northeast boundary of the
    rectangle and complemented against the color totals.
    """
    from .models import _as_vector, exit_law
    from .ybe import CheckReport

    model = "fused" if R is not None else "six_vertex"
    y_rev = tuple(reversed(y))
    t2_rev = tuple(reversed(t2)) if t2 is not None else None
    measure = measure_fG(q, n, M, N, sigma, x, y_rev, s, trunc,
                        R=R, t2=t2_rev)
    law_measure = {}
    for seq, p in measure.atoms:
        ens = ensemble_from_sequence(seq)
        key = tuple(ens.L(c, 1, i)
                    for c in range(1, n + 1) for i in range(M + N + 1))
        law_measure[key] = law_measure.get(key, p * 0) + p

    lengths = [0] * n
    for j, c in enumerate(sigma):
        lengths[c - 1] += 1 if R is None else R[j]
    totals = [sum(lengths[c - 1:]) for c in range(1, n + 1)]

    law_model = {}
    for (north, east), p in exit_law(model, q, M, N, sigma, x, y,
                                     t2=t2, R=R).items():
        key = []
        for c in range(1, n + 1):
            crossed = 0
            key.append(totals[c - 1])
            for j in range(1, N + 1):
                crossed += sum(_as_vector(n, east[j - 1])[c - 1:])
                key.append(totals[c - 1] - crossed)
            for i in range(1, M + 1):
                crossed += sum(_as_vector(n, north[M - i])[c - 1:])
                key.append(totals[c - 1] - crossed)
        key = tuple(key)
        law_model[key] = law_model.get(key, p * 0) + p

    worst = 0.0
    for key in set(law_measure) | set(law_model):
        gap = abs(as_float(law_measure.get(key, 0) - law_model.get(key, 0)))
        worst = max(worst, gap)
    exact = is_exact(q) and all(yi == s for yi in y)
    threshold = max(trunc.tol, 10.0 * abs(1.0 - as_float(measure.mass)))
    ok = worst == 0.0 if exact else worst <= threshold
    return CheckReport(ok=ok, lhs="top curves", rhs="exit heights",
                       difference=worst,
                       detail=f"top-curve worst={worst:.3g}")


def check_merge_ensembles(q, n, M, N, sigma, x, y, s,
                          trunc: TruncationPolicy = TruncationPolicy(),
                          R=None, t2=None):
    """Drop the second color family and compare with one fewer color.

    The marginal of (curves of colors 1, 3, ..., n) under the n-color
    measure must equal the full law under the (n-1)-color measure with
    colors 1 and 2 identified in the boundary data.
    """
    from .ybe import CheckReport

    if n == 1:
        return CheckReport(ok=True, lhs="marginal", rhs="merged",
                           difference=0.0, detail="vacuous for n = 1")
    law_marginal = {}
    measure = measure_fG(q, n, M, N, sigma, x, y, s, trunc, R=R, t2=t2)
    for seq, p in measure.atoms:
        ens = ensemble_from_sequence(seq)
        reduced = ColoredLineEnsemble(
            n - 1, ens.length, (ens.curves[0],) + ens.curves[2:])
        law_marginal[reduced] = law_marginal.get(reduced, p * 0) + p

    law_merged = {}
    merged = measure_fG(q, n - 1, M, N, merge_sigma(sigma), x, y, s,
                        trunc, R=R, t2=t2)
    for seq, p in merged.atoms:
        ens = ensemble_from_sequence(seq)
        law_merged[ens] = law_merged.get(ens, p * 0) + p

    worst = 0.0
    for key in set(law_marginal) | set(law_merged):
        gap = abs(as_float(law_marginal.get(key, 0) - law_merged.get(key, 0)))
        worst = max(worst, gap)
    exact = is_exact(q) and all(yi == s for yi in y)
    threshold = max(trunc.tol, 10.0 * abs(1.0 - as_float(measure.mass))
                    + 10.0 * abs(1.0 - as_float(merged.mass)))
    ok = worst == 0.0 if exact else worst <= threshold
    return CheckReport(ok=ok, lhs="marginal", rhs="merged",
                       difference=worst,
                       detail=f"ensemble merge worst={worst:.3g}")


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def ensemble_svg(ens: ColoredLineEnsemble, cell: int = 24,
                 margin: int = 30) -> str:
    """Render the curves as one SVG panel per color."""
    palette = ("#4363d8", "#e6194b", "#3cb44b", "#f58231", "#911eb4",
               "#46f0f0")
    panels = []
    width = ens.length * cell + 2 * margin
    y_off = 0
    for c, family in enumerate(ens.curves, start=1):
        vmax = max(max(curve) for curve in family)
        vmin = min(min(curve) for curve in family)
        height = (vmax - vmin) * cell + 2 * margin
        parts = [f'<g transform="translate(0,{y_off})">',
                 f'<text x="{margin}" y="{margin - 10}" '
                 f'font-size="12">color {c}</text>']
        for k, curve in enumerate(family, start=1):
            pts = " ".join(
                f"{margin + i * cell},{margin + (vmax - v) * cell}"
                for i, v in enumerate(curve))
            color = palette[(c - 1) % len(palette)]
            parts.append(f'<polyline points="{pts}" fill="none" '
                         f'stroke="{color}" stroke-width="1.5" '
                         f'opacity="{max(0.25, 1.0 - 0.15 * (k - 1)):.2f}"/>')
        parts.append("</g>")
        panels.append("\n".join(parts))
        y_off += height
    return ('<svg xmlns="http://www.w3.org/2000/svg" '
            f'width="{width}" height="{max(y_off, 1)}">\n'
            + "\n".join(panels) + "\n</svg>\n")
