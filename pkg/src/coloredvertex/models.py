"""Finite-rectangle stochastic vertex models and their exit statistics.

Samples the colored six-vertex, bundled (fused), and q-boson models on an
M x N rectangle by resolving vertices diagonal by diagonal, computes the
ray-crossing height functions, enumerates the exact exit distribution by
a column transfer, and verifies that the exit law matches the marginals
of the ascending strip measures.
"""

from dataclasses import dataclass

from .qcore import is_exact, as_float, unit, vec_add
from .kernels import enumerate_outputs, sample_output
from .strip import TruncationPolicy, measure_fG

__all__ = [
    "ExitData",
    "HeightField",
    "RectanglePathEnsemble",
    "exit_law",
    "height_field",
    "height_field_csv",
    "sample_rectangle",
    "verify_matching",
]

MODELS = ("six_vertex", "fused", "qboson")

STATE_CAP = 10 ** 7


@dataclass(frozen=True)
class ExitData:
    """Exit colors of a rectangle: north by column, east by row."""

    north: tuple
    east: tuple


@dataclass(frozen=True)
class RectanglePathEnsemble:
    """A consistent arrow configuration on [1, M] x [1, N].

    ``cells`` maps (i, j) to (south, west, north, east) edge values; edge
    values are single colors for the six-vertex model (vertical and
    horizontal) and the q-boson model (horizontal only), and color-count
    vectors otherwise.  Row j admits the entrance arrows of color
    sigma(j) from the west; nothing enters from the south.
    """

    model: str
    M: int
    N: int
    n: int
    sigma: tuple
    cells: dict
    R: tuple | None = None

    def config(self, i: int, j: int):
        return self.cells[(i, j)]

    def west_entrance(self, j: int):
        return _entrance(self.model, self.n, self.sigma, self.R, j)

    def south_entrance(self, i: int):
        return _south_zero(self.model, self.n)

    def exit_data(self) -> ExitData:
        if self.N == 0:
            north = tuple(self.south_entrance(i)
                          for i in range(1, self.M + 1))
        else:
            north = tuple(self.cells[(i, self.N)][2]
                          for i in range(1, self.M + 1))
        if self.M == 0:
            east = tuple(self.west_entrance(j)
                         for j in range(1, self.N + 1))
        else:
            east = tuple(self.cells[(self.M, j)][3]
                         for j in range(1, self.N + 1))
        return ExitData(north=north, east=east)

    def to_jsonable(self) -> dict:
        """JSON-ready dict with the grid of arrow configurations."""
        cells = {f"{i},{j}": [list(v) if isinstance(v, tuple) else v
                              for v in self.cells[(i, j)]]
                 for (i, j) in self.cells}
        return {"model": self.model, "M": self.M, "N": self.N,
                "n": self.n, "sigma": list(self.sigma),
                "R": list(self.R) if self.R else None, "cells": cells}

    def check_consistent(self):
        """Verify shared-edge agreement, entrances, and conservation."""
        for i in range(1, self.M + 1):
            for j in range(1, self.N + 1):
                south, west, north, east = self.cells[(i, j)]
                if j == 1:
                    assert south == self.south_entrance(i), (i, j)
                else:
                    assert south == self.cells[(i, j - 1)][2], (i, j)
                if i == 1:
                    assert west == self.west_entrance(j), (i, j)
                else:
                    assert west == self.cells[(i - 1, j)][3], (i, j)
                assert vec_add(_as_vector(self.n, south),
                               _as_vector(self.n, west)) == vec_add(
                    _as_vector(self.n, north), _as_vector(self.n, east)), (
                    i, j)
        return True


def _entrance(model, n, sigma, R, j):
    if model == "six_vertex" or model == "qboson":
        return sigma[j - 1]
    return tuple(R[j - 1] * unit(n, sigma[j - 1])[c] for c in range(n))


def _south_zero(model, n):
    if model == "six_vertex":
        return 0
    return (0,) * n


def _as_vector(n, value):
    if isinstance(value, tuple):
        return value
    return unit(n, value)


def _vertex_family(model, q, n, x, y, t2, R, i, j):
    """Sampling family and parameters for the vertex at (i, j)."""
    if model == "six_vertex":
        return "R", {"q": q, "n": n, "z": y[i - 1] / x[j - 1]}
    if model == "fused":
        # the fused weight takes the reciprocal spectral argument of R
        return "U", {"q": q, "z": x[j - 1] / y[i - 1],
                     "r2": q ** -R[j - 1], "s2": t2[i - 1]}
    if model == "qboson":
        return "hs", {"q": q, "x": x[j - 1] / y[i - 1], "s2": t2[i - 1]}
    raise ValueError(f"unknown model {model!r}")


def sample_rectangle(model, q, M, N, sigma, x, y, rng, t2=None, R=None):
    """Sample one rectangle ensemble with the given entrance data.

    Vertices are resolved along successive antidiagonals i + j = const,
    so that the south and west edges of every vertex are determined
    before its outputs are drawn.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    sigma = tuple(sigma)
    n = max(sigma, default=0)
    cells = {}
    for diag in range(2, M + N + 1):
        for i in range(max(1, diag - N), min(M, diag - 1) + 1):
            j = diag - i
            south = (cells[(i, j - 1)][2] if j > 1
                     else _south_zero(model, n))
            west = (cells[(i - 1, j)][3] if i > 1
                    else _entrance(model, n, sigma, R, j))
            family, params = _vertex_family(model, q, n, x, y, t2, R, i, j)
            north, east = sample_output(family, params, (south, west), rng)
            cells[(i, j)] = (south, west, north, east)
    return RectanglePathEnsemble(model=model, M=M, N=N, n=n, sigma=sigma,
                                 cells=cells, R=tuple(R) if R else None)


# ---------------------------------------------------------------------------
# Height functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HeightField:
    """Ray-crossing height functions of a rectangle ensemble.

    ``right[c][i][j]`` counts the color-c arrows crossing the vertical
    ray descending from (i + 1/2, j + 1/2); indices run over 0..M and
    0..N.  The complementary ``left`` count is the number of color-c
    arrows missing that ray; their sum is the total color count.
    """

    n: int
    M: int
    N: int
    totals: tuple
    right: tuple

    def h_right(self, c, i, j):
        return self.right[c - 1][i][j]

    def h_left(self, c, i, j):
        return self.totals[c - 1] - self.right[c - 1][i][j]

    def h_ge_right(self, c, i, j):
        return sum(self.right[k - 1][i][j] for k in range(c, self.n + 1))

    def h_ge_left(self, c, i, j):
        total = sum(self.totals[k - 1] for k in range(c, self.n + 1))
        return total - self.h_ge_right(c, i, j)


def height_field(ensemble: RectanglePathEnsemble) -> HeightField:
    """Count, for every color, the arrows crossing each descending ray."""
    n, M, N = ensemble.n, ensemble.M, ensemble.N

    def horizontal(i, j):
        # color counts on the edge from (i, j) to (i + 1, j); column 0 is
        # the entrance edge of row j
        if i == 0:
            return _as_vector(n, ensemble.west_entrance(j))
        return _as_vector(n, ensemble.cells[(i, j)][3])

    right = []
    for c in range(1, n + 1):
        grid = []
        for i in range(M + 1):
            col = [0]
            acc = 0
            for j in range(1, N + 1):
                acc += horizontal(i, j)[c - 1]
                col.append(acc)
            grid.append(tuple(col))
        right.append(tuple(grid))
    totals = tuple(
        sum(_as_vector(n, ensemble.west_entrance(j))[c - 1]
            for j in range(1, N + 1))
        for c in range(1, n + 1))
    return HeightField(n=n, M=M, N=N, totals=totals, right=tuple(right))


def height_field_csv(hf: HeightField) -> str:
    """Render all four height arrays as CSV text."""
    import csv
    import io

    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["c", "i", "j", "h_right", "h_left",
                     "h_ge_right", "h_ge_left"])
    for c in range(1, hf.n + 1):
        for i in range(hf.M + 1):
            for j in range(hf.N + 1):
                writer.writerow([c, i, j, hf.h_right(c, i, j),
                                 hf.h_left(c, i, j),
                                 hf.h_ge_right(c, i, j),
                                 hf.h_ge_left(c, i, j)])
    return out.getvalue()


# ---------------------------------------------------------------------------
# Exact exit distribution
# ---------------------------------------------------------------------------

def exit_law(model, q, M, N, sigma, x, y, t2=None, R=None,
             state_cap: int = STATE_CAP):
    """Exact distribution of the exit data by a column transfer.

    The transfer state is the tuple of horizontal edge values between
    consecutive columns together with the accumulated north exits; the
    number of enumerated states is capped at ``state_cap``.

    Returns a dict mapping (north tuple, east tuple) to probability.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    sigma = tuple(sigma)
    n = max(sigma, default=0)
    zero = q * 0
    entrance = tuple(_entrance(model, n, sigma, R, j)
                     for j in range(1, N + 1))
    # state: (north exits so far, west edges of the next column) -> weight
    states = {((), entrance): zero + 1}
    for i in range(1, M + 1):
        new_states = {}
        count = 0
        for (norths, wests), w0 in states.items():

            def ascend(j, south, easts, w):
                nonlocal count
                if j > N:
                    key = (norths + (south,), tuple(easts))
                    new_states[key] = new_states.get(key, zero) + w
                    count += 1
                    if count > state_cap:
                        raise ValueError(
                            f"exit_law state count exceeds {state_cap}")
                    return
                family, params = _vertex_family(model, q, n, x, y, t2, R,
                                                i, j)
                for (north, east), wt in enumerate_outputs(
                        family, params, (south, wests[j - 1])):
                    if wt == 0:
                        continue
                    easts.append(east)
                    ascend(j + 1, north, easts, w * wt)
                    easts.pop()

            ascend(1, _south_zero(model, n), [], w0)
        states = new_states
    law = {}
    for (norths, easts), w in states.items():
        key = (norths, easts)
        law[key] = law.get(key, zero) + w
    return law


# ---------------------------------------------------------------------------
# Matching against the ascending strip measures
# ---------------------------------------------------------------------------

def _zero_count_tuple(n, M, N, q_tuple):
    """Joint zero-entry counts determined by the per-level exit data.

    ``q_tuple`` lists, for levels 1..M+N, the exit color (or color-count
    vector) at the last column; entry counts of colors >= c accumulate
    into the zero counts of the successive compositions.
    """
    out = []
    for c in range(1, n + 1):
        acc = 0
        row = []
        for entry in q_tuple:
            vec = _as_vector(n, entry)
            acc += sum(vec[k - 1] for k in range(c, n + 1))
            row.append(acc)
        out.extend(row)
    return tuple(out)


def _height_tuple(n, M, N, north, east):
    """The exit-site height functions determined by the exit data."""
    out = []
    for c in range(1, n + 1):
        base = 0
        row = []
        for j in range(1, N + 1):
            vec = _as_vector(n, east[j - 1])
            base += sum(vec[k - 1] for k in range(c, n + 1))
            row.append(base)
        for i in range(1, M + 1):
            vec = _as_vector(n, north[M - i])
            base += sum(vec[k - 1] for k in range(c, n + 1))
            row.append(base)
        out.extend(row)
    return tuple(out)


def verify_matching(q, n, M, N, sigma, x, y, s,
                    trunc: TruncationPolicy = TruncationPolicy(),
                    R=None, t2=None, s_alt=None):
    """Check that the rectangle exit law equals the strip measure marginal.

    The exit data (north, east) of the model corresponds to the per-level
    exit sequence of the ascending measure via (east; reversed north),
    with the measure built on the reversed column data: its level N + i
    carries the rapidity (and row spin) of column M - i + 1.  Also
    compares the joint zero-count law against the law of the height
    functions along the northeast boundary, and (optionally) re-derives
    the marginal at a second value of s to confirm s-independence.
    """
    from .ybe import CheckReport

    sigma = tuple(sigma)
    model = "fused" if R is not None else "six_vertex"
    law_model = exit_law(model, q, M, N, sigma, x, y, t2=t2, R=R)
    y_rev = tuple(reversed(y))
    t2_rev = tuple(reversed(t2)) if t2 is not None else None

    def measure_law(s_val):
        m = measure_fG(q, n, M, N, sigma, x, y_rev, s_val, trunc,
                       R=R, t2=t2_rev)
        return m, m.exit_color_law()

    m, law_measure = measure_law(s)
    # exit sequence of the measure lists levels 1..M+N bottom to top
    converted = {}
    for (north, east), p in law_model.items():
        key = tuple(east) + tuple(reversed(north))
        converted[key] = converted.get(key, p * 0) + p

    exact = is_exact(q) and all(yi == s for yi in y)
    # truncation of the measure leaks mass; widen the float threshold by it
    threshold = max(trunc.tol, 10.0 * abs(1.0 - as_float(m.mass)))
    keys = set(converted) | set(law_measure)
    worst = 0.0
    worst_key = None
    for key in keys:
        a = converted.get(key, 0)
        b = law_measure.get(key, 0)
        gap = abs(as_float(a - b))
        if gap > worst:
            worst, worst_key = gap, key
    ok = worst == 0.0 if exact else worst <= threshold

    # joint zero-count law vs height-function law along the NE boundary
    heights = {}
    for (north, east), p in law_model.items():
        key = _height_tuple(n, M, N, north, east)
        heights[key] = heights.get(key, p * 0) + p
    zeros = {}
    for key, p in law_measure.items():
        zkey = _zero_count_tuple(n, M, N, key)
        zeros[zkey] = zeros.get(zkey, p * 0) + p
    for key in set(heights) | set(zeros):
        gap = abs(as_float(heights.get(key, 0) - zeros.get(key, 0)))
        if gap > worst:
            worst, worst_key = gap, ("heights", key)
    ok = ok and (worst == 0.0 if exact else worst <= threshold)

    detail = f"matching worst={worst:.3e} at {worst_key!r}"
    if s_alt is not None:
        # the alternative measure is truncated in general, so the
        # s-independence leg is always a tolerance comparison
        m_alt, law_alt = measure_law(s_alt)
        threshold_alt = max(threshold,
                            10.0 * abs(1.0 - as_float(m_alt.mass)))
        worst_alt = 0.0
        for key in set(law_measure) | set(law_alt):
            gap = abs(as_float(law_measure.get(key, 0)
                               - law_alt.get(key, 0)))
            worst_alt = max(worst_alt, gap)
        ok = ok and worst_alt <= threshold_alt
        worst = max(worst, worst_alt)
        detail += f" with s-independence worst={worst_alt:.3e}"
    return CheckReport(ok=ok, lhs=converted, rhs=law_measure,
                       difference=worst, detail=detail)
