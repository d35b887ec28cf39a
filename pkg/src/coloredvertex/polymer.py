"""Log-gamma polymer harness and q -> 1 degeneration checks.

Provides the directed-polymer partition function with inverse-Gamma
weights, the complemented q-discrete vertex field sampled from the qdp
bulk and bq boundary kernels, rescaled height observables converging to
the polymer, and numeric/statistical verifiers for the single-vertex
limit chain (fused complemented -> qdp -> Gamma clocks).
"""

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .kernels import (
    weight_complemented_bq,
    weight_complemented_full,
    weight_complemented_qdp,
    weight_U,
)
from .qcore import phi_form, q_pochhammer, vec_add, vec_sub, vec_total
from .ybe import CheckReport


# ---------------------------------------------------------------------------
# Directed polymer with inverse-Gamma weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolymerField:
    """Independent Gamma(theta_i + theta'_j) weights on a finite grid.

    ``weights[i - 1][j - 1]`` is the weight at vertex (i, j) with i the
    horizontal and j the vertical coordinate, both 1-based.
    """

    theta_rows: tuple
    theta_cols: tuple
    weights: tuple

    def __post_init__(self):
        if any(t <= 0 for t in self.theta_rows + self.theta_cols):
            raise ValueError("all shape parameters must be positive")
        if len(self.weights) != len(self.theta_rows) or any(
                len(col) != len(self.theta_cols) for col in self.weights):
            raise ValueError("weight grid does not match parameter lengths")
        if any(w <= 0 for col in self.weights for w in col):
            raise ValueError("all weights must be positive")

    def Y(self, i: int, j: int):
        return self.weights[i - 1][j - 1]


def sample_polymer_field(theta_rows, theta_cols, rng) -> PolymerField:
    """Draw the independent Gamma(theta_i + theta'_j) weight grid."""
    weights = tuple(
        tuple(rng.gammavariate(ti + tj, 1.0) for tj in theta_cols)
        for ti in theta_rows)
    return PolymerField(tuple(theta_rows), tuple(theta_cols), weights)


def polymer_partition(field: PolymerField, start, end):
    """Point-to-point partition function: sum over directed paths from
    ``start`` to ``end`` of the product of inverse weights along the path.

    Computed by the recursion z(v) = Y_v^{-1} (z(v - e1) + z(v - e2))
    with z(start) = Y_start^{-1}.
    """
    i0, j0 = start
    i1, j1 = end
    if i1 < i0 or j1 < j0:
        raise ValueError("end - start must be a nonnegative displacement")
    if i0 < 1 or j0 < 1 or i1 > len(field.theta_rows) or \
            j1 > len(field.theta_cols):
        raise ValueError("path endpoints outside the weight grid")
    z = {}
    for i in range(i0, i1 + 1):
        for j in range(j0, j1 + 1):
            if i == i0 and j == j0:
                acc = 1.0
            else:
                acc = z.get((i - 1, j), 0.0) + z.get((i, j - 1), 0.0)
            z[(i, j)] = acc / field.Y(i, j)
    return z[(i1, j1)]


def _partition_grids(Y, starts):
    """Vectorized partition functions over a replica axis.

    ``Y`` has shape (R, I, J); for each start row j0 in ``starts`` the
    result maps j0 to an (R, I, J) array holding z((1, j0) -> (i, j))
    (zero where j < j0).
    """
    R, I, J = Y.shape
    out = {}
    for j0 in starts:
        Z = np.zeros_like(Y)
        for j in range(j0, J + 1):
            for i in range(1, I + 1):
                if i == 1 and j == j0:
                    acc = 1.0
                else:
                    acc = (Z[:, i - 2, j - 1] if i > 1 else 0.0) \
                        + (Z[:, i - 1, j - 2] if j > j0 else 0.0)
                Z[:, i - 1, j - 1] = acc / Y[:, i - 1, j - 1]
        out[j0] = Z
    return out


# ---------------------------------------------------------------------------
# Color blocks
# ---------------------------------------------------------------------------

def _check_blocks(blocks):
    blocks = tuple(blocks)
    if not blocks:
        raise ValueError("need at least one color block")
    for i, K in enumerate(blocks):
        if K is None:
            if i != len(blocks) - 1:
                raise ValueError("only the last block may be infinite")
        elif K < 1:
            raise ValueError("block sizes must be >= 1")
    return blocks


def block_start(blocks, c: int) -> int:
    """First row carrying color c, i.e. 1 + the total size of blocks < c."""
    blocks = _check_blocks(blocks)
    if c < 1 or c > len(blocks):
        raise ValueError(f"color {c} outside the {len(blocks)} blocks")
    head = blocks[:c - 1]
    if any(K is None for K in head):
        raise ValueError("color after an infinite block never enters")
    return sum(head) + 1


def m_of_row(blocks, j: int) -> int:
    """Color index of row j: the unique m with the j-th row in block m."""
    blocks = _check_blocks(blocks)
    if j < 1:
        raise ValueError("rows are 1-based")
    acc = 0
    for m, K in enumerate(blocks, start=1):
        if K is None or j <= acc + K:
            return m
        acc += K
    raise ValueError(f"row {j} beyond the final finite block")


# ---------------------------------------------------------------------------
# Numeric tables and the Phi / Psi factor laws
# ---------------------------------------------------------------------------

class _PochTable:
    """Cumulative log (q; q)_m table with lazy growth."""

    def __init__(self, q: float):
        self.q = float(q)
        self._log = np.zeros(1)

    def upto(self, size: int) -> np.ndarray:
        if size >= len(self._log):
            old = len(self._log)
            new = max(size + 1, 2 * old)
            ext = np.log1p(-self.q ** np.arange(old, new))
            self._log = np.concatenate(
                [self._log, self._log[-1] + np.cumsum(ext)])
        return self._log


def _log_poch_inf(a: float, q: float) -> float:
    """log (a; q)_inf for 0 <= a < 1, 0 < q < 1."""
    if a == 0:
        return 0.0
    terms = int(math.log(1e-18 / a) / math.log(q)) + 2 if a > 1e-18 else 1
    return float(np.log1p(-a * q ** np.arange(terms)).sum())


def _phi_weights(q: float, gamma: float, tol: float = 1e-12) -> np.ndarray:
    """Probability array of the q-geometric clock law
    Phi(l) = (gamma; q)_inf gamma^l / (q; q)_l, truncated at tail < tol.

    This is also the infinite-level boundary law at z = 1/gamma.
    """
    if not 0 < gamma < 1:
        raise ValueError("need 0 < gamma < 1")
    eps = -math.log(q)
    theta_eps = -math.log(gamma)
    log0 = _log_poch_inf(gamma, q)
    size = int((math.log(1 / eps) + 60.0) / eps
               + 80.0 / theta_eps) + 64
    table = _PochTable(q)
    while True:
        lqq = table.upto(size)
        ell = np.arange(size + 1)
        logw = log0 + ell * math.log(gamma) - lqq[ell]
        w = np.exp(logw)
        ratio = gamma / (1 - q ** (size + 1))
        if ratio < 1 and w[-1] * ratio / (1 - ratio) < tol:
            return w
        size *= 2


@dataclass
class PsiLaw:
    """Windowed joint law of (k, Cbar) under the k-and-overline factor of
    the qdp weight; ``weights[m, ki]`` belongs to (ks[ki], cbars[m])."""

    ks: np.ndarray
    cbars: np.ndarray
    weights: np.ndarray
    mass: float
    negative_mass: float


def _psi_grid(q, A, Bbar, Bn, ks, axes, table):
    """Psi values on the product window ``axes`` x ``ks`` (see PsiLaw)."""
    n = len(A)
    An = A[-1]
    Abar = A[:-1]
    bbar = sum(Bbar)
    sb = Bn - bbar
    lnq = math.log(q)
    totals = [Abar[j] + Bbar[j] for j in range(n - 1)]

    grids = np.meshgrid(*axes, indexing="ij") if axes else []
    cbars = (np.stack([g.ravel() for g in grids], axis=1)
             if grids else np.zeros((1, 0), dtype=int))
    M = cbars.shape[0]
    K = len(ks)
    cbar_tot = cbars.sum(axis=1) if n > 1 else np.zeros(M, dtype=int)
    dbars = np.asarray(totals)[None, :] - cbars if n > 1 else cbars
    dbar_tot = dbars.sum(axis=1) if n > 1 else np.zeros(M, dtype=int)
    m0 = Bn - An - dbar_tot
    if sb < 0:
        return cbars, np.zeros((M, K))

    size = int(max([sb, An, Bn + max(ks, default=0) + 1] + totals)) + 2
    lqq = table.upto(size)

    # phi(Dbar, Cbar) = sum_{j < h} D_j C_h
    phi_dc = np.zeros(M)
    for j in range(n - 1):
        for h in range(j + 1, n - 1):
            phi_dc += dbars[:, j] * cbars[:, h]

    valid = m0 >= 0
    m0c = np.where(valid, m0, 0)
    log_c = lnq * (phi_dc + cbar_tot * m0) + lqq[sb] + lqq[An]
    for j in range(n - 1):
        log_c += lqq[totals[j]] - lqq[cbars[:, j]] - lqq[dbars[:, j]]
    log_k = -lqq[ks] - lqq[An - ks]
    log_cross = (lnq * np.outer(cbar_tot, ks)
                 + lnq * (ks * (Bn - An + ks))[None, :]
                 - lqq[m0c[:, None] + ks[None, :]])
    F = np.exp(log_c[:, None] + log_k[None, :] + log_cross)
    F[~valid, :] = 0.0

    # signed correction sum over Pbar <= (Bbar, Cbar); the leading term
    # P = 0 contributes 1 and the rest decay like q^{p (A_n - k + 1)}
    S = np.ones((M, K))
    if n > 1:
        qk = np.exp(lnq * (An - ks + 1.0))
        caps = [min(Bbar[j], int(axes[j].max())) for j in range(n - 1)]
        pcap = 12
        shells = {}
        for P in itertools.product(*(range(min(cap, pcap) + 1)
                                     for cap in caps)):
            p = sum(P)
            if p == 0:
                continue
            shells.setdefault(p, []).append(P)
        prev = math.inf
        for p in sorted(shells):
            shell_max = 0.0
            for P in shells[p]:
                fac = np.ones(M)
                for j, pj in enumerate(P):
                    if pj == 0:
                        continue
                    sc = 1.0
                    for t in range(pj):
                        sc *= (1 - q ** (t - Bbar[j])) / (1 - q ** (t + 1))
                        sc /= 1 - q ** (t - totals[j])
                    poch_c = np.ones(M)
                    for t in range(pj):
                        poch_c *= 1 - np.exp(lnq * (t - cbars[:, j]))
                    fac *= sc * poch_c
                # phi(P, Dbar - Bbar)
                expo = np.zeros(M)
                for j in range(n - 1):
                    for h in range(j + 1, n - 1):
                        expo += P[j] * (dbars[:, h] - Bbar[h])
                contrib = (fac * np.exp(lnq * expo))[:, None] \
                    * qk[None, :] ** p
                S += contrib
                shell_max = max(shell_max, float(np.abs(contrib).max()))
            if shell_max < 1e-15 and shell_max <= prev:
                break
            prev = shell_max
    return cbars, F * S


def _psi_law(q, A, Bbar, Bn, table=None, mass_tol=1e-9) -> PsiLaw:
    """Adaptive window around the concentration point of Psi.

    The window is widened until the total mass is within ``mass_tol`` of
    1 (the law is stochastic) or the full domain is covered.
    """
    n = len(A)
    An = A[-1]
    eps = -math.log(q)
    table = table if table is not None else _PochTable(q)
    totals = [A[j] + Bbar[j] for j in range(n - 1)]

    # concentration point from the saddle equations: with
    # E = exp(-eps (Bn - An)) and T_j the color >= j horizontal totals,
    # eps C*_{[j, n-1]} = log(E e^{eps T_j} + 1) - log(E + 1)
    x = -eps * (Bn - An)
    k_star = int(round(float(np.logaddexp(x, 0.0)) / eps))
    partial = []
    for j in range(n - 1):
        Tj = eps * sum(totals[j:])
        partial.append((np.logaddexp(x + Tj, 0.0)
                        - np.logaddexp(x, 0.0)) / eps)
    partial.append(0.0)
    c_star = [int(round(partial[j] - partial[j + 1]))
              for j in range(n - 1)]

    w = int(12.0 / math.sqrt(2.0 * eps)) + 10
    while True:
        k_lo = max(0, min(k_star - w, An))
        k_hi = min(An, k_star + w)
        ks = np.arange(k_lo, k_hi + 1)
        axes = [np.arange(max(0, min(c_star[j] - w, totals[j])),
                          min(totals[j], c_star[j] + w) + 1)
                for j in range(n - 1)]
        cbars, W = _psi_grid(q, A, tuple(Bbar), Bn, ks, axes, table)
        mass = float(W.sum())
        full = (k_lo == 0 and k_hi == An and all(
            ax[0] == 0 and ax[-1] == totals[j]
            for j, ax in enumerate(axes)))
        if abs(mass - 1.0) <= mass_tol or full:
            neg = float(-W[W < 0].sum())
            return PsiLaw(ks, cbars, W, mass, neg)
        w *= 2


def _draw_indices(cum, total, rng, count=None):
    """Inverse-CDF draws against a cumulative weight array."""
    if count is None:
        u = rng.random() * total
        return min(int(np.searchsorted(cum, u, side="right")),
                   len(cum) - 1)
    us = np.array([rng.random() for _ in range(count)]) * total
    return np.minimum(np.searchsorted(cum, us, side="right"),
                      len(cum) - 1)


# ---------------------------------------------------------------------------
# The complemented q-discrete vertex field
# ---------------------------------------------------------------------------

@dataclass
class ComplementedVertexField:
    """One sample of the qdp/bq vertex dynamics on a finite rectangle.

    ``cells[(i, j)]`` holds (A, Bbar, Bn, C, Dbar, Dn) at vertex (i, j),
    with i the column (1-based, boundary law at i = 1) and j the row;
    row j carries tuples of length m(j).
    """

    eps: float
    theta_rows: tuple
    theta_cols: tuple
    blocks: tuple
    extent: tuple
    cells: dict
    clipped_mass: float = 0.0
    mass_defect: float = 0.0
    regime_warnings: tuple = ()

    @property
    def q(self) -> float:
        return math.exp(-self.eps)

    def m_of_row(self, j: int) -> int:
        return m_of_row(self.blocks, j)

    def check_conservation(self) -> bool:
        """Site-dependent conservation at every vertex, exactly."""
        for (i, j), (A, Bbar, Bn, C, Dbar, Dn) in self.cells.items():
            if vec_add(A[:-1], Bbar) != vec_add(C[:-1], Dbar):
                return False
            if Bn - A[-1] != Dn - C[-1]:
                return False
        return True

    def _comp(self, vec, c: int) -> int:
        return vec[c - 1] if c <= len(vec) else 0

    def height(self, c: int, i: int, j: int) -> int:
        """Color-c height along the north-then-east path from (1, 1)."""
        total = 0
        for k in range(1, j + 1):
            if self.m_of_row(k) == c:
                total -= self.cells[(1, k)][5]
        for k in range(2, i + 1):
            total -= self._comp(self.cells[(k, j)][3], c)
        return total

    def height_east(self, c: int, i: int, j: int) -> int:
        """Same height along the east-then-north path (conservation)."""
        total = 0
        for k in range(2, i + 1):
            total -= self._comp(self.cells[(k, 1)][3], c)
        for k in range(1, j + 1):
            _, _, _, _, Dbar, Dn = self.cells[(i, k)]
            m = self.m_of_row(k)
            if c < m:
                total += self._comp(Dbar, c)
            elif c == m:
                total -= Dn
        return total

    def height_ge(self, c: int, i: int, j: int) -> int:
        return sum(self.height(cc, i, j)
                   for cc in range(c, self.m_of_row(j) + 1))

    def X(self, c: int, i: int, j: int) -> float:
        """Rescaled observable converging to the polymer partition
        function from (1, block_start(c)) to (i, j)."""
        j0 = block_start(self.blocks, c)
        if j < j0:
            raise ValueError(f"color {c} only enters at row {j0}")
        return (self.eps ** (i + j - j0)
                * math.exp(-self.eps * self.height_ge(c, i, j)))

    def implied_Y_inv(self, c: int, i: int, j: int) -> float:
        """Vertex-side estimate of the inverse Gamma weight at (i, j)."""
        if i < 2:
            raise ValueError("defined for bulk columns i >= 2")
        A, Bbar, Bn, C, _, _ = self.cells[(i, j)]
        m = len(A)
        csum = sum(C[c - 1:])
        absum = sum(A[c - 1:]) + sum(Bbar[c - 1:]) - Bn
        return (self.eps * math.exp(self.eps * csum)
                / (1.0 + math.exp(self.eps * absum)))

    def recursion_residual(self, c: int, i: int, j: int) -> float:
        """X(i,j) / implied_Y_inv - X(i,j-1) - X(i-1,j); tends to zero
        in distribution as eps -> 0."""
        j0 = block_start(self.blocks, c)
        if i < 2 or j <= j0:
            raise ValueError("residual needs i >= 2 and j > block start")
        return (self.X(c, i, j) / self.implied_Y_inv(c, i, j)
                - self.X(c, i, j - 1) - self.X(c, i - 1, j))


class QdpFieldSampler:
    """Reusable sampler for ComplementedVertexField replicas.

    Precomputes the boundary clock laws and Pochhammer tables once so
    repeated sampling (Monte Carlo harness) stays cheap.
    """

    def __init__(self, eps, theta_rows, theta_cols, blocks, extent):
        if not 0 < eps < 1:
            raise ValueError("need eps in (0, 1)")
        I, J = extent
        if I < 1 or J < 1:
            raise ValueError("extent must be at least 1 x 1")
        if len(theta_rows) < I or len(theta_cols) < J:
            raise ValueError("parameter sequences shorter than the extent")
        self.eps = float(eps)
        self.q = math.exp(-eps)
        self.theta_rows = tuple(float(t) for t in theta_rows[:I])
        self.theta_cols = tuple(float(t) for t in theta_cols[:J])
        if any(t <= 0 for t in self.theta_rows + self.theta_cols):
            raise ValueError("all shape parameters must be positive")
        self.blocks = _check_blocks(blocks)
        m_of_row(self.blocks, J)
        self.extent = (I, J)
        self.table = _PochTable(self.q)
        self._phi = {}
        for i in range(1, I + 1):
            for j in range(1, J + 1):
                gamma = self.q ** (self.theta_rows[i - 1]
                                   + self.theta_cols[j - 1])
                if gamma not in self._phi:
                    w = _phi_weights(self.q, gamma)
                    self._phi[gamma] = (np.cumsum(w), float(w.sum()))

    def _gamma(self, i: int, j: int) -> float:
        return self.q ** (self.theta_rows[i - 1] + self.theta_cols[j - 1])

    def sample(self, rng) -> ComplementedVertexField:
        I, J = self.extent
        cells = {}
        clipped = 0.0
        defect = 0.0
        for j in range(1, J + 1):
            m = m_of_row(self.blocks, j)
            new_color = j == block_start(self.blocks, m)
            for i in range(1, I + 1):
                if j == 1:
                    A = (0,) * m
                else:
                    prev = cells[(i, j - 1)][3]
                    A = prev + (0,) if new_color else prev
                if i == 1:
                    Bbar, Bn = (0,) * (m - 1), 0
                    cum, total = self._phi[self._gamma(1, j)]
                    Dn = int(_draw_indices(cum, total, rng))
                    Dbar = (0,) * (m - 1)
                    C = A[:-1] + (A[-1] + Dn,)
                else:
                    Bbar, Bn = cells[(i - 1, j)][4], cells[(i - 1, j)][5]
                    law = _psi_law(self.q, A, Bbar, Bn, self.table)
                    W = law.weights.clip(min=0.0).ravel()
                    cum = np.cumsum(W)
                    idx = _draw_indices(cum, float(cum[-1]), rng)
                    mi, ki = divmod(int(idx), len(law.ks))
                    k = int(law.ks[ki])
                    cbar = tuple(int(v) for v in law.cbars[mi])
                    cum_l, tot_l = self._phi[self._gamma(i, j)]
                    ell = int(_draw_indices(cum_l, tot_l, rng))
                    C = cbar + (k + ell,)
                    Dbar = tuple(A[t] + Bbar[t] - cbar[t]
                                 for t in range(m - 1))
                    Dn = Bn - A[-1] + C[-1]
                    clipped += law.negative_mass
                    defect = max(defect, abs(law.mass - 1.0))
                cells[(i, j)] = (A, Bbar, Bn, C, Dbar, Dn)
        warns = []
        if clipped > 1e-3:
            msg = (f"clipped negative qdp mass {clipped:.2e} exceeds 1e-3; "
                   "the sampled field is outside the trusted regime")
            warnings.warn(msg)
            warns.append(msg)
        return ComplementedVertexField(
            self.eps, self.theta_rows, self.theta_cols, self.blocks,
            self.extent, cells, clipped, defect, tuple(warns))


def sample_qdp_field(eps, theta_rows, theta_cols, K, extent,
                     rng) -> ComplementedVertexField:
    """One complemented vertex field on ``extent`` = (I, J); the block
    sizes ``K`` may end with None for an infinite final block."""
    return QdpFieldSampler(eps, theta_rows, theta_cols, K, extent).sample(rng)


# ---------------------------------------------------------------------------
# Global convergence harness
# ---------------------------------------------------------------------------

@dataclass
class PolymerConvergenceReport:
    """KS comparison of rescaled vertex observables against matched
    polymer partition functions, per color, site, and eps."""

    eps_list: tuple
    grid: tuple
    blocks: tuple
    replicas: int
    ks: dict
    trend_ok: dict
    single_site: dict
    clipped: dict
    residual_medians: dict
    ok: bool
    detail: str = ""

    def to_jsonable(self):
        return {
            "eps_list": list(self.eps_list),
            "grid": list(self.grid),
            "blocks": [b if b is not None else "inf" for b in self.blocks],
            "replicas": self.replicas,
            "ks": {f"{c},{i},{j}": {str(e): list(v)
                                    for e, v in per.items()}
                   for (c, i, j), per in self.ks.items()},
            "trend_ok": {f"{c},{i},{j}": v
                         for (c, i, j), v in self.trend_ok.items()},
            "single_site": {str(c): {str(e): list(v)
                                     for e, v in per.items()}
                            for c, per in self.single_site.items()},
            "clipped": {str(e): v for e, v in self.clipped.items()},
            "residual_medians": {str(e): v for e, v
                                 in self.residual_medians.items()},
            "ok": self.ok,
            "detail": self.detail,
        }

    def ks_csv(self) -> str:
        lines = ["c,i,j,eps,ks_stat,p_value"]
        for (c, i, j), per in sorted(self.ks.items()):
            for e in self.eps_list:
                stat, pval = per[e]
                lines.append(f"{c},{i},{j},{e},{stat},{pval}")
        return "\n".join(lines) + "\n"


def verify_polymer_convergence(eps_list, theta_rows, theta_cols, K, grid,
                               replicas, rng) -> PolymerConvergenceReport:
    """Two-sample KS of X_c^eps(i, j) against matched polymer partition
    samples, with trend and single-site inverse-Gamma checks."""
    from scipy import stats

    I, J = grid
    if I > 5 or J > 5:
        raise ValueError("grid larger than 5 x 5 is not supported")
    if replicas < 10 ** 4:
        raise ValueError(
            "insufficient replicas for the requested confidence; "
            "need at least 10^4")
    blocks = _check_blocks(K)
    eps_list = tuple(sorted(eps_list, reverse=True))
    colors = []
    for c in range(1, len(blocks) + 1):
        try:
            if block_start(blocks, c) <= J:
                colors.append(c)
        except ValueError:
            break

    npr = np.random.default_rng(rng.getrandbits(64))
    shapes = np.add.outer(np.asarray(theta_rows[:I], dtype=float),
                          np.asarray(theta_cols[:J], dtype=float))
    Y = npr.gamma(shapes, size=(replicas, I, J))
    Z = _partition_grids(Y, sorted({block_start(blocks, c)
                                    for c in colors}))

    ks = {}
    trend_ok = {}
    single_site = {}
    clipped = {}
    residual_medians = {}
    sites = {c: [(i, j) for i in range(1, I + 1)
                 for j in range(block_start(blocks, c), J + 1)]
             for c in colors}
    for eps in eps_list:
        sampler = QdpFieldSampler(eps, theta_rows, theta_cols, blocks,
                                  (I, J))
        samples = {(c, i, j): np.empty(replicas)
                   for c in colors for (i, j) in sites[c]}
        resid = []
        clip_total = 0.0
        for r in range(replicas):
            fld = sampler.sample(rng)
            clip_total += fld.clipped_mass
            for c in colors:
                for (i, j) in sites[c]:
                    samples[(c, i, j)][r] = fld.X(c, i, j)
            c0 = colors[0]
            j0 = block_start(blocks, c0)
            if I >= 2 and J >= j0 + 1:
                resid.append(fld.recursion_residual(c0, 2, j0 + 1))
        clipped[eps] = clip_total / replicas
        residual_medians[eps] = (float(np.median(np.abs(resid)))
                                 if resid else 0.0)
        for c in colors:
            j0 = block_start(blocks, c)
            for (i, j) in sites[c]:
                res = stats.ks_2samp(samples[(c, i, j)],
                                     Z[j0][:, i - 1, j - 1])
                ks.setdefault((c, i, j), {})[eps] = (
                    float(res.statistic), float(res.pvalue))
            shape0 = float(theta_rows[0]) + float(theta_cols[j0 - 1])
            res = stats.kstest(samples[(c, 1, j0)],
                               stats.invgamma(shape0).cdf)
            single_site.setdefault(c, {})[eps] = (
                float(res.statistic), float(res.pvalue))

    slack = 2.0 / math.sqrt(replicas)
    for key, per in ks.items():
        stats_seq = [per[e][0] for e in eps_list]
        trend_ok[key] = all(stats_seq[t + 1] <= stats_seq[t] + slack
                            for t in range(len(stats_seq) - 1))
    eps_min = eps_list[-1]
    single_ok = all(per[eps_min][1] >= 0.01
                    for per in single_site.values())
    ok = all(trend_ok.values()) and single_ok
    detail = (f"colors {colors}; trend failures "
              f"{[k for k, v in trend_ok.items() if not v]}; "
              f"single-site p at eps={eps_min}: "
              f"{ {c: per[eps_min][1] for c, per in single_site.items()} }")
    return PolymerConvergenceReport(
        eps_list, (I, J), blocks, replicas, ks, trend_ok, single_site,
        clipped, residual_medians, ok, detail)


# ---------------------------------------------------------------------------
# Single-vertex limit chain
# ---------------------------------------------------------------------------

def weight_qmn_limit(q, qL, gamma, A, Bbar, Bn: int, C, Dbar, Dn: int):
    """Limit of the complemented fused weight as q^M grows with
    q^{M-N} = gamma / q^L held fixed (float evaluation).

    The (q^{L+c-C_n-p+1} / gamma; q)_{C_n} factor depends on the inner
    summation index p and therefore sits inside the p-sum.
    """
    from .qcore import hypergeometric_terminating

    n = len(A)
    Abar, Cbar = A[:-1], C[:-1]
    bbar, dbar = vec_total(Bbar), vec_total(Dbar)
    sb, sd = Bn - bbar, Dn - dbar
    a, c = vec_total(A), vec_total(C)
    cbar = vec_total(Cbar)
    An, Cn = A[-1], C[-1]
    if sb < 0 or sd < 0:
        return 0.0
    if vec_add(Abar, Bbar) != vec_add(Cbar, Dbar) or sb - a != sd - c:
        return 0.0
    q = float(q)
    qL = float(qL)
    gamma = float(gamma)
    value = (
        (-1) ** Cn
        * q ** (phi_form(Dbar, Cbar) + Cn * (Cn + 1) // 2 + cbar * sd)
        * qL ** Cn
        * _qqf(q, sb) / _qqf(q, sd - Cn)
        * q_pochhammer(gamma * q ** (-c) / qL, q, sd) / _qqf(q, Cn)
        * q_pochhammer(q ** Bn / qL, q, Cn)
        * _poch_inf_f(gamma, q) / _poch_inf_f(gamma / qL, q)
    )
    for j in range(n - 1):
        value *= _qqf(q, Bbar[j]) / _qqf(q, Dbar[j])

    bound = tuple(min(x, y) for x, y in zip(Bbar, Cbar))
    total = 0.0
    for P in _iter_below(bound):
        p = sum(P)
        term = (
            (-1) ** p
            * q ** phi_form(vec_sub(vec_sub(Bbar, Dbar), P), P)
            * q_pochhammer(gamma * q ** (sd - c) / qL, q, p)
            / q_pochhammer(gamma * q ** (-c) / qL, q, p)
            * q ** (p * (sb - sd + 1) + p * (p - 1) // 2)
            / q_pochhammer(qL * q ** (c - Cn - p + 1) / gamma, q, Cn)
        )
        for j in range(n - 1):
            term *= _qqf(q, Cbar[j] + Dbar[j] - P[j]) / (
                _qqf(q, Cbar[j] - P[j]) * _qqf(q, P[j])
                * _qqf(q, Bbar[j] - P[j]))
        term *= hypergeometric_terminating(
            Cn,
            (q ** -An, qL * q ** (c - Cn - p + 1) / gamma),
            (q ** (sd - Cn + 1), qL * q ** (-Bn - Cn + 1)),
            q, q)
        total += term
    return value * total


def _qqf(q, m):
    if m < 0:
        return math.inf
    return float(q_pochhammer(q, q, m))


def _poch_inf_f(a, q):
    return math.exp(_log_poch_inf(a, q)) if 0 <= a < 1 else float(
        q_pochhammer(a, q, math.inf))


def _iter_below(bound):
    from .qcore import iter_vectors_below
    return iter_vectors_below(bound)


def _random_complemented_config(rng, n, low=0, high=3, force_gate=False):
    """Random (A, Bbar, Bn, C, Dbar, Dn) satisfying conservation."""
    while True:
        A = tuple(rng.randint(low, high) for _ in range(n))
        Bbar = tuple(rng.randint(low, high) for _ in range(n - 1))
        sb = rng.randint(0, high + 2)
        Bn = sum(Bbar) + sb
        totals = vec_add(A[:-1], Bbar)
        Cbar = tuple(rng.randint(0, t) for t in totals)
        Cn = rng.randint(0, high)
        C = Cbar + (Cn,)
        Dbar = vec_sub(totals, Cbar)
        sd = sb - vec_total(A) + vec_total(C)
        Dn = sd + vec_total(Dbar)
        if sd < 0:
            continue
        if force_gate and Bn - A[-1] - vec_total(Dbar) < 0:
            continue
        return A, Bbar, Bn, C, Dbar, Dn


def _scaled_inputs(eps, a_list, b_list, transitionary=False, beta=1):
    """Integer (A, Bbar, Bn) realizing the bulk or transitionary scaling
    regime at scale eps; validates nonnegativity."""
    log_inv = math.log(1.0 / eps)
    n = len(b_list)
    if transitionary:
        if len(a_list) != n - 1:
            raise ValueError("transitionary regime needs n-1 'a' values")
        A = tuple(int(round(a / eps)) for a in a_list[:n - 2]) + (
            int(round((a_list[n - 2] + log_inv) / eps)), 0)
        Bbar = tuple(int(round(b / eps)) for b in b_list[:n - 2]) + (
            int(round((b_list[n - 2] + (beta - 1) * log_inv) / eps)),)
        Bn = int(round((b_list[n - 1] + beta * log_inv) / eps))
    else:
        if len(a_list) != n:
            raise ValueError("bulk regime needs n 'a' values")
        A = tuple(int(round(a / eps)) for a in a_list[:n - 1]) + (
            int(round((a_list[n - 1] + log_inv) / eps)),)
        Bbar = tuple(int(round(b / eps)) for b in b_list[:n - 1])
        Bn = int(round((b_list[n - 1] + log_inv) / eps))
    if any(v < 0 for v in A) or any(v < 0 for v in Bbar) or Bn < 0:
        raise ValueError("scaling regime produced negative arrow counts")
    return A, Bbar, Bn


def _sample_scaled_qdp(q, gamma, A, Bbar, Bn, draws, rng):
    """Vectorized draws of (Cbar sums, C_n) from the qdp law at fixed
    inputs, via the clock/partial-fraction convolution."""
    n = len(A)
    law = _psi_law(q, A, Bbar, Bn)
    W = law.weights.clip(min=0.0).ravel()
    cum = np.cumsum(W)
    idx = _draw_indices(cum, float(cum[-1]), rng, count=draws)
    mi, ki = np.divmod(idx, len(law.ks))
    ks = law.ks[ki]
    cb = law.cbars[mi]
    phi = _phi_weights(q, gamma)
    cum_l = np.cumsum(phi)
    ells = _draw_indices(cum_l, float(phi.sum()), rng, count=draws)
    # suffix sums C_{[j, n-1]} for each j, plus C_n = k + ell
    suffix = np.zeros((draws, n))
    for j in range(n - 1):
        suffix[:, j] = cb[:, j:].sum(axis=1)
    cn = ks + ells
    return suffix, cn, ks, float(law.mass), law.negative_mass


def verify_single_vertex_limits(variant: str, params=None) -> CheckReport:
    """Numeric and statistical checks of the degeneration chain from the
    complemented fused weight down to Gamma clocks.

    Numeric variants (qmn_limit, ql_limit, qd2_limit) report the maximum
    deviation from the limiting closed form along a growing parameter and
    require it to decrease.  Statistical variants (gamma_clock,
    abc_gamma, transitionary) KS-test sampled observables against their
    Gamma-based limit laws over shrinking eps.
    """
    import random as _random

    from scipy import stats

    params = dict(params or {})
    rng = _random.Random(params.pop("seed", 29))

    if variant == "qmn_limit":
        q = params.get("q", 0.5)
        qL = params.get("qL", 8.0)
        gamma = params.get("gamma", 0.3)
        n = params.get("n", 2)
        count = params.get("count", 12)
        qM_list = params.get("qM_list", (1e2, 1e3, 1e4))
        configs = [_random_complemented_config(rng, n)
                   for _ in range(count)]
        diffs = []
        for qM in qM_list:
            worst = 0.0
            for cfg in configs:
                lhs = weight_complemented_full(
                    q, qM, qM * qL / gamma, *cfg, qL=qL)
                rhs = weight_qmn_limit(q, qL, gamma, *cfg)
                worst = max(worst, abs(float(lhs) - rhs))
            diffs.append(worst)
        ok = all(diffs[t + 1] < diffs[t] for t in range(len(diffs) - 1))
        return CheckReport(ok=ok, lhs=tuple(diffs), rhs=0.0,
                           difference=diffs[-1],
                           detail=f"qmn_limit deviations over qM={qM_list}")

    if variant == "ql_limit":
        q = params.get("q", 0.5)
        gamma = params.get("gamma", 0.3)
        n = params.get("n", 2)
        count = params.get("count", 12)
        qL_list = params.get("qL_list", (1e2, 1e3, 1e4))
        configs = [_random_complemented_config(rng, n)
                   for _ in range(count)]
        diffs = []
        for qL in qL_list:
            worst = 0.0
            for cfg in configs:
                lhs = weight_qmn_limit(q, qL, gamma, *cfg)
                rhs = float(weight_complemented_qdp(q, gamma, *cfg))
                worst = max(worst, abs(lhs - rhs))
            diffs.append(worst)
        ok = all(diffs[t + 1] < diffs[t] for t in range(len(diffs) - 1))
        return CheckReport(ok=ok, lhs=tuple(diffs), rhs=0.0,
                           difference=diffs[-1],
                           detail=f"ql_limit deviations over qL={qL_list}")

    if variant == "qd2_limit":
        q = params.get("q", 0.4)
        z = params.get("z", 3.0)
        L = params.get("L", 3)
        n = params.get("n", 2)
        count = params.get("count", 10)
        s_list = params.get("s_list", (1e-2, 1e-3, 1e-4))
        configs = []
        for _ in range(count):
            A = tuple(rng.randint(0, 2) for _ in range(n))
            dn_out = rng.randint(0, L)
            D = (0,) * (n - 1) + (L - dn_out,)
            C = vec_sub(vec_add(A, (0,) * (n - 1) + (L,)), D)
            configs.append((A, (0,) * (n - 1) + (L,), C, D, dn_out))
        diffs = []
        for s in s_list:
            worst = 0.0
            for A, B, C, D, dn_out in configs:
                lhs = float(weight_U(q, z / s ** 2, A, B, C, D,
                                     q ** -L, s ** 2))
                rhs = float(weight_complemented_bq(q, z / q, dn_out, L))
                worst = max(worst, abs(lhs - rhs))
            diffs.append(worst)
        ok = all(diffs[t + 1] < diffs[t] for t in range(len(diffs) - 1))
        return CheckReport(ok=ok, lhs=tuple(diffs), rhs=0.0,
                           difference=diffs[-1],
                           detail=f"qd2_limit deviations over s={s_list}")

    if variant == "gamma_clock":
        theta = params.get("theta", 1.3)
        eps_list = tuple(params.get("eps_list", (0.05, 0.02, 0.01)))
        draws = int(params.get("draws", 10 ** 5))
        results = {}
        for eps in eps_list:
            q = math.exp(-eps)
            gamma = q ** theta
            per = {}
            for label, weights in (
                    ("phi", _phi_weights(q, gamma)),
                    ("bq", np.array([
                        weight_complemented_bq(q, 1.0 / gamma, k)
                        for k in range(len(_phi_weights(q, gamma)))]))):
                cum = np.cumsum(weights)
                ells = _draw_indices(cum, float(weights.sum()), rng,
                                     count=draws)
                x = np.exp(-eps * ells) / eps
                res = stats.kstest(x, stats.gamma(theta).cdf)
                per[label] = (float(res.statistic), float(res.pvalue))
            results[eps] = per
        eps_min = min(eps_list)
        ok = all(v[1] >= 0.01 for v in results[eps_min].values())
        return CheckReport(ok=ok, lhs=results, rhs="Gamma(theta)",
                           difference=max(v[0] for v in
                                          results[eps_min].values()),
                           detail=f"gamma_clock KS at eps={eps_list}")

    if variant in ("abc_gamma", "transitionary"):
        theta = params.get("theta", 0.7)
        trans = variant == "transitionary"
        a_list = tuple(params.get("a", (0.4,) if trans else (0.3, 0.8)))
        b_list = tuple(params.get("b", (0.3, 0.6) if trans
                       else (0.5, 0.4)))
        eps_list = tuple(params.get("eps_list", (0.05, 0.02, 0.01)))
        draws = int(params.get("draws", 10 ** 5))
        betas = tuple(params.get("betas", (1, 2))) if trans else (None,)
        n = len(b_list)
        results = {}
        variances = {}
        beta_samples = {}
        for eps in eps_list:
            q = math.exp(-eps)
            gamma = q ** theta
            for beta in betas:
                A, Bbar, Bn = _scaled_inputs(
                    eps, a_list, b_list, transitionary=trans,
                    beta=beta or 1)
                suffix, cn, ks, mass, neg = _sample_scaled_qdp(
                    q, gamma, A, Bbar, Bn, draws, rng)
                per = {}
                for j in range(1, n + 1):
                    # c_{[j,n]} = eps (C_{[j,n-1]} + C_n) - log(1/eps)
                    x = np.exp(eps * (suffix[:, j - 1] + cn)) * eps
                    if trans:
                        const = (1.0 if j == n else math.exp(
                            sum(a_list[j - 1:])
                            + sum(b_list[j - 1:n - 1])
                            - b_list[n - 1]) + 1.0)
                    else:
                        const = math.exp(
                            sum(a_list[j - 1:])
                            + sum(b_list[j - 1:n - 1])
                            - b_list[n - 1]) + 1.0
                    res = stats.kstest(
                        x, stats.invgamma(theta, scale=const).cdf)
                    per[j] = (float(res.statistic), float(res.pvalue),
                              const)
                key = (eps, beta) if trans else eps
                results[key] = per
                if not trans:
                    conc = np.exp(eps * (suffix[:, 0] + ks))
                    variances[eps] = float(np.var(conc))
                elif eps == min(eps_list):
                    beta_samples[beta] = np.exp(
                        eps * (suffix[:, 0] + cn)) * eps
        eps_min = min(eps_list)
        if trans:
            ok = all(results[(eps_min, b)][j][1] >= 0.01
                     for b in betas for j in range(1, n + 1))
            bres = stats.ks_2samp(beta_samples[betas[0]],
                                  beta_samples[betas[-1]])
            beta_ok = float(bres.pvalue) >= 0.01
            ok = ok and beta_ok
            detail = (f"transitionary KS per (eps, beta, j); "
                      f"beta-independence p={float(bres.pvalue):.3g}")
            diff = max(results[(eps_min, b)][j][0]
                       for b in betas for j in range(1, n + 1))
        else:
            ok = all(results[eps_min][j][1] >= 0.01
                     for j in range(1, n + 1))
            var_seq = [variances[e] for e in sorted(eps_list,
                                                   reverse=True)]
            conc_ok = var_seq[-1] < var_seq[0]
            ok = ok and conc_ok
            detail = (f"abc_gamma KS per (eps, j); concentration "
                      f"variances {var_seq}")
            diff = max(results[eps_min][j][0] for j in range(1, n + 1))
        return CheckReport(ok=ok, lhs=results,
                           rhs="log(e^... + 1) - log Gamma(theta)",
                           difference=diff, detail=detail)

    raise ValueError(f"unknown variant {variant!r}")
