"""Interaction matrices of k-body classical families, feasibility and toric tests.

The 0/1 interaction matrix has one row per (subset of k units, local
configuration on it) and one column per global configuration; a column
carries a 1 exactly in the rows its configuration restricts to.  Monomial
images of this matrix sweep out the factorizable distributions; membership in
the closure is certified against the integer kernel (binomial relations).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .algebra import ShapeError, SystemShape
from .states import all_configs

SUBSET_GUARD = 2**20


class GuardExceeded(RuntimeError):
    """Exhaustive enumeration would exceed the configured work limit."""


@dataclass
class InteractionMatrix:
    """Rows (nu, y) over columns x with entry 1 iff x restricted to nu equals y."""

    shape: SystemShape
    k: int
    rows: list[tuple[tuple[int, ...], tuple[int, ...]]]
    configs: list[tuple[int, ...]]
    matrix: np.ndarray

    def row(self, nu, y) -> np.ndarray:
        key = (tuple(sorted(int(i) for i in nu)), tuple(int(s) for s in y))
        try:
            idx = self._row_lookup[key]
        except AttributeError:
            self._row_lookup = {r: i for i, r in enumerate(self.rows)}
            idx = self._row_lookup[key]
        return self.matrix[idx]

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]


def _restrict(config: tuple[int, ...], nu: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(config[i - 1] for i in nu)


def build_interaction_matrix(shape: SystemShape, k: int) -> InteractionMatrix:
    """Interaction matrix of the k-body family of an all-classical shape.

    Columns follow mixed-radix configuration order with unit 1 most
    significant; rows iterate subsets nu of size k lexicographically and,
    within each nu, local configurations in the same mixed-radix order.
    """
    if not shape.all_classical:
        raise ShapeError("interaction matrices are defined for all-classical shapes")
    if not 1 <= k <= shape.N:
        raise ValueError(f"k must lie in 1..{shape.N}, got {k}")
    configs = all_configs(shape)
    rows = []
    for nu in itertools.combinations(range(1, shape.N + 1), k):
        local_sizes = [shape.sizes[i - 1] for i in nu]
        local = [()]
        for n in local_sizes:
            local = [c + (s,) for c in local for s in range(n)]
        rows.extend((nu, y) for y in local)
    mat = np.zeros((len(rows), len(configs)), dtype=np.int64)
    for r, (nu, y) in enumerate(rows):
        for c, x in enumerate(configs):
            if _restrict(x, nu) == y:
                mat[r, c] = 1
    return InteractionMatrix(shape=shape, k=k, rows=rows, configs=configs, matrix=mat)


def monomial_map(imat: InteractionMatrix, t) -> np.ndarray:
    """Image of nonnegative row weights t: componentwise product of t over each column's rows.

    Zero weights simply annihilate every configuration their row touches
    (the empty product over no rows is 1).
    """
    t = np.asarray(t, dtype=float)
    if t.shape != (imat.n_rows,):
        raise ValueError(f"expected {imat.n_rows} weights, got {t.shape}")
    if t.min() < 0:
        raise ValueError("monomial weights must be nonnegative")
    out = np.ones(len(imat.configs))
    for r in range(imat.n_rows):
        col = imat.matrix[r].astype(bool)
        out[col] *= t[r]
    return out


def _subset_iter(imat: InteractionMatrix):
    seen = set()
    for nu, _ in imat.rows:
        if nu not in seen:
            seen.add(nu)
            yield nu


def is_k_feasible(imat: InteractionMatrix, support) -> bool:
    """Whether a set of configurations can carry a uniform factorizable limit.

    True when no outside configuration has its row support contained in the
    union of row supports of the set.
    """
    configs = [tuple(int(s) for s in c) for c in support]
    if not configs:
        raise ValueError("support must be non-empty")
    cfg_set = set(configs)
    for c in cfg_set:
        if len(c) != imat.shape.N:
            raise ShapeError(f"configuration {c} does not match the shape")
    subsets = list(_subset_iter(imat))
    covered = set()
    for y in cfg_set:
        for nu in subsets:
            covered.add((nu, _restrict(y, nu)))
    for x in imat.configs:
        if x in cfg_set:
            continue
        if all((nu, _restrict(x, nu)) in covered for nu in subsets):
            return False
    return True


@dataclass
class FeasibilityReport:
    shape: SystemShape
    k: int
    max_size: int
    by_size: dict[int, tuple[int, int]]  # size -> (total, feasible)
    small_sets_all_feasible: bool
    minimal_nonfeasible: list[tuple[tuple[int, ...], ...]]
    min_nonfeasible_size: int | None

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.shape.sizes),
            "k": self.k,
            "max_size": self.max_size,
            "by_size": {
                str(s): {"total": t, "feasible": f} for s, (t, f) in self.by_size.items()
            },
            "small_sets_all_feasible": self.small_sets_all_feasible,
            "min_nonfeasible_size": self.min_nonfeasible_size,
            "minimal_nonfeasible": [
                [list(c) for c in fam] for fam in self.minimal_nonfeasible
            ],
        }


def enumerate_feasibility(shape: SystemShape, k: int, max_size: int) -> FeasibilityReport:
    """Classify every non-empty support of size <= max_size as feasible or not.

    Also confirms that every support of size <= k is feasible, and collects
    the non-feasible supports of the smallest size at which any appear.
    Refuses workloads above SUBSET_GUARD subsets.
    """
    imat = build_interaction_matrix(shape, k)
    configs = imat.configs
    total_work = sum(math.comb(len(configs), l) for l in range(1, max_size + 1))
    if total_work > SUBSET_GUARD:
        raise GuardExceeded(
            f"{total_work} subsets exceed the enumeration guard of {SUBSET_GUARD}"
        )
    by_size: dict[int, tuple[int, int]] = {}
    minimal: list[tuple[tuple[int, ...], ...]] = []
    min_size = None
    small_ok = True
    for l in range(1, max_size + 1):
        total = feas = 0
        for fam in itertools.combinations(configs, l):
            total += 1
            ok = is_k_feasible(imat, fam)
            feas += ok
            if not ok:
                if l <= k:
                    small_ok = False
                if min_size is None:
                    min_size = l
                if l == min_size:
                    minimal.append(fam)
        by_size[l] = (total, feas)
    return FeasibilityReport(
        shape=shape,
        k=k,
        max_size=max_size,
        by_size=by_size,
        small_sets_all_feasible=small_ok,
        minimal_nonfeasible=minimal,
        min_nonfeasible_size=min_size,
    )


def integer_kernel(mat: np.ndarray) -> np.ndarray:
    """Basis of the integer kernel lattice {x : mat x = 0} via exact elimination.

    Row reduces [mat^T | I] over the integers with unimodular operations
    (swaps and subtraction of integer multiples, Euclid-style); rows whose
    transposed part vanishes yield the kernel basis in the identity part.
    """
    a = np.asarray(mat)
    m, n = a.shape
    rows = [[int(a[j][i]) for j in range(m)] + [int(i == t) for t in range(n)] for i in range(n)]
    r = 0
    for c in range(m):
        pivots = [i for i in range(r, n) if rows[i][c] != 0]
        if not pivots:
            continue
        while True:
            pivots = [i for i in range(r, n) if rows[i][c] != 0]
            if len(pivots) == 1 and pivots[0] == r:
                break
            i0 = min(pivots, key=lambda i: abs(rows[i][c]))
            rows[r], rows[i0] = rows[i0], rows[r]
            done = True
            for i in range(r + 1, n):
                if rows[i][c] != 0:
                    q = rows[i][c] // rows[r][c]
                    if q != 0:
                        rows[i] = [x - q * y for x, y in zip(rows[i], rows[r])]
                    if rows[i][c] != 0:
                        done = False
            if done and rows[r][c] != 0:
                break
        r += 1
    kernel = []
    for i in range(r, n):
        if any(rows[i][:m]):
            raise AssertionError("elimination left a non-zero residue row")
        vec = rows[i][m:]
        g = 0
        for x in vec:
            g = math.gcd(g, abs(x))
        if g > 1:
            vec = [x // g for x in vec]
        lead = next((x for x in vec if x != 0), 1)
        if lead < 0:
            vec = [-x for x in vec]
        kernel.append(vec)
    kernel.sort()
    return np.array(kernel, dtype=np.int64).reshape(len(kernel), n)


def toric_kernel(imat: InteractionMatrix) -> np.ndarray:
    """Integer kernel basis of the interaction matrix, rows sign-normalized."""
    return integer_kernel(imat.matrix)


@dataclass
class ToricMembership:
    is_member: bool
    residuals: list[float]
    zero_support_flags: list[bool]
    tol: float

    def __bool__(self) -> bool:
        return self.is_member


def check_toric_membership(
    probs, imat_or_kernel, rtol: float = 1e-9
) -> ToricMembership:
    """Check the binomial relations of the kernel basis on a nonnegative vector.

    For each kernel vector split into positive part u and negative part v the
    products prod(s^u) and prod(s^v) must agree to relative tolerance.  Both
    sides vanishing counts as agreement; one-sided vanishing is a maximal
    violation.  Vectors whose comparison involved zero entries are flagged,
    since the basis-level check is a surrogate for the full lattice.
    """
    s = np.asarray(probs, dtype=float)
    if s.min() < 0:
        raise ValueError("entries must be nonnegative")
    kernel = (
        toric_kernel(imat_or_kernel)
        if isinstance(imat_or_kernel, InteractionMatrix)
        else np.asarray(imat_or_kernel, dtype=np.int64)
    )
    residuals = []
    flags = []
    ok = True
    for w in kernel:
        u = np.maximum(w, 0)
        v = np.maximum(-w, 0)
        zu = bool(np.any((s == 0) & (u > 0)))
        zv = bool(np.any((s == 0) & (v > 0)))
        flags.append(zu or zv)
        if zu and zv:
            residuals.append(0.0)
            continue
        if zu != zv:
            residuals.append(1.0)
            ok = False
            continue
        lu = float(np.sum(u * np.log(s, where=u > 0, out=np.zeros_like(s))))
        lv = float(np.sum(v * np.log(s, where=v > 0, out=np.zeros_like(s))))
        res = abs(np.expm1(lu - lv))
        residuals.append(res)
        if res > rtol:
            ok = False
    return ToricMembership(is_member=ok, residuals=residuals, zero_support_flags=flags, tol=rtol)
