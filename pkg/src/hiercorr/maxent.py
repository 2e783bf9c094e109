"""Maximum-entropy projection onto hierarchical families.

The projection of a state onto a family is the entropy maximizer among
all states sharing the expectations of every basis element of the family.
Four routes are implemented:

* ``dual``: quasi-Newton descent in exponential-family coordinates, with
  support peeling when the optimum sits on the boundary of the state space,
* ``primal``: feasible entropy ascent on the density matrix itself,
  finished by a barrier Newton method on the detected support,
* ``ipf``: iterative proportional fitting, classical shapes only,
* ``product`` / ``exact``: closed forms for the independence family and
  for any family containing the full interaction set.

The divergence from the family is reported as the entropy gap between the
projection and the input, which agrees with the relative entropy to the
projection for every family handled here (including boundary cases, where
the projection is a limit of the exponential family).
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp, xlogy

from .algebra import (
    ShapeError,
    State,
    SystemShape,
    algebra_mask,
    expectation_values,
    hermitian_realvec,
    marginal,
    realvec_hermitian,
    relative_entropy,
    tensor,
    von_neumann_entropy,
)
from .hierarchy import (
    HierarchicalModel,
    Hypergraph,
    build_model,
    hypergraph_k,
    is_independence,
)

INTERIOR_TOL = 1e-8
BOUNDARY_TOL = 1e-5
THETA_BLOWUP = 1e3
PEEL_SCHEDULE = (1e-4, 1e-6, 1e-8, 1e-10)
SNAP_SCHEDULE = (1e-9, 1e-6, 1e-12, None)

METHODS = ("auto", "exact", "product", "ipf", "dual", "primal")


class ConvergenceError(RuntimeError):
    pass


@dataclasses.dataclass(frozen=True)
class GibbsParameters:
    """Exponential-family coordinates of an interior projection.

    theta holds one real weight per non-identity basis element, in the
    element order of the model it was fitted against; log_partition
    normalizes exp(sum theta_k B_k).
    """

    theta: np.ndarray
    log_partition: float

    def hamiltonian(self, model: HierarchicalModel) -> np.ndarray:
        stack = model.basis_matrices()
        if self.theta.shape != (stack.shape[0] - 1,):
            raise ValueError("parameter count does not match the model")
        return np.tensordot(self.theta, stack[1:], axes=(0, 0))

    def state(self, model: HierarchicalModel) -> State:
        a = self.hamiltonian(model)
        w, u = np.linalg.eigh(a)
        p = np.exp(w - logsumexp(w))
        return State(model.shape, _clean((u * p) @ u.conj().T, model.shape))


@dataclasses.dataclass
class ProjectionResult:
    state: State
    divergence: float
    method: str
    converged: bool
    residual: float
    iterations: int
    theta: GibbsParameters | None = None
    diagnostics: dict = dataclasses.field(default_factory=dict)


def _entropy(mat: np.ndarray) -> float:
    w = np.clip(np.linalg.eigvalsh(mat), 0.0, None)
    return float(-xlogy(w, w).sum())


def _clean(mat: np.ndarray, shape: SystemShape) -> np.ndarray:
    # conditional expectation onto the algebra, then eigenvalue clip;
    # both can only move the matrix toward the feasible cone
    mat = 0.5 * (mat + mat.conj().T)
    mat = np.where(algebra_mask(shape), mat, 0.0)
    w, u = np.linalg.eigh(mat)
    w = np.clip(w, 0.0, None)
    s = w.sum()
    if s <= 0.0:
        raise ConvergenceError("projection collapsed to the zero matrix")
    out = (u * (w / s)) @ u.conj().T
    out = np.where(algebra_mask(shape), out, 0.0)
    return 0.5 * (out + out.conj().T)


def _residual(pi_mat: np.ndarray, stack: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(expectation_values(pi_mat, stack) - b)))


def _support_dim(mat: np.ndarray, rtol: float = 1e-9) -> int:
    w = np.linalg.eigvalsh(mat)
    return int(np.sum(w > rtol * max(float(w[-1]), 1e-300)))


def _reduce_constraints(dirs: np.ndarray, targets: np.ndarray):
    """Orthonormalize a (possibly dependent) hermitian constraint stack.

    Returns reduced orthonormal directions, their targets, the free
    directions completing them, and the feasibility defect of the affine
    system on this space.
    """
    m, r, _ = dirs.shape
    vecs = hermitian_realvec(dirs)
    uu, ss, vt = np.linalg.svd(vecs, full_matrices=True)
    rank = int(np.sum(ss > max(ss[0], 1e-300) * 1e-12))
    red = np.stack([realvec_hermitian(vt[i], r) for i in range(rank)])
    c = (uu.T @ targets)[:rank] / ss[:rank]
    x_ls = vt[:rank].T @ c
    defect = float(np.max(np.abs(vecs @ x_ls - targets)))
    free = vt[rank:]
    free_mats = (
        np.stack([realvec_hermitian(f, r) for f in free])
        if free.shape[0]
        else np.zeros((0, r, r), dtype=complex)
    )
    return red, c, free_mats, defect


# ---------------------------------------------------------------- dual route


def _dual_minimize(dirs: np.ndarray, targets: np.ndarray, gtol: float, maxiter: int):
    theta0 = np.zeros(dirs.shape[0])

    def fg(theta):
        a = np.tensordot(theta, dirs, axes=(0, 0))
        w, u = np.linalg.eigh(a)
        lz = float(logsumexp(w))
        p = np.exp(w - lz)
        pi = (u * p) @ u.conj().T
        return lz - theta @ targets, expectation_values(pi, dirs) - targets

    res = minimize(
        fg,
        theta0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": maxiter, "maxfun": 4 * maxiter, "ftol": 1e-18, "gtol": gtol},
    )
    a = np.tensordot(res.x, dirs, axes=(0, 0))
    w, u = np.linalg.eigh(a)
    lz = float(logsumexp(w))
    pi = (u * np.exp(w - lz)) @ u.conj().T
    return res.x, lz, pi, int(res.nit)


def _dual_solve(rho: State, model: HierarchicalModel, tol: float, maxiter: int):
    stack = model.basis_matrices()
    b = expectation_values(rho.matrix, stack)
    d = rho.shape.dim

    theta, lz, pi, nit = _dual_minimize(stack[1:], b[1:], 0.1 * tol, maxiter)
    resid = _residual(pi, stack, b)
    info = {"rounds": 0, "support_dim": d, "theta_max": float(np.max(np.abs(theta), initial=0.0))}
    total_it = nit
    if resid <= tol and info["theta_max"] <= THETA_BLOWUP:
        return pi, resid, total_it, info, GibbsParameters(theta.copy(), lz)

    # boundary regime: the optimum has a kernel and the parameters diverge.
    # Peel off the eigenspace the iterate is abandoning and re-solve on the
    # remaining support; constraints are always re-checked on the full space.
    best = (pi, resid)
    prev_r = d
    for rounds, delta in enumerate(PEEL_SCHEDULE, start=1):
        w, u = np.linalg.eigh(best[0])
        keep = w > delta * max(float(w[-1]), 1e-300)
        r = int(keep.sum())
        if r == 0 or r == prev_r:
            continue
        q = u[:, keep]
        cdirs = np.einsum("ia,kij,jb->kab", q.conj(), stack, q)
        red, c, _, defect = _reduce_constraints(cdirs, b)
        if defect > 1e-8 * max(1.0, float(np.max(np.abs(b)))):
            continue  # cut too deep, this support cannot carry the moments
        prev_r = r
        theta_c, _, tau, nit = _dual_minimize(red, c, 0.1 * tol, maxiter)
        pi_c = q @ tau @ q.conj().T
        resid_c = _residual(pi_c, stack, b)
        total_it += nit
        if resid_c < best[1]:
            best = (pi_c, resid_c)
            info.update(rounds=rounds, support_dim=r)
        if best[1] <= tol:
            break
    return best[0], best[1], total_it, info, None


# -------------------------------------------------------------- primal route


def _max_psd_blend(rho_mat: np.ndarray, q_mat: np.ndarray) -> np.ndarray:
    """Largest s in [0, 1] with (1 - s) rho + s q still PSD."""

    def lam_min(s):
        return float(np.linalg.eigvalsh((1.0 - s) * rho_mat + s * q_mat)[0])

    if lam_min(1.0) >= -1e-14:
        return q_mat.copy()
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if lam_min(mid) >= -1e-14:
            lo = mid
        else:
            hi = mid
    return (1.0 - lo) * rho_mat + lo * q_mat


def _affine_psd_repair(mat: np.ndarray, stack: np.ndarray, b: np.ndarray) -> np.ndarray:
    for _ in range(4):
        mat = mat + np.tensordot(b - expectation_values(mat, stack), stack, axes=(0, 0))
        w, u = np.linalg.eigh(mat)
        if w[0] >= -1e-14:
            return mat
        mat = (u * np.clip(w, 0.0, None)) @ u.conj().T
    return mat + np.tensordot(b - expectation_values(mat, stack), stack, axes=(0, 0))


def _entropy_ascent(tau, stack, b, maxiter: int, gtol: float = 1e-9):
    """Projected gradient ascent on entropy over the affine slice of states.

    Serves as support detection for the Newton stage; eigenvalues are
    floored inside the log so the gradient stays finite on the boundary.
    """
    tau = _affine_psd_repair(tau, stack, b)
    fails = 0
    it = 0
    for it in range(1, maxiter + 1):
        w, u = np.linalg.eigh(tau)
        g = -(u * np.log(np.clip(w, 1e-13, None))) @ u.conj().T
        gt = g - np.tensordot(expectation_values(g, stack), stack, axes=(0, 0))
        gn = float(np.linalg.norm(gt))
        if gn <= gtol:
            break
        ent = _entropy(tau)
        alpha = 1.0 / max(1.0, gn)
        moved = False
        for _ in range(40):
            cand = _affine_psd_repair(tau + alpha * gt, stack, b)
            # entropy is blind to clipped negative eigenvalues, so staying
            # essentially inside the cone is part of the acceptance test
            if float(np.linalg.eigvalsh(cand)[0]) >= -1e-12 and _entropy(cand) > ent + 1e-14:
                tau, moved = cand, True
                break
            alpha *= 0.5
        if moved:
            fails = 0
        else:
            fails += 1
            if fails >= 2:
                break
    return tau, it


def _log_divided_differences(w: np.ndarray, lw: np.ndarray) -> np.ndarray:
    dw = w[:, None] - w[None, :]
    near = np.abs(dw) < 1e-12 * max(float(w[-1]), 1e-300)
    num = lw[:, None] - lw[None, :]
    dd = np.where(near, 0.0, num) / np.where(near, 1.0, dw)
    mean = 0.5 * (w[:, None] + w[None, :])
    return np.where(near, 1.0 / mean, dd)


def _newton_polish(tau, free, mus, gtol_final: float = 1e-11):
    """Barrier Newton along the free directions; tau stays affine-feasible
    by construction and PD by fraction-to-boundary steps."""
    if free.shape[0] == 0:
        return tau, 0
    total = 0
    for mu in mus:
        gtol = max(gtol_final, 0.1 * mu)
        for _ in range(60):
            total += 1
            w, u = np.linalg.eigh(tau)
            w = np.clip(w, 1e-300, None)
            lw = np.log(w)
            grad_mat = -(u * lw) @ u.conj().T
            if mu > 0.0:
                grad_mat = grad_mat + mu * (u * (1.0 / w)) @ u.conj().T
            g = expectation_values(grad_mat, free)
            if float(np.max(np.abs(g))) <= gtol:
                break
            ft = np.einsum("ia,kij,jb->kab", u.conj(), free, u)
            weight = _log_divided_differences(w, lw)
            if mu > 0.0:
                weight = weight + mu / np.outer(w, w)
            h = -np.real(np.einsum("kab,ab,lab->kl", ft.conj(), weight, ft))
            try:
                step = np.linalg.solve(h, -g)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(h, -g, rcond=None)[0]
            v = np.tensordot(step, free, axes=(0, 0))
            slope = float(g @ step)
            if slope <= 0.0:
                break
            # largest t with tau + t v > 0, through the whitened pencil
            root = u * np.sqrt(1.0 / w)
            pencil = root.conj().T @ v @ root
            lmin = float(np.linalg.eigvalsh(0.5 * (pencil + pencil.conj().T))[0])
            t = 1.0 if lmin >= -1e-14 else min(1.0, 0.99 / (-lmin))
            phi0 = _entropy(tau) + (mu * lw.sum() if mu > 0.0 else 0.0)
            accepted = False
            for _ in range(30):
                cand = tau + t * v
                cand = 0.5 * (cand + cand.conj().T)
                wc = np.linalg.eigvalsh(cand)
                if wc[0] > 0.0:
                    phic = _entropy(cand) + (mu * np.log(wc).sum() if mu > 0.0 else 0.0)
                    if phic >= phi0 + 1e-4 * t * slope:
                        tau, accepted = cand, True
                        break
                t *= 0.5
            if not accepted:
                break
    return tau, total


def _primal_solve(rho: State, model: HierarchicalModel, tol: float, maxiter: int):
    stack = model.basis_matrices()
    b = expectation_values(rho.matrix, stack)
    d = rho.shape.dim

    # the euclidean projection of rho onto the model span carries the same
    # moments, so any PSD blend of the two is a feasible starting point
    q = np.tensordot(b, stack, axes=(0, 0))
    tau = _max_psd_blend(rho.matrix, q)
    tau, ascent_iters = _entropy_ascent(tau, stack, b, maxiter)

    w, u = np.linalg.eigh(tau)
    info = {"ascent_iters": ascent_iters, "newton_iters": 0, "support_dim": d}
    best = None
    for snap in SNAP_SCHEDULE:
        if snap is None:
            qmat = np.eye(d, dtype=complex)
            r = d
        else:
            keep = w > snap
            r = int(keep.sum())
            if r == 0:
                continue
            qmat = u[:, keep]
        cdirs = np.einsum("ia,kij,jb->kab", qmat.conj(), stack, qmat)
        red, c, free, defect = _reduce_constraints(cdirs, b)
        if defect > 1e-7 * max(1.0, float(np.max(np.abs(b)))):
            continue
        tau_c = qmat.conj().T @ tau @ qmat
        # exact affine projection within the compressed space
        x = hermitian_realvec(tau_c)
        rv = hermitian_realvec(red)
        x = x - rv.T @ (rv @ x - c)
        tau_c = realvec_hermitian(x, r)
        wmin = float(np.linalg.eigvalsh(tau_c)[0])
        if wmin <= 1e-13:
            for _ in range(6):
                wc, uc = np.linalg.eigh(tau_c)
                tau_c = (uc * np.clip(wc, 1e-12, None)) @ uc.conj().T
                x = hermitian_realvec(tau_c)
                x = x - rv.T @ (rv @ x - c)
                tau_c = realvec_hermitian(x, r)
                wmin = float(np.linalg.eigvalsh(tau_c)[0])
                if wmin > 1e-13:
                    break
        if wmin <= 1e-13:
            continue
        mus = (1e-2, 1e-4, 1e-6, 1e-8, 0.0)
        tau_c, nit = _newton_polish(tau_c, free, mus)
        pi = qmat @ tau_c @ qmat.conj().T
        resid = _residual(pi, stack, b)
        if best is None or resid < best[1]:
            best = (pi, resid)
            info.update(newton_iters=nit, support_dim=r)
        if resid <= tol:
            break
    if best is None:
        # no support candidate admitted an interior start; report the raw
        # ascent iterate rather than failing outright
        best = (tau, _residual(tau, stack, b))
    return best[0], best[1], ascent_iters + info["newton_iters"], info


# ----------------------------------------------------------------- ipf route


def _ipf_solve(rho: State, model: HierarchicalModel, tol: float, maxiter: int):
    shape = rho.shape
    if not shape.all_classical:
        raise ShapeError("iterative proportional fitting needs an all-classical shape")
    sizes = shape.sizes
    n = shape.N
    p = rho.probabilities().reshape(sizes)
    q = np.full(sizes, 1.0 / shape.dim)
    plans = []
    for a in model.hypergraph.maximal_sets:
        axes = tuple(i - 1 for i in range(1, n + 1) if i not in a)
        plans.append((axes, p.sum(axis=axes, keepdims=True)))
    sweeps = 0
    for sweeps in range(1, maxiter + 1):
        for axes, mp in plans:
            mq = q.sum(axis=axes, keepdims=True)
            safe = np.where(mq > 0.0, mq, 1.0)
            q = q * np.where(mq > 0.0, mp / safe, 0.0)
        gap = max(
            float(np.max(np.abs(q.sum(axis=axes, keepdims=True) - mp)))
            for axes, mp in plans
        )
        if gap <= 0.1 * tol:
            break
    pi = np.diag(q.reshape(-1).astype(complex))
    stack = model.basis_matrices()
    b = expectation_values(rho.matrix, stack)
    return pi, _residual(pi, stack, b), sweeps, {"sweeps": sweeps}


# --------------------------------------------------------------- public API


def maxent_project(
    rho: State,
    model: HierarchicalModel,
    method: str = "auto",
    tol: float = INTERIOR_TOL,
    boundary_tol: float = BOUNDARY_TOL,
    max_iter: int | None = None,
) -> ProjectionResult:
    """Project a state onto a hierarchical family by entropy maximization.

    method "auto" picks a closed form when one exists (full family, or the
    independence family), iterative proportional fitting for classical
    shapes, and otherwise the dual solver with a primal fallback.  Explicit
    methods are honored strictly and raise when they do not apply.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")
    if rho.shape != model.shape:
        raise ShapeError("state and model live on different shapes")
    hg = model.hypergraph
    full = set(range(1, rho.shape.N + 1)) in hg

    if method == "auto":
        if full:
            method = "exact"
        elif is_independence(hg):
            method = "product"
        elif rho.shape.all_classical:
            method = "ipf"
        else:
            method = "dual"
            result = _run(rho, model, "dual", tol, boundary_tol, max_iter)
            if result.converged:
                return result
            fallback = _run(rho, model, "primal", tol, boundary_tol, max_iter)
            return fallback if fallback.residual < result.residual else result
    if method == "exact" and not full:
        raise ValueError("method 'exact' needs the full interaction set in the family")
    if method == "product" and not is_independence(hg):
        raise ValueError("method 'product' only applies to the independence family")
    return _run(rho, model, method, tol, boundary_tol, max_iter)


def _run(rho, model, method, tol, boundary_tol, max_iter) -> ProjectionResult:
    stack = model.basis_matrices()
    b = expectation_values(rho.matrix, stack)
    theta = None
    if method == "exact":
        pi_mat, resid, iters, info = rho.matrix.copy(), 0.0, 0, {}
    elif method == "product":
        mats = [marginal(rho, (i,)).matrix for i in range(1, rho.shape.N + 1)]
        pi_mat = tensor(*mats)
        resid, iters, info = _residual(pi_mat, stack, b), 0, {}
    elif method == "ipf":
        pi_mat, resid, iters, info = _ipf_solve(rho, model, tol, max_iter or 20000)
    elif method == "dual":
        pi_mat, resid, iters, info, theta = _dual_solve(rho, model, tol, max_iter or 2000)
    else:
        pi_mat, resid, iters, info = _primal_solve(rho, model, tol, max_iter or 400)

    pi = State(rho.shape, _clean(pi_mat, rho.shape))
    resid = _residual(pi.matrix, stack, b)
    support = _support_dim(pi.matrix)
    effective = tol if support == rho.shape.dim else max(tol, boundary_tol)
    gap = von_neumann_entropy(pi) - von_neumann_entropy(rho)
    if method == "exact":
        gap = 0.0
    diagnostics = dict(info)
    diagnostics["support_dim"] = support
    diagnostics["relative_entropy_direct"] = relative_entropy(rho.matrix, pi.matrix)
    return ProjectionResult(
        state=pi,
        divergence=max(0.0, gap),
        method=method,
        converged=bool(resid <= effective),
        residual=resid,
        iterations=iters,
        theta=theta,
        diagnostics=diagnostics,
    )


def divergence_from_model(rho: State, family, **kw) -> ProjectionResult:
    """Project onto a family given as a HierarchicalModel or a Hypergraph."""
    if isinstance(family, HierarchicalModel):
        model = family
    elif isinstance(family, Hypergraph):
        model = build_model(rho.shape, family)
    else:
        raise TypeError("family must be a HierarchicalModel or a Hypergraph")
    return maxent_project(rho, model, **kw)


def k_party_correlation(rho: State, k: int, **kw) -> float:
    """Divergence from the family of interactions among at most k units."""
    n = rho.shape.N
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}, got {k}")
    if k == n:
        return 0.0
    return divergence_from_model(rho, hypergraph_k(n, k), **kw).divergence


def irreducible_correlation(rho: State, k: int, **kw) -> float:
    """Correlation appearing at interaction order k and not below."""
    n = rho.shape.N
    if not 2 <= k <= n:
        raise ValueError(f"k must lie in 2..{n}, got {k}")
    return k_party_correlation(rho, k - 1, **kw) - k_party_correlation(rho, k, **kw)


def correlation_decomposition(rho: State, **kw) -> dict:
    """All orders at once: c_k for k = 1..N and their increments.

    The increments sum to c_1, the total correlation.
    """
    n = rho.shape.N
    c = [k_party_correlation(rho, k, **kw) for k in range(1, n + 1)]
    incr = {k: c[k - 2] - c[k - 1] for k in range(2, n + 1)}
    return {"c": c, "C": incr, "total": c[0]}


def multi_information(rho: State) -> float:
    """Closed form sum_i H(rho_i) - H(rho); equals the order-1 correlation."""
    n = rho.shape.N
    h_units = sum(von_neumann_entropy(marginal(rho, (i,))) for i in range(1, n + 1))
    return max(0.0, h_units - von_neumann_entropy(rho))


def chain_step_divergence(rho: State, k: int, **kw) -> float:
    """D(pi_k || pi_{k-1}) along the projection chain, for cross-checking
    the order-k increment in the interior."""
    n = rho.shape.N
    if not 2 <= k <= n:
        raise ValueError(f"k must lie in 2..{n}, got {k}")
    pi_k = (
        rho
        if k == n
        else divergence_from_model(rho, hypergraph_k(n, k), **kw).state
    )
    pi_km1 = divergence_from_model(rho, hypergraph_k(n, k - 1), **kw).state
    return relative_entropy(pi_k.matrix, pi_km1.matrix)


def pythagorean_residual(rho: State, sigma: State, family, **kw) -> float:
    """|D(rho, sigma) - D(rho, pi) - D(pi, sigma)| for sigma inside the family."""
    res = divergence_from_model(rho, family, **kw)
    pi = res.state
    lhs = relative_entropy(rho.matrix, sigma.matrix)
    rhs = relative_entropy(rho.matrix, pi.matrix) + relative_entropy(pi.matrix, sigma.matrix)
    return abs(lhs - rhs)
