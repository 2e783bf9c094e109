import math

import numpy as np
import pytest

from hiercorr.algebra import (
    ShapeError,
    SystemShape,
    gibbs_map,
    marginal,
    relative_entropy,
)
from hiercorr.hierarchy import build_model, full_model, hypergraph_k, independence_hypergraph
from hiercorr.maxent import (
    GibbsParameters,
    _reduce_constraints,
    chain_step_divergence,
    correlation_decomposition,
    divergence_from_model,
    irreducible_correlation,
    k_party_correlation,
    maxent_project,
    multi_information,
    pythagorean_residual,
)
from hiercorr.states import ghz_state, random_density, random_pure, uniform_on

LOG2 = math.log(2.0)


class TestClosedFormRoutes:
    def test_full_model_is_identity_map(self):
        rng = np.random.default_rng(50)
        sh = SystemShape.qubits(2)
        rho = random_density(sh, rng)
        res = maxent_project(rho, full_model(sh))
        assert res.method == "exact"
        assert res.divergence == 0.0
        assert np.allclose(res.state.matrix, rho.matrix, atol=1e-12)

    def test_product_route_is_exact(self):
        rng = np.random.default_rng(51)
        for sh in (SystemShape.bits(3), SystemShape.qubits(2),
                   SystemShape((2, 3), ("quantum", "classical"))):
            model = build_model(sh, independence_hypergraph(sh.N))
            rho = random_density(sh, rng)
            res = maxent_project(rho, model)
            assert res.method == "product"
            assert res.residual < 1e-12
            for i in range(1, sh.N + 1):
                assert np.allclose(marginal(res.state, (i,)).matrix,
                                   marginal(rho, (i,)).matrix, atol=1e-12)

    def test_dual_agrees_with_product(self):
        rng = np.random.default_rng(52)
        sh = SystemShape.qubits(2)
        model = build_model(sh, hypergraph_k(2, 1))
        for _ in range(5):
            rho = random_density(sh, rng)
            rd = maxent_project(rho, model, method="dual")
            rp = maxent_project(rho, model, method="product")
            assert rd.converged
            assert abs(rd.divergence - rp.divergence) < 1e-7
            assert np.max(np.abs(rd.state.matrix - rp.state.matrix)) < 1e-7


class TestSolverAgreement:
    def test_triangle_on_full_rank_classical(self):
        # dual, primal, and proportional fitting must land on the same point
        rng = np.random.default_rng(53)
        sh = SystemShape.bits(3)
        model = build_model(sh, hypergraph_k(3, 2))
        for _ in range(8):
            rho = random_density(sh, rng)
            out = {m: maxent_project(rho, model, method=m) for m in ("dual", "ipf", "primal")}
            assert all(r.converged for r in out.values())
            pd = {m: np.real(np.diag(r.state.matrix)) for m, r in out.items()}
            assert 0.5 * np.abs(pd["dual"] - pd["ipf"]).sum() < 1e-6
            assert 0.5 * np.abs(pd["dual"] - pd["primal"]).sum() < 1e-6
            dv = [r.divergence for r in out.values()]
            assert max(dv) - min(dv) < 1e-6

    def test_projection_matches_marginals(self):
        rng = np.random.default_rng(54)
        sh = SystemShape.qubits(2)
        model = build_model(sh, hypergraph_k(2, 1))
        rho = random_density(sh, rng)
        res = maxent_project(rho, model, method="dual")
        for i in (1, 2):
            assert np.allclose(marginal(res.state, (i,)).matrix,
                               marginal(rho, (i,)).matrix, atol=1e-7)

    def test_interior_theta_reproduces_state(self):
        rng = np.random.default_rng(55)
        sh = SystemShape.bits(3)
        model = build_model(sh, hypergraph_k(3, 2))
        rho = random_density(sh, rng)
        res = maxent_project(rho, model, method="dual")
        assert isinstance(res.theta, GibbsParameters)
        rebuilt = res.theta.state(model)
        assert np.max(np.abs(rebuilt.matrix - res.state.matrix)) < 1e-7


class TestBoundaryCases:
    def test_ghz_pairwise_projection(self):
        ghz = ghz_state(3)
        model = build_model(ghz.shape, hypergraph_k(3, 2))
        for method in ("dual", "primal"):
            res = maxent_project(ghz, model, method=method)
            assert res.converged, (method, res.residual)
            assert abs(res.divergence - LOG2) < 1e-6, method
            # projection is the even mixture of the two all-equal basis states
            want = np.zeros((8, 8))
            want[0, 0] = want[7, 7] = 0.5
            assert np.max(np.abs(res.state.matrix - want)) < 1e-5, method
            assert res.diagnostics["support_dim"] == 2

    def test_ipf_on_deterministic_support(self):
        sh = SystemShape.bits(3)
        rho = uniform_on(sh, [(0, 0, 0), (1, 1, 1)])
        model = build_model(sh, hypergraph_k(3, 2))
        res = maxent_project(rho, model, method="ipf")
        assert res.converged
        # this distribution already satisfies the pairwise family closure
        assert res.divergence < 1e-9
        assert np.max(np.abs(res.state.matrix - rho.matrix)) < 1e-9

    def test_ghz_correlation_ladder(self):
        ghz = ghz_state(3)
        assert abs(multi_information(ghz) - 3 * LOG2) < 1e-12
        assert abs(k_party_correlation(ghz, 1) - 3 * LOG2) < 1e-9
        assert abs(k_party_correlation(ghz, 2) - LOG2) < 1e-6
        assert k_party_correlation(ghz, 3) == 0.0
        assert abs(irreducible_correlation(ghz, 2) - 2 * LOG2) < 1e-6
        assert abs(irreducible_correlation(ghz, 3) - LOG2) < 1e-6
        dec = correlation_decomposition(ghz)
        assert abs(sum(dec["C"].values()) - dec["total"]) < 1e-9


class TestCorrelationQuantities:
    def test_generic_pure_states_have_no_higher_correlation(self):
        rng = np.random.default_rng(56)
        sh = SystemShape.qubits(3)
        for _ in range(3):
            psi = random_pure(sh, rng)
            assert k_party_correlation(psi, 2) < 1e-6

    def test_monotone_in_k(self):
        rng = np.random.default_rng(57)
        sh = SystemShape.bits(3)
        for _ in range(5):
            rho = random_density(sh, rng)
            c = [k_party_correlation(rho, k) for k in (1, 2, 3)]
            assert c[0] >= c[1] - 1e-9 and c[1] >= c[2] - 1e-9
            assert c[2] == 0.0

    def test_multi_information_is_order_one(self):
        rng = np.random.default_rng(58)
        for sh in (SystemShape.bits(3), SystemShape.qubits(2)):
            rho = random_density(sh, rng)
            assert abs(multi_information(rho) - k_party_correlation(rho, 1)) < 1e-8

    def test_chain_step_matches_increment_in_interior(self):
        rng = np.random.default_rng(59)
        sh = SystemShape.bits(3)
        for _ in range(4):
            rho = random_density(sh, rng)
            c2 = irreducible_correlation(rho, 2)
            step = chain_step_divergence(rho, 2)
            assert abs(c2 - step) < 1e-6

    def test_pythagorean_identity(self):
        rng = np.random.default_rng(60)
        sh = SystemShape.qubits(2)
        model = build_model(sh, hypergraph_k(2, 1))
        stack = model.basis_matrices()
        from hiercorr.algebra import State

        for _ in range(4):
            rho = random_density(sh, rng)
            th = rng.normal(scale=0.4, size=stack.shape[0] - 1)
            sigma = State(sh, gibbs_map(np.tensordot(th, stack[1:], axes=(0, 0))))
            assert pythagorean_residual(rho, sigma, model) < 1e-7

    def test_divergence_is_relative_entropy_to_projection(self):
        rng = np.random.default_rng(61)
        sh = SystemShape.bits(3)
        model = build_model(sh, hypergraph_k(3, 2))
        rho = random_density(sh, rng)
        res = maxent_project(rho, model)
        assert abs(res.divergence - relative_entropy(rho.matrix, res.state.matrix)) < 1e-7


class TestValidation:
    def test_method_checks(self):
        rng = np.random.default_rng(62)
        sh = SystemShape.qubits(2)
        rho = random_density(sh, rng)
        m1 = build_model(sh, hypergraph_k(2, 1))
        with pytest.raises(ValueError):
            maxent_project(rho, m1, method="nope")
        with pytest.raises(ValueError):
            maxent_project(rho, m1, method="exact")
        with pytest.raises(ShapeError):
            maxent_project(rho, m1, method="ipf")
        m2 = build_model(sh, hypergraph_k(2, 2))
        with pytest.raises(ValueError):
            maxent_project(rho, m2, method="product")

    def test_k_range(self):
        rng = np.random.default_rng(63)
        rho = random_density(SystemShape.bits(2), rng)
        with pytest.raises(ValueError):
            k_party_correlation(rho, 0)
        with pytest.raises(ValueError):
            irreducible_correlation(rho, 1)

    def test_hypergraph_argument(self):
        rng = np.random.default_rng(64)
        sh = SystemShape.bits(2)
        rho = random_density(sh, rng)
        res = divergence_from_model(rho, hypergraph_k(2, 1))
        assert res.method == "product"
        with pytest.raises(TypeError):
            divergence_from_model(rho, "U_1")


class TestReduction:
    def test_dependent_constraints_reduce_cleanly(self):
        rng = np.random.default_rng(65)
        g = rng.normal(size=(3, 4, 4)) + 1j * rng.normal(size=(3, 4, 4))
        base = g + np.transpose(g.conj(), (0, 2, 1))
        dirs = np.concatenate([base, base[:1] + base[1:2]])  # dependent row
        tau = np.eye(4, dtype=complex) / 4
        targets = np.real(np.einsum("kij,ji->k", dirs, tau))
        red, c, free, defect = _reduce_constraints(dirs, targets)
        assert red.shape[0] == 3
        assert defect < 1e-10
        gram = np.real(np.einsum("kij,lji->kl", red, red))
        assert np.allclose(gram, np.eye(3), atol=1e-10)
        cross = np.einsum("kij,lji->kl", red, free)
        assert np.max(np.abs(cross)) < 1e-10
