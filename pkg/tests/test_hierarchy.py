import itertools

import numpy as np
import pytest

from hiercorr.algebra import SystemShape, expectation_values
from hiercorr.hierarchy import (
    HypergraphError,
    build_model,
    downward_closure,
    full_model,
    hypergraph_k,
    independence_hypergraph,
    is_independence,
    model_dim,
    numerical_basis_rank,
    pure_factor_dim,
    validate_hypergraph,
)


class TestHypergraphValidation:
    def test_independence_structure_valid(self):
        hg = validate_hypergraph(2, [set(), {1}, {2}])
        assert frozenset({1}) in hg.sets and frozenset() in hg.sets

    def test_missing_subset_rejected(self):
        # complete power set on two units is fine
        validate_hypergraph(2, [set(), {1}, {2}, {1, 2}])
        # dropping the singleton {2} breaks downward closure
        with pytest.raises(HypergraphError, match="downward closed"):
            validate_hypergraph(2, [set(), {1}, {1, 2}])

    def test_covering_required(self):
        with pytest.raises(HypergraphError, match="not covered"):
            validate_hypergraph(3, [set(), {1}, {2}])

    def test_out_of_range_unit(self):
        with pytest.raises(HypergraphError, match="outside"):
            validate_hypergraph(2, [set(), {1}, {2}, {3}])

    def test_generators_closure(self):
        hg = validate_hypergraph(3, [{1, 2}, {2, 3}], generators=True)
        want = {
            frozenset(),
            frozenset({1}),
            frozenset({2}),
            frozenset({3}),
            frozenset({1, 2}),
            frozenset({2, 3}),
        }
        assert hg.sets == frozenset(want)
        assert hg.maximal_sets == [(1, 2), (2, 3)]

    def test_downward_closure_helper(self):
        fam = downward_closure(3, [{1, 3}])
        assert frozenset({1}) in fam and frozenset({3}) in fam and frozenset() in fam
        assert frozenset({2}) not in fam


class TestKBodyFamilies:
    def test_sizes(self):
        hg = hypergraph_k(4, 2)
        by_len = {}
        for v in hg.sets:
            by_len[len(v)] = by_len.get(len(v), 0) + 1
        assert by_len == {0: 1, 1: 4, 2: 6}

    def test_independence(self):
        hg = independence_hypergraph(3)
        assert is_independence(hg)
        assert not is_independence(hypergraph_k(3, 2))

    def test_nested_families(self):
        assert hypergraph_k(3, 1) <= hypergraph_k(3, 2) <= hypergraph_k(3, 3)

    def test_bad_k(self):
        with pytest.raises(HypergraphError):
            hypergraph_k(3, 0)
        with pytest.raises(HypergraphError):
            hypergraph_k(3, 4)


class TestDimensions:
    def test_pure_factor_examples(self):
        assert pure_factor_dim(SystemShape.qubits(2), set()) == 1
        assert pure_factor_dim(SystemShape.qubits(2), {1, 2}) == 9
        assert pure_factor_dim(SystemShape.bits(2), {1, 2}) == 1
        assert pure_factor_dim(SystemShape((2, 3), ("classical", "quantum")), {1, 2}) == 8

    def test_model_dim_examples(self):
        # two qubits, independence: 1 + 3 + 3
        assert model_dim(SystemShape.qubits(2), independence_hypergraph(2)) == (7, 6)
        # three qubits, pairwise family: 1 + 3*3 + 3*9
        assert model_dim(SystemShape.qubits(3), hypergraph_k(3, 2)) == (37, 36)
        # three bits, independence
        assert model_dim(SystemShape.bits(3), independence_hypergraph(3)) == (4, 3)

    def test_independence_dims_formula(self):
        for N in (2, 3, 4):
            for n in (2, 3):
                cl = model_dim(SystemShape.classical((n,) * N), independence_hypergraph(N))
                qu = model_dim(SystemShape.quantum((n,) * N), independence_hypergraph(N))
                assert cl[1] == N * (n - 1)
                assert qu[1] == N * (n * n - 1)


def _all_covering_hypergraphs(N):
    """Enumerate every downward-closed covering family on 1..N via maximal antichains."""
    universe = [frozenset(c) for r in range(1, N + 1) for c in itertools.combinations(range(1, N + 1), r)]
    out = []
    for bits in itertools.product([0, 1], repeat=len(universe)):
        chosen = [v for v, b in zip(universe, bits) if b]
        if not chosen:
            continue
        # antichain, and covering
        if any(a < b for a in chosen for b in chosen):
            continue
        if set().union(*chosen) != set(range(1, N + 1)):
            continue
        out.append(validate_hypergraph(N, chosen, generators=True))
    return out


class TestModelBasis:
    def test_identity_first(self):
        model = build_model(SystemShape.qubits(2), independence_hypergraph(2))
        d = model.shape.dim
        assert np.allclose(model.element_matrix(0), np.eye(d) / np.sqrt(d))
        assert model.patterns[0] == (0, 0)

    def test_basis_gram_identity(self):
        model = build_model(SystemShape.qubits(3), hypergraph_k(3, 2))
        stack = model.basis_matrices()
        m = model.n_elements
        g = np.einsum("aij,bij->ab", stack, stack.conj()).real
        assert np.max(np.abs(g - np.eye(m))) < 1e-12

    def test_element_supports(self):
        model = build_model(SystemShape.bits(3), hypergraph_k(3, 2))
        sups = [model.element_support(j) for j in range(model.n_elements)]
        assert sups[0] == ()
        assert set(sups) == {(), (1,), (2,), (3,), (1, 2), (1, 3), (2, 3)}

    def test_rank_matches_dims_small(self):
        for shape, hg in [
            (SystemShape.bits(3), hypergraph_k(3, 2)),
            (SystemShape.qubits(2), independence_hypergraph(2)),
            (SystemShape((2, 3), ("classical", "quantum")), hypergraph_k(2, 2)),
        ]:
            model = build_model(shape, hg)
            assert numerical_basis_rank(model) == model.dim_total

    def test_rank_certification_large(self):
        # too big to materialize densely: certified through the per-unit Grams
        model = build_model(SystemShape.quantum((3, 3, 3, 3)), hypergraph_k(4, 4))
        assert model.dim_total == 6561
        with pytest.raises(MemoryError):
            model.basis_matrices()
        assert numerical_basis_rank(model) == 6561

    def test_nested_models_share_elements(self):
        shape = SystemShape.qubits(3)
        small = build_model(shape, hypergraph_k(3, 1))
        big = build_model(shape, hypergraph_k(3, 2))
        big_pats = set(big.patterns)
        assert all(p in big_pats for p in small.patterns)
        # numeric nesting: every small element lies in the span of the big stack
        stack = big.basis_matrices()
        for j in range(small.n_elements):
            e = small.element_matrix(j)
            coeff = expectation_values(e, stack)
            recon = np.tensordot(coeff, stack, axes=1)
            assert np.max(np.abs(recon - e)) < 1e-12

    def test_full_model_spans_algebra(self):
        sh = SystemShape((2, 2), ("classical", "quantum"))
        model = full_model(sh)
        assert model.dim_total == sh.algebra_dim == 8
        assert numerical_basis_rank(model) == 8


class TestExhaustiveDims:
    def test_all_hypergraphs_n_le_3(self):
        for N in (1, 2, 3):
            for hg in _all_covering_hypergraphs(N):
                for kinds in itertools.product(["classical", "quantum"], repeat=N):
                    shape = SystemShape((2,) * N, kinds)
                    model = build_model(shape, hg)
                    want = sum(pure_factor_dim(shape, v) for v in hg.sets)
                    assert model.dim_total == want
                    assert numerical_basis_rank(model) == want


class TestCoveringEnumeration:
    def test_matches_independent_enumerator(self):
        from hiercorr.hierarchy import covering_hypergraphs

        for n in (1, 2, 3):
            lib = {hg.sets for hg in covering_hypergraphs(n)}
            ref = {hg.sets for hg in _all_covering_hypergraphs(n)}
            assert lib == ref

    def test_counts(self):
        from hiercorr.hierarchy import covering_hypergraphs

        assert sum(1 for _ in covering_hypergraphs(4)) == 114
