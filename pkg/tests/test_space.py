import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from parainv import (InvalidMeshError, ValidationError, build_interval_space,
                     matrix_space)
from oracles import quadrature_lumped, quadrature_mass, quadrature_stiffness


class TestBuildIntervalSpace:
    def test_lumped_neumann_two_cells(self):
        space = build_interval_space(2, "neumann", lumped=True)
        np.testing.assert_allclose(space.h_gram, np.diag([0.25, 0.5, 0.25]), atol=1e-15)
        np.testing.assert_allclose(space.h_gram, quadrature_lumped(2, "neumann"), atol=1e-14)

    def test_dirichlet_two_cells_has_one_dof(self):
        assert build_interval_space(2, "dirichlet").dim == 1

    def test_consistent_mass_sums_to_length(self):
        space = build_interval_space(4, "neumann")
        assert space.h_gram.sum() == pytest.approx(1.0, abs=1e-14)
        assert quadrature_mass(4, "neumann").sum() == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
    @pytest.mark.parametrize("n", [3, 8, 17])
    def test_matrices_match_quadrature(self, n, bc):
        space = build_interval_space(n, bc)
        np.testing.assert_allclose(space.h_gram, quadrature_mass(n, bc), atol=1e-13)
        stiff = quadrature_stiffness(n, bc)
        np.testing.assert_allclose(space.v_gram, stiff + quadrature_mass(n, bc), atol=1e-10)
        lumped = build_interval_space(n, bc, lumped=True)
        np.testing.assert_allclose(lumped.v_gram, stiff + quadrature_lumped(n, bc), atol=1e-10)

    def test_dirichlet_eliminates_boundary(self):
        space = build_interval_space(10, "dirichlet")
        assert space.dim == 9
        assert space.x[0] == pytest.approx(0.1)
        assert space.x[-1] == pytest.approx(0.9)

    @pytest.mark.parametrize("n", [1, 0, -3])
    def test_too_few_cells(self, n):
        with pytest.raises(InvalidMeshError):
            build_interval_space(n)

    def test_sine_h_norm(self):
        space = build_interval_space(64, "dirichlet")
        v = space.interpolate(lambda x: np.sin(np.pi * x))
        assert space.h_norm(v) == pytest.approx(np.sqrt(0.5), abs=1e-3)

    def test_lumping_equivalence_constants(self):
        # P1 lumping: consistent and lumped mass are spectrally equivalent within [1/3, 1]
        for n in (4, 16, 64):
            cons = build_interval_space(n, "neumann").h_gram
            lump = build_interval_space(n, "neumann", lumped=True).h_gram
            lam = sla.eigh(cons, lump, eigvals_only=True)
            assert lam.min() >= 1 / 3 - 1e-12
            assert lam.max() <= 1 + 1e-12
            rng = np.random.default_rng(n)
            for v in rng.standard_normal((20, n + 1)):
                ratio = np.sqrt((v @ cons @ v) / (v @ lump @ v))
                assert 1 / np.sqrt(3) - 1e-12 <= ratio <= np.sqrt(3) + 1e-12


class TestMatrixSpace:
    def test_identity(self):
        space = matrix_space(np.eye(2), np.eye(2))
        assert space.dim == 2
        assert space.c_emb == pytest.approx(1.0)
        assert space.h_norm([3.0, 4.0]) == pytest.approx(5.0)

    def test_scaled_v(self):
        space = matrix_space(np.eye(2), 4 * np.eye(2))
        v = np.array([0.3, -1.2])
        assert space.h_norm(v) == pytest.approx(0.5 * space.v_norm(v), rel=1e-14)
        assert space.c_emb == pytest.approx(0.5)

    def test_asymmetric_v_rejected(self):
        with pytest.raises(ValidationError, match="vGram"):
            matrix_space(np.diag([1.0, 2.0]), np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_indefinite_h_rejected(self):
        with pytest.raises(ValidationError, match="hGram"):
            matrix_space(np.diag([1.0, -1.0]), np.eye(2))

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            matrix_space(np.eye(2), np.eye(3))


class TestNorms:
    def test_zero(self):
        space = build_interval_space(8)
        z = np.zeros(space.dim)
        assert space.h_norm(z) == 0.0
        assert space.v_norm(z) == 0.0
        assert space.dual_norm(z) == 0.0

    def test_dual_norm_examples(self):
        assert matrix_space(np.eye(2), np.eye(2)).dual_norm([1.0, 0.0]) == pytest.approx(1.0)
        space = matrix_space(np.eye(2), np.diag([4.0, 1.0]))
        # explicit inverse: g @ diag(1/4, 1) @ g
        assert space.dual_norm([2.0, 0.0]) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        space = build_interval_space(8)
        with pytest.raises(ValidationError):
            space.h_norm(np.ones(3))
        with pytest.raises(ValidationError):
            space.dual_norm(np.ones(3))

    def test_embedding_round_trip(self):
        space = build_interval_space(16, "neumann")
        h = np.random.default_rng(2).standard_normal(space.dim)
        np.testing.assert_allclose(space.riesz_h(space.embed(h)), h, rtol=1e-10, atol=1e-12)

    def test_duality_pairing(self):
        space = build_interval_space(12, "neumann")
        rng = np.random.default_rng(3)
        for _ in range(100):
            g, v = rng.standard_normal((2, space.dim))
            bound = space.dual_norm(g) * space.v_norm(v)
            assert abs(space.pair(g, v)) <= bound * (1 + 1e-10)
            star = space.riesz_v(g)
            attained = space.dual_norm(g) * space.v_norm(star)
            assert space.pair(g, star) == pytest.approx(attained, rel=1e-10)

    def test_embedding_constant(self):
        space = build_interval_space(20, "dirichlet", lumped=True)
        assert space.c_emb <= 1.0
        rng = np.random.default_rng(4)
        for v in rng.standard_normal((200, space.dim)):
            assert space.h_norm(v) <= space.c_emb * space.v_norm(v) * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 40), st.sampled_from(["dirichlet", "neumann"]), st.booleans())
def test_grams_symmetric_positive(n, bc, lumped):
    space = build_interval_space(n, bc, lumped)
    for gram in (space.h_gram, space.v_gram):
        np.testing.assert_allclose(gram, gram.T, atol=1e-12 * np.abs(gram).max())
        assert np.linalg.eigvalsh(gram).min() > 0
    assert space.lumped == lumped
    assert space.diagonal_h == (lumped or space.dim == 1)
    assert space.dim == (n - 1 if bc == "dirichlet" else n + 1)
