import math

import numpy as np
import pytest

from fastfood_ensemble import (
    DimensionError,
    FastfoodBlock,
    FastfoodStack,
    InputError,
    NonlinearityMode,
    OracleSizeError,
    ParameterError,
    apply_nonlinearity,
    dense_materialize,
    dense_rks,
    exact_rbf,
    project,
    sample_block,
    sample_phases,
)
from fastfood_ensemble.rng import Stream, derive_seed


class TestSampleBlock:
    def test_padding_and_stack_count(self):
        b = sample_block(7, 100, 20, 1.0)
        assert b.d_pad == 128
        assert b.n_stacks == 1

    def test_six_backbone_scale_dimensions(self):
        # six pooled backbones concatenated: 7168 wide, projected to 20000
        b = sample_block(7, 7168, 20000, 1.0)
        assert b.d_pad == 8192
        assert b.n_stacks == 3

    def test_deterministic(self):
        a = sample_block(7, 96, 200, 0.5)
        b = sample_block(7, 96, 200, 0.5)
        for sa, sb in zip(a.stacks, b.stacks):
            assert np.array_equal(sa.b_signs, sb.b_signs)
            assert np.array_equal(sa.perm, sb.perm)
            assert np.array_equal(sa.g_gauss, sb.g_gauss)
            assert np.array_equal(sa.s_scale, sb.s_scale)

    def test_stacks_use_distinct_substreams(self):
        b = sample_block(7, 64, 256, 1.0)
        assert b.n_stacks == 4
        for i in range(4):
            for j in range(i + 1, 4):
                assert not np.array_equal(b.stacks[i].g_gauss, b.stacks[j].g_gauss)

    def test_invariants(self):
        b = sample_block(3, 50, 120, 2.0)
        for st in b.stacks:
            assert set(np.unique(st.b_signs)) <= {-1.0, 1.0}
            assert np.array_equal(np.sort(st.perm), np.arange(64))
            assert np.all(st.s_scale >= 0)
            assert np.all(np.isfinite(st.s_scale))

    def test_unit_s_mode(self):
        b = sample_block(3, 50, 60, 1.0, s_mode="unit")
        assert np.array_equal(b.stacks[0].s_scale, np.ones(64))

    def test_parameter_errors(self):
        with pytest.raises(ParameterError):
            sample_block(1, 0, 10, 1.0)
        with pytest.raises(ParameterError):
            sample_block(1, 10, 0, 1.0)
        with pytest.raises(ParameterError):
            sample_block(1, 10, 10, 0.0)
        with pytest.raises(ParameterError):
            sample_block(1, 10, 10, -1.0)
        with pytest.raises(ParameterError):
            sample_block(1, 10, 10, 1.0, s_mode="bogus")

    def test_s_scale_matches_dense_row_norms(self):
        # projection row norms should track chi(d)/sigma like dense rows
        sigma = 2.0
        norms = []
        for s in range(40):
            V = dense_materialize(sample_block(s, 256, 256, sigma))
            norms.extend(np.linalg.norm(V, axis=1))
        expected = np.sqrt(256) / sigma  # approx E chi(256)
        assert abs(np.mean(norms) - expected) / expected < 0.05


class TestProject:
    def test_zero_maps_to_zero(self):
        b = sample_block(7, 33, 10, 1.0)
        assert np.array_equal(project(b, np.zeros(33)), np.zeros(10))

    def test_matches_dense_oracle(self):
        st = Stream(100)
        for trial in range(30):
            m_in = 2 + int(st.uniforms(1)[0] * 500)
            d_out = 1 + int(st.uniforms(1)[0] * 700)
            block = sample_block(derive_seed(5, trial), m_in, d_out, 1.5)
            x = st.normals(m_in)
            direct = project(block, x)
            via_dense = dense_materialize(block) @ x
            denom = np.linalg.norm(via_dense)
            assert np.linalg.norm(direct - via_dense) <= 1e-6 * denom

    def test_homogeneity(self):
        b = sample_block(2, 100, 150, 1.0)
        x = Stream(8).normals(100)
        assert np.array_equal(project(b, 2.0 * x), 2.0 * project(b, x))

    def test_batch_matches_single(self):
        b = sample_block(2, 40, 90, 1.0)
        X = Stream(8).normals(3 * 40).reshape(3, 40)
        batched = project(b, X)
        assert batched.shape == (3, 90)
        for i in range(3):
            assert np.array_equal(batched[i], project(b, X[i]))

    def test_dimension_error(self):
        b = sample_block(2, 40, 90, 1.0)
        with pytest.raises(DimensionError):
            project(b, np.zeros(39))

    def test_nonfinite_input_error(self):
        b = sample_block(2, 40, 90, 1.0)
        x = np.zeros(40)
        x[3] = np.nan
        with pytest.raises(InputError):
            project(b, x)
        x[3] = np.inf
        with pytest.raises(InputError):
            project(b, x)


class TestDenseMaterialize:
    def _identity_stack(self, d):
        return FastfoodStack(
            b_signs=np.ones(d),
            perm=np.arange(d),
            g_gauss=np.ones(d),
            s_scale=np.ones(d),
        )

    def test_identity_diagonals_give_sqrt_d_identity(self):
        d = 16
        block = FastfoodBlock(
            m_in=d, d_pad=d, d_out=d, sigma=1.0, seed=0, s_mode="unit",
            stacks=(self._identity_stack(d),),
        )
        V = dense_materialize(block)
        assert np.allclose(V, math.sqrt(d) * np.eye(d), atol=1e-12)

    def test_row_count_with_overshooting_stacks(self):
        b = sample_block(4, 30, 50, 1.0)  # d_pad 32, 2 stacks -> 64 rows raw
        V = dense_materialize(b)
        assert V.shape == (50, 30)

    def test_matrix_reproduces_project_outputs(self):
        b = sample_block(11, 70, 200, 0.7)
        V = dense_materialize(b)
        st = Stream(12)
        for _ in range(20):
            x = st.normals(70)
            assert np.allclose(project(b, x), V @ x, rtol=1e-9, atol=1e-12)

    def test_cap_enforced(self):
        b = sample_block(1, 5000, 10, 1.0)  # d_pad 8192 > default cap
        with pytest.raises(OracleSizeError):
            dense_materialize(b)
        V = dense_materialize(b, cap=8192)
        assert V.shape == (10, 5000)


class TestDenseRks:
    def test_entry_mean_near_zero(self):
        W = dense_rks(5, 512, 512, 1.0)
        assert abs(W.mean()) <= 4 / math.sqrt(512 * 512)

    def test_entry_variance_matches_sigma(self):
        W = dense_rks(5, 512, 512, 1.0)
        assert abs(W.var() - 1.0) < 0.1
        W2 = dense_rks(5, 512, 512, 2.0)
        assert abs(W2.var() - 0.25) < 0.025

    def test_deterministic(self):
        assert np.array_equal(dense_rks(9, 64, 32, 1.0), dense_rks(9, 64, 32, 1.0))

    def test_chunking_matches_single_draw(self):
        # the pinned chunk constant must reproduce one contiguous draw
        W = dense_rks(3, 100, 50, 1.0)
        direct = Stream(3).normals(5000).reshape(50, 100)
        assert np.array_equal(W, direct)


class TestNonlinearity:
    def test_identity_passthrough(self):
        z = Stream(1).normals(10)
        assert np.array_equal(apply_nonlinearity(z, NonlinearityMode.identity()), z)

    def test_rbf_cos_closed_form(self):
        nl = NonlinearityMode.rbf_cos(np.zeros(2))
        out = apply_nonlinearity(np.zeros(2), nl)
        assert np.allclose(out, [1.0, 1.0])

    def test_rbf_cos_range(self):
        D = 64
        nl = NonlinearityMode.rbf_cos(sample_phases(3, D))
        out = apply_nonlinearity(Stream(4).normals(D) * 10, nl)
        bound = math.sqrt(2.0 / D) + 1e-15
        assert np.all(np.abs(out) <= bound)

    def test_phase_invariants(self):
        with pytest.raises(ParameterError):
            NonlinearityMode(mode="identity", phases=np.zeros(3))
        with pytest.raises(ParameterError):
            NonlinearityMode(mode="rbf-cos")
        with pytest.raises(ParameterError):
            NonlinearityMode.rbf_cos(np.array([0.0, 7.0]))  # >= 2*pi

    def test_phase_length_mismatch(self):
        nl = NonlinearityMode.rbf_cos(np.zeros(4))
        with pytest.raises(ParameterError):
            apply_nonlinearity(np.zeros(5), nl)

    def test_sample_phases_range(self):
        ph = sample_phases(8, 1000)
        assert np.all(ph >= 0) and np.all(ph < 2 * np.pi)


class TestExactRbf:
    def test_self_similarity_is_one(self):
        x = Stream(2).normals(5)
        assert exact_rbf(x, x, 1.0) == 1.0

    def test_distance_sigma_closed_form(self):
        x = np.zeros(4)
        y = np.array([3.0, 0.0, 0.0, 0.0])
        assert abs(exact_rbf(x, y, 3.0) - math.exp(-0.5)) < 1e-12

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            exact_rbf(np.zeros(3), np.zeros(4), 1.0)

    def test_kernel_estimate_over_seeds(self):
        # rbf-cos feature dot products, averaged over 100 block seeds,
        # approximate the exact kernel within 3/sqrt(D)
        m_in, D, sigma = 12, 1024, 3.0
        st = Stream(55)
        x = st.normals(m_in)
        y = st.normals(m_in)
        ref = exact_rbf(x, y, sigma)
        estimates = []
        for s in range(100):
            seed = derive_seed(808, s)
            block = sample_block(derive_seed(seed, 0), m_in, D, sigma)
            nl = NonlinearityMode.rbf_cos(sample_phases(derive_seed(seed, 1), D))
            fx = apply_nonlinearity(project(block, x), nl)
            fy = apply_nonlinearity(project(block, y), nl)
            estimates.append(float(fx @ fy))
        assert abs(np.mean(estimates) - ref) <= 3 / math.sqrt(D)


class TestStructuralProperties:
    def test_cross_member_row_coherence(self):
        # rows of blocks from different member seeds are near-orthogonal
        d = 256
        A = dense_materialize(sample_block(derive_seed(1, 0), d, d, 1.0))
        B = dense_materialize(sample_block(derive_seed(1, 1), d, d, 1.0))
        An = A / np.linalg.norm(A, axis=1, keepdims=True)
        Bn = B / np.linalg.norm(B, axis=1, keepdims=True)
        mean_abs_cos = np.mean(np.abs(An @ Bn.T))
        assert mean_abs_cos <= 3 / math.sqrt(d)

    def test_parameter_count_bound(self):
        block = sample_block(1, 7168, 7168, 1.0)
        assert block.stored_scalars <= 4 * block.d_pad * block.n_stacks
        ratio = (7168 * 7168) / block.stored_scalars
        assert ratio > 7168 / 8

    def test_kernel_mse_non_increasing_in_d(self):
        m_in, sigma, n_pairs, n_seeds = 16, 4.0, 50, 8
        st = Stream(123)
        X = st.normals(n_pairs * m_in).reshape(n_pairs, m_in)
        Y = st.normals(n_pairs * m_in).reshape(n_pairs, m_in)
        ref = np.array([exact_rbf(x, y, sigma) for x, y in zip(X, Y)])
        mses = []
        for D in (64, 256, 1024):
            sq = []
            for s in range(n_seeds):
                seed = derive_seed(999, s)
                block = sample_block(derive_seed(seed, 0), m_in, D, sigma)
                nl = NonlinearityMode.rbf_cos(
                    sample_phases(derive_seed(seed, 1), D))
                fx = apply_nonlinearity(project(block, X), nl)
                fy = apply_nonlinearity(project(block, Y), nl)
                sq.append((np.sum(fx * fy, axis=1) - ref) ** 2)
            mses.append(float(np.mean(sq)))
        assert mses[0] >= mses[1] >= mses[2]
