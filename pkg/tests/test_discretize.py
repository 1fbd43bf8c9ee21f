import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from degwave.discretize import assemble, build_mesh, discrete_generator, generalized_eigs, write_coo
from degwave.errors import DomainError
from degwave.spectrum import degeneracy_params, eigen_frequencies


def _gen(alpha, n, damping=1.0):
    return discrete_generator(assemble(build_mesh(alpha, n), alpha), damping)


def test_mesh_example():
    m = build_mesh(1.0, 4)
    assert np.allclose(m.nodes, [0.0, 1 / 16, 1 / 4, 9 / 16, 1.0], atol=0, rtol=1e-15)
    assert m.grading == 2.0


def test_uniform_mesh():
    m = build_mesh(1.7, 10, grading=1.0)
    assert np.allclose(np.diff(m.nodes), 0.1)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=1.0, max_value=1.9), st.integers(min_value=2, max_value=3000))
def test_mesh_strictly_increasing(alpha, n):
    m = build_mesh(alpha, n)
    assert m.nodes[0] == 0.0 and m.nodes[-1] == 1.0
    assert np.all(np.diff(m.nodes) > 0)


@pytest.mark.parametrize("args", [(1.0, 1), (1.0, 3.5), (2.0, 10), (0.5, 10)])
def test_mesh_errors(args):
    with pytest.raises(DomainError):
        build_mesh(*args)
    with pytest.raises(DomainError):
        build_mesh(1.2, 10, grading=0.5)


def test_extreme_grading_underflow_is_reported():
    with pytest.raises(DomainError, match="underflows"):
        build_mesh(1.99, 62)


def test_assembly_symmetry_and_constants():
    mats = assemble(build_mesh(1.3, 50), 1.3)
    for t in (mats.stiffness, mats.mass, mats.full_stiffness):
        d = t.to_dense()
        assert np.array_equal(d, d.T)
    ones = np.ones(mats.full_stiffness.size)
    assert np.max(np.abs(mats.full_stiffness.matvec(ones))) < 1e-12
    assert mats.trace[0] == 1.0 and mats.trace[1:].sum() == 0.0
    assert np.all(np.linalg.eigvalsh(mats.mass.to_dense()) > 0)


def test_stiffness_weights_exact():
    # a linear function u = 1 - x has energy int x^alpha dx = 1/(alpha+1)
    alpha = 1.4
    mats = assemble(build_mesh(alpha, 37), alpha)
    u = 1.0 - mats.mesh.nodes[:-1]
    assert u @ mats.stiffness.matvec(u) == pytest.approx(1.0 / (alpha + 1.0), rel=1e-13)
    # and mass integral int (1-x)^2 dx = 1/3
    assert u @ mats.mass.matvec(u) == pytest.approx(1.0 / 3.0, rel=1e-13)


@pytest.mark.parametrize("alpha", [1.0, 1.5])
def test_dissipation_identity_random(alpha):
    gen = _gen(alpha, 60)
    rng = np.random.default_rng(3)
    for _ in range(20):
        z = rng.standard_normal(2 * gen.size) + 1j * rng.standard_normal(2 * gen.size)
        val = gen.inner(gen.apply(z), z).real
        v0 = z[gen.size]
        assert val == pytest.approx(-abs(v0) ** 2, rel=1e-9, abs=1e-9)


def test_undamped_is_skew():
    gen = _gen(1.2, 40, damping=0.0)
    rng = np.random.default_rng(5)
    z = rng.standard_normal(2 * gen.size)
    assert abs(gen.inner(gen.apply(z), z).real) < 1e-10 * gen.norm(z) ** 2 * np.max(np.abs(gen.K.diag))


@pytest.mark.parametrize("alpha", [1.0, 1.3, 1.7])
def test_dense_spectrum_in_left_half_plane(alpha):
    gen = _gen(alpha, 200)
    ev = gen.eigenvalues()
    scale = np.max(np.abs(ev))
    assert np.max(ev.real) <= 1e-9 * scale
    assert np.all(np.abs(ev.real) > 0)


def test_energy_symmetric_form_matches_generator():
    gen = _gen(1.0, 30)
    a = np.linalg.eigvals(gen.energy_symmetric_form())
    b = gen.eigenvalues()
    gap = np.abs(a[:, None] - b[None, :]).min(axis=1)
    assert np.max(gap) < 1e-8 * np.max(np.abs(b))


def test_cellwise_forms_agree_with_matrices():
    gen = _gen(1.5, 80)
    rng = np.random.default_rng(1)
    x = rng.standard_normal(gen.size)
    assert gen.mass_form(x) == pytest.approx(x @ gen.M.matvec(x), rel=1e-12)
    assert gen.stiffness_form(x) == pytest.approx(x @ gen.K.matvec(x), rel=1e-10)
    assert gen.energy(x, x) == pytest.approx(0.5 * (x @ gen.M.matvec(x) + x @ gen.K.matvec(x)), rel=1e-10)


@pytest.mark.parametrize("alpha, n_cells, nu", [(1.0, 2000, 0.0), (1.5, 4000, 1.0)])
def test_generalized_eigs_match_closed_form(alpha, n_cells, nu):
    mats = assemble(build_mesh(alpha, n_cells), alpha)
    mu = generalized_eigs(mats, 5)
    beta = eigen_frequencies(degeneracy_params(alpha), 5)
    assert np.all(mu > 0) and np.all(np.diff(mu) > 0)
    assert np.max(np.abs(np.sqrt(mu) / beta - 1.0)) < 1e-3


def test_eigenvalue_error_decreases_under_refinement():
    alpha = 1.2
    beta = eigen_frequencies(degeneracy_params(alpha), 3)
    errs = []
    for n in (100, 200, 400, 800):
        mu = generalized_eigs(assemble(build_mesh(alpha, n), alpha), 3)
        errs.append(np.abs(np.sqrt(mu) - beta) / beta)
    errs = np.array(errs)
    assert np.all(np.diff(errs, axis=0) < 0)
    order = np.log2(errs[:-1] / errs[1:])
    assert np.all(order >= 1.0)


def test_generalized_eigs_k_bound():
    mats = assemble(build_mesh(1.0, 40), 1.0)
    with pytest.raises(DomainError):
        generalized_eigs(mats, 11)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_coercivity(seed):
    mats = assemble(build_mesh(1.6, 50), 1.6)
    u = np.random.default_rng(seed).standard_normal(mats.size)
    assert u @ mats.stiffness.matvec(u) + u @ mats.mass.matvec(u) > 0


def test_write_coo(tmp_path):
    mats = assemble(build_mesh(1.0, 4), 1.0)
    path = tmp_path / "k.txt"
    write_coo(mats.stiffness, path)
    rows = [line.split() for line in path.read_text().splitlines()]
    assert len(rows) == 4 + 2 * 3
    dense = np.zeros((4, 4))
    for r, c, v in rows:
        dense[int(r), int(c)] = float(v)
    assert np.array_equal(dense, mats.stiffness.to_dense())


def test_negative_damping_rejected():
    with pytest.raises(DomainError):
        discrete_generator(assemble(build_mesh(1.0, 8), 1.0), -1.0)
