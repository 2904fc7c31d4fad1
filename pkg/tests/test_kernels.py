import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kerflow import kernels as kk
from kerflow.errors import (EmptyModelError, KernelDomainError,
                            MissingProductError, NotHermitianError)


@pytest.fixture
def fock():
    return kk.builtin_kernel("fock")


@pytest.fixture
def fock_two_point(fock):
    return kk.gram(fock, [[0.0, 0.0], [1.0, 0.0]])


def test_fock_two_point_gram(fock_two_point):
    G = fock_two_point.gram.real
    assert np.allclose(G, [[1.0, 1.0], [1.0, np.e]])
    # eigenvalues of [[1, 1], [1, e]]: (1+e)/2 +- sqrt((1+e)^2/4 - (e-1))
    tr, det = 1.0 + np.e, np.e - 1.0
    lam_min = tr / 2.0 - np.sqrt(tr * tr / 4.0 - det)
    assert fock_two_point.eigenvalues[-1] == pytest.approx(lam_min, abs=1e-12)
    assert fock_two_point.eigenvalues[-1] == pytest.approx(0.5408, abs=1e-4)


def test_single_point_gram(fock):
    m = kk.gram(fock, [[0.5, 0.5]])
    assert m.rank == 1
    assert m.gram.shape == (1, 1)


def test_duplicate_points_force_rank_deficiency(fock):
    m = kk.gram(fock, [[0.3, 0.0], [0.3, 0.0]])
    assert m.duplicate_points
    assert m.rank == 1
    assert abs(m.eigenvalues[-1]) <= 1e-14 * m.eigenvalues[0]


def test_non_hermitian_kernel_rejected():
    bad = kk.Kernel("bad", lambda x, y: float(x[0] - y[0]) + 1.0)
    with pytest.raises(NotHermitianError):
        kk.gram(bad, [[0.0], [1.0]])


def test_psd_fock_random_ball(fock):
    rng = np.random.default_rng(12)
    pts = rng.normal(size=(20, 3))
    pts /= np.maximum(np.linalg.norm(pts, axis=1, keepdims=True), 1.0)
    assert kk.psd_check(kk.gram(fock, pts), tol=1e-10).passed


def test_negative_constant_kernel_fails_psd():
    neg = kk.Kernel("neg", lambda x, y: -1.0)
    model = kk.gram_from_matrix(-np.ones((4, 4)) + np.eye(4) * 1e-9)
    report = kk.psd_check(model, tol=1e-10)
    assert not report.passed
    assert report.min_eigenvalue < -3.0


def test_psd_ou_kernel():
    ou = kk.builtin_kernel("ou")
    pts = np.linspace(-2, 2, 10)[:, None]
    assert kk.psd_check(kk.gram(ou, pts)).passed


def test_whiten_identity_gram():
    # orthonormal sections: the whitening is itself unitary (identity up to
    # the arbitrary basis of the degenerate eigenspace)
    model = kk.gram_from_matrix(np.eye(3))
    assert model.rank == 3
    W = model.whitening
    assert np.max(np.abs(W @ W.conj().T - np.eye(3))) <= 1e-14
    assert np.max(np.abs(W @ model.gram @ W.conj().T - np.eye(3))) <= 1e-14


def test_whiten_rank_one():
    u = np.array([1.0, 2.0, -1.0])
    model = kk.gram_from_matrix(np.outer(u, u))
    assert model.rank == 1
    W, G = model.whitening, model.gram
    assert np.max(np.abs(W @ G @ W.conj().T - np.eye(1))) <= 1e-14


def test_whitening_reproduces_gram(fock_two_point):
    m = fock_two_point
    W, G = m.whitening, m.gram
    assert np.max(np.abs(W @ G @ W.conj().T - np.eye(m.rank))) <= 1e-12
    for i in range(2):
        for j in range(2):
            vi, vj = kk.embed_index(m, i), kk.embed_index(m, j)
            # <K_mj, K_mi> = G[i, j] in the whitened coordinates
            assert vj.inner(vi) == pytest.approx(complex(G[i, j]), abs=1e-12)


def test_whiten_recut(fock):
    m = kk.gram(fock, [[0.3, 0.0], [0.3, 0.0]])
    strict = kk.whiten(m, 1e-16)
    assert strict.rank >= m.rank
    with pytest.raises(EmptyModelError):
        kk.gram_from_matrix(np.zeros((2, 2)))


def test_embed_new_point_matches_sample(fock, fock_two_point):
    v_new = kk.embed_point(fock_two_point, [1.0, 0.0])
    v_idx = kk.embed_index(fock_two_point, 1)
    assert np.max(np.abs(v_new.coords - v_idx.coords)) <= 1e-12


def test_embedding_evaluates_kernel(fock_two_point):
    # f = section at point 1; f(m_0) = <f, section at 0> = G[0, 1] = 1
    f = kk.embed_index(fock_two_point, 1)
    k0 = kk.embed_index(fock_two_point, 0)
    assert f.inner(k0) == pytest.approx(1.0, abs=1e-12)


def test_projection_residual_interior_point(fock):
    pts = np.linspace(-1, 1, 12)[:, None]
    model = kk.gram(fock, pts)
    assert kk.projection_residual(model, [0.05]) <= 1e-6


def test_fock_at_origin(fock):
    assert fock([0.0, 0.0], [2.0, -1.0]) == pytest.approx(1.0)


def test_laplace_single_atom_constant():
    K = kk.builtin_kernel("laplace", {"atoms": [[0.0]], "weights": [2.0]})
    assert K([0.3], [0.9]) == pytest.approx(2.0)
    m = kk.gram(K, np.linspace(-1, 1, 5)[:, None])
    assert m.rank == 1


def test_laplace_cosh_closed_form():
    K = kk.builtin_kernel("laplace", {"atoms": [[-1.0], [1.0]],
                                      "weights": [0.5, 0.5]})
    assert K([0.3], [0.4]).real == pytest.approx(np.cosh(0.35), abs=1e-14)
    pts = np.linspace(-1, 1, 10)[:, None]
    assert kk.psd_check(kk.gram(K, pts)).passed


def test_laplace_gaussian_quadrature_converges():
    # trapezoid lattice weights for a unit Gaussian; the transform closed form
    # is exp((x+y)^2 / 8).  The [-5, 5] window truncates at ~3e-5; [-6, 6]
    # reaches the 1e-6 target at the same node count.
    exact = kk.builtin_kernel("laplace_gaussian")
    errs = []
    for span, n in ((5.0, 41), (6.0, 41)):
        xs = np.linspace(-span, span, n)
        w = np.full(n, 2 * span / (n - 1))
        w[0] *= 0.5
        w[-1] *= 0.5
        dens = np.exp(-xs ** 2 / 2) / np.sqrt(2 * np.pi)
        K = kk.laplace_kernel_from_measure(kk.MeasureSample(xs[:, None], w * dens))
        worst = max(abs(K([a], [b]) - exact([a], [b])) / abs(exact([a], [b]))
                    for a in np.linspace(-1, 1, 5) for b in np.linspace(-1, 1, 5))
        errs.append(worst)
    assert errs[1] <= 1e-6
    assert errs[1] < errs[0]


def test_measure_sample_validation():
    with pytest.raises(ValueError):
        kk.MeasureSample([[1.0]], [0.0])
    with pytest.raises(ValueError):
        kk.MeasureSample([[1.0]], [1.0, 2.0])


def test_det_kernel_at_zero():
    K = kk.builtin_kernel("det", {"n": 2, "power": 3.0})
    assert K(np.zeros(4), np.zeros(4)) == pytest.approx(1.0)


def test_det_kernel_domain_error():
    K = kk.builtin_kernel("det", {"n": 2, "power": 2.0})
    with pytest.raises(KernelDomainError):
        K(1.2 * np.eye(2).ravel(), np.zeros(4))


def test_det_kernel_psd_on_contractions():
    rng = np.random.default_rng(5)
    for power in (1.0, 2.0):
        K = kk.builtin_kernel("det", {"n": 2, "power": power})
        pts = []
        for _ in range(6):
            raw = rng.normal(size=(2, 2))
            pts.append((raw * rng.uniform(0.1, 0.8) / np.linalg.norm(raw, 2)).ravel())
        assert kk.psd_check(kk.gram(K, pts), tol=1e-10).passed


def test_ou_grad_kink_raises():
    K = kk.builtin_kernel("ou")
    with pytest.raises(KernelDomainError):
        K.grad1([0.5], [0.5])


def test_grad1_fd_matches_analytic():
    for name, params in (("fock", {}), ("gaussian_rbf", {"sigma": 1.3}),
                         ("laplace_gaussian", {})):
        K = kk.builtin_kernel(name, params)
        fd = kk.Kernel(name, K.eval_fn, None)
        x, y = np.array([0.3, -0.2]), np.array([0.1, 0.5])
        rel = np.abs(K.grad1(x, y) - fd.grad1(x, y)) / (np.abs(K.grad1(x, y)) + 1e-30)
        assert np.max(rel) <= 1e-6


@settings(max_examples=15, deadline=None)
@given(st.lists(st.floats(-1.5, 1.5), min_size=2, max_size=7, unique=True))
def test_builtin_kernels_hermitian_and_psd(xs):
    pts = np.array(xs)[:, None]
    for name, params in (("gaussian_rbf", {}), ("ou", {"mass": 1.0}),
                         ("laplace", {"atoms": [[-1.0], [1.0]],
                                      "weights": [0.5, 0.5]})):
        K = kk.builtin_kernel(name, params)
        model = kk.gram(K, pts)
        asym = np.max(np.abs(model.gram - model.gram.conj().T))
        assert asym <= 1e-12
        assert kk.psd_check(model, tol=1e-10).passed


def test_reproducing_property_across_builtins():
    # embedded sections reproduce the Gram entries on 20-point random samples
    rng = np.random.default_rng(77)
    pts = rng.uniform(-1.0, 1.0, size=(20, 1))
    for name, params in (("fock", {}), ("gaussian_rbf", {}),
                         ("ou", {"mass": 1.0}),
                         ("laplace", {"atoms": [[-1.0], [1.0]],
                                      "weights": [0.5, 0.5]}),
                         ("laplace_gaussian", {})):
        model = kk.gram(kk.builtin_kernel(name, params), pts)
        worst = 0.0
        for i in range(20):
            vi = kk.embed_index(model, i)
            for j in range(20):
                vj = kk.embed_index(model, j)
                worst = max(worst, abs(vj.inner(vi) - model.gram[i, j]))
        assert worst <= 1e-10 * max(1.0, float(np.abs(model.gram).max())), name


def test_gns_rank_one_scalar_action():
    # S = ((0, 1], *), star = id, phi(s) = s: sections span one dimension and
    # right translation by s acts as the scalar s
    sample = kk.InvolutiveSemigroupSample(
        elements=tuple(np.array([s]) for s in (0.3, 0.5, 0.8)),
        product=lambda a, b: a * b,
        star=lambda a: a,
        phi=lambda u: float(u[0]))
    res = kk.gns_from_pd_function(sample)
    assert res.model.rank == 1
    for k, s in enumerate((0.3, 0.5, 0.8)):
        assert res.matrices[k][0, 0] == pytest.approx(s, abs=1e-12)
    assert res.max_star_defect <= 1e-12


def test_gns_trivial_character():
    sample = kk.InvolutiveSemigroupSample(
        elements=tuple(np.array([s]) for s in (0.4, 0.6)),
        product=lambda a, b: a * b,
        star=lambda a: a,
        phi=lambda u: 1.0)
    res = kk.gns_from_pd_function(sample)
    assert res.model.rank == 1
    for P in res.matrices.values():
        assert P[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_gns_hardy_kernel():
    # phi(s) = 1/(1-s) on (-1, 1) gives the geometric kernel 1/(1 - s t)
    elems = tuple(np.array([s]) for s in np.linspace(-0.85, 0.85, 8))
    sample = kk.InvolutiveSemigroupSample(
        elements=elems,
        product=lambda a, b: a * b,
        star=lambda a: a,
        phi=lambda u: 1.0 / (1.0 - float(u[0])))
    res = kk.gns_from_pd_function(sample)
    assert kk.psd_check(res.model).passed
    assert res.max_star_defect <= 1e-9


def test_gns_missing_product_error():
    def phi(u):
        if float(u[0]) >= 1.0:
            raise ValueError("outside domain")
        return 1.0 / (1.0 - float(u[0]))

    sample = kk.InvolutiveSemigroupSample(
        elements=(np.array([0.9]), np.array([1.8])),
        product=lambda a, b: a * b,
        star=lambda a: a,
        phi=phi)
    with pytest.raises(MissingProductError):
        kk.gns_from_pd_function(sample)


def test_semigroup_sample_tables():
    sample = kk.InvolutiveSemigroupSample(
        elements=(np.array([0.5]), np.array([0.25])),
        product=lambda a, b: a * b,
        star=lambda a: a,
        phi=lambda u: float(u[0]))
    table = sample.product_table()
    assert table[0][0] == 1          # 0.5 * 0.5 = 0.25 is the second element
    assert table[0][1] is None       # 0.5 * 0.25 leaves the sample
    assert sample.star_defect() == 0.0
