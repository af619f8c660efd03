import numpy as np
import pytest

from sseleak import _kernels
from sseleak._kernels import _pairwise_py


@pytest.fixture
def restore_backend():
    before = _kernels.active_backend()
    yield
    _kernels.set_backend(before)


def test_python_backend_always_available():
    assert "python" in _kernels.available_backends()


def test_pairwise_l2_matches_direct(rng):
    a = rng.random((13, 7))
    b = rng.random((9, 7))
    direct = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1))
    assert np.allclose(_pairwise_py.pairwise_l2(a.copy(), b.copy()), direct)


def test_pairwise_vf_matches_direct(rng):
    va, fa = rng.random(6), rng.random(6)
    vb, fb = rng.random(11), rng.random(11)
    direct = 0.3 * np.abs(va[:, None] - vb[None, :]) \
        + 0.7 * np.abs(fa[:, None] - fb[None, :])
    assert np.allclose(_pairwise_py.pairwise_vf(va, fa, vb, fb, 0.3), direct)


@pytest.mark.skipif("cython" not in _kernels.available_backends(),
                    reason="compiled kernels not built")
class TestBackendParity:
    def test_l2_agreement(self, rng, restore_backend):
        a = rng.random((40, 25))
        b = rng.random((30, 25))
        _kernels.set_backend("python")
        py = _kernels.pairwise_l2(a, b)
        _kernels.set_backend("cython")
        cy = _kernels.pairwise_l2(a, b)
        assert np.allclose(py, cy, atol=1e-12)

    def test_vf_agreement_is_exact(self, rng, restore_backend):
        va, fa = rng.random(50), rng.random(50)
        vb, fb = rng.random(70), rng.random(70)
        _kernels.set_backend("python")
        py = _kernels.pairwise_vf(va, fa, vb, fb, 0.3)
        _kernels.set_backend("cython")
        cy = _kernels.pairwise_vf(va, fa, vb, fb, 0.3)
        # identical operation order: bitwise equality expected
        assert np.array_equal(py, cy)

    def test_attack_output_agrees_across_backends(self, rng, restore_backend):
        from conftest import make_universe, random_observation
        from sseleak.attack import AttackParams, jigsaw_attack
        from sseleak.knowledge import SimilarKnowledge

        obs = random_observation(rng, 20, n_docs=60)
        kn = SimilarKnowledge(universe=make_universe(20),
                              volumes=obs.volumes.copy(),
                              frequencies=obs.frequencies.copy(),
                              cooccurrence=obs.cooccurrence.copy(), n_docs=60)
        params = AttackParams(base_rec=8, conf_rec=6, ref_speed=4)
        _kernels.set_backend("python")
        py = jigsaw_attack(obs, kn, params)
        _kernels.set_backend("cython")
        cy = jigsaw_attack(obs, kn, params)
        assert py.as_dict() == cy.as_dict()


def test_set_backend_rejects_unknown():
    with pytest.raises(ValueError, match="not available"):
        _kernels.set_backend("fortran")
