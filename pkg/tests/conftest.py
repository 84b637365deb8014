import numpy as np
import pytest

from se23sim._backend import available_backends


@pytest.fixture
def rng():
    return np.random.default_rng(20250810)


def _kernels(name):
    if name == "compiled":
        from se23sim import _core
        return _core
    from se23sim import _purepy
    return _purepy


@pytest.fixture(params=available_backends())
def kernels(request):
    """Kernel module, parametrized over every importable backend."""
    return _kernels(request.param)


def random_algebra(rng, n, rot_scale=0.3, trans_scale=1.0):
    """Batch of algebra vectors with bounded rotation norm."""
    xi = rng.normal(size=(n, 9))
    xi[:, 0:6] *= trans_scale
    xi[:, 6:9] *= rot_scale
    return xi
