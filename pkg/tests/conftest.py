import numpy as np
import pytest

from suplandweber.linops import ConvolutionOperator1D, DenseMatrixOperator
from suplandweber.problems import gaussian_kernel


def desk_operators():
    """Small operator zoo shared by adjoint/norm/purity property tests."""
    rng = np.random.default_rng(7)
    return [
        DenseMatrixOperator(np.diag([2.0, 1.0])),
        DenseMatrixOperator(np.diag([3.0, 1.0, 0.5])),
        DenseMatrixOperator([[1.0, 2.0]]),
        DenseMatrixOperator(rng.standard_normal((20, 30))),
        DenseMatrixOperator(rng.standard_normal((30, 20))),
        ConvolutionOperator1D(5, np.array([1.0, 2.0, 1.0]) / 4.0),
        ConvolutionOperator1D(33, gaussian_kernel(5)),
        ConvolutionOperator1D(16, np.array([0.0, 1.0, 0.0])),
    ]


@pytest.fixture(scope="session")
def operators():
    return desk_operators()
