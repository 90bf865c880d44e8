"""Shared oracles: dense matrices built from first principles.

The dense builders below re-derive the Galerkin matrices by direct
quadrature of hat-function products and express the generator and energy
metric as explicit dense block matrices.  Component tests compare the
package's banded/batched linear algebra against these independently
constructed objects.
"""

from __future__ import annotations

import numpy as np
import pytest

from kvwavelab.fem import StateBlock
from kvwavelab.model import ModelParams


def tridiag(diag: np.ndarray, off: np.ndarray) -> np.ndarray:
    """Dense symmetric tridiagonal matrix from its diagonals."""
    m = len(diag)
    out = np.diag(diag).astype(float)
    if m > 1:
        out += np.diag(off, 1) + np.diag(off, -1)
    return out


def dense_matrices(N: int, params: ModelParams):
    """Dense (M, K, Ka) for N uniform elements, derived by quadrature.

    Hat function phi_i peaks at node i; on each element the derivatives
    are +-1/h, so stiffness contributions are +-1/h per element and mass
    contributions follow from Int phi^2 = h/3, Int phi_i phi_{i+1} = h/6.
    The damping matrix integrates a(x) exactly over each element (a is
    constant there when the support aligns with nodes).
    """
    h = 2.0 / N
    m = N - 1
    nodes = np.linspace(-1.0, 1.0, N + 1)
    M = np.zeros((m, m))
    K = np.zeros((m, m))
    Ka = np.zeros((m, m))
    x_l, x_r = params.damping_support
    for e in range(N):  # element e spans [nodes[e], nodes[e+1]]
        mid = 0.5 * (nodes[e] + nodes[e + 1])
        a_val = params.d if (x_l < mid < x_r) else 0.0
        # interior indices of the element's two endpoint nodes
        pair = [i for i in (e - 1, e) if 0 <= i < m]
        for i in pair:
            M[i, i] += h / 3.0
            K[i, i] += 1.0 / h
            Ka[i, i] += a_val / h
        if len(pair) == 2:
            i, j = pair
            M[i, j] += h / 6.0
            M[j, i] += h / 6.0
            K[i, j] -= 1.0 / h
            K[j, i] -= 1.0 / h
            Ka[i, j] -= a_val / h
            Ka[j, i] -= a_val / h
    return M, K, Ka


def dense_H(M: np.ndarray, K: np.ndarray, c: float) -> np.ndarray:
    """Dense energy Gram matrix in (u, v, w, z) block order."""
    m = M.shape[0]
    H = np.zeros((4 * m, 4 * m))
    H[0 * m : 1 * m, 0 * m : 1 * m] = K
    H[1 * m : 2 * m, 1 * m : 2 * m] = c * K
    H[2 * m : 3 * m, 2 * m : 3 * m] = M
    H[3 * m : 4 * m, 3 * m : 4 * m] = M
    return H


def dense_generator(M: np.ndarray, K: np.ndarray, Ka: np.ndarray, c: float):
    """Dense generator acting on stacked (u, v, w, z) vectors."""
    m = M.shape[0]
    Minv = np.linalg.inv(M)
    A = np.zeros((4 * m, 4 * m))
    I = np.eye(m)
    A[0 * m : 1 * m, 2 * m : 3 * m] = I
    A[1 * m : 2 * m, 3 * m : 4 * m] = I
    A[2 * m : 3 * m, 0 * m : 1 * m] = -Minv @ K
    A[2 * m : 3 * m, 2 * m : 3 * m] = -Minv @ Ka
    A[2 * m : 3 * m, 3 * m : 4 * m] = -I
    A[3 * m : 4 * m, 1 * m : 2 * m] = -c * Minv @ K
    A[3 * m : 4 * m, 2 * m : 3 * m] = I
    return A


def to_vec(X: StateBlock) -> np.ndarray:
    return np.concatenate([X.u, X.v, X.w, X.z])


def from_vec(vec: np.ndarray, m: int) -> StateBlock:
    return StateBlock(vec[:m], vec[m : 2 * m], vec[2 * m : 3 * m], vec[3 * m :])


@pytest.fixture
def params() -> ModelParams:
    return ModelParams()
