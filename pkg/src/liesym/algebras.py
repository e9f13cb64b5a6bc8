"""Ground-truth Lie algebra bases used as fixtures and comparison targets."""

import numpy as np
from scipy.linalg import logm

ROT2 = np.array([[0.0, -1.0], [1.0, 0.0]])


def so2():
    return ROT2[None].copy()


def so3():
    mats = np.zeros((3, 3, 3))
    # L_x, L_y, L_z as infinitesimal rotations about each axis
    mats[0, 1, 2], mats[0, 2, 1] = -1.0, 1.0
    mats[1, 2, 0], mats[1, 0, 2] = -1.0, 1.0
    mats[2, 0, 1], mats[2, 1, 0] = -1.0, 1.0
    return mats


def so13():
    """Three boosts then three rotations acting on ``(E, px, py, pz)``."""
    mats = np.zeros((6, 4, 4))
    for i in range(3):
        mats[i, 0, i + 1] = mats[i, i + 1, 0] = 1.0
    mats[3:, 1:, 1:] = so3()
    return mats


def su2():
    return np.array([
        [[0, -1], [1, 0]],
        [[1j, 0], [0, -1j]],
        [[0, 1j], [1j, 0]],
    ], dtype=np.complex128)


def minkowski():
    return np.diag([1.0, -1.0, -1.0, -1.0])


def planar_rotation(k):
    """Generator of rotations by ``2*pi/k`` in the xy-plane of R^3."""
    m = np.zeros((1, 3, 3))
    m[0, :2, :2] = (2 * np.pi / k) * ROT2
    return m


def block_rotation(k=8, block=2):
    """``kron(I, [[0,-1],[1,0]])``: the same planar rotation on every pair."""
    return np.kron(np.eye(k // block), ROT2)[None]


def cyclic_permutation_log():
    """Principal log of the permutation matrix sending ``e2 -> e1 -> e3 -> e2``
    on the first three coordinates, zero on the last two.
    """
    p = np.eye(5)
    p[:3, :3] = [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
    return np.real(logm(p))[None]
