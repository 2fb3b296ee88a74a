# -*- coding: utf-8 -*-
"""conftest.py

Shared mesh builders and fixtures.

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

from typing import Callable, List, Optional, Tuple, Union

import numpy as np
import pytest

from ffg_body.generator import generate_humanoid, sample_population
from ffg_body.ifs3 import TriMesh
from ffg_body.segmentation import PartLabel, PartSegmentation, pair

Radii = Union[Tuple[float, float], Callable[[float], Tuple[float, float]]]


def loft(radii: Radii, length: float, n: int = 64, rings: int = 9, caps: bool = True, bottom: float = 0.0,
         cap_height: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray, List[np.ndarray]]:
    """Stacks elliptical rings along +y, ring m at bottom + length * m / (rings - 1).

    Returns:
        Vertices, faces and the index array of every ring. Poles close both ends when caps is set."""
    profile = radii if callable(radii) else (lambda s: radii)
    theta = 2.0 * np.pi * np.arange(n) / n
    vertices = []
    ring_indices = []
    for m in range(rings):
        s = m / (rings - 1)
        a, b = profile(s)
        ring = np.stack([a * np.cos(theta), np.full(n, bottom + s * length), b * np.sin(theta)], axis=1)
        ring_indices.append(np.arange(m * n, m * n + n))
        vertices.append(ring)
    vertices = np.concatenate(vertices)
    faces = []
    for m in range(rings - 1):
        lower, upper = ring_indices[m], ring_indices[m + 1]
        for k in range(n):
            i0, i1, j0, j1 = lower[k], lower[(k + 1) % n], upper[k], upper[(k + 1) % n]
            faces.append((i0, j1, i1))
            faces.append((i0, j0, j1))
    if caps:
        rise = cap_height if cap_height is not None else 0.5 * min(profile(0.0))
        drop = cap_height if cap_height is not None else 0.5 * min(profile(1.0))
        base = len(vertices)
        vertices = np.vstack([vertices, [0.0, bottom - rise, 0.0], [0.0, bottom + length + drop, 0.0]])
        first, last = ring_indices[0], ring_indices[-1]
        for k in range(n):
            faces.append((first[k], first[(k + 1) % n], base))
            faces.append((last[k], base + 1, last[(k + 1) % n]))
    return vertices, np.array(faces, dtype=np.int64), ring_indices


def tetrahedron() -> TriMesh:
    vertices = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    faces = np.array([[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]])
    return TriMesh(vertices, faces)


def toy_body(radius: float = 50.0, n: int = 32, rings: int = 9) -> Tuple[TriMesh, PartSegmentation]:
    """A capped cylinder split at its middle ring into a pelvis (below) and a lower torso (above)."""
    vertices, faces, ring_indices = loft((radius, radius), 200.0, n=n, rings=rings)
    middle = rings // 2
    below = np.concatenate(ring_indices[:middle + 1] + [np.array([len(vertices) - 2])])
    above = np.concatenate(ring_indices[middle:] + [np.array([len(vertices) - 1])])
    seg = PartSegmentation(len(vertices), {PartLabel.PELVIS: below, PartLabel.LOWER_TORSO: above},
                           {pair(PartLabel.PELVIS, PartLabel.LOWER_TORSO): ring_indices[middle]},
                           {PartLabel.LOWER_TORSO: PartLabel.PELVIS})
    return TriMesh(vertices, faces), seg


@pytest.fixture
def cylinder() -> TriMesh:
    vertices, faces, _ = loft((50.0, 50.0), 200.0, n=64)
    return TriMesh(vertices, faces)


@pytest.fixture
def elliptic_cylinder() -> TriMesh:
    vertices, faces, _ = loft((150.0, 110.0), 600.0, n=64, rings=13)
    return TriMesh(vertices, faces)


@pytest.fixture
def toy() -> Tuple[TriMesh, PartSegmentation]:
    return toy_body()


@pytest.fixture(scope='session')
def humanoid():
    return generate_humanoid()


@pytest.fixture(scope='session')
def population():
    return sample_population(seed=3, n=6, spread=0.03)


@pytest.fixture(scope='session')
def large_population():
    return sample_population(seed=11, n=200, spread=0.05)
