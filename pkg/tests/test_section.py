# -*- coding: utf-8 -*-
"""test_section.py

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from conftest import loft
from ffg_body.errors import InvariantError, MeasurementError, OpenSectionError, SectionError
from ffg_body.ifs3 import TriMesh
from ffg_body.plane3 import CuttingPlane, orthonormal_frame
from ffg_body.section import Sectioner, cross_section, loop_length, save_png, save_svg

POLYGON = 2.0 * 64 * 50.0 * np.sin(np.pi / 64)


def test_plane_normalizes():
    plane = CuttingPlane([0, 0, 0], [0, 0, 2])
    np.testing.assert_allclose(plane.normal, [0, 0, 1])
    np.testing.assert_allclose(plane.distance([[1, 2, 3]]), [3.0])
    assert plane.flipped().distance([[0, 0, 1]])[0] == -1.0
    np.testing.assert_allclose(plane.moved(4.0).point, [0, 0, 4])


@pytest.mark.parametrize('normal', [[0, 0, 0], [np.nan, 0, 1]])
def test_plane_rejects_bad_normal(normal):
    with pytest.raises(InvariantError):
        CuttingPlane([0, 0, 0], normal)


def test_plane_fit():
    rng = np.random.default_rng(0)
    points = np.column_stack([rng.normal(size=50), rng.normal(size=50), np.full(50, 7.0)])
    plane = CuttingPlane.fit(points)
    assert abs(abs(plane.normal[2]) - 1.0) < 1e-9
    assert plane.coplanar(points)


def test_plane_fit_collinear():
    with pytest.raises(MeasurementError):
        CuttingPlane.fit([[0, 0, 0], [1, 1, 1], [2, 2, 2], [3, 3, 3]])
    with pytest.raises(MeasurementError):
        CuttingPlane.fit([[0, 0, 0], [1, 0, 0]])


def test_orthonormal_frame():
    axis = np.array([0.3, -0.5, 0.8])
    u, v = orthonormal_frame(axis)
    frame = np.stack([u, v, axis / np.linalg.norm(axis)])
    np.testing.assert_allclose(frame @ frame.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(frame) > 0.0


@pytest.mark.parametrize('height', [100.0, 110.0, 37.5])
def test_cylinder_perimeter(cylinder, height):
    section = cross_section(cylinder, CuttingPlane([0, height, 0], [0, 1, 0]))
    assert len(section.loops) == 1
    assert abs(section.perimeter - POLYGON) < 1e-6
    assert section.plane.coplanar(section.loop, 1e-9)


def test_sectioner_matches_section(cylinder):
    sectioner = Sectioner(cylinder)
    for height in (20.0, 90.0, 160.0):
        plane = CuttingPlane([0, height, 0], [0.1, 1, 0.05])
        assert abs(sectioner.perimeter(plane) - sectioner.section(plane).perimeter) < 1e-9


def test_plane_misses_mesh(cylinder):
    with pytest.raises(SectionError):
        cross_section(cylinder, CuttingPlane([0, 1000, 0], [0, 1, 0]))


def test_open_section():
    vertices, faces, _ = loft((50.0, 50.0), 200.0, n=32, caps=False)
    with pytest.raises(OpenSectionError) as info:
        cross_section(TriMesh(vertices, faces), CuttingPlane([0, 100, 0], [1, 0, 0]))
    assert len(info.value.chain) > 0


def test_nearest_loop_is_selected():
    lower, faces, _ = loft((30.0, 30.0), 100.0, n=32)
    upper = lower + [200.0, 0.0, 0.0]
    mesh = TriMesh(np.vstack([lower, upper]), np.vstack([faces, faces + len(lower)]))
    section = cross_section(mesh, CuttingPlane([190, 50, 0], [0, 1, 0]))
    assert len(section.loops) == 2
    np.testing.assert_allclose(section.loop.mean(axis=0), [200.0, 50.0, 0.0], atol=1e-6)


def test_rigid_invariance(elliptic_cylinder):
    plane = CuttingPlane([0, 300, 0], [0.2, 1, -0.1])
    before = cross_section(elliptic_cylinder, plane).perimeter
    rotation = Rotation.from_euler('xyz', [20, -35, 50], degrees=True).as_matrix()
    translation = np.array([120.0, -40.0, 7.0])
    after = cross_section(elliptic_cylinder.transformed(rotation, translation),
                          plane.transformed(rotation, translation)).perimeter
    assert abs(before - after) < 1e-9


def test_loop_length_closes():
    square = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)
    assert loop_length(square) == 4.0


def test_previews(tmp_path, cylinder):
    section = cross_section(cylinder, CuttingPlane([0, 100, 0], [0, 1, 0]))
    svg = tmp_path / 'cut.svg'
    png = tmp_path / 'cut.png'
    save_svg(section, svg)
    save_png(section, png)
    assert '<polygon' in svg.read_text()
    assert png.stat().st_size > 0
