# -*- coding: utf-8 -*-
"""test_assembler.py

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from conftest import toy_body
from ffg_body.assembler import RigidTransform, procrustes_align, stitch_body, stitch_deformation
from ffg_body.errors import AssemblyError
from ffg_body.generator import sample_population
from ffg_body.ifs3 import validate
from ffg_body.segmentation import PartLabel, extract_part


def _parts(mesh, seg):
    return [extract_part(mesh, seg, label) for label in seg.labels]


@pytest.mark.parametrize('seed', range(5))
def test_procrustes_recovers_motion(seed):
    rng = np.random.default_rng(seed)
    points = rng.normal(scale=40.0, size=(20, 3))
    rotation = Rotation.from_rotvec(rng.uniform(-np.pi, np.pi, size=3) / np.sqrt(3.0)).as_matrix()
    translation = rng.normal(scale=100.0, size=3)
    moved = points @ rotation.T + translation
    transform = procrustes_align(points, moved)
    np.testing.assert_allclose(transform.rotation, rotation, atol=1e-9)
    np.testing.assert_allclose(transform.apply(points), moved, atol=1e-8)
    assert transform.residual < 1e-8
    assert not transform.degenerate


def test_procrustes_many_motions():
    rng = np.random.default_rng(11)
    rotations = Rotation.random(1000, random_state=11).as_matrix()
    for rotation in rotations:
        points = rng.normal(scale=50.0, size=(int(rng.integers(3, 13)), 3))
        moved = points @ rotation.T + rng.normal(scale=200.0, size=3)
        transform = procrustes_align(points, moved)
        assert np.abs(transform.apply(points) - moved).max() < 1e-9


def test_procrustes_rejects_reflection():
    rng = np.random.default_rng(4)
    points = rng.normal(size=(10, 3))
    mirrored = points * [-1.0, 1.0, 1.0]
    transform = procrustes_align(points, mirrored)
    assert np.linalg.det(transform.rotation) == pytest.approx(1.0)
    assert transform.residual > 0.0


def test_procrustes_collinear_is_flagged():
    line = np.outer(np.arange(5.0), [1.0, 2.0, 3.0])
    transform = procrustes_align(line, line + 10.0)
    assert transform.degenerate
    np.testing.assert_allclose(transform.apply(line), line + 10.0, atol=1e-9)


@pytest.mark.parametrize('child, parent', [(np.zeros((2, 3)), np.zeros((2, 3))), (np.zeros((4, 3)), np.zeros((5, 3)))])
def test_procrustes_bad_input(child, parent):
    with pytest.raises(AssemblyError):
        procrustes_align(child, parent)


def test_identity_transform():
    points = np.arange(12.0).reshape(4, 3)
    np.testing.assert_array_equal(RigidTransform.identity().apply(points), points)


def test_stitch_reproduces_toy(toy):
    mesh, seg = toy
    stitched, reports = stitch_body(_parts(mesh, seg), seg)
    np.testing.assert_allclose(stitched.vertices, mesh.vertices, atol=1e-6)
    assert {tuple(sorted(face)) for face in stitched.faces.tolist()} == \
        {tuple(sorted(face)) for face in mesh.faces.tolist()}
    assert len(reports) == 1
    assert reports[0].max_residual_gap < 1e-6


def test_stitch_reproduces_humanoid(humanoid):
    mesh, seg, _ = humanoid
    stitched, reports = stitch_body(_parts(mesh, seg), seg)
    np.testing.assert_allclose(stitched.vertices, mesh.vertices, atol=1e-6)
    assert len(reports) == 16


def test_stitch_closes_gap(toy):
    mesh, seg = toy
    parts = _parts(mesh, seg)
    torso = next(part for part in parts if part.label == PartLabel.LOWER_TORSO)
    widened = torso.with_vertices(torso.vertices * [1.1, 1.0, 1.1])
    parts = [widened if part.label == PartLabel.LOWER_TORSO else part for part in parts]
    stitched, reports = stitch_body(parts, seg)
    assert validate(stitched).watertight
    ring = stitched.vertices[seg.interface(PartLabel.PELVIS, PartLabel.LOWER_TORSO)]
    radii = np.linalg.norm((ring - ring.mean(axis=0))[:, [0, 2]], axis=1)
    np.testing.assert_allclose(radii, 52.5, atol=1e-6)
    assert reports[0].child_side.direction == 1
    assert reports[0].parent_side.direction == -1
    assert reports[0].max_residual_gap == pytest.approx(2.5, abs=1e-6)


def test_stitch_is_local(toy):
    mesh, seg = toy
    parts = _parts(mesh, seg)
    torso = next(part for part in parts if part.label == PartLabel.LOWER_TORSO)
    pole = int(np.argmax(torso.vertices[:, 1]))
    moved = torso.vertices.copy()
    moved[pole, 1] += 30.0
    parts = [torso.with_vertices(moved) if part.label == PartLabel.LOWER_TORSO else part for part in parts]
    stitched, _ = stitch_body(parts, seg)
    pelvis = seg.parts[PartLabel.PELVIS]
    np.testing.assert_allclose(stitched.vertices[pelvis], mesh.vertices[pelvis], atol=1e-6)
    assert stitched.vertices[torso.global_indices[pole], 1] == pytest.approx(mesh.vertices[-1, 1] + 30.0)


def test_deformation_band(toy):
    mesh, seg = toy
    part = extract_part(mesh, seg, PartLabel.LOWER_TORSO)
    ring = part.interface_points(PartLabel.PELVIS)
    target = ring.copy()
    target[:, [0, 2]] *= 0.9
    vertices, record = stitch_deformation(part, PartLabel.PELVIS, target, ring, epsilon=0.5)
    assert record.moved > 0
    assert record.direction == 1
    np.testing.assert_array_equal(vertices[part.interfaces[PartLabel.PELVIS]], ring)
    far = int(np.argmax(part.vertices[:, 1]))
    np.testing.assert_array_equal(vertices[far], part.vertices[far])
    with pytest.raises(AssemblyError):
        stitch_deformation(part, PartLabel.PELVIS, target, ring, epsilon=0.0)


def test_missing_part(toy):
    mesh, seg = toy
    with pytest.raises(AssemblyError):
        stitch_body(_parts(mesh, seg)[:1], seg)


def _widened_toy(toy):
    mesh, seg = toy
    parts = _parts(mesh, seg)
    torso = next(part for part in parts if part.label == PartLabel.LOWER_TORSO)
    widened = torso.with_vertices(torso.vertices * [1.1, 1.0, 1.1])
    return [widened if part.label == PartLabel.LOWER_TORSO else part for part in parts], seg


def test_stitch_commutes_with_rigid_motion(toy):
    parts, seg = _widened_toy(toy)
    rotation = Rotation.from_euler('xyz', [35, -20, 60], degrees=True).as_matrix()
    translation = np.array([250.0, -80.0, 40.0])
    moved = [part.with_vertices(part.vertices @ rotation.T, center=rotation @ part.center + translation)
             for part in parts]
    stitched, _ = stitch_body(parts, seg)
    stitched_moved, _ = stitch_body(moved, seg)
    np.testing.assert_allclose(stitched_moved.vertices, stitched.vertices @ rotation.T + translation, atol=1e-6)


def test_stitch_undoes_child_rotation(toy):
    parts, seg = _widened_toy(toy)
    torso = next(part for part in parts if part.label == PartLabel.LOWER_TORSO)
    pivot = torso.interface_points(PartLabel.PELVIS).mean(axis=0)
    spin = Rotation.from_rotvec(np.radians(30.0) * np.array([0.0, 1.0, 0.0])).as_matrix()
    spun = torso.with_vertices((torso.vertices - pivot) @ spin.T + pivot)
    rotated = [spun if part.label == PartLabel.LOWER_TORSO else part for part in parts]
    expected, _ = stitch_body(parts, seg)
    stitched, reports = stitch_body(rotated, seg)
    np.testing.assert_allclose(stitched.vertices, expected.vertices, atol=1e-6)
    assert reports[0].max_residual_gap == pytest.approx(2.5, abs=1e-6)


def _band_oracle(vertices, protected, aligned, mean_distance, direction, epsilon):
    """Per-vertex displacement written out one vertex at a time."""
    origin = vertices.mean(axis=0)
    center = aligned.mean(axis=0)
    length = np.linalg.norm(center - origin)
    unit = (center - origin) / length
    expected = vertices.copy()
    for k, v in enumerate(vertices):
        if k in protected:
            continue
        t = float((v - origin) @ unit) / length
        foot = origin + t * length * unit
        if t < 0.0 or abs(1.0 - t) > epsilon:
            continue
        toward = foot - v
        expected[k] = v + direction * toward / np.linalg.norm(toward) * abs(1.0 - t) * mean_distance
    return expected


def test_deformation_band_magnitudes():
    mesh, seg = toy_body(rings=33)
    part = extract_part(mesh, seg, PartLabel.LOWER_TORSO)
    ring = part.interface_points(PartLabel.PELVIS)
    center = ring.mean(axis=0)
    radial = (ring - center) * [1.0, 0.0, 1.0]
    target = ring + radial / np.linalg.norm(radial, axis=1)[:, None]
    epsilon = 0.3
    vertices, record = stitch_deformation(part, PartLabel.PELVIS, target, ring, epsilon=epsilon)
    assert record.mean_distance == pytest.approx(1.0, abs=1e-12)
    assert record.direction == -1
    assert record.moved > 0
    protected = set(int(i) for i in part.interfaces[PartLabel.PELVIS])
    expected = _band_oracle(part.vertices, protected, ring, 1.0, -1, epsilon)
    np.testing.assert_allclose(vertices, expected, atol=1e-9)
    shift = np.linalg.norm(vertices - part.vertices, axis=1)
    assert shift.max() <= epsilon + 1e-12
    unchanged = shift == 0.0
    np.testing.assert_array_equal(vertices[unchanged], part.vertices[unchanged])


def test_deformation_leaves_the_rest_bit_identical():
    mesh, seg = toy_body(rings=33)
    part = extract_part(mesh, seg, PartLabel.LOWER_TORSO)
    ring = part.interface_points(PartLabel.PELVIS)
    target = ring.copy()
    target[:, [0, 2]] *= 0.97
    epsilon = 0.1
    vertices, _ = stitch_deformation(part, PartLabel.PELVIS, target, ring, epsilon=epsilon)
    origin = part.vertices.mean(axis=0)
    segment = ring.mean(axis=0) - origin
    t = (part.vertices - origin) @ segment / segment.dot(segment)
    outside = (t < 0.0) | (np.abs(1.0 - t) > epsilon)
    assert np.any(outside)
    assert np.array_equal(vertices[outside], part.vertices[outside])


@pytest.mark.slow
def test_reassembly_of_a_population():
    for mesh, seg, _ in sample_population(seed=21, n=50, spread=0.05):
        stitched, reports = stitch_body(_parts(mesh, seg), seg)
        assert np.abs(stitched.vertices - mesh.vertices).max() < 1e-6
        assert max(report.max_residual_gap for report in reports) < 1e-6
