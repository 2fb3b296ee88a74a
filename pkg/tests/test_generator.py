# -*- coding: utf-8 -*-
"""test_generator.py

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import numpy as np
import pytest

from ffg_body.errors import HumanoidError
from ffg_body.generator import Generator, HumanoidParams, PartProfile, generate_humanoid, is_watertight, \
    sample_population
from ffg_body.ifs3 import validate
from ffg_body.measurements import CIRCUMFERENCE_SLOTS, SLOTS
from ffg_body.segmentation import PartLabel
from ffg_body.tailor import measure_body


def test_profile_interpolates():
    profile = PartProfile(length=100.0, start=(10.0, 20.0), mid=(30.0, 25.0), end=(15.0, 10.0))
    assert profile.radii(0.0) == pytest.approx((10.0, 20.0))
    assert profile.radii(0.5) == pytest.approx((30.0, 25.0))
    assert profile.radii(1.0) == pytest.approx((15.0, 10.0))
    scaled = profile.scaled(length=2.0, girth=0.5)
    assert scaled.length == 200.0
    assert scaled.mid == pytest.approx((15.0, 12.5))


def test_profile_rejects_bad_radii():
    with pytest.raises(ValueError):
        PartProfile(length=100.0, start=(0.0, 20.0), mid=(30.0, 25.0), end=(15.0, 10.0))


def test_default_humanoid(humanoid):
    mesh, seg, truth = humanoid
    report = validate(mesh)
    assert report.watertight
    assert report.degenerate_faces == []
    assert is_watertight(mesh)
    assert set(seg.labels) == set(PartLabel)
    assert len(seg.interfaces) == 16
    assert truth.complete()
    assert np.all(truth.values > 0.0)


def test_humanoid_pose(humanoid):
    mesh, seg, truth = humanoid
    extent = mesh.extent()
    assert extent[1] > 2.0 * extent[2]
    assert truth['overall_height'] == pytest.approx(extent[1])
    left = mesh.vertices[seg.parts[PartLabel.LEFT_HAND]].mean(axis=0)
    right = mesh.vertices[seg.parts[PartLabel.RIGHT_HAND]].mean(axis=0)
    assert left[0] > 0.0 > right[0]
    head = mesh.vertices[seg.parts[PartLabel.HEAD]].mean(axis=0)
    foot = mesh.vertices[seg.parts[PartLabel.LEFT_FOOT]].mean(axis=0)
    assert head[1] > foot[1]


def test_truth_is_symmetric(humanoid):
    _, _, truth = humanoid
    for name in SLOTS:
        if name.endswith('_l'):
            assert truth[name] == pytest.approx(truth[name[:-2] + '_r'], rel=1e-9)


def test_truth_is_plausible(humanoid):
    _, _, truth = humanoid
    assert truth['overall_height'] == pytest.approx(1700.0, rel=0.05)
    assert truth['chest_circumference'] > truth['neck_circumference']
    assert truth['thigh_circumference_l'] > truth['calf_circumference_l'] > truth['ankle_circumference_l']
    assert truth['inside_leg_length_l'] > truth['arm_length_l'] * 0.8


def test_shared_topology(population):
    faces = population[0][0].faces
    seg = population[0][1]
    for mesh, body_seg, _ in population:
        np.testing.assert_array_equal(mesh.faces, faces)
        assert body_seg is seg
        assert validate(mesh).watertight
    heights = [truth['overall_height'] for _, _, truth in population]
    assert len(set(np.round(heights, 6))) == len(heights)


def test_population_is_deterministic():
    first = sample_population(seed=7, n=2, spread=0.05)
    second = sample_population(seed=7, n=2, spread=0.05)
    for (a, _, ta), (b, _, tb) in zip(first, second):
        np.testing.assert_array_equal(a.vertices, b.vertices)
        np.testing.assert_array_equal(ta.values, tb.values)


def test_zero_spread_repeats_base():
    bodies = Generator.population(seed=1, n=2, spread=0.0)
    np.testing.assert_allclose(bodies[0].mesh.vertices, bodies[1].mesh.vertices)


@pytest.mark.parametrize('update', [
    {'hip_offset': 40.0},
    {'neck_split': 0.1},
    {'shoulder_junction': 400.0},
])
def test_invalid_parameters(update):
    with pytest.raises(HumanoidError):
        generate_humanoid(HumanoidParams().model_copy(update=update))


def test_invalid_population():
    with pytest.raises(HumanoidError):
        Generator.population(seed=0, n=0, spread=0.1)
    with pytest.raises(HumanoidError):
        Generator.population(seed=0, n=1, spread=-0.1)


def test_missing_profile():
    parts = HumanoidParams().parts
    del parts['head']
    with pytest.raises(ValueError):
        HumanoidParams(parts=parts)


def _check_oracle(mesh, seg, truth):
    measured = measure_body(mesh, seg)
    for name in CIRCUMFERENCE_SLOTS:
        assert measured[name] == pytest.approx(truth[name], rel=0.01), name
    for name in ('wrist_circumference_l', 'ankle_circumference_r'):
        assert measured[name] == pytest.approx(truth[name], rel=1e-3), name
    assert measured['overall_height'] == pytest.approx(truth['overall_height'], abs=1e-6)
    assert measured['shoulder_breadth'] == pytest.approx(truth['shoulder_breadth'], abs=1e-6)
    for name in ('arm_length_l', 'inside_leg_length_r', 'head_length', 'neck_length', 'foot_length_l',
                 'hand_length_r'):
        assert measured[name] == pytest.approx(truth[name], abs=0.5), name
    assert measured['shoulder_crotch_length'] == pytest.approx(truth['shoulder_crotch_length'], rel=0.05)


@pytest.mark.slow
def test_tailor_matches_ground_truth(humanoid):
    _check_oracle(*humanoid)


@pytest.mark.slow
def test_tailor_matches_ground_truth_across_population(population):
    for mesh, seg, truth in population:
        _check_oracle(mesh, seg, truth)
