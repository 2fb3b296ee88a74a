# -*- coding: utf-8 -*-
"""test_measurements.py

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import numpy as np
import pytest

from ffg_body.errors import MeasurementError
from ffg_body.measurements import CATEGORIES, PART_SLOTS, SLOTS, MeasurementVector, parse_deltas, read_csv, \
    slot_index, write_csv
from ffg_body.segmentation import PartLabel


def test_slot_table():
    assert len(SLOTS) == 34
    assert len(set(SLOTS)) == 34
    assert slot_index('head_circumference') == 0
    assert [label for label, _, _ in CATEGORIES] == list('abcdefghijklmnop')
    assert set(PART_SLOTS) == set(PartLabel)
    used = {name for names in PART_SLOTS.values() for name in names}
    assert used <= set(SLOTS)


def test_vector_from_mapping():
    m = MeasurementVector({'head_circumference': 560.0, 'neck_length': 80.0})
    assert m['head_circumference'] == 560.0
    assert not m.complete()
    assert len(m.missing()) == 32
    with pytest.raises(MeasurementError):
        m.part_slice(PartLabel.NECK)
    with pytest.raises(MeasurementError):
        MeasurementVector({'tail_length': 3.0})
    with pytest.raises(MeasurementError):
        MeasurementVector([1.0, 2.0])


def test_vector_is_read_only():
    m = MeasurementVector(np.arange(1.0, 35.0))
    with pytest.raises(ValueError):
        m.values[0] = 5.0
    edited = m.with_deltas({'chest_circumference': 10.0})
    assert edited['chest_circumference'] == m['chest_circumference'] + 10.0
    assert m.scaled(2.0)['head_circumference'] == 2.0


def test_part_slice_order():
    m = MeasurementVector(np.arange(1.0, 35.0))
    expected = [m[name] for name in PART_SLOTS[PartLabel.LEFT_LOWER_LEG]]
    np.testing.assert_array_equal(m.part_slice(PartLabel.LEFT_LOWER_LEG), expected)


def test_categories_average_sides():
    values = {name: 100.0 for name in SLOTS}
    values['wrist_circumference_l'] = 150.0
    values['wrist_circumference_r'] = 170.0
    rows = {label: value for label, _, value in MeasurementVector(values).category_values()}
    assert rows['g'] == 160.0
    assert rows['a'] == 100.0


def test_csv_round_trip(tmp_path):
    rows = [MeasurementVector(np.linspace(100.0, 1700.0, 34)), MeasurementVector(np.full(34, 321.4))]
    path = tmp_path / 'm.csv'
    write_csv(path, rows, ['a', 'b'])
    names, vectors = read_csv(path)
    assert names == ['a', 'b']
    np.testing.assert_allclose(vectors[0].values, rows[0].values, atol=0.005)
    assert vectors[1]['head_circumference'] == 321.4
    write_csv(path, rows)
    names, _ = read_csv(path)
    assert names == [None, None]


def test_csv_rejects_other_columns(tmp_path):
    path = tmp_path / 'm.csv'
    path.write_text('subject,height\na,1700\n')
    with pytest.raises(MeasurementError):
        read_csv(path)
    with pytest.raises(MeasurementError):
        read_csv(tmp_path / 'absent.csv')


def test_parse_deltas():
    assert parse_deltas('waist_circumference=+30, neck_length=-5') == {'waist_circumference': 30.0,
                                                                       'neck_length': -5.0}
    assert parse_deltas('') == {}
    for bad in ('waist_circumference', 'waist_circumference=wide', 'tail_length=3'):
        with pytest.raises(MeasurementError):
            parse_deltas(bad)


def test_torso_rows_share_the_trunk_length():
    for label in (PartLabel.UPPER_TORSO, PartLabel.LOWER_TORSO, PartLabel.PELVIS):
        assert PART_SLOTS[label][1] == 'shoulder_crotch_length'
        assert not any(name.startswith(('wrist', 'ankle')) for name in PART_SLOTS[label])
    assert PART_SLOTS[PartLabel.UPPER_TORSO][2] == 'shoulder_breadth'
    assert PART_SLOTS[PartLabel.RIGHT_HAND] == ['hand_circumference_r', 'hand_length_r', 'wrist_circumference_r']
