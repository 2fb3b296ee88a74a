# -*- coding: utf-8 -*-
"""measurements.py

The fixed 34-slot anthropometric measurement vector, its grouping into the 16 report categories a-p, the slice of
slots that describes each body part, and CSV storage.

Slot table (all millimeters):

    index  slot                         source
    0      head_circumference           head, stage-2 section
    1      neck_circumference           neck, stage-2 section
    2      chest_circumference          upper-torso, stage-2 section
    3      waist_circumference          lower-torso, stage-2 section
    4      pelvis_circumference         pelvis, stage-2 section
    5-6    bicep_circumference_{l,r}    upper-arm, stage-2 section
    7-8    forearm_circumference_{l,r}  lower-arm, stage-2 section
    9-10   wrist_circumference_{l,r}    lower-arm/hand interface
    11-12  hand_circumference_{l,r}     hand, stage-2 section
    13-14  thigh_circumference_{l,r}    upper-leg, stage-2 section
    15-16  calf_circumference_{l,r}     lower-leg, stage-2 section
    17-18  ankle_circumference_{l,r}    lower-leg/foot interface
    19-20  foot_circumference_{l,r}     foot, stage-2 section
    21     shoulder_crotch_length       upper-torso + lower-torso + pelvis lengths
    22-23  arm_length_{l,r}             upper-arm + lower-arm + hand lengths
    24-25  inside_leg_length_{l,r}      upper-leg + lower-leg + foot lengths
    26     overall_height               y-extent of the body
    27     shoulder_breadth             distance between the upper-arm interface centers
    28     head_length                  head length
    29     neck_length                  neck length
    30-31  hand_length_{l,r}            hand length
    32-33  foot_length_{l,r}            foot length

Part slices. Each part is driven by its own circumference and length slot plus the interface girths the vector
carries. Only wrists and ankles have interface slots, so limb rows end with them. The three torso parts have no own
length slot and no interface girths: all of them use shoulder_crotch_length, their summed length, as the length entry.
The upper torso adds shoulder_breadth. Torso and pelvis interface girths (neck base, shoulders, hips, waist seams) are
measured by the tailor but not kept in the vector.

    part          slots
    head          head_circumference, head_length
    neck          neck_circumference, neck_length
    upper-torso   chest_circumference, shoulder_crotch_length, shoulder_breadth
    lower-torso   waist_circumference, shoulder_crotch_length
    pelvis        pelvis_circumference, shoulder_crotch_length
    upper-arm     bicep_circumference, arm_length
    lower-arm     forearm_circumference, arm_length, wrist_circumference
    hand          hand_circumference, hand_length, wrist_circumference
    upper-leg     thigh_circumference, inside_leg_length
    lower-leg     calf_circumference, inside_leg_length, ankle_circumference
    foot          foot_circumference, foot_length, ankle_circumference

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import csv
import pathlib
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import MeasurementError
from .segmentation import PartLabel


def _sides(name: str) -> List[str]:
    return ['{}_l'.format(name), '{}_r'.format(name)]


SLOTS = (['head_circumference', 'neck_circumference', 'chest_circumference', 'waist_circumference',
          'pelvis_circumference']
         + _sides('bicep_circumference') + _sides('forearm_circumference') + _sides('wrist_circumference')
         + _sides('hand_circumference') + _sides('thigh_circumference') + _sides('calf_circumference')
         + _sides('ankle_circumference') + _sides('foot_circumference')
         + ['shoulder_crotch_length'] + _sides('arm_length') + _sides('inside_leg_length')
         + ['overall_height', 'shoulder_breadth', 'head_length', 'neck_length']
         + _sides('hand_length') + _sides('foot_length'))

SLOT_INDEX = {name: i for i, name in enumerate(SLOTS)}

CIRCUMFERENCE_SLOTS = [name for name in SLOTS if 'circumference' in name]

# Report categories, label to (title, slots).
CATEGORIES = [
    ('a', 'Head circumference', ['head_circumference']),
    ('b', 'Neck circumference', ['neck_circumference']),
    ('c', 'Shoulder to crotch length', ['shoulder_crotch_length']),
    ('d', 'Chest circumference', ['chest_circumference']),
    ('e', 'Waist circumference', ['waist_circumference']),
    ('f', 'Pelvis circumference', ['pelvis_circumference']),
    ('g', 'Wrist circumference', _sides('wrist_circumference')),
    ('h', 'Bicep circumference', _sides('bicep_circumference')),
    ('i', 'Forearm circumference', _sides('forearm_circumference')),
    ('j', 'Arm length', _sides('arm_length')),
    ('k', 'Inside leg length', _sides('inside_leg_length')),
    ('l', 'Thigh circumference', _sides('thigh_circumference')),
    ('m', 'Calf circumference', _sides('calf_circumference')),
    ('n', 'Ankle circumference', _sides('ankle_circumference')),
    ('o', 'Overall height', ['overall_height']),
    ('p', 'Shoulder breadth', ['shoulder_breadth']),
]


def _limb(side: str, names: Iterable[str]) -> List[str]:
    return ['{}_{}'.format(name, side) for name in names]


# Slots describing each part, the measurement row of the part in the semantic map.
PART_SLOTS = {
    PartLabel.HEAD: ['head_circumference', 'head_length'],
    PartLabel.NECK: ['neck_circumference', 'neck_length'],
    PartLabel.UPPER_TORSO: ['chest_circumference', 'shoulder_crotch_length', 'shoulder_breadth'],
    PartLabel.LOWER_TORSO: ['waist_circumference', 'shoulder_crotch_length'],
    PartLabel.PELVIS: ['pelvis_circumference', 'shoulder_crotch_length'],
}
for _side, _name in (('l', 'left'), ('r', 'right')):
    PART_SLOTS[PartLabel('{}-upper-arm'.format(_name))] = _limb(_side, ['bicep_circumference', 'arm_length'])
    PART_SLOTS[PartLabel('{}-lower-arm'.format(_name))] = _limb(_side, ['forearm_circumference', 'arm_length',
                                                                        'wrist_circumference'])
    PART_SLOTS[PartLabel('{}-hand'.format(_name))] = _limb(_side, ['hand_circumference', 'hand_length',
                                                                   'wrist_circumference'])
    PART_SLOTS[PartLabel('{}-upper-leg'.format(_name))] = _limb(_side, ['thigh_circumference', 'inside_leg_length'])
    PART_SLOTS[PartLabel('{}-lower-leg'.format(_name))] = _limb(_side, ['calf_circumference', 'inside_leg_length',
                                                                        'ankle_circumference'])
    PART_SLOTS[PartLabel('{}-foot'.format(_name))] = _limb(_side, ['foot_circumference', 'foot_length',
                                                                   'ankle_circumference'])


class MeasurementVector(object):
    """The 34 measurements of one body, in slot order. Missing slots are NaN."""
    def __init__(self, values: Union[Sequence[float], np.ndarray, Mapping[str, float]]) -> None:
        if isinstance(values, Mapping):
            unknown = set(values) - set(SLOTS)
            if unknown:
                raise MeasurementError('unknown measurement slots: {}'.format(', '.join(sorted(unknown))))
            array = np.array([values.get(name, np.nan) for name in SLOTS], dtype=np.float64)
        else:
            array = np.array(values, dtype=np.float64).reshape(-1)
        if array.shape != (len(SLOTS),):
            raise MeasurementError('a measurement vector has {} entries, got {}'.format(len(SLOTS), array.shape[0]))
        array.setflags(write=False)
        self.__values = array

    @property
    def values(self) -> np.ndarray:
        return self.__values

    def __getitem__(self, name: str) -> float:
        return float(self.__values[slot_index(name)])

    def __len__(self) -> int:
        return len(SLOTS)

    def missing(self) -> List[str]:
        return [name for name, value in zip(SLOTS, self.__values) if not np.isfinite(value)]

    def complete(self) -> bool:
        return len(self.missing()) == 0

    def part_slice(self, label: PartLabel) -> np.ndarray:
        names = PART_SLOTS[label]
        values = np.array([self[name] for name in names])
        if not np.all(np.isfinite(values)):
            raise MeasurementError('measurements for {} are missing slots {}'.format(
                label.value, [n for n, v in zip(names, values) if not np.isfinite(v)]))
        return values

    def with_deltas(self, deltas: Mapping[str, float]) -> 'MeasurementVector':
        values = self.__values.copy()
        for name, delta in deltas.items():
            values[slot_index(name)] += delta
        return MeasurementVector(values)

    def scaled(self, factor: float) -> 'MeasurementVector':
        return MeasurementVector(self.__values * factor)

    def to_dict(self) -> Dict[str, float]:
        return {name: float(value) for name, value in zip(SLOTS, self.__values)}

    def category_values(self) -> List[Tuple[str, str, float]]:
        """Returns (label, title, mean of the category's slots) for the categories a-p."""
        return [(label, title, float(np.mean([self[name] for name in names]))) for label, title, names in CATEGORIES]


def slot_index(name: str) -> int:
    if name not in SLOT_INDEX:
        raise MeasurementError('unknown measurement slot {!r}'.format(name))
    return SLOT_INDEX[name]


def write_csv(path: Union[str, pathlib.Path], rows: Sequence[MeasurementVector],
              names: Optional[Sequence[str]] = None) -> None:
    """Writes measurement vectors, one row per subject, 2 decimals.

    Args:
        path: Destination.
        rows: The vectors.
        names: Optional subject names, written as a leading 'subject' column."""
    with open(str(path), 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow((['subject'] if names is not None else []) + list(SLOTS))
        for i, row in enumerate(rows):
            cells = ['{:.2f}'.format(value) for value in row.values]
            writer.writerow(([names[i]] if names is not None else []) + cells)


def read_csv(path: Union[str, pathlib.Path]) -> Tuple[List[Optional[str]], List[MeasurementVector]]:
    """Reads a measurement CSV written by write_csv.

    Returns:
        Subject names (None when the file has no subject column) and vectors."""
    try:
        with open(str(path), 'r', newline='') as f:
            reader = csv.reader(f)
            header = next(reader)
            body = list(reader)
    except (OSError, StopIteration) as e:
        raise MeasurementError('cannot read measurement table {}: {!r}'.format(path, e))
    has_names = len(header) > 0 and header[0] == 'subject'
    columns = header[1:] if has_names else header
    if list(columns) != list(SLOTS):
        raise MeasurementError('{} does not carry the 34 measurement columns in slot order'.format(path))
    names = []  # type: List[Optional[str]]
    vectors = []
    for row in body:
        if not row:
            continue
        names.append(row[0] if has_names else None)
        cells = row[1:] if has_names else row
        try:
            vectors.append(MeasurementVector([float(cell) if cell != '' else np.nan for cell in cells]))
        except ValueError:
            raise MeasurementError('{} has a malformed row'.format(path))
    return names, vectors


def parse_deltas(text: str) -> Dict[str, float]:
    """Parses 'slot=+30,other=-5' into a delta mapping."""
    deltas = {}
    for item in filter(None, (part.strip() for part in text.split(','))):
        if '=' not in item:
            raise MeasurementError('delta {!r} is not of the form slot=value'.format(item))
        name, value = item.split('=', 1)
        slot_index(name.strip())
        try:
            deltas[name.strip()] = float(value)
        except ValueError:
            raise MeasurementError('delta {!r} has a non-numeric value'.format(item))
    return deltas
