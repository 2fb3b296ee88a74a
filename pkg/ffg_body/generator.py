# -*- coding: utf-8 -*-
"""generator.py

Procedural humanoids with analytically known dimensions. Every part is a tube of stacked elliptical rings lofted
between the interface rings it shares with its neighbors; terminal parts are closed by a pole, and the two branching
parts (the pelvis and the upper torso) connect their tube to several child rings through bridged junctions. The body
stands y-up, faces +z, with the arms abducted in an A-pose. The subject's left side is at +x.

License:
    http://www.apache.org/licenses/LICENSE-2.0"""

import functools
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pydantic
from pydantic import BaseModel, ConfigDict, Field

from .config import TailorConfig
from .errors import HumanoidError, MeshError
from .ifs3 import TriMesh, validate
from .measurements import MeasurementVector
from .section import loop_length
from .segmentation import BODY_TREE, PartLabel, PartSegmentation, pair

logger = logging.getLogger(__name__)

Radii = Tuple[float, float]


class PartProfile(BaseModel):
    """Shape of one part's tube.

    Attributes:
        length: Part length, millimeters.
        start: Half-widths (a across, b front to back) of the first ring. Ignored when the part continues its parent's
            ring.
        mid: Half-widths halfway along the tube.
        end: Half-widths of the last ring."""
    model_config = ConfigDict(frozen=True)

    length: float = Field(gt=0.0)
    start: Radii
    mid: Radii
    end: Radii

    @pydantic.field_validator('start', 'mid', 'end')
    @classmethod
    def _positive(cls, value: Radii) -> Radii:
        if value[0] <= 0.0 or value[1] <= 0.0:
            raise ValueError('radii must be positive, got {}'.format(value))
        return value

    def radii(self, s: float) -> Radii:
        """Quadratic interpolation through start, mid and end at s = 0, 0.5, 1."""
        w0 = (1.0 - s) * (1.0 - 2.0 * s)
        w1 = 4.0 * s * (1.0 - s)
        w2 = s * (2.0 * s - 1.0)
        return (w0 * self.start[0] + w1 * self.mid[0] + w2 * self.end[0],
                w0 * self.start[1] + w1 * self.mid[1] + w2 * self.end[1])

    def scaled(self, length: float = 1.0, girth: float = 1.0) -> 'PartProfile':
        return PartProfile(length=self.length * length, start=(self.start[0] * girth, self.start[1] * girth),
                           mid=(self.mid[0] * girth, self.mid[1] * girth),
                           end=(self.end[0] * girth, self.end[1] * girth))


def _default_parts() -> Dict[str, PartProfile]:
    parts = {
        'pelvis': PartProfile(length=180.0, start=(160.0, 110.0), mid=(160.0, 108.0), end=(150.0, 100.0)),
        'lower-torso': PartProfile(length=160.0, start=(150.0, 100.0), mid=(140.0, 95.0), end=(150.0, 105.0)),
        'upper-torso': PartProfile(length=300.0, start=(150.0, 105.0), mid=(150.0, 110.0), end=(140.0, 95.0)),
        'neck': PartProfile(length=60.0, start=(55.0, 55.0), mid=(50.0, 50.0), end=(55.0, 55.0)),
        'head': PartProfile(length=140.0, start=(55.0, 55.0), mid=(65.0, 70.0), end=(75.0, 85.0)),
    }
    for side in ('left', 'right'):
        parts[side + '-upper-arm'] = PartProfile(length=300.0, start=(45.0, 45.0), mid=(42.0, 42.0), end=(38.0, 38.0))
        parts[side + '-lower-arm'] = PartProfile(length=260.0, start=(38.0, 38.0), mid=(35.0, 35.0), end=(28.0, 28.0))
        parts[side + '-hand'] = PartProfile(length=180.0, start=(28.0, 28.0), mid=(38.0, 20.0), end=(30.0, 15.0))
        parts[side + '-upper-leg'] = PartProfile(length=400.0, start=(80.0, 80.0), mid=(75.0, 75.0), end=(55.0, 55.0))
        parts[side + '-lower-leg'] = PartProfile(length=400.0, start=(55.0, 55.0), mid=(52.0, 52.0), end=(38.0, 38.0))
        parts[side + '-foot'] = PartProfile(length=60.0, start=(38.0, 38.0), mid=(36.0, 36.0), end=(34.0, 34.0))
    return parts


class HumanoidParams(BaseModel):
    """Parameters of a synthetic humanoid.

    Attributes:
        height: Overall height. Part lengths are rescaled so the vertical chain from sole to crown matches it.
        radial_segments: Points per ring.
        rings_per_part: Rings per tube, both interface rings included.
        bridge_points: Interior points of each junction bridge.
        arm_abduction_deg: Angle between the arms and the vertical.
        hip_offset: Distance of the leg ring centers from the body's midplane.
        shoulder_gap: Clearance between the top torso ring and the inner edge of an arm ring.
        pelvis_junction: Share of the pelvis length taken by the leg junction.
        shoulder_junction: Height of the neck ring above the top torso ring, millimeters.
        neck_split: Position of the shoulder bridges as a fraction of the top torso ring half-width.
        parts: Profile per part label."""
    model_config = ConfigDict(frozen=True)

    height: float = Field(1700.0, gt=0.0)
    radial_segments: int = Field(64, ge=16)
    rings_per_part: int = Field(12, ge=3)
    bridge_points: int = Field(5, ge=1)
    arm_abduction_deg: float = Field(30.0, gt=0.0, lt=90.0)
    hip_offset: float = Field(85.0, gt=0.0)
    shoulder_gap: float = Field(10.0, gt=0.0)
    pelvis_junction: float = Field(0.2, gt=0.0, lt=0.5)
    shoulder_junction: float = Field(30.0, gt=0.0)
    neck_split: float = Field(0.55, gt=0.0, lt=1.0)
    parts: Dict[str, PartProfile] = Field(default_factory=_default_parts)

    @pydantic.field_validator('parts')
    @classmethod
    def _complete(cls, value: Dict[str, PartProfile]) -> Dict[str, PartProfile]:
        missing = [label.value for label in PartLabel if label.value not in value]
        if missing:
            raise ValueError('missing part profiles: {}'.format(', '.join(missing)))
        return value

    def profile(self, label: PartLabel) -> PartProfile:
        return self.parts[label.value]

    def tessellation(self) -> Tuple[int, int, int]:
        return self.radial_segments, self.rings_per_part, self.bridge_points


def _ring_points(center: np.ndarray, u: np.ndarray, v: np.ndarray, radii: Radii, n: int) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(n) / n
    return center + np.outer(radii[0] * np.cos(theta), u) + np.outer(radii[1] * np.sin(theta), v)


class _Builder(object):
    """Accumulates vertices, faces, part membership and interfaces while a body is laid out."""
    def __init__(self) -> None:
        self.points = []  # type: List[np.ndarray]
        self.count = 0
        self.faces = []  # type: List[Tuple[int, int, int]]
        self.members = {label: [] for label in PartLabel}  # type: Dict[PartLabel, List[int]]
        self.interfaces = {}  # type: Dict[frozenset, np.ndarray]
        # Label to (ring index arrays, fraction of each ring along the tailor extent).
        self.tubes = {}  # type: Dict[PartLabel, Tuple[List[np.ndarray], List[float]]]

    def add(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        indices = np.arange(self.count, self.count + len(points))
        self.points.extend(points)
        self.count += len(points)
        return indices

    def positions(self, indices: Sequence[int]) -> np.ndarray:
        return np.array([self.points[i] for i in indices])

    def band(self, lower: np.ndarray, upper: np.ndarray) -> None:
        n = len(lower)
        for k in range(n):
            i0, i1, j0, j1 = lower[k], lower[(k + 1) % n], upper[k], upper[(k + 1) % n]
            self.faces.append((i0, i1, j1))
            self.faces.append((i0, j1, j0))

    def fan(self, ring: np.ndarray, pole: int) -> None:
        n = len(ring)
        for k in range(n):
            self.faces.append((ring[k], ring[(k + 1) % n], pole))

    def zip(self, loop_a: Sequence[int], loop_b: Sequence[int]) -> None:
        """Triangulates the band between two closed loops by merging them in angular order around their centroids,
        as seen along y."""
        ordered = [_angular(self.positions(loop), loop) for loop in (loop_a, loop_b)]
        (a, phi_a), (b, phi_b) = ordered
        i, j = 0, 0
        na, nb = len(a), len(b)
        while i < na or j < nb:
            next_a = phi_a[i + 1] if i + 1 < na else phi_a[0] + 2.0 * np.pi
            next_b = phi_b[j + 1] if j + 1 < nb else phi_b[0] + 2.0 * np.pi
            if j >= nb or (i < na and next_a <= next_b):
                self.faces.append((a[i], a[(i + 1) % na], b[j % nb]))
                i += 1
            else:
                self.faces.append((a[i % na], b[(j + 1) % nb], b[j]))
                j += 1

    def tube(self, label: PartLabel, start_ring: np.ndarray, start_center: np.ndarray, direction: np.ndarray,
             u: np.ndarray, v: np.ndarray, profile: PartProfile, rings: int, n: int, terminal: bool) -> \
            Tuple[np.ndarray, np.ndarray]:
        """Lofts a tube from an existing ring. Returns the last ring and its center."""
        cap = 0.5 * min(profile.end) if terminal else 0.0
        if cap >= profile.length:
            raise HumanoidError('{} is shorter than its end cap'.format(label.value))
        length = profile.length - cap
        ring_list = [start_ring]
        previous, center = start_ring, start_center
        for m in range(1, rings):
            s = m / (rings - 1)
            radii = profile.radii(s)
            if radii[0] <= 0.0 or radii[1] <= 0.0:
                raise HumanoidError('{} profile is not positive along its length'.format(label.value))
            center = start_center + direction * (s * length)
            ring = self.add(_ring_points(center, u, v, radii, n))
            self.band(previous, ring)
            ring_list.append(ring)
            previous = ring
        self.members[label].extend(int(i) for r in ring_list for i in r)
        fractions = [m / (rings - 1) * length / profile.length for m in range(rings)]
        if terminal:
            pole = self.add(start_center + direction * profile.length)
            self.fan(previous, int(pole[0]))
            self.members[label].append(int(pole[0]))
        self.tubes[label] = (ring_list, fractions)
        return previous, center

    def junction(self, label: PartLabel, big: np.ndarray, children: List[np.ndarray], splits: List[float],
                 outward: np.ndarray, bridge_height: float, bridge_points: int) -> None:
        """Connects a ring to child rings ordered by x. Each split x-value gets a bridge of points over the gap between
        two neighboring children, running from the front of the ring to its back; the bridges cut the ring into one
        sector per child and every sector is zipped to its child ring."""
        n = len(big)
        theta = 2.0 * np.pi * np.arange(n) / n
        ring = self.positions(big)
        fronts, backs, bridges = [], [], []
        for x in splits:
            target = np.arccos(np.clip(x, -1.0, 1.0))
            front = int(np.argmin(np.abs(theta - target)))
            back = int(np.argmin(np.abs(theta - (2.0 * np.pi - target)))) % n
            fronts.append(front)
            backs.append(back)
            t = np.arange(1, bridge_points + 1) / (bridge_points + 1)
            points = (np.outer(1.0 - t, ring[front]) + np.outer(t, ring[back])
                      + np.outer(bridge_height * np.sin(np.pi * t), outward))
            bridges.append([int(i) for i in self.add(points)])
        loops = []
        for m in range(len(children)):
            if m == 0:
                arc = _arc(fronts[0], backs[0], n)
                loop = [big[k] for k in arc] + bridges[0][::-1]
            elif m == len(children) - 1:
                arc = _arc(backs[-1], fronts[-1], n)
                loop = [big[k] for k in arc] + bridges[-1]
            else:
                front_arc = _arc(fronts[m], fronts[m - 1], n)
                back_arc = _arc(backs[m - 1], backs[m], n)
                loop = ([big[k] for k in front_arc] + bridges[m - 1] + [big[k] for k in back_arc]
                        + bridges[m][::-1])
            loops.append(loop)
        for loop, child in zip(loops, children):
            self.zip(loop, [int(i) for i in child])
        self.members[label].extend(int(i) for bridge in bridges for i in bridge)

    def share(self, a: PartLabel, b: PartLabel, ring: np.ndarray) -> None:
        self.interfaces[pair(a, b)] = np.array(ring, dtype=np.int64)
        self.members[a].extend(int(i) for i in ring)
        self.members[b].extend(int(i) for i in ring)


def _arc(start: int, stop: int, n: int) -> List[int]:
    """Ring indices from start to stop inclusive, increasing modulo n."""
    result = [start]
    while result[-1] != stop:
        result.append((result[-1] + 1) % n)
    return result


def _angular(points: np.ndarray, loop: Sequence[int]) -> Tuple[List[int], np.ndarray]:
    """Returns the loop rotated to start at its smallest angle, counter-clockwise in the x-z plane, with unwrapped
    angles."""
    loop = list(loop)
    xz = points[:, [0, 2]] - points[:, [0, 2]].mean(axis=0)
    area = 0.5 * np.sum(xz[:, 0] * np.roll(xz[:, 1], -1) - np.roll(xz[:, 0], -1) * xz[:, 1])
    if area < 0.0:
        loop = loop[::-1]
        xz = xz[::-1]
    phi = np.arctan2(xz[:, 1], xz[:, 0])
    first = int(np.argmin(phi))
    loop = loop[first:] + loop[:first]
    phi = np.unwrap(np.roll(phi, -first))
    return loop, phi


class Humanoid(object):
    """A generated body.

    Attributes:
        mesh: The watertight mesh.
        segmentation: Its 17-part segmentation.
        truth: Ground-truth measurements from construction.
        params: The parameters it was built from."""
    def __init__(self, mesh: TriMesh, segmentation: PartSegmentation, truth: MeasurementVector,
                 params: HumanoidParams) -> None:
        self.mesh = mesh
        self.segmentation = segmentation
        self.truth = truth
        self.params = params

    def __iter__(self):
        return iter((self.mesh, self.segmentation, self.truth))


X_AXIS = np.array([1.0, 0.0, 0.0])
Y_AXIS = np.array([0.0, 1.0, 0.0])
Z_AXIS = np.array([0.0, 0.0, 1.0])


def _lengths(params: HumanoidParams) -> Dict[PartLabel, float]:
    """Part lengths rescaled so the sole-to-crown chain equals the requested height."""
    lengths = {label: params.profile(label).length for label in PartLabel}
    legs = max(sum(lengths[PartLabel('{}-{}'.format(side, p))] for p in ('upper-leg', 'lower-leg', 'foot'))
               for side in ('left', 'right'))
    trunk = sum(lengths[label] for label in (PartLabel.PELVIS, PartLabel.LOWER_TORSO, PartLabel.UPPER_TORSO,
                                             PartLabel.NECK, PartLabel.HEAD))
    factor = params.height / (legs + trunk)
    return {label: value * factor for label, value in lengths.items()}


def _build(params: HumanoidParams) -> Tuple[_Builder, Dict[PartLabel, float], Dict[str, float]]:
    n, rings, bridge_points = params.tessellation()
    lengths = _lengths(params)
    profiles = {label: PartProfile(length=lengths[label], start=params.profile(label).start,
                                   mid=params.profile(label).mid, end=params.profile(label).end) for label in PartLabel}
    builder = _Builder()
    extras = {}
    leg_height = max(sum(lengths[PartLabel('{}-{}'.format(side, p))] for p in ('upper-leg', 'lower-leg', 'foot'))
                     for side in ('left', 'right'))
    pelvis = profiles[PartLabel.PELVIS]
    junction = params.pelvis_junction * pelvis.length
    # Pelvis tube.
    bottom_center = np.array([0.0, leg_height + junction, 0.0])
    bottom = builder.add(_ring_points(bottom_center, X_AXIS, Z_AXIS, pelvis.start, n))
    pelvis_tube = PartProfile(length=pelvis.length - junction, start=pelvis.start, mid=pelvis.mid, end=pelvis.end)
    pelvis_top, pelvis_top_center = builder.tube(PartLabel.PELVIS, bottom, bottom_center, Y_AXIS, X_AXIS, Z_AXIS,
                                                 pelvis_tube, rings, n, False)
    ring_list, _ = builder.tubes[PartLabel.PELVIS]
    builder.tubes[PartLabel.PELVIS] = (ring_list, [(junction + m / (rings - 1) * (pelvis.length - junction))
                                                   / pelvis.length for m in range(rings)])
    # Leg rings, right (-x) first.
    leg_rings = {}
    for side, sign in (('right', -1.0), ('left', 1.0)):
        upper_leg = profiles[PartLabel(side + '-upper-leg')]
        if params.hip_offset <= 1.05 * upper_leg.start[0]:
            raise HumanoidError('legs intersect: hip offset {:.1f} mm too small for thigh radius {:.1f} mm'.format(
                params.hip_offset, upper_leg.start[0]))
        center = np.array([sign * params.hip_offset, leg_height, 0.0])
        leg_rings[side] = (builder.add(_ring_points(center, X_AXIS, Z_AXIS, upper_leg.start, n)), center)
        builder.share(PartLabel.PELVIS, PartLabel(side + '-upper-leg'), leg_rings[side][0])
    builder.members[PartLabel.PELVIS].extend(int(i) for i in bottom)
    builder.junction(PartLabel.PELVIS, bottom, [leg_rings['right'][0], leg_rings['left'][0]], [0.0],
                     -Y_AXIS, 0.8 * junction, bridge_points)
    builder.share(PartLabel.PELVIS, PartLabel.LOWER_TORSO, pelvis_top)
    # Trunk.
    waist_top, waist_center = builder.tube(PartLabel.LOWER_TORSO, pelvis_top, pelvis_top_center, Y_AXIS, X_AXIS,
                                           Z_AXIS, profiles[PartLabel.LOWER_TORSO], rings, n, False)
    builder.share(PartLabel.LOWER_TORSO, PartLabel.UPPER_TORSO, waist_top)
    chest = profiles[PartLabel.UPPER_TORSO]
    if params.shoulder_junction >= chest.length:
        raise HumanoidError('shoulder junction is taller than the upper torso')
    chest_tube = PartProfile(length=chest.length - params.shoulder_junction, start=chest.start, mid=chest.mid,
                             end=chest.end)
    top, top_center = builder.tube(PartLabel.UPPER_TORSO, waist_top, waist_center, Y_AXIS, X_AXIS, Z_AXIS, chest_tube,
                                   rings, n, False)
    ring_list, fractions = builder.tubes[PartLabel.UPPER_TORSO]
    builder.tubes[PartLabel.UPPER_TORSO] = (ring_list, [f * chest_tube.length / chest.length for f in fractions])
    top_half_width = chest.end[0]
    neck = profiles[PartLabel.NECK]
    split = params.neck_split * top_half_width
    if neck.start[0] >= split:
        raise HumanoidError('neck radius {:.1f} mm does not fit between the shoulders'.format(neck.start[0]))
    neck_center = top_center + Y_AXIS * params.shoulder_junction
    neck_ring = builder.add(_ring_points(neck_center, X_AXIS, Z_AXIS, neck.start, n))
    builder.share(PartLabel.UPPER_TORSO, PartLabel.NECK, neck_ring)
    alpha = np.radians(params.arm_abduction_deg)
    arm_rings = {}
    arm_frames = {}
    for side, sign in (('right', -1.0), ('left', 1.0)):
        upper_arm = profiles[PartLabel(side + '-upper-arm')]
        a, b = upper_arm.start
        drop = 0.9 * params.shoulder_junction
        if a * np.sin(alpha) >= drop:
            raise HumanoidError('{} arm ring radius {:.1f} mm reaches into the torso'.format(side, a))
        direction = np.array([sign * np.sin(alpha), -np.cos(alpha), 0.0])
        u = np.array([np.cos(alpha), sign * np.sin(alpha), 0.0])
        center = np.array([sign * (top_half_width + params.shoulder_gap + a * np.cos(alpha)), top_center[1] + drop,
                           top_center[2]])
        arm_rings[side] = builder.add(_ring_points(center, u, Z_AXIS, (a, b), n))
        arm_frames[side] = (center, direction, u)
        builder.share(PartLabel.UPPER_TORSO, PartLabel(side + '-upper-arm'), arm_rings[side])
        _check_arm_clearance(builder, side, center, direction, a, alpha)
    builder.junction(PartLabel.UPPER_TORSO, top, [arm_rings['right'], neck_ring, arm_rings['left']],
                     [-params.neck_split, params.neck_split], Y_AXIS, 0.8 * params.shoulder_junction, bridge_points)
    extras['shoulder_breadth'] = float(np.linalg.norm(arm_frames['left'][0] - arm_frames['right'][0]))
    # Neck and head.
    head_ring, head_center = builder.tube(PartLabel.NECK, neck_ring, neck_center, Y_AXIS, X_AXIS, Z_AXIS, neck, rings,
                                          n, False)
    builder.share(PartLabel.NECK, PartLabel.HEAD, head_ring)
    builder.tube(PartLabel.HEAD, head_ring, head_center, Y_AXIS, X_AXIS, Z_AXIS, profiles[PartLabel.HEAD], rings, n,
                 True)
    # Limbs.
    for side in ('right', 'left'):
        center, direction, u = arm_frames[side]
        ring = arm_rings[side]
        chain = [PartLabel(side + '-upper-arm'), PartLabel(side + '-lower-arm'), PartLabel(side + '-hand')]
        for i, label in enumerate(chain):
            terminal = i == len(chain) - 1
            ring, center = builder.tube(label, ring, center, direction, u, Z_AXIS, profiles[label], rings, n, terminal)
            if not terminal:
                builder.share(label, chain[i + 1], ring)
        ring, center = leg_rings[side]
        chain = [PartLabel(side + '-upper-leg'), PartLabel(side + '-lower-leg'), PartLabel(side + '-foot')]
        for i, label in enumerate(chain):
            terminal = i == len(chain) - 1
            ring, center = builder.tube(label, ring, center, -Y_AXIS, X_AXIS, Z_AXIS, profiles[label], rings, n,
                                        terminal)
            if not terminal:
                builder.share(label, chain[i + 1], ring)
    return builder, lengths, extras


def _check_arm_clearance(builder: _Builder, side: str, center: np.ndarray, direction: np.ndarray, a: float,
                         alpha: float) -> None:
    """Raises HumanoidError when an arm's inner edge comes closer to the body's midplane than the torso rings below
    the shoulder."""
    inner = abs(center[0]) - a * np.cos(alpha)
    for label in (PartLabel.UPPER_TORSO, PartLabel.LOWER_TORSO):
        for ring in builder.tubes[label][0]:
            points = builder.positions(ring)
            drop = center[1] - points[:, 1].mean()
            if drop <= 0.0:
                continue
            reach = inner + drop * np.tan(alpha)
            if np.max(np.abs(points[:, 0])) >= reach:
                raise HumanoidError('{} arm intersects the {} ({:.1f} mm below the shoulder)'.format(
                    side, label.value, drop))


@functools.lru_cache(maxsize=8)
def _template_faces(tessellation: Tuple[int, int, int]) -> np.ndarray:
    """Face topology shared by all humanoids of one tessellation, laid out on the default body."""
    n, rings, bridge_points = tessellation
    builder, _, _ = _build(HumanoidParams(radial_segments=n, rings_per_part=rings, bridge_points=bridge_points))
    faces = np.array(builder.faces, dtype=np.int64)
    faces.setflags(write=False)
    return faces


def _girth(builder: _Builder, label: PartLabel, search_range: Tuple[float, float]) -> float:
    """Largest ring perimeter of a tube inside a fractional range, including the interpolated rings at the range
    ends. A range end beyond the last ring of a terminal part falls into the cap cone, which scales the last ring
    toward the pole."""
    ring_list, fractions = builder.tubes[label]
    rings = [builder.positions(r) for r in ring_list]
    fractions = np.array(fractions)
    lo, hi = search_range
    candidates = [loop_length(r) for r, f in zip(rings, fractions) if lo <= f <= hi]
    for f in (lo, hi):
        if f <= fractions[0]:
            continue
        if f >= fractions[-1]:
            if fractions[-1] < 1.0:
                shrink = (1.0 - f) / (1.0 - fractions[-1])
                candidates.append(shrink * loop_length(rings[-1]))
            continue
        m = int(np.searchsorted(fractions, f)) - 1
        t = (f - fractions[m]) / (fractions[m + 1] - fractions[m])
        candidates.append(loop_length((1.0 - t) * rings[m] + t * rings[m + 1]))
    return float(max(candidates))


def _truth(builder: _Builder, vertices: np.ndarray, lengths: Dict[PartLabel, float], extras: Dict[str, float],
           config: TailorConfig) -> MeasurementVector:
    def girth(label: PartLabel) -> float:
        return _girth(builder, label, config.range_for(label.value))

    def ring_perimeter(a: PartLabel, b: PartLabel) -> float:
        return loop_length(builder.positions(builder.interfaces[pair(a, b)]))

    values = {
        'head_circumference': girth(PartLabel.HEAD),
        'neck_circumference': girth(PartLabel.NECK),
        'chest_circumference': girth(PartLabel.UPPER_TORSO),
        'waist_circumference': girth(PartLabel.LOWER_TORSO),
        'pelvis_circumference': girth(PartLabel.PELVIS),
        'shoulder_crotch_length': lengths[PartLabel.UPPER_TORSO] + lengths[PartLabel.LOWER_TORSO]
        + lengths[PartLabel.PELVIS],
        'overall_height': float(vertices[:, 1].max() - vertices[:, 1].min()),
        'shoulder_breadth': extras['shoulder_breadth'],
        'head_length': lengths[PartLabel.HEAD],
        'neck_length': lengths[PartLabel.NECK],
    }
    for side, name in (('l', 'left'), ('r', 'right')):
        labels = {p: PartLabel('{}-{}'.format(name, p)) for p in ('upper-arm', 'lower-arm', 'hand', 'upper-leg',
                                                                 'lower-leg', 'foot')}
        values['bicep_circumference_' + side] = girth(labels['upper-arm'])
        values['forearm_circumference_' + side] = girth(labels['lower-arm'])
        values['wrist_circumference_' + side] = ring_perimeter(labels['lower-arm'], labels['hand'])
        values['hand_circumference_' + side] = girth(labels['hand'])
        values['thigh_circumference_' + side] = girth(labels['upper-leg'])
        values['calf_circumference_' + side] = girth(labels['lower-leg'])
        values['ankle_circumference_' + side] = ring_perimeter(labels['lower-leg'], labels['foot'])
        values['foot_circumference_' + side] = girth(labels['foot'])
        values['arm_length_' + side] = sum(lengths[labels[p]] for p in ('upper-arm', 'lower-arm', 'hand'))
        values['inside_leg_length_' + side] = sum(lengths[labels[p]] for p in ('upper-leg', 'lower-leg', 'foot'))
        values['hand_length_' + side] = lengths[labels['hand']]
        values['foot_length_' + side] = lengths[labels['foot']]
    return MeasurementVector(values)


class Generator(object):
    """Synthetic humanoid generator."""
    @staticmethod
    def humanoid(params: Optional[HumanoidParams] = None, config: Optional[TailorConfig] = None) -> Humanoid:
        """Builds one humanoid.

        Args:
            params: Body parameters, defaults when None.
            config: Tailor configuration whose stage-2 ranges define the ground-truth girths.

        Returns:
            The mesh, segmentation and ground truth."""
        params = params or HumanoidParams()
        config = config or TailorConfig.load()
        builder, lengths, extras = _build(params)
        vertices = np.array(builder.points)
        faces = _template_faces(params.tessellation())
        try:
            mesh = TriMesh(vertices, faces)
        except MeshError as e:
            raise HumanoidError('humanoid surface is degenerate: {}'.format(e))
        seg = PartSegmentation(len(vertices), builder.members, builder.interfaces, BODY_TREE)
        return Humanoid(mesh, seg, _truth(builder, vertices, lengths, extras, config), params)

    @staticmethod
    def perturbed(base: HumanoidParams, rng: np.random.Generator, spread: float) -> HumanoidParams:
        """Returns base with log-normal factors on the height, on every part length and on every part girth.

        Note:
            Each factor is exp(spread * z) with z a standard normal draw clamped to [-3, 3]."""
        def factor() -> float:
            return float(np.exp(spread * np.clip(rng.standard_normal(), -3.0, 3.0)))

        height = base.height * factor()
        parts = {}
        for label in PartLabel:
            length, girth = factor(), factor()
            parts[label.value] = base.profile(label).scaled(length=length, girth=girth)
        hip_offset = base.hip_offset * parts['pelvis'].start[0] / base.profile(PartLabel.PELVIS).start[0]
        return base.model_copy(update={'height': height, 'parts': parts, 'hip_offset': hip_offset})

    @staticmethod
    def population(seed: int, n: int, spread: float, base: Optional[HumanoidParams] = None,
                   config: Optional[TailorConfig] = None, attempts: int = 10) -> List[Humanoid]:
        """Samples a deterministic population of humanoids.

        Args:
            seed: Random seed.
            n: Number of bodies.
            spread: Relative standard deviation of the log-normal factors.
            base: Parameters perturbed around, defaults when None.
            config: Tailor configuration for the ground truth.
            attempts: Draws per body before giving up on invalid parameters.

        Returns:
            The bodies, all sharing one segmentation object."""
        if n < 1:
            raise HumanoidError('population size must be at least 1, got {}'.format(n))
        if not spread >= 0.0:
            raise HumanoidError('spread must be non-negative, got {}'.format(spread))
        base = base or HumanoidParams()
        config = config or TailorConfig.load()
        rng = np.random.default_rng(seed)
        result = []
        for index in range(n):
            for attempt in range(attempts):
                try:
                    body = Generator.humanoid(Generator.perturbed(base, rng, spread), config)
                    break
                except (HumanoidError, pydantic.ValidationError) as e:
                    logger.info('body %d draw %d rejected: %s', index, attempt, e)
            else:
                raise HumanoidError('no valid body after {} draws for body {}'.format(attempts, index))
            if result:
                body.segmentation = result[0].segmentation
            result.append(body)
        return result


def generate_humanoid(params: Optional[HumanoidParams] = None, config: Optional[TailorConfig] = None) -> \
        Tuple[TriMesh, PartSegmentation, MeasurementVector]:
    body = Generator.humanoid(params, config)
    return body.mesh, body.segmentation, body.truth


def sample_population(seed: int, n: int, spread: float, base: Optional[HumanoidParams] = None,
                      config: Optional[TailorConfig] = None) -> List[Tuple[TriMesh, PartSegmentation,
                                                                            MeasurementVector]]:
    return [tuple(body) for body in Generator.population(seed, n, spread, base, config)]


def is_watertight(mesh: TriMesh) -> bool:
    return validate(mesh).watertight
