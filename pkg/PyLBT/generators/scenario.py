import numbers
import numpy as np
from dataclasses import dataclass
from ..utils import get_rng, config_hash
from ..criteria.assignment import circular_diff, min_azimuth_gap, azimuth_order, distance_order


ARRAY_HEIGHT = 1.5
ARRAY_RADIUS = 0.0425
ROOM_RANGE = ((4.0, 6.0), (4.0, 6.0), (3.0, 4.0))
T60_RANGE = (0.15, 0.6)
MIN_DISTANCE = 0.3
MIN_DISTANCE_GAP = 0.2
WALL_MARGIN = 0.2
MAX_SPEAKERS = 5
TOL = 1e-9


@dataclass(frozen=True)
class ArrayGeometry:
    '''Microphone positions relative to the array center.

    .. note::

        offsets : tuple of 3-tuples
            Per-microphone offset in meters. Microphone 0 is the reference.
        center : 3-tuple
            Array center in room coordinates.
        kind : str in {'circular', 'linear', 'single'}
            Decides the azimuth range used for ordering ('linear' folds front and back).
    '''
    offsets: tuple
    center: tuple = (0.0, 0.0, 0.0)
    kind: str = 'circular'

    @classmethod
    def circular(cls, center=(0.0, 0.0, 0.0), radius=ARRAY_RADIUS, n_ring=6):
        '''One microphone at the center and ``n_ring`` on a horizontal circle, starting on the x-axis.
        '''
        offsets = [(0.0, 0.0, 0.0)]
        for k in range(n_ring):
            phi = 2 * np.pi * k / n_ring
            offsets.append((radius * np.cos(phi), radius * np.sin(phi), 0.0))
        return cls(offsets=tuple(offsets), center=tuple(float(c) for c in center), kind='circular')

    @classmethod
    def linear(cls, center=(0.0, 0.0, 0.0), n_mics=4, spacing=0.05):
        '''Uniform linear array along the x-axis; microphone 0 sits on the left end.
        '''
        offsets = tuple((spacing * (m - (n_mics - 1) / 2), 0.0, 0.0) for m in range(n_mics))
        return cls(offsets=offsets, center=tuple(float(c) for c in center), kind='linear')

    @classmethod
    def single(cls, center=(0.0, 0.0, 0.0)):
        return cls(offsets=((0.0, 0.0, 0.0),), center=tuple(float(c) for c in center), kind='single')

    @property
    def n_mics(self):
        return len(self.offsets)

    @property
    def mic_offsets(self):
        return np.array(self.offsets, dtype=np.float64)

    @property
    def mic_positions(self):
        return np.array(self.center, dtype=np.float64)[None, :] + self.mic_offsets

    def moved(self, center):
        return ArrayGeometry(offsets=self.offsets, center=tuple(float(c) for c in center), kind=self.kind)

    def to_dict(self):
        return {'offsets': [list(o) for o in self.offsets], 'center': list(self.center), 'kind': self.kind}

    @classmethod
    def from_dict(cls, d):
        return cls(offsets=tuple(tuple(float(v) for v in o) for o in d['offsets']), center=tuple(float(c) for c in d['center']), kind=d.get('kind', 'circular'))


@dataclass(frozen=True)
class Room:
    '''Shoebox room.

    .. note::

        dims : 3-tuple
            (L, W, H) in meters.
        t60 : float
            Reverberation time in seconds, 0 for anechoic.
    '''
    dims: tuple
    t60: float = 0.0

    def __post_init__(self):
        if len(self.dims) != 3 or min(self.dims) <= 0:
            raise ValueError("[E] Room dims must be three positive lengths, got {}.".format(self.dims))
        if self.t60 < 0:
            raise ValueError("[E] t60 must be non-negative, got {}.".format(self.t60))
        object.__setattr__(self, 'dims', tuple(float(d) for d in self.dims))
        object.__setattr__(self, 't60', float(self.t60))

    @property
    def volume(self):
        L, W, H = self.dims
        return L * W * H

    @property
    def surface_area(self):
        L, W, H = self.dims
        return 2 * (L * W + L * H + W * H)

    def contains(self, point, margin=0.0):
        point = np.asarray(point, dtype=np.float64)
        return bool(np.all(point > margin) and np.all(point < np.array(self.dims) - margin))

    def to_dict(self):
        return {'dims': list(self.dims), 't60': self.t60}


@dataclass(frozen=True)
class SourcePlacement:
    '''Speaker position relative to the array center, in the horizontal plane of the array.
    '''
    azimuth: float
    distance: float

    def position(self, center):
        phi = np.deg2rad(self.azimuth)
        return np.array(center, dtype=np.float64) + self.distance * np.array([np.cos(phi), np.sin(phi), 0.0])

    def to_dict(self):
        return {'azimuth': self.azimuth, 'distance': self.distance}


@dataclass(frozen=True)
class Scenario:
    '''A sampled acoustic scene.
    '''
    room: Room
    array: ArrayGeometry
    sources: tuple
    azimuth_resolution: float = 5.0
    seed: int = None

    @property
    def n_speakers(self):
        return len(self.sources)

    @property
    def azimuths(self):
        return np.array([s.azimuth for s in self.sources], dtype=np.float64)

    @property
    def distances(self):
        return np.array([s.distance for s in self.sources], dtype=np.float64)

    @property
    def source_positions(self):
        return np.stack([s.position(self.array.center) for s in self.sources])

    @property
    def min_gap(self):
        '''Smallest pairwise circular azimuth difference, ``inf`` for one speaker.
        '''
        return min_azimuth_gap(self.azimuths)

    def check(self):
        '''List the violated scene constraints; an empty list means the scene is valid.
        '''
        violations = []
        L, W, H = self.room.dims
        for d, (low, high), name in zip(self.room.dims, ROOM_RANGE, 'LWH'):
            if not low - TOL <= d <= high + TOL:
                violations.append("room {} = {:.3f} outside [{}, {}]".format(name, d, low, high))
        t60 = self.room.t60
        if not (t60 == 0 or T60_RANGE[0] - TOL <= t60 <= T60_RANGE[1] + TOL):
            violations.append("t60 = {:.3f} outside {{0}} U [{}, {}]".format(t60, *T60_RANGE))
        if not 1 <= self.n_speakers <= MAX_SPEAKERS:
            violations.append("{} speakers outside [1, {}]".format(self.n_speakers, MAX_SPEAKERS))

        center = np.array(self.array.center)
        if abs(center[0] - L / 2) > TOL or abs(center[1] - W / 2) > TOL:
            violations.append("array not at the room center")

        az = self.azimuths
        on_grid = np.abs(az / self.azimuth_resolution - np.round(az / self.azimuth_resolution)) < TOL
        if not np.all(on_grid) or np.any(az < -180) or np.any(az >= 180):
            violations.append("azimuths {} off the {} deg grid".format(az.tolist(), self.azimuth_resolution))
        if len(az) > 1 and np.any(circular_diff(az[:, None], az[None, :])[np.triu_indices(len(az), 1)] < TOL):
            violations.append("duplicate azimuths")

        dist = self.distances
        if np.any(dist < MIN_DISTANCE - TOL):
            violations.append("distance below {} m".format(MIN_DISTANCE))
        if len(dist) > 1 and np.any(np.abs(dist[:, None] - dist[None, :])[np.triu_indices(len(dist), 1)] < MIN_DISTANCE_GAP - TOL):
            violations.append("distances closer than {} m".format(MIN_DISTANCE_GAP))

        for k, pos in enumerate(self.source_positions):
            if not self.room.contains(pos):
                violations.append("source {} outside the room".format(k))
        for m, pos in enumerate(self.array.mic_positions):
            if not self.room.contains(pos):
                violations.append("mic {} outside the room".format(m))
        return violations

    def to_dict(self):
        return {
            'room': self.room.to_dict(),
            'array': self.array.to_dict(),
            'sources': [s.to_dict() for s in self.sources],
            'azimuth_resolution': self.azimuth_resolution,
            'seed': self.seed,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            room=Room(dims=tuple(d['room']['dims']), t60=d['room']['t60']),
            array=ArrayGeometry.from_dict(d['array']),
            sources=tuple(SourcePlacement(float(s['azimuth']), float(s['distance'])) for s in d['sources']),
            azimuth_resolution=float(d['azimuth_resolution']),
            seed=d.get('seed'),
        )

    def hash(self):
        return config_hash(self.to_dict())


@dataclass(frozen=True, eq=False)
class MixtureExample:
    '''One dataset record.

    .. note::

        mixture : ndarray
            ``M``-by-``L`` multichannel mixture, channel 0 is the reference microphone.
        targets : ndarray
            ``N``-by-``L`` direct-path signals at the reference microphone, in speaker order.
        scenario : Scenario
        utterance_ids : tuple of str
    '''
    mixture: np.ndarray
    targets: np.ndarray
    scenario: Scenario
    utterance_ids: tuple = ()
    example_id: str = ''
    drr_db: tuple = ()

    @property
    def n_speakers(self):
        return self.targets.shape[0]

    @property
    def n_mics(self):
        return self.mixture.shape[0]

    @property
    def length(self):
        return self.mixture.shape[1]


def _max_distance(azimuth, room, center, margin=WALL_MARGIN):
    '''Largest source distance along ``azimuth`` that keeps ``margin`` meters from the walls.
    '''
    phi = np.deg2rad(azimuth)
    u = np.array([np.cos(phi), np.sin(phi)])
    limits = []
    for i in range(2):
        if abs(u[i]) < 1e-12:
            continue
        wall = room.dims[i] - margin if u[i] > 0 else margin
        limits.append((wall - center[i]) / u[i])
    return float(min(limits))


def sample_scenario(rng=None, n_speakers=2, azimuth_resolution=5, reverberant=True, min_gap=None, max_gap=None, array=None, max_retries=1000):
    '''Sample a scene under the simulation protocol.

    Parameters
    ----------
    rng : int or RandomState, optional
        An integer is used as the scenario seed; a generator draws one.
    n_speakers : int in [1, 5]
    azimuth_resolution : float in {5, 1}
        Candidate azimuths are ``-180, -180 + res, ..., 180 - res``; speakers never share one.
    reverberant : bool, default: True
        If False, ``t60 = 0``.
    min_gap, max_gap : float, optional
        Bounds on the smallest pairwise azimuth difference, in degrees.
    array : ArrayGeometry, optional
        Microphone layout, moved to the room center. Defaults to the 7-mic circular array.
    max_retries : int, default: 1000

    Returns
    -------
    scenario : Scenario
    '''
    if not 1 <= n_speakers <= MAX_SPEAKERS:
        raise ValueError("[E] n_speakers must be in [1, {}], got {}.".format(MAX_SPEAKERS, n_speakers))
    if azimuth_resolution not in [1, 5]:
        raise ValueError("[E] azimuth_resolution must be 1 or 5, got {}.".format(azimuth_resolution))

    if isinstance(rng, (numbers.Integral, np.integer)):
        seed = int(rng)
    else:
        seed = int(get_rng(rng).randint(0, 2**31 - 1))
    local = np.random.RandomState(seed)

    dims = tuple(local.uniform(low, high) for low, high in ROOM_RANGE)
    t60 = local.uniform(*T60_RANGE) if reverberant else 0.0
    room = Room(dims=dims, t60=t60)
    center = (dims[0] / 2, dims[1] / 2, ARRAY_HEIGHT)
    array = ArrayGeometry.circular(center=center) if array is None else array.moved(center)

    grid = np.arange(-180, 180, azimuth_resolution, dtype=np.float64)
    for _ in range(max_retries):
        azimuths = local.choice(grid, size=n_speakers, replace=False)
        gap = min_azimuth_gap(azimuths)
        if min_gap is not None and gap < min_gap:
            continue
        if max_gap is not None and gap > max_gap:
            continue
        break
    else:
        raise RuntimeError("[E] No azimuths with gap in [{}, {}] after {} retries (seed={}).".format(min_gap, max_gap, max_retries, seed))

    d_max = np.array([_max_distance(a, room, center) for a in azimuths])
    for _ in range(max_retries):
        distances = local.uniform(MIN_DISTANCE, d_max)
        gaps = np.abs(distances[:, None] - distances[None, :])[np.triu_indices(n_speakers, 1)]
        if np.all(gaps >= MIN_DISTANCE_GAP):
            break
    else:
        raise RuntimeError("[E] No distances {} m apart after {} retries (seed={}).".format(MIN_DISTANCE_GAP, max_retries, seed))

    sources = tuple(SourcePlacement(float(a), float(d)) for a, d in zip(azimuths, distances))
    return Scenario(room=room, array=array, sources=sources, azimuth_resolution=float(azimuth_resolution), seed=seed)


def geometry_truth(scenario, array_kind=None):
    '''Speaker orders used by location-based training.

    Parameters
    ----------
    scenario : Scenario
    array_kind : str in {'circular', 'linear', 'single'}, optional
        Defaults to the kind of the scenario's array. For 'linear' azimuths are folded onto [0, 180].

    Returns
    -------
    az_order : tuple of int
        Speaker indices by ascending azimuth on [0, 360); ties go to the nearer speaker.
    dist_order : tuple of int
        Speaker indices by ascending distance; ties go to the smaller azimuth.
    '''
    kind = scenario.array.kind if array_kind is None else array_kind
    return (azimuth_order(scenario.azimuths, scenario.distances, kind),
            distance_order(scenario.azimuths, scenario.distances, kind))
