#!/usr/bin/env python3
#
# LAMP - Location-Aware Multi-Party image privacy
# Copyright (C) 2026 The LAMP Developers
#
# This file is part of the LAMP policy enforcement engine.
#
# LAMP is free software: you can redistribute it and/or modify it
# under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# LAMP is distributed in the hope that it will be useful, but WITHOUT
# ANY WARRANTY; without even the implied warranty of MERCHANTABILITY
# or FITNESS FOR A PARTICULAR PURPOSE. See the GNU General Public
# License for more details.
#
# You should have received a copy of the GNU General Public License
# along with LAMP. If not, see <https://www.gnu.org/licenses/>.

import abc
import hashlib
import threading
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from lamp.errors import Location, Kind, LAMP_Error, Message_Handler
from lamp.policy import Sensitiveness, expect_type

FACE_DIMENSION         = 128
DEFAULT_TOLERANCE_LOW  = 0.6
DEFAULT_TOLERANCE_HIGH = 0.9

# Smallest number of candidate rows handed to one worker
MIN_CHUNK = 64


def dimension_mismatch(what, found):
    return LAMP_Error(Location("<face vector>"),
                      Kind.SYS_ERROR,
                      "%s has %u components, expected %u" %
                      (what, found, FACE_DIMENSION),
                      "DimensionMismatch")


class Face_Vector:
    """A 128-dimensional face description

    Components are stored as a read-only float64 array.

    :raises LAMP_Error: DimensionMismatch for the wrong length, \
    MalformedInput for non-finite components
    """
    __slots__ = ("v",)

    def __init__(self, components):
        v = np.array(components, dtype=np.float64)
        if v.ndim != 1 or v.shape[0] != FACE_DIMENSION:
            raise dimension_mismatch("face vector",
                                     v.size if v.ndim == 1 else v.ndim)
        if not np.all(np.isfinite(v)):
            raise LAMP_Error(Location("<face vector>"),
                             Kind.SYS_ERROR,
                             "face vector has non-finite components",
                             "MalformedInput")
        v.setflags(write=False)
        self.v = v

    @classmethod
    def from_json(cls, mh, location, value):
        assert isinstance(mh, Message_Handler)
        assert isinstance(location, Location)
        if not isinstance(value, list) or \
           not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                   for x in value):
            mh.error(location,
                     "face vector must be a list of numbers",
                     "MalformedInput")
        try:
            return cls(value)
        except LAMP_Error as err:
            mh.error(location, err.message, err.code)

    def to_json(self):
        # float repr round-trips every double exactly
        return [float(x) for x in self.v]

    def __eq__(self, other):
        return isinstance(other, Face_Vector) and \
            np.array_equal(self.v, other.v)

    def __hash__(self):
        return hash(self.v.tobytes())

    def __repr__(self):
        return "Face_Vector(%s, ...)" % ", ".join("%.4f" % x
                                                  for x in self.v[:3])


class Face_Record:
    """An enrolled user and their face vector"""
    __slots__ = ("user", "vector")

    def __init__(self, user, vector):
        assert isinstance(user, str) and user
        assert isinstance(vector, Face_Vector)
        self.user   = user
        self.vector = vector

    @classmethod
    def from_json(cls, mh, location, obj):
        user = expect_type(mh, location, obj, "user", (str,))
        if not user:
            mh.error(location, "user must not be empty", "MalformedInput")
        return cls(user,
                   Face_Vector.from_json(mh, location,
                                         expect_type(mh, location, obj,
                                                     "vector", (list,))))

    def to_json(self):
        return {"user"   : self.user,
                "vector" : self.vector.to_json()}

    def __repr__(self):
        return "Face_Record(%s)" % self.user


class Tolerance:
    __slots__ = ("max_distance",)

    def __init__(self, max_distance):
        assert isinstance(max_distance, float) and max_distance >= 0
        self.max_distance = max_distance

    def __eq__(self, other):
        return isinstance(other, Tolerance) and \
            self.max_distance == other.max_distance

    def __lt__(self, other):
        assert isinstance(other, Tolerance)
        return self.max_distance < other.max_distance

    def __hash__(self):
        return hash(self.max_distance)

    def __repr__(self):
        return "Tolerance(%r)" % self.max_distance


def tolerance_for(xi,
                  low  = DEFAULT_TOLERANCE_LOW,
                  high = DEFAULT_TOLERANCE_HIGH):
    """Maximum face distance protected by a policy

    High sensitiveness tolerates more distant (less identifiable)
    faces than Low.

    :param xi: sensitiveness of the policy
    :type xi: Sensitiveness

    :rtype: Tolerance
    """
    assert isinstance(xi, Sensitiveness)
    assert high > low > 0
    if xi is Sensitiveness.HIGH:
        return Tolerance(float(high))
    else:
        return Tolerance(float(low))


##############################################################################
# Distance
##############################################################################

def distances(block, face):
    """Euclidean distances from every row of block to face

    The single kernel behind all distance computations, so that one
    pair always yields the same double whichever path computed it.
    """
    diff = block - face
    return np.sqrt(np.add.reduce(diff * diff, axis=1))


def distance(a, b):
    """Euclidean distance between two face vectors

    :raises LAMP_Error: DimensionMismatch
    :rtype: float
    """
    a = as_components(a)
    b = as_components(b)
    return float(distances(a[np.newaxis, :], b)[0])


def compare(source, dest, tol):
    """Is dest close enough to source to be the same person?

    The comparison is strict: a distance equal to the tolerance is no
    match.
    """
    assert isinstance(tol, Tolerance)
    return distance(source, dest) < tol.max_distance


def as_components(vector):
    if isinstance(vector, Face_Vector):
        return vector.v
    v = np.asarray(vector, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != FACE_DIMENSION:
        raise dimension_mismatch("face vector",
                                 v.size if v.ndim == 1 else v.ndim)
    return v


##############################################################################
# Candidate matching
##############################################################################

class Match:
    """Face face_index of a photo shows user at the given distance"""
    __slots__ = ("face_index", "user", "distance")

    def __init__(self, face_index, user, distance):
        assert isinstance(face_index, int)
        assert isinstance(user, str)
        assert isinstance(distance, float)
        self.face_index = face_index
        self.user       = user
        self.distance   = distance

    def sort_key(self):
        return (self.face_index, self.user)

    def __eq__(self, other):
        return isinstance(other, Match) and \
            (self.face_index, self.user, self.distance) == \
            (other.face_index, other.user, other.distance)

    def __hash__(self):
        return hash(self.sort_key())

    def __repr__(self):
        return "Match(%u, %s, %r)" % (self.face_index,
                                      self.user,
                                      self.distance)


class Comparison_Counter:
    """Thread safe count of evaluated face pairs"""
    def __init__(self):
        self.count = 0
        self.lock  = threading.Lock()

    def add(self, n):
        with self.lock:
            self.count += n


def check_candidates(photo_faces, candidates):
    for idx, vector in photo_faces:
        assert isinstance(idx, int)
        as_components(vector)
    for record, xi in candidates:
        assert isinstance(record, Face_Record)
        assert isinstance(xi, Sensitiveness)


def match_candidates(photo_faces, candidates,
                     tolerance_low  = DEFAULT_TOLERANCE_LOW,
                     tolerance_high = DEFAULT_TOLERANCE_HIGH,
                     workers        = 1,
                     counter        = None):
    """Compare every photo face against every candidate

    With one worker every pair is compared in turn. With more, the
    candidates are split into row blocks that a thread pool compares
    against each photo face; the result is the same list either way.

    :param photo_faces: detected faces as (face index, vector)
    :type photo_faces: list[tuple[int, Face_Vector]]

    :param candidates: enrolled users with the sensitiveness that \
    decides their tolerance
    :type candidates: list[tuple[Face_Record, Sensitiveness]]

    :param workers: size of the worker pool
    :type workers: int

    :param counter: optional tally of the pairs evaluated
    :type counter: Comparison_Counter

    :raises LAMP_Error: DimensionMismatch (nothing is matched)
    :returns: matches sorted by face index, then user
    :rtype: list[Match]
    """
    assert isinstance(workers, int) and workers >= 1
    assert isinstance(counter, Comparison_Counter) or counter is None

    check_candidates(photo_faces, candidates)
    if not photo_faces or not candidates:
        return []

    limits = np.array([tolerance_for(xi, tolerance_low,
                                     tolerance_high).max_distance
                       for _, xi in candidates])
    users = [record.user for record, _ in candidates]

    if workers == 1 or len(candidates) < 2 * MIN_CHUNK:
        rv = match_sequential(photo_faces, candidates, limits)
    else:
        rv = match_parallel(photo_faces, candidates, users, limits, workers)

    if counter is not None:
        counter.add(len(photo_faces) * len(candidates))

    rv.sort(key=Match.sort_key)
    return rv


def match_sequential(photo_faces, candidates, limits):
    rv = []
    for idx, face in photo_faces:
        for (record, _), limit in zip(candidates, limits):
            d = distance(face, record.vector)
            if d < limit:
                rv.append(Match(idx, record.user, d))
    return rv


def match_parallel(photo_faces, candidates, users, limits, workers):
    matrix = np.stack([record.vector.v for record, _ in candidates])
    chunk  = max(MIN_CHUNK, -(-len(candidates) // workers))
    blocks = [(start, matrix[start:start + chunk])
              for start in range(0, len(candidates), chunk)]

    def work(start, block):
        found = []
        for idx, face in photo_faces:
            d = distances(block, as_components(face))
            hits = np.nonzero(d < limits[start:start + len(block)])[0]
            for row in hits:
                found.append(Match(idx,
                                   users[start + int(row)],
                                   float(d[row])))
        return found

    rv = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for found in pool.map(lambda args: work(*args), blocks):
            rv += found
    return rv


##############################################################################
# Embedding providers
##############################################################################

class Embedding_Provider(metaclass=abc.ABCMeta):
    """Turns images (or stand-in tokens) into face vectors

    Implementations must be deterministic.
    """
    @abc.abstractmethod
    def encode(self, image):
        """Face vector of the single face shown by image

        :rtype: Face_Vector
        """

    @abc.abstractmethod
    def detect(self, photo):
        """All faces in a photo

        :rtype: list[tuple[int, Face_Vector]]
        """


class Hash_Embedding_Provider(Embedding_Provider):
    """Synthetic provider deriving unit vectors from tokens

    A token (str or bytes) is hashed to seed a random generator, so
    the same token always gives the same vector and different tokens
    give practically unrelated ones. Photos are registered as a list of
    face tokens.
    """
    def __init__(self):
        super().__init__()
        self.photos = {}

    @staticmethod
    def unit_vector(token):
        if isinstance(token, str):
            token = token.encode("UTF-8")
        assert isinstance(token, bytes)
        seed = int.from_bytes(hashlib.sha256(token).digest()[:8], "big")
        v = np.random.default_rng(seed).standard_normal(FACE_DIMENSION)
        return v / np.linalg.norm(v)

    def encode(self, image):
        return Face_Vector(self.unit_vector(image))

    def register_photo(self, photo, face_tokens):
        assert isinstance(photo, str)
        self.photos[photo] = list(face_tokens)

    def detect(self, photo):
        return [(idx, self.encode(token))
                for idx, token in enumerate(self.photos.get(photo, []))]

    def perturb(self, base, target_distance, direction_token):
        """A vector at (almost exactly) target_distance from base

        The offset is orthogonal to base, along a direction derived
        from direction_token.

        :rtype: Face_Vector
        """
        assert isinstance(base, Face_Vector)
        assert target_distance >= 0
        direction = self.unit_vector(direction_token)
        norm = float(np.dot(base.v, base.v))
        if norm > 0:
            direction = direction - (np.dot(direction, base.v) / norm) * base.v
        direction = direction / np.linalg.norm(direction)
        return Face_Vector(base.v + target_distance * direction)
