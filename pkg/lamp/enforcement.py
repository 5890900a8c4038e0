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
import threading
import time
from contextlib import contextmanager
from enum import Enum

from lamp.errors import Location, Message_Handler, Redactor_Failure
from lamp.policy import (Lampi_Policy, expect_type, address_from_json,
                         point_from_json, parse_timestamp)
from lamp.dlp import DLP_Tree, Photo_Location
from lamp.face import (Face_Vector, Face_Record,
                       match_candidates, tolerance_for,
                       DEFAULT_TOLERANCE_LOW, DEFAULT_TOLERANCE_HIGH)

#
# The privacy protection procedure for one photo: fetch the policies
# that mark the photo's place and time as sensitive, compare the faces
# on the photo with the policy owners' enrolled faces, and decide
# which faces to replace. Every person on the photo is protected the
# same way, including whoever uploaded it.
#


##############################################################################
# Manifests
##############################################################################

class Photo_Manifest:
    """Everything the engine needs to know about one photo

    :attribute photo_id: identifies the photo towards the redactor
    :type: str

    :attribute location: where and when the photo was taken
    :type: Photo_Location

    :attribute faces: detected faces, indexed 0, 1, ...
    :type: list[tuple[int, Face_Vector]]

    :attribute uploader: the user that posted the photo
    :type: str
    """
    def __init__(self, photo_id, location, faces, uploader):
        assert isinstance(photo_id, str)
        assert isinstance(location, Photo_Location)
        assert isinstance(faces, list)
        assert all(isinstance(idx, int) and isinstance(vec, Face_Vector)
                   for idx, vec in faces)
        assert isinstance(uploader, str)
        self.photo_id = photo_id
        self.location = location
        self.faces    = faces
        self.uploader = uploader

    def problems(self):
        rv = self.location.problems()
        indices = sorted(idx for idx, _ in self.faces)
        if indices != list(range(len(self.faces))):
            rv.append("face indices must be unique and contiguous from 0")
        return rv


def photo_location_from_json(mh, location, obj):
    assert isinstance(mh, Message_Handler)
    assert isinstance(location, Location)

    timestamp = parse_timestamp(mh, location,
                                expect_type(mh, location, obj,
                                            "timestamp", (str,)))
    keywords = expect_type(mh, location, obj, "keywords", (list,),
                           optional=True) or []
    if not all(isinstance(keyword, str) for keyword in keywords):
        mh.error(location,
                 "keywords must be a list of strings",
                 "MalformedInput")

    if any(name in obj for name in ("street", "city", "state", "nation")):
        address = address_from_json(mh, location, obj)
        point   = address.point
    else:
        address = None
        point   = point_from_json(mh, location, obj, "MalformedInput")

    return Photo_Location(timestamp = timestamp,
                          address   = address,
                          point     = point,
                          keywords  = keywords)


def manifest_from_json(mh, obj, location):
    """Parse and check a photo manifest

    The JSON form is::

       {"photo_id": "p1", "uploader": "bob",
        "location": {"city": ..., "keywords": [...],
                     "timestamp": "2019-12-01T14:00:00"},
        "faces": [{"index": 0, "vector": [...]}]}

    :raises LAMP_Error: MalformedInput, MalformedAddress or \
    DimensionMismatch
    :rtype: Photo_Manifest
    """
    assert isinstance(mh, Message_Handler)
    assert isinstance(location, Location)

    photo_id = expect_type(mh, location, obj, "photo_id", (str,))
    uploader = expect_type(mh, location, obj, "uploader", (str,))
    photo_location = photo_location_from_json(
        mh, location,
        expect_type(mh, location, obj, "location", (dict,)))

    faces = []
    for item in expect_type(mh, location, obj, "faces", (list,),
                            optional=True) or []:
        idx = expect_type(mh, location, item, "index", (int,))
        faces.append((idx,
                      Face_Vector.from_json(
                          mh, location,
                          expect_type(mh, location, item, "vector",
                                      (list,)))))

    manifest = Photo_Manifest(photo_id = photo_id,
                              location = photo_location,
                              faces    = faces,
                              uploader = uploader)
    if photo_location.address is not None:
        for problem in photo_location.address.problems():
            mh.error(location, problem, "MalformedAddress")
    for problem in manifest.problems():
        mh.error(location, problem, "MalformedInput")
    return manifest


##############################################################################
# Decisions
##############################################################################

class Action(Enum):
    REPLACE_FACE = "ReplaceFace"

    def __str__(self):
        return self.value


class Redaction_Decision:
    """Replace face face_index to protect protected_user

    :attribute triggering_policy: the strictest (lowest tolerance) \
    of the user's policies that matched
    :type: int
    """
    __slots__ = ("face_index", "protected_user", "triggering_policy",
                 "action", "distance")

    def __init__(self, face_index, protected_user, triggering_policy,
                 distance, action=Action.REPLACE_FACE):
        assert isinstance(face_index, int)
        assert isinstance(protected_user, str)
        assert isinstance(triggering_policy, int)
        assert isinstance(distance, float)
        assert isinstance(action, Action)
        self.face_index        = face_index
        self.protected_user    = protected_user
        self.triggering_policy = triggering_policy
        self.action            = action
        self.distance          = distance

    def to_json(self):
        return {"face_index"        : self.face_index,
                "protected_user"    : self.protected_user,
                "triggering_policy" : self.triggering_policy,
                "action"            : str(self.action),
                "distance"          : self.distance}

    def __eq__(self, other):
        return isinstance(other, Redaction_Decision) and \
            self.to_json() == other.to_json()

    def __hash__(self):
        return hash((self.face_index, self.protected_user))

    def __repr__(self):
        return "Redaction_Decision(%u, %s, %u, %r)" % (
            self.face_index,
            self.protected_user,
            self.triggering_policy,
            self.distance)


class Check_Result:
    """Decisions for one photo plus how they were reached

    :attribute diagnostics: policies that could not be applied
    :type: list[str]

    :attribute timings: milliseconds spent per stage
    :type: dict[str, float]
    """
    def __init__(self, decisions, diagnostics, timings):
        assert isinstance(decisions, list)
        assert isinstance(diagnostics, list)
        assert isinstance(timings, dict)
        self.decisions   = decisions
        self.diagnostics = diagnostics
        self.timings     = timings

    def to_json(self, include_timings=True):
        rv = {"decisions"   : [d.to_json() for d in self.decisions],
              "diagnostics" : list(self.diagnostics)}
        if include_timings:
            rv["timings_ms"] = dict(self.timings)
        return rv


def elapsed_ms(start):
    return (time.perf_counter() - start) * 1000.0


def check_photo(mh, manifest, tree, records,
                policies       = None,
                tolerance_low  = DEFAULT_TOLERANCE_LOW,
                tolerance_high = DEFAULT_TOLERANCE_HIGH,
                workers        = 1,
                counter        = None):
    """Decide which faces of a photo must be replaced

    Each owner of a retrieved policy is matched once, with the most
    permissive tolerance among their retrieved policies. The decision
    then names the strictest of those policies that still matches.

    :param mh: The message handler to use
    :type mh: Message_Handler

    :param manifest: the photo
    :type manifest: Photo_Manifest

    :param tree: the policy index
    :type tree: DLP_Tree

    :param records: enrolled faces by user
    :type records: dict[str, Face_Record]

    :param policies: policy lookup by pid (default: the tree's)
    :type policies: dict[int, Lampi_Policy]

    :rtype: Check_Result
    """
    assert isinstance(mh, Message_Handler)
    assert isinstance(manifest, Photo_Manifest)
    assert isinstance(tree, DLP_Tree)
    if policies is None:
        policies = tree.policies

    location = Location("<manifest %s>" % manifest.photo_id)
    timings  = {}

    start = time.perf_counter()
    pids  = tree.lookup(manifest.location)
    timings["retrieval"] = elapsed_ms(start)

    start = time.perf_counter()
    by_owner = {}
    for pid in sorted(pids):
        policy = policies[pid]
        assert isinstance(policy, Lampi_Policy)
        by_owner.setdefault(policy.owner, []).append(policy)

    diagnostics = []
    candidates  = []
    for owner in sorted(by_owner):
        record = records.get(owner)
        if record is None:
            msg = "policy %s: owner %s has no enrolled face vector" % (
                ", ".join(str(p.pid) for p in by_owner[owner]),
                owner)
            mh.warning(location, msg)
            diagnostics.append(msg)
            continue
        assert isinstance(record, Face_Record)
        candidates.append((record,
                           max((p.xi for p in by_owner[owner]),
                               key=lambda xi: tolerance_for(
                                   xi,
                                   tolerance_low,
                                   tolerance_high).max_distance)))

    matches = match_candidates(photo_faces    = manifest.faces,
                               candidates     = candidates,
                               tolerance_low  = tolerance_low,
                               tolerance_high = tolerance_high,
                               workers        = workers,
                               counter        = counter)

    decisions = []
    for match in matches:
        triggering = min(
            ((tolerance_for(policy.xi,
                            tolerance_low,
                            tolerance_high).max_distance, policy.pid)
             for policy in by_owner[match.user]
             if match.distance < tolerance_for(
                 policy.xi,
                 tolerance_low,
                 tolerance_high).max_distance))
        decisions.append(Redaction_Decision(
            face_index        = match.face_index,
            protected_user    = match.user,
            triggering_policy = triggering[1],
            distance          = match.distance))
    timings["matching"] = elapsed_ms(start)

    return Check_Result(decisions, diagnostics, timings)


##############################################################################
# Redaction
##############################################################################

class Redactor(metaclass=abc.ABCMeta):
    """Where a real platform plugs in its face replacement

    Implementations must be idempotent: applying the same decisions to
    the same photo twice has the effect of applying them once.
    """
    @abc.abstractmethod
    def apply(self, photo_id, decisions):
        """Carry out the decisions for a photo

        :returns: an acknowledgment, included in the report
        :rtype: dict
        """


class Recording_Redactor(Redactor):
    """Remembers the last decision list applied per photo"""
    def __init__(self):
        super().__init__()
        self.applied = {}
        self.lock    = threading.Lock()

    def apply(self, photo_id, decisions):
        assert isinstance(photo_id, str)
        assert isinstance(decisions, list)
        with self.lock:
            self.applied[photo_id] = list(decisions)
        return {"photo_id" : photo_id,
                "replaced" : len({d.face_index for d in decisions})}


class Photo_Locks:
    """One lock per photo id, so apply calls for a photo never overlap

    An entry lives only while somebody holds or waits for its lock.

    :attribute locks: photo id to lock and number of holders
    :type: dict[str, list]
    """
    def __init__(self):
        self.locks = {}
        self.guard = threading.Lock()

    @contextmanager
    def held(self, photo_id):
        assert isinstance(photo_id, str)
        with self.guard:
            entry = self.locks.setdefault(photo_id, [threading.Lock(), 0])
            entry[1] += 1
        try:
            with entry[0]:
                yield
        finally:
            with self.guard:
                entry[1] -= 1
                if entry[1] == 0:
                    del self.locks[photo_id]


class Enforcement_Report:
    def __init__(self, photo_id, decisions, ack, diagnostics, timings):
        self.photo_id    = photo_id
        self.decisions   = decisions
        self.ack         = ack
        self.diagnostics = diagnostics
        self.timings     = timings

    def to_json(self, include_timings=True):
        rv = {"photo_id"     : self.photo_id,
              "decisions"    : [d.to_json() for d in self.decisions],
              "redactor_ack" : self.ack,
              "diagnostics"  : list(self.diagnostics)}
        if include_timings:
            rv["timings_ms"] = dict(self.timings)
        return rv


def apply_decisions(manifest, result, redactor, photo_locks=None):
    """Hand the decisions of a finished check to a redactor

    :raises Redactor_Failure: if the redactor fails; the exception \
    carries the decisions
    :rtype: Enforcement_Report
    """
    assert isinstance(manifest, Photo_Manifest)
    assert isinstance(result, Check_Result)
    assert isinstance(redactor, Redactor)
    assert isinstance(photo_locks, Photo_Locks) or photo_locks is None

    start = time.perf_counter()
    try:
        with (photo_locks or Photo_Locks()).held(manifest.photo_id):
            ack = redactor.apply(manifest.photo_id, list(result.decisions))
    except Exception as err:  # pylint: disable=broad-except
        raise Redactor_Failure(
            Location("<redactor %s>" % manifest.photo_id),
            "redactor failed: %s" % err,
            result.decisions) from err
    timings = dict(result.timings)
    timings["redaction"] = elapsed_ms(start)

    return Enforcement_Report(photo_id    = manifest.photo_id,
                              decisions   = result.decisions,
                              ack         = ack,
                              diagnostics = result.diagnostics,
                              timings     = timings)


def enforce(mh, manifest, redactor, tree, records,
            photo_locks = None,
            **kwargs):
    """Check a photo and hand the decisions to a redactor

    Takes the same keyword arguments as :func:`check_photo`.

    :raises Redactor_Failure: if the redactor fails; the exception \
    carries the decisions
    :rtype: Enforcement_Report
    """
    assert isinstance(redactor, Redactor)

    result = check_photo(mh, manifest, tree, records, **kwargs)
    return apply_decisions(manifest, result, redactor, photo_locks)
