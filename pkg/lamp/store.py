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

import os
import json
import threading

from lamp.errors import Location, Message_Handler
from lamp.policy import Lampi_Policy, policy_from_json, policy_to_json
from lamp.face import Face_Record
from lamp.taxonomy import Semantic_Taxonomy

#
# Persistence. Policies and face records live in append-only JSON
# lines logs that are replayed on start-up; the active taxonomy is a
# plain JSON file that is replaced atomically. A store created
# without a file name keeps everything in memory only.
#

POLICY_LOG    = "policies.jsonl"
FACE_LOG      = "faces.jsonl"
TAXONOMY_FILE = "taxonomy.json"


class Json_Lines_Log:
    """An append-only file with one JSON value per line

    :attribute file_name: the log file, or None for no persistence
    :type: str
    """
    def __init__(self, file_name):
        assert isinstance(file_name, str) or file_name is None
        self.file_name = file_name
        self.lock      = threading.Lock()

    def replay(self, mh):
        """Read back every record in the log

        A final line without its newline is what a crash during
        append leaves behind: it is reported, cut from the file and
        skipped. Any other malformed line is an error.

        :raises LAMP_Error: MalformedInput or IOFailure
        :rtype: list[tuple[Location, object]]
        """
        assert isinstance(mh, Message_Handler)
        if self.file_name is None or not os.path.exists(self.file_name):
            return []

        try:
            with open(self.file_name, "rb") as fd:
                content = fd.read()
        except OSError as err:
            mh.error(Location(self.file_name),
                     "cannot read log: %s" % err.strerror,
                     "IOFailure")

        rv     = []
        offset = 0
        lines  = content.split(b"\n")
        for line_no, raw in enumerate(lines, 1):
            torn = line_no == len(lines)
            location = Location(self.file_name, line_no)
            if not raw.strip():
                offset += len(raw) + 1
                continue
            try:
                rv.append((location, json.loads(raw.decode("UTF-8"))))
            except ValueError:
                if not torn:
                    mh.error(location,
                             "record is not valid JSON",
                             "MalformedInput")
                mh.warning(location,
                           "ignoring incomplete final record")
                self.truncate(mh, offset)
                return rv
            offset += len(raw) + 1

        if lines[-1].strip():
            self.terminate(mh)
        return rv

    def terminate(self, mh):
        try:
            with open(self.file_name, "ab") as fd:
                fd.write(b"\n")
        except OSError as err:
            mh.error(Location(self.file_name),
                     "cannot repair log: %s" % err.strerror,
                     "IOFailure")

    def truncate(self, mh, length):
        try:
            with open(self.file_name, "r+b") as fd:
                fd.truncate(length)
        except OSError as err:
            mh.error(Location(self.file_name),
                     "cannot repair log: %s" % err.strerror,
                     "IOFailure")

    def append(self, mh, value):
        """Add one record; a failed write is cut from the file again

        :raises LAMP_Error: IOFailure
        """
        assert isinstance(mh, Message_Handler)
        if self.file_name is None:
            return
        line = json.dumps(value, sort_keys=True) + "\n"
        with self.lock:
            try:
                length = os.path.getsize(self.file_name)
            except OSError:
                length = 0
            try:
                with open(self.file_name, "a", encoding="UTF-8") as fd:
                    fd.write(line)
                    fd.flush()
                    os.fsync(fd.fileno())
            except OSError as err:
                try:
                    os.truncate(self.file_name, length)
                except OSError:
                    pass
                mh.error(Location(self.file_name),
                         "cannot append to log: %s" % err.strerror,
                         "IOFailure")


class Policy_Store:
    """The policy database: a log of additions and removals

    Replaying the log yields the policies in the order they were
    added, which is the order in which the tree is rebuilt.

    :attribute policies: current policies by pid
    :type: dict[int, Lampi_Policy]
    """
    def __init__(self, file_name=None):
        self.log      = Json_Lines_Log(file_name)
        self.policies = {}

    def load(self, mh):
        assert isinstance(mh, Message_Handler)
        self.policies = {}
        for location, record in self.log.replay(mh):
            if not isinstance(record, dict) or \
               record.get("op") not in ("add", "remove"):
                mh.error(location,
                         "expected an add or remove record",
                         "MalformedInput")
            if record["op"] == "add":
                if "policies" in record:
                    batch = record["policies"]
                    if not isinstance(batch, list):
                        mh.error(location,
                                 "expected a list of policies",
                                 "MalformedInput")
                else:
                    batch = [record.get("policy")]
                for obj in batch:
                    policy = policy_from_json(mh, obj, location)
                    if policy.pid in self.policies:
                        mh.error(location,
                                 "policy %u is added twice" % policy.pid,
                                 "MalformedInput")
                    self.policies[policy.pid] = policy
            else:
                pid = record.get("pid")
                if pid not in self.policies:
                    mh.error(location,
                             "removal of policy %s that does not exist" %
                             pid,
                             "MalformedInput")
                del self.policies[pid]
        return self.policies

    def record_add(self, mh, policy):
        self.record_add_all(mh, [policy])

    def record_add_all(self, mh, policies):
        """Log a batch of additions as a single record

        A batch is either replayed in full or not at all.
        """
        assert isinstance(policies, list) and policies
        assert all(isinstance(policy, Lampi_Policy) for policy in policies)
        if len(policies) == 1:
            record = {"op"     : "add",
                      "policy" : policy_to_json(policies[0])}
        else:
            record = {"op"       : "add",
                      "policies" : [policy_to_json(policy)
                                    for policy in policies]}
        self.log.append(mh, record)
        for policy in policies:
            self.policies[policy.pid] = policy

    def record_remove(self, mh, pid):
        assert pid in self.policies
        self.log.append(mh, {"op"  : "remove",
                             "pid" : pid})
        del self.policies[pid]


class Face_Store:
    """Enrolled face vectors by user; the last record of a user wins"""
    def __init__(self, file_name=None):
        self.log     = Json_Lines_Log(file_name)
        self.records = {}

    def load(self, mh):
        assert isinstance(mh, Message_Handler)
        self.records = {}
        for location, obj in self.log.replay(mh):
            record = Face_Record.from_json(mh, location, obj)
            self.records[record.user] = record
        return self.records

    def enroll(self, mh, record):
        assert isinstance(record, Face_Record)
        self.log.append(mh, record.to_json())
        self.records[record.user] = record

    def get(self, user):
        return self.records.get(user)

    def __len__(self):
        return len(self.records)


def save_taxonomy(mh, file_name, taxonomy):
    assert isinstance(mh, Message_Handler)
    assert isinstance(taxonomy, Semantic_Taxonomy)
    if file_name is None:
        return
    tmp_name = file_name + ".tmp"
    try:
        with open(tmp_name, "w", encoding="UTF-8") as fd:
            json.dump(taxonomy.to_json(), fd, indent=2)
            fd.write("\n")
        os.replace(tmp_name, file_name)
    except OSError as err:
        mh.error(Location(file_name),
                 "cannot write taxonomy: %s" % err.strerror,
                 "IOFailure")


def load_taxonomy(mh, file_name):
    """The stored taxonomy, or the built-in one if none is stored"""
    assert isinstance(mh, Message_Handler)
    if file_name is None or not os.path.exists(file_name):
        return Semantic_Taxonomy.create_default(mh)
    return Semantic_Taxonomy.load(mh, file_name)


def data_files(data_dir):
    """Paths of the three persistent files (all None in memory)

    :rtype: tuple[str, str, str]
    """
    if data_dir is None:
        return None, None, None
    return (os.path.join(data_dir, POLICY_LOG),
            os.path.join(data_dir, FACE_LOG),
            os.path.join(data_dir, TAXONOMY_FILE))
