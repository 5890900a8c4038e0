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

from lamp.errors import Location, Message_Handler
from lamp.config import Engine_Config
from lamp.policy import Lampi_Policy, validate_policy
from lamp.taxonomy import Semantic_Taxonomy
from lamp.rwlock import Reader_Writer_Lock
from lamp.dlp import DLP_Tree
from lamp.face import Face_Record
from lamp.store import (Policy_Store, Face_Store, save_taxonomy,
                        load_taxonomy, data_files)
from lamp import enforcement


class Engine:
    """The one engine behind both the command-line tool and the service

    The engine owns the taxonomy, the stores and the DLP tree. Photo
    checks run under the read lock and may overlap; redactors run
    outside it. Every write takes the write lock, updates the tree in
    place and appends to the log.

    :attribute config: the configuration in use
    :type: Engine_Config

    :attribute tree: the policy index
    :type: DLP_Tree

    :attribute redactor: used by :meth:`enforce` unless another one \
    is given
    :type: Redactor
    """
    def __init__(self, mh, config, redactor=None):
        assert isinstance(mh, Message_Handler)
        assert isinstance(config, Engine_Config)
        assert isinstance(redactor, enforcement.Redactor) or redactor is None

        config.validate(mh, Location("<configuration>"))
        self.config = config

        if config.data_dir is not None:
            try:
                os.makedirs(config.data_dir, exist_ok=True)
            except OSError as err:
                mh.error(Location(config.data_dir),
                         "cannot create data directory: %s" % err.strerror,
                         "IOFailure")
        policy_file, face_file, self.taxonomy_file = \
            data_files(config.data_dir)

        self.lock         = Reader_Writer_Lock()
        self.policy_store = Policy_Store(policy_file)
        self.face_store   = Face_Store(face_file)
        self.taxonomy     = load_taxonomy(mh, self.taxonomy_file)

        self.policy_store.load(mh)
        self.face_store.load(mh)
        self.tree = self.build_tree(mh, self.taxonomy)

        self.redactor    = redactor or enforcement.Recording_Redactor()
        self.photo_locks = enforcement.Photo_Locks()

    def build_tree(self, mh, taxonomy):
        tree = DLP_Tree(taxonomy        = taxonomy,
                        fanout          = self.config.fanout,
                        point_epsilon   = self.config.point_epsilon,
                        strict_keywords = self.config.strict_keywords)
        location = Location(self.policy_store.log.file_name or "<memory>")
        for policy in self.policy_store.policies.values():
            validate_policy(mh, policy, taxonomy, location)
            tree.insert(mh, policy, location)
        return tree

    @property
    def policy_count(self):
        return len(self.tree)

    @property
    def enrolled_count(self):
        return len(self.face_store)

    ##########################################################################
    # Policies

    def add_policies(self, mh, items):
        """Validate and store a batch of policies

        Nothing is stored unless every policy in the batch is valid
        and has a fresh pid. The batch is logged as one record; if
        that fails the tree is left as it was.

        :param items: policies with the location they were read from
        :type items: list[tuple[Lampi_Policy, Location]]

        :raises LAMP_Error: any validation error, DuplicatePolicyId
        """
        assert isinstance(mh, Message_Handler)
        assert isinstance(items, list)

        with self.lock.write_locked():
            seen = set()
            for policy, location in items:
                assert isinstance(policy, Lampi_Policy)
                validate_policy(mh, policy, self.taxonomy, location)
                if policy.pid in seen or policy.pid in self.tree:
                    mh.error(location,
                             "duplicate policy id %u" % policy.pid,
                             "DuplicatePolicyId")
                seen.add(policy.pid)

            if not items:
                return

            inserted = []
            try:
                for policy, location in items:
                    self.tree.insert(mh, policy, location)
                    inserted.append(policy)
                self.policy_store.record_add_all(mh,
                                                 [policy
                                                  for policy, _ in items])
            except Exception:
                for policy in inserted:
                    self.tree.remove(mh, policy.pid)
                raise

    def add_policy(self, mh, policy, location=None):
        self.add_policies(mh, [(policy,
                                location or
                                Location("<policy %u>" % policy.pid))])
        return policy

    def remove_policy(self, mh, pid, location=None):
        """Delete a policy

        :raises LAMP_Error: UnknownPolicyId
        :rtype: Lampi_Policy
        """
        assert isinstance(mh, Message_Handler)
        with self.lock.write_locked():
            policy = self.tree.remove(mh, pid, location)
            try:
                self.policy_store.record_remove(mh, pid)
            except Exception:
                self.tree.insert(mh, policy)
                raise
            return policy

    def get_policy(self, mh, pid, location=None):
        assert isinstance(mh, Message_Handler)
        with self.lock.read_locked():
            if pid not in self.tree:
                mh.error(location or Location("<policy %i>" % pid),
                         "unknown policy id %i" % pid,
                         "UnknownPolicyId")
            return self.tree.policies[pid]

    def list_policies(self, owner=None):
        with self.lock.read_locked():
            return [policy
                    for _, policy in sorted(self.tree.policies.items())
                    if owner is None or policy.owner == owner]

    ##########################################################################
    # Faces

    def enroll(self, mh, records):
        """Enroll (or re-enroll) users; a later record replaces an earlier

        :type records: list[Face_Record]
        """
        assert isinstance(mh, Message_Handler)
        with self.lock.write_locked():
            for record in records:
                assert isinstance(record, Face_Record)
                self.face_store.enroll(mh, record)

    ##########################################################################
    # Photos

    def match_settings(self):
        return {"tolerance_low"  : self.config.tolerance_low,
                "tolerance_high" : self.config.tolerance_high,
                "workers"        : self.config.workers}

    def check_photo(self, mh, manifest):
        """Decide which faces of a photo to replace

        :type manifest: Photo_Manifest
        :rtype: Check_Result
        """
        with self.lock.read_locked():
            return enforcement.check_photo(mh,
                                           manifest,
                                           self.tree,
                                           self.face_store.records,
                                           **self.match_settings())

    def enforce(self, mh, manifest, redactor=None):
        """Check a photo and apply the decisions

        The redactor runs after the read lock is released; only the
        photo's own lock is held while it works.

        :raises Redactor_Failure: if the redactor fails
        :rtype: Enforcement_Report
        """
        result = self.check_photo(mh, manifest)
        return enforcement.apply_decisions(manifest,
                                           result,
                                           redactor or self.redactor,
                                           self.photo_locks)

    ##########################################################################
    # Taxonomy

    def load_taxonomy(self, mh, taxonomy, location):
        """Replace the active taxonomy

        :raises LAMP_Error: InvalidTaxonomy if a stored semantic policy \
        uses a keyword the new taxonomy lacks
        """
        assert isinstance(mh, Message_Handler)
        assert isinstance(taxonomy, Semantic_Taxonomy)
        assert isinstance(location, Location)

        with self.lock.write_locked():
            for policy in self.policy_store.policies.values():
                if not policy.is_exact and \
                   not taxonomy.contains(policy.loc.keyword):
                    mh.error(location,
                             "keyword %s is used by policy %u" %
                             (policy.loc.keyword, policy.pid),
                             "InvalidTaxonomy")
            tree = self.build_tree(mh, taxonomy)
            save_taxonomy(mh, self.taxonomy_file, taxonomy)
            self.taxonomy = taxonomy
            self.tree     = tree
