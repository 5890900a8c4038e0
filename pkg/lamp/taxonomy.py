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

import json
from difflib import get_close_matches

from lamp.errors import Location, Message_Handler
from lamp.policy import normalize_text

ROOT_KEYWORD = "any place"
ROOT_PARENT  = "ROOT"
MAX_DEPTH    = 4


class Semantic_Taxonomy:
    """Keyword hierarchy for semantic locations

    A tree of place categories rooted at "any place", with at most
    four levels (root included). Keywords are unique.

    :attribute parents: keyword to parent keyword (None for the root)
    :type: dict[str, str]
    """
    def __init__(self):
        self.parents = {}
        self.order   = []

    def __len__(self):
        return len(self.parents)

    def __contains__(self, keyword):
        return self.contains(keyword)

    def contains(self, keyword):
        assert isinstance(keyword, str)
        return keyword in self.parents

    def keywords(self):
        """All keywords in declaration order

        :rtype: list[str]
        """
        return list(self.order)

    def parent_of(self, keyword):
        assert keyword in self.parents
        return self.parents[keyword]

    def ancestors(self, keyword):
        """The chain from a keyword up to the root, both included

        :rtype: list[str]
        """
        assert keyword in self.parents
        rv = []
        ptr = keyword
        while ptr is not None:
            rv.append(ptr)
            ptr = self.parents[ptr]
        return rv

    def depth(self, keyword):
        return len(self.ancestors(keyword))

    def children(self):
        rv = {keyword: [] for keyword in self.order}
        for keyword in self.order:
            parent = self.parents[keyword]
            if parent is not None:
                rv[parent].append(keyword)
        return rv

    def suggest(self, keyword):
        matches = get_close_matches(word          = keyword,
                                    possibilities = self.order,
                                    n             = 1)
        if matches:
            return matches[0]
        else:
            return None

    def add(self, mh, keyword, parent, location):
        """Declare a keyword

        Parents may be declared later; the structure is checked by
        :meth:`validate` once everything has been added.

        :param parent: parent keyword, or None for the root
        :type parent: str
        """
        assert isinstance(mh, Message_Handler)
        assert isinstance(keyword, str)
        assert isinstance(parent, str) or parent is None
        assert isinstance(location, Location)

        keyword = normalize_text(keyword)
        if not keyword:
            mh.error(location,
                     "keyword must not be empty",
                     "InvalidTaxonomy")
        if keyword in self.parents:
            mh.error(location,
                     "duplicate keyword %s" % keyword,
                     "InvalidTaxonomy")
        self.parents[keyword] = \
            None if parent is None else normalize_text(parent)
        self.order.append(keyword)

    def validate(self, mh, location):
        """Check that the keywords form a tree of bounded depth

        :raises LAMP_Error: InvalidTaxonomy
        """
        assert isinstance(mh, Message_Handler)
        assert isinstance(location, Location)

        roots = [keyword
                 for keyword in self.order
                 if self.parents[keyword] is None]
        if roots != [ROOT_KEYWORD]:
            mh.error(location,
                     "taxonomy must have exactly one root '%s', found %s" %
                     (ROOT_KEYWORD,
                      ", ".join(roots) if roots else "none"),
                     "InvalidTaxonomy")

        for keyword in self.order:
            parent = self.parents[keyword]
            if parent is not None and parent not in self.parents:
                mh.error(location,
                         "parent %s of %s is not declared" % (parent,
                                                              keyword),
                         "InvalidTaxonomy")

        depth = {ROOT_KEYWORD: 1}
        for keyword in self.order:
            chain = []
            ptr = keyword
            while ptr not in depth:
                if ptr in chain:
                    mh.error(location,
                             "cycle in taxonomy: %s" %
                             " -> ".join(chain + [ptr]),
                             "InvalidTaxonomy")
                chain.append(ptr)
                ptr = self.parents[ptr]
            base = depth[ptr]
            for offset, item in enumerate(reversed(chain), 1):
                depth[item] = base + offset
            if depth[keyword] > MAX_DEPTH:
                mh.error(location,
                         "%s is %u levels deep, at most %u are allowed" %
                         (keyword, depth[keyword], MAX_DEPTH),
                         "InvalidTaxonomy")

    @classmethod
    def from_json(cls, mh, data, location):
        """Build a taxonomy from its file representation

        The file is a JSON array of ``[keyword, parent]`` pairs (or
        ``{"keyword": ..., "parent": ...}`` objects); the root has
        parent "ROOT".

        :raises LAMP_Error: InvalidTaxonomy
        :rtype: Semantic_Taxonomy
        """
        assert isinstance(mh, Message_Handler)
        assert isinstance(location, Location)

        if not isinstance(data, list):
            mh.error(location,
                     "taxonomy must be a JSON array",
                     "InvalidTaxonomy")

        taxonomy = cls()
        for n, row in enumerate(data, 1):
            if isinstance(row, dict):
                keyword = row.get("keyword")
                parent  = row.get("parent")
            elif isinstance(row, list) and len(row) == 2:
                keyword, parent = row
            else:
                keyword = parent = None
            if not isinstance(keyword, str) or not isinstance(parent, str):
                mh.error(location,
                         "row %u is not a [keyword, parent] pair" % n,
                         "InvalidTaxonomy")
            taxonomy.add(mh,
                         keyword,
                         None if parent == ROOT_PARENT else parent,
                         location)

        taxonomy.validate(mh, location)
        return taxonomy

    @classmethod
    def load(cls, mh, file_name):
        assert isinstance(mh, Message_Handler)
        assert isinstance(file_name, str)

        location = Location(file_name)
        try:
            with open(file_name, "r", encoding="UTF-8") as fd:
                data = json.load(fd)
        except OSError as err:
            mh.error(location,
                     "cannot read taxonomy: %s" % err.strerror,
                     "IOFailure")
        except ValueError as err:
            mh.error(location,
                     "taxonomy is not valid JSON: %s" % str(err),
                     "InvalidTaxonomy")
        return cls.from_json(mh, data, location)

    def to_json(self):
        return [[keyword,
                 ROOT_PARENT
                 if self.parents[keyword] is None
                 else self.parents[keyword]]
                for keyword in self.order]

    @classmethod
    def create_default(cls, mh):
        """The built-in taxonomy used until another one is loaded

        :rtype: Semantic_Taxonomy
        """
        tree = {
            "entertainment" : {"bar"           : ["sports bar", "wine bar"],
                               "pub"           : [],
                               "shopping mall" : [],
                               "cinema"        : [],
                               "gym"           : [],
                               "nightclub"     : []},
            "medical"       : {"hospital"      : [],
                               "clinic"        : ["dental clinic"],
                               "urgent care"   : [],
                               "pharmacy"      : []},
            "education"     : {"university"    : [],
                               "school"        : [],
                               "library"       : []},
            "business"      : {"company"       : [],
                               "bank"          : [],
                               "hotel"         : []},
            "outdoors"      : {"park"          : [],
                               "beach"         : []},
            "residential"   : {"home"          : [],
                               "apartment"     : []},
            "religion"      : {"church"        : [],
                               "mosque"        : [],
                               "temple"        : []},
            "transport"     : {"airport"       : [],
                               "train station" : []},
        }

        location = Location("<default taxonomy>")
        taxonomy = cls()
        taxonomy.add(mh, ROOT_KEYWORD, None, location)
        for generic, basics in tree.items():
            taxonomy.add(mh, generic, ROOT_KEYWORD, location)
            for basic, refinements in basics.items():
                taxonomy.add(mh, basic, generic, location)
                for refinement in refinements:
                    taxonomy.add(mh, refinement, basic, location)
        taxonomy.validate(mh, location)
        return taxonomy
