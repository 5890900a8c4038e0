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

import bisect
import datetime

from lamp.errors import Location, Message_Handler, LAMP_Error, Kind
from lamp.policy import (Geo_Point, Exact_Address, Semantic_Keyword,
                         Lampi_Policy, Region, Bounding_Box, Address_Prefix,
                         interval_contains, normalize_text)
from lamp.taxonomy import Semantic_Taxonomy

#
# The DLP (Dual-Location-Policy) tree. The exact side is a B+ tree
# over address keys (nation, state, city, street, pid) so that the
# policies of one city sit in the same or in sibling leaves; every
# internal entry carries the region (key range and bounding box)
# covering its child. The semantic side mirrors the keyword taxonomy
# and is searched bottom-up via parent pointers.
#

DEFAULT_FANOUT        = 100
DEFAULT_POINT_EPSILON = 0.0005
MAX_PHOTO_KEYWORDS    = 5


class Photo_Location:
    """Where and when a photo was taken

    :attribute timestamp: local civil time of the photo
    :type: datetime.datetime

    :attribute address: optional address tag
    :type: Exact_Address

    :attribute point: optional geotag
    :type: Geo_Point

    :attribute keywords: up to five normalised semantic keywords
    :type: list[str]
    """
    __slots__ = ("timestamp", "address", "point", "keywords")

    def __init__(self, timestamp, address=None, point=None, keywords=()):
        assert isinstance(timestamp, datetime.datetime)
        assert isinstance(address, Exact_Address) or address is None
        assert isinstance(point, Geo_Point) or point is None
        self.timestamp = timestamp
        self.address   = address
        self.point     = point
        self.keywords  = []
        for keyword in keywords:
            if isinstance(keyword, Semantic_Keyword):
                keyword = keyword.keyword
            assert isinstance(keyword, str)
            keyword = normalize_text(keyword)
            if keyword not in self.keywords:
                self.keywords.append(keyword)

    def problems(self):
        rv = []
        if self.address is None and self.point is None and \
           not self.keywords:
            rv.append("location needs an address, a point or keywords")
        if len(self.keywords) > MAX_PHOTO_KEYWORDS:
            rv.append("at most %u keywords are allowed, found %u" %
                      (MAX_PHOTO_KEYWORDS, len(self.keywords)))
        if self.address is not None:
            rv += self.address.problems()
        if self.point is not None and not self.point.is_valid():
            rv.append("coordinates %s are out of range" % repr(self.point))
        return rv


##############################################################################
# Predicates shared by the tree and the naive scan
##############################################################################

def area_keys(key):
    """The key itself and the keys of every area enclosing it

    For (fr, idf, paris, rue x) these are the same tuple with the
    street, then the city, then the state blanked out.

    :rtype: list[tuple[str, str, str, str]]
    """
    rv = []
    for depth in range(4, 0, -1):
        candidate = key[:depth] + ("",) * (4 - depth)
        if candidate not in rv:
            rv.append(candidate)
    return rv


def covers_key(stored_key, key):
    """Does a stored address name key or an area enclosing it?"""
    depth = stored_key.index("") if "" in stored_key else 4
    return stored_key[:depth] == key[:depth]


def exact_location_matches(stored_key, stored_point, address, point,
                           epsilon):
    """Does an exact policy location match a photo location?

    An address tag matches a stored address equal to it on all four
    normalised fields, or a stored area address (finer fields left
    empty, e.g. only a city) that encloses it. Without an address, a
    geotag matches a stored point that is within epsilon degrees on
    both axes.
    """
    if address is not None:
        return covers_key(stored_key, address.key())
    elif point is not None:
        return stored_point is not None and \
            abs(stored_point.lat - point.lat) <= epsilon and \
            abs(stored_point.lon - point.lon) <= epsilon
    else:
        return False


def policy_matches(policy, loc, keyword_closure, epsilon):
    """Does a policy mark a photo location as sensitive?

    :param keyword_closure: the photo keywords and all their ancestors
    :type keyword_closure: set[str]
    """
    assert isinstance(policy, Lampi_Policy)
    assert isinstance(loc, Photo_Location)

    if policy.is_exact:
        if not exact_location_matches(policy.loc.key(),
                                      policy.loc.point,
                                      loc.address,
                                      loc.point,
                                      epsilon):
            return False
    elif policy.loc.keyword not in keyword_closure:
        return False
    return interval_contains(policy.interval, loc.timestamp)


def unknown_keyword(keyword):
    return LAMP_Error(Location("<photo location>"),
                      Kind.SYS_ERROR,
                      "unknown keyword %s" % keyword,
                      "UnknownKeyword")


def keyword_closure(taxonomy, keywords, strict):
    assert isinstance(taxonomy, Semantic_Taxonomy)
    rv = set()
    for keyword in keywords:
        if taxonomy.contains(keyword):
            rv.update(taxonomy.ancestors(keyword))
        elif strict:
            raise unknown_keyword(keyword)
    return rv


def naive_scan(policies, loc, taxonomy,
               point_epsilon=DEFAULT_POINT_EPSILON,
               strict=False):
    """Reference policy retrieval: test every policy

    :param policies: every stored policy
    :type policies: iterable[Lampi_Policy]

    :param loc: the photo location
    :type loc: Photo_Location

    :rtype: set[int]
    """
    assert isinstance(loc, Photo_Location)

    closure = keyword_closure(taxonomy, loc.keywords, strict)
    return {policy.pid
            for policy in policies
            if policy_matches(policy, loc, closure, point_epsilon)}


##############################################################################
# Exact side
##############################################################################

class Exact_Leaf_Entry:
    """One exact policy: its address, point, interval and id"""
    __slots__ = ("street", "city", "state", "nation", "point",
                 "gamma", "pid", "key")

    def __init__(self, policy):
        assert isinstance(policy, Lampi_Policy)
        assert isinstance(policy.loc, Exact_Address)
        self.street = policy.loc.street
        self.city   = policy.loc.city
        self.state  = policy.loc.state
        self.nation = policy.loc.nation
        self.point  = policy.loc.point
        self.gamma  = policy.interval
        self.pid    = policy.pid
        self.key    = policy.loc.key() + (policy.pid,)

    def address(self):
        return Exact_Address(self.street, self.city, self.state,
                             self.nation, self.point)


class Entry_Region(Region):
    """Region covering everything below an internal entry

    :attribute low: smallest entry key below
    :attribute high: largest entry key below
    :attribute bbox: box around all stored points below (None if \
    there are none)
    """
    __slots__ = ("low", "high", "bbox")

    def __init__(self, low, high, bbox):
        assert isinstance(low, tuple) and isinstance(high, tuple)
        assert low <= high
        assert isinstance(bbox, Bounding_Box) or bbox is None
        self.low  = low
        self.high = high
        self.bbox = bbox

    def extended(self, key, point):
        if point is None:
            bbox = self.bbox
        elif self.bbox is None:
            bbox = Bounding_Box.around(point)
        else:
            bbox = self.bbox.union(Bounding_Box.around(point))
        return Entry_Region(min(self.low, key), max(self.high, key), bbox)

    @property
    def prefix(self):
        common = []
        for low, high in zip(self.low[:3], self.high[:3]):
            if low != high:
                break
            common.append(low)
        return Address_Prefix(tuple(common))

    def encloses_key(self, key):
        return self.low[:4] <= key <= self.high[:4]

    def contains_point(self, point, epsilon=0.0):
        assert isinstance(point, Geo_Point)
        return self.bbox is not None and \
            self.bbox.contains_point(point, epsilon)

    def contains_address(self, address):
        assert isinstance(address, Exact_Address)
        return self.encloses_key(address.key()) and \
            self.prefix.contains_address(address) and \
            (address.point is None or self.contains_point(address.point))

    def contains_region(self, other):
        assert isinstance(other, Region)
        if not isinstance(other, Entry_Region):
            return False
        if not (self.low <= other.low and other.high <= self.high):
            return False
        if other.bbox is None:
            return True
        return self.bbox is not None and self.bbox.contains_region(other.bbox)

    def __eq__(self, other):
        return isinstance(other, Entry_Region) and \
            (self.low, self.high, self.bbox) == \
            (other.low, other.high, other.bbox)

    def __hash__(self):
        return hash((self.low, self.high))


def union_box(boxes):
    rv = None
    for box in boxes:
        if box is None:
            continue
        rv = box if rv is None else rv.union(box)
    return rv


class Leaf_Node:
    __slots__ = ("keys", "entries")
    is_leaf = True

    def __init__(self):
        self.keys    = []
        self.entries = []

    def compute_region(self):
        assert self.entries
        return Entry_Region(self.keys[0],
                            self.keys[-1],
                            union_box(Bounding_Box.around(entry.point)
                                      for entry in self.entries
                                      if entry.point is not None))

    def split(self, cut):
        right = Leaf_Node()
        right.keys    = self.keys[cut:]
        right.entries = self.entries[cut:]
        del self.keys[cut:]
        del self.entries[cut:]
        return right


class Internal_Entry:
    """Child pointer with the region covering the child"""
    __slots__ = ("region", "child")

    def __init__(self, region, child):
        assert isinstance(region, Entry_Region)
        assert isinstance(child, (Leaf_Node, Internal_Node))
        self.region = region
        self.child  = child


class Internal_Node:
    __slots__ = ("lows", "entries")
    is_leaf = False

    def __init__(self):
        self.lows    = []
        self.entries = []

    def child_index(self, key):
        return max(bisect.bisect_right(self.lows, key) - 1, 0)

    def insert_child(self, idx, child):
        region = child.compute_region()
        self.lows.insert(idx, region.low)
        self.entries.insert(idx, Internal_Entry(region, child))

    def remove_child(self, idx):
        del self.lows[idx]
        del self.entries[idx]

    def set_region(self, idx, region):
        self.lows[idx] = region.low
        self.entries[idx].region = region

    def compute_region(self):
        assert self.entries
        return Entry_Region(self.entries[0].region.low,
                            self.entries[-1].region.high,
                            union_box(entry.region.bbox
                                      for entry in self.entries))

    def split(self, cut):
        right = Internal_Node()
        right.lows    = self.lows[cut:]
        right.entries = self.entries[cut:]
        del self.lows[cut:]
        del self.entries[cut:]
        return right


##############################################################################
# Semantic side
##############################################################################

class Semantic_Node:
    """Taxonomy keyword with the policies attached to it

    :attribute keyword: the keyword of this node
    :type: str

    :attribute policies: policy ids attached here, with their intervals
    :type: dict[int, Time_Interval]

    :attribute parent: the more generic node (None for the root)
    :type: Semantic_Node
    """
    __slots__ = ("keyword", "policies", "parent")

    def __init__(self, keyword):
        assert isinstance(keyword, str)
        self.keyword  = keyword
        self.policies = {}
        self.parent   = None


##############################################################################
# The tree
##############################################################################

class DLP_Tree:
    """Dual index from locations to LAMPi policy ids

    The tree does no locking itself. Callers hold a
    :class:`~lamp.rwlock.Reader_Writer_Lock` around it: lookups under
    the read lock, insert and remove under the write lock.

    :attribute fanout: maximum number of entries per node (B)
    :type: int

    :attribute policies: every indexed policy
    :type: dict[int, Lampi_Policy]
    """
    def __init__(self, taxonomy,
                 fanout          = DEFAULT_FANOUT,
                 point_epsilon   = DEFAULT_POINT_EPSILON,
                 strict_keywords = False):
        assert isinstance(taxonomy, Semantic_Taxonomy)
        assert isinstance(fanout, int) and fanout >= 2
        assert isinstance(point_epsilon, float) and point_epsilon >= 0
        assert isinstance(strict_keywords, bool)

        self.taxonomy        = taxonomy
        self.fanout          = fanout
        self.point_epsilon   = point_epsilon
        self.strict_keywords = strict_keywords

        self.policies   = {}
        self.n_exact    = 0
        self.exact_root = Leaf_Node()

        self.semantic_nodes = {keyword: Semantic_Node(keyword)
                               for keyword in taxonomy.keywords()}
        for keyword, node in self.semantic_nodes.items():
            parent = taxonomy.parent_of(keyword)
            if parent is not None:
                node.parent = self.semantic_nodes[parent]

    @property
    def policy_count(self):
        return len(self.policies)

    def __len__(self):
        return len(self.policies)

    def __contains__(self, pid):
        return pid in self.policies

    ##########################################################################
    # Updates

    def insert(self, mh, policy, location=None):
        """Index a validated policy

        :param mh: The message handler to use
        :type mh: Message_Handler

        :param policy: the policy, already checked by \
        :func:`~lamp.policy.validate_policy`
        :type policy: Lampi_Policy

        :raises LAMP_Error: DuplicatePolicyId or UnknownKeyword
        """
        assert isinstance(mh, Message_Handler)
        assert isinstance(policy, Lampi_Policy)
        assert policy.is_exact == isinstance(policy.loc, Exact_Address)
        assert isinstance(location, Location) or location is None

        if location is None:
            location = Location("<policy %u>" % policy.pid)

        if policy.pid in self.policies:
            mh.error(location,
                     "duplicate policy id %u" % policy.pid,
                     "DuplicatePolicyId")

        if policy.is_exact:
            self.insert_exact(Exact_Leaf_Entry(policy))
            self.n_exact += 1
            self.rebuild_if_too_tall()
        else:
            node = self.semantic_nodes.get(policy.loc.keyword)
            if node is None:
                mh.error(location,
                         "unknown keyword %s" % policy.loc.keyword,
                         "UnknownKeyword")
            node.policies[policy.pid] = policy.interval

        self.policies[policy.pid] = policy

    def insert_exact(self, entry):
        assert isinstance(entry, Exact_Leaf_Entry)

        key  = entry.key
        path = []
        node = self.exact_root
        while not node.is_leaf:
            idx = node.child_index(key)
            path.append((node, idx))
            node = node.entries[idx].child

        pos = bisect.bisect_left(node.keys, key)
        node.keys.insert(pos, key)
        node.entries.insert(pos, entry)

        # Growing the tree at either end (e.g. loading a sorted policy
        # log) leaves the far side of every split as full as possible.
        if pos == len(node.keys) - 1 and \
           all(idx == len(parent.entries) - 1 for parent, idx in path):
            direction = 1
        elif pos == 0 and all(idx == 0 for parent, idx in path):
            direction = -1
        else:
            direction = 0

        child = node
        split = self.split_if_needed(child, direction)
        while path:
            parent, idx = path.pop()
            if split is None:
                parent.set_region(idx,
                                  parent.entries[idx].region.extended(
                                      key, entry.point))
            else:
                parent.set_region(idx, child.compute_region())
                parent.insert_child(idx + 1, split)
            child = parent
            split = self.split_if_needed(child, direction)

        if split is not None:
            root = Internal_Node()
            root.insert_child(0, self.exact_root)
            root.insert_child(1, split)
            self.exact_root = root

    @property
    def min_fill(self):
        """Entries each half of a split keeps at least"""
        return (self.fanout + 1) // 2

    def split_if_needed(self, node, direction):
        if len(node.entries) <= self.fanout:
            return None
        elif direction > 0:
            return node.split(len(node.entries) - self.min_fill)
        elif direction < 0:
            return node.split(self.min_fill)
        else:
            return node.split(len(node.entries) // 2)

    def height_bound(self):
        """Tallest the exact side may grow: 2 + ceil(log_B n)"""
        levels   = 0
        capacity = 1
        while capacity < self.n_exact:
            capacity *= self.fanout
            levels   += 1
        return levels + 2

    def rebuild_if_too_tall(self):
        if self.height() > self.height_bound():
            self.rebuild_exact()

    def rebuild_exact(self):
        """Pack the exact side bottom-up into evenly filled nodes"""
        level = []
        for chunk in self.even_chunks(list(self.iter_exact_entries())):
            leaf = Leaf_Node()
            leaf.keys    = [entry.key for entry in chunk]
            leaf.entries = chunk
            level.append(leaf)

        while len(level) > 1:
            parents = []
            for chunk in self.even_chunks(level):
                parent = Internal_Node()
                for idx, child in enumerate(chunk):
                    parent.insert_child(idx, child)
                parents.append(parent)
            level = parents

        self.exact_root = level[0] if level else Leaf_Node()

    def even_chunks(self, items):
        n_chunks = -(-len(items) // self.fanout)
        start    = 0
        for i in range(n_chunks):
            end = start + (len(items) - start) // (n_chunks - i)
            yield items[start:end]
            start = end

    def remove(self, mh, pid, location=None):
        """Stop protecting with a policy

        Entries are deleted in place; underfull nodes are not merged,
        only empty ones are dropped. Once the tree is too tall for
        what is left in it, the exact side is rebuilt.

        :raises LAMP_Error: UnknownPolicyId
        :returns: the removed policy
        :rtype: Lampi_Policy
        """
        assert isinstance(mh, Message_Handler)
        assert isinstance(pid, int)
        assert isinstance(location, Location) or location is None

        if pid not in self.policies:
            mh.error(location or Location("<policy %i>" % pid),
                     "unknown policy id %i" % pid,
                     "UnknownPolicyId")

        policy = self.policies.pop(pid)
        if policy.is_exact:
            self.remove_exact(policy.loc.key() + (pid,))
            self.n_exact -= 1
            self.rebuild_if_too_tall()
        else:
            del self.semantic_nodes[policy.loc.keyword].policies[pid]
        return policy

    def remove_exact(self, key):
        path = []
        node = self.exact_root
        while not node.is_leaf:
            idx = node.child_index(key)
            path.append((node, idx))
            node = node.entries[idx].child

        pos = bisect.bisect_left(node.keys, key)
        assert pos < len(node.keys) and node.keys[pos] == key
        del node.keys[pos]
        del node.entries[pos]

        child = node
        while path:
            parent, idx = path.pop()
            if child.entries:
                parent.set_region(idx, child.compute_region())
            else:
                parent.remove_child(idx)
            child = parent

        while not self.exact_root.is_leaf and \
              len(self.exact_root.entries) == 1:
            self.exact_root = self.exact_root.entries[0].child
        if not self.exact_root.is_leaf and not self.exact_root.entries:
            self.exact_root = Leaf_Node()

    ##########################################################################
    # Lookups

    def lookup_exact(self, address, point, timestamp):
        """Top-down search of the exact side

        With an address, returns the policies stored for exactly that
        address or for an area (city, state or nation) enclosing it;
        with only a point, those whose stored point is within
        the point epsilon. Either way only policies whose interval
        contains the timestamp are returned.

        :rtype: set[int]
        """
        assert isinstance(address, Exact_Address) or address is None
        assert isinstance(point, Geo_Point) or point is None
        assert isinstance(timestamp, datetime.datetime)

        rv = set()
        if address is not None:
            self.search_address(address, timestamp, rv)
        elif point is not None:
            self.search_point(point, timestamp, rv)
        return rv

    def search_address(self, address, timestamp, rv):
        for query in area_keys(address.key()):
            self.search_key(query, address, timestamp, rv)

    def search_key(self, query, address, timestamp, rv):
        stack = [self.exact_root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                pos = bisect.bisect_left(node.keys, query)
                while pos < len(node.keys) and node.keys[pos][:4] == query:
                    entry = node.entries[pos]
                    if exact_location_matches(entry.key[:4],
                                              entry.point,
                                              address,
                                              None,
                                              self.point_epsilon) and \
                       interval_contains(entry.gamma, timestamp):
                        rv.add(entry.pid)
                    pos += 1
            else:
                idx = max(bisect.bisect_left(node.lows, query) - 1, 0)
                while idx < len(node.entries) and \
                      node.lows[idx][:4] <= query:
                    if node.entries[idx].region.encloses_key(query):
                        stack.append(node.entries[idx].child)
                    idx += 1

    def search_point(self, point, timestamp, rv):
        stack = [self.exact_root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                for entry in node.entries:
                    if exact_location_matches(entry.key[:4],
                                              entry.point,
                                              None,
                                              point,
                                              self.point_epsilon) and \
                       interval_contains(entry.gamma, timestamp):
                        rv.add(entry.pid)
            else:
                for entry in node.entries:
                    if entry.region.contains_point(point,
                                                   self.point_epsilon):
                        stack.append(entry.child)

    def lookup_semantic(self, keyword, timestamp):
        """Bottom-up search of the semantic side

        Collects the policies attached to the keyword's node and to
        every ancestor up to "any place".

        :param keyword: a keyword of the taxonomy
        :type keyword: str or Semantic_Keyword

        :raises LAMP_Error: UnknownKeyword
        :rtype: set[int]
        """
        assert isinstance(timestamp, datetime.datetime)
        if isinstance(keyword, Semantic_Keyword):
            keyword = keyword.keyword
        else:
            keyword = normalize_text(keyword)

        node = self.semantic_nodes.get(keyword)
        if node is None:
            raise unknown_keyword(keyword)

        rv = set()
        self.collect_semantic(node, timestamp, rv, set())
        return rv

    @staticmethod
    def collect_semantic(node, timestamp, rv, visited):
        while node is not None and node.keyword not in visited:
            visited.add(node.keyword)
            for pid, interval in node.policies.items():
                if interval_contains(interval, timestamp):
                    rv.add(pid)
            node = node.parent

    def lookup(self, loc, strict=None):
        """All policies marking a photo location as sensitive

        :param loc: where and when the photo was taken
        :type loc: Photo_Location

        :param strict: raise for unknown photo keywords instead of \
        skipping them (defaults to the tree's setting)
        :type strict: bool

        :raises LAMP_Error: UnknownKeyword, in strict mode only
        :rtype: set[int]
        """
        assert isinstance(loc, Photo_Location)
        if strict is None:
            strict = self.strict_keywords

        rv = self.lookup_exact(loc.address, loc.point, loc.timestamp)
        visited = set()
        for keyword in loc.keywords:
            node = self.semantic_nodes.get(keyword)
            if node is None:
                if strict:
                    raise unknown_keyword(keyword)
                continue
            self.collect_semantic(node, loc.timestamp, rv, visited)
        return rv

    ##########################################################################
    # Introspection

    def height(self):
        rv = 1
        node = self.exact_root
        while not node.is_leaf:
            node = node.entries[0].child
            rv += 1
        return rv

    def iter_exact_entries(self):
        stack = [self.exact_root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                yield from node.entries
            else:
                stack.extend(reversed([entry.child
                                       for entry in node.entries]))

    def verify(self, mh):
        """Check all structural invariants

        Issues a warning for each violation found: node fanout, leaf
        depth, the height bound, key order, region enclosure and the
        bookkeeping of both sides.

        :returns: true if there are no violations
        :rtype: bool
        """
        assert isinstance(mh, Message_Handler)

        location = Location("<dlp tree>")
        problems = []

        def walk(node, depth, region):
            if len(node.entries) > self.fanout:
                problems.append("node at depth %u holds %u entries" %
                                (depth, len(node.entries)))
            if node.is_leaf:
                leaf_depths.add(depth)
                if node.keys != sorted(node.keys) or \
                   node.keys != [entry.key for entry in node.entries]:
                    problems.append("leaf keys out of order")
                for entry in node.entries:
                    if region is None:
                        continue
                    if not region.low <= entry.key <= region.high or \
                       not region.contains_address(entry.address()):
                        problems.append("entry for policy %u is outside"
                                        " its region" % entry.pid)
                return
            if node.lows != [entry.region.low for entry in node.entries]:
                problems.append("internal node keys out of sync")
            if not node.entries:
                problems.append("empty internal node at depth %u" % depth)
            for entry in node.entries:
                if region is not None and \
                   not region.contains_region(entry.region):
                    problems.append("region at depth %u is not enclosed"
                                    " by its parent" % (depth + 1))
                if not entry.child.entries:
                    problems.append("empty child at depth %u" % (depth + 1))
                walk(entry.child, depth + 1, entry.region)

        leaf_depths = set()
        walk(self.exact_root, 1, None)
        if len(leaf_depths) > 1:
            problems.append("leaves at different depths %s" %
                            sorted(leaf_depths))
        if self.height() > self.height_bound():
            problems.append("height %u exceeds %u for %u exact policies" %
                            (self.height(), self.height_bound(),
                             self.n_exact))

        exact_pids = [entry.pid for entry in self.iter_exact_entries()]
        if len(exact_pids) != self.n_exact or \
           set(exact_pids) != {pid
                               for pid, policy in self.policies.items()
                               if policy.is_exact}:
            problems.append("exact side does not match the policy set")

        for node in self.semantic_nodes.values():
            for pid in node.policies:
                policy = self.policies.get(pid)
                if policy is None or policy.is_exact or \
                   policy.loc.keyword != node.keyword:
                    problems.append("semantic node %s lists policy %u" %
                                    (node.keyword, pid))

        for problem in problems:
            mh.warning(location, problem)
        return not problems
