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

import math
import datetime
from enum import Enum

from lamp.errors import Location, Message_Handler

#
# This module defines the LAMPi policy model: where (an exact address
# or a semantic keyword), when (a time interval) and how strongly
# (sensitiveness) a user wants to be protected. There are three
# sections:
#
# - Geography deals with points, addresses and regions
# - Time deals with intervals and containment
# - Policies deal with the policy record, its validation and its
#   JSON representation
#


def normalize_text(value):
    """Lowercase, trim and collapse internal whitespace

    All address fields and keywords go through this before they are
    stored or compared.

    :param value: the raw text
    :type value: str
    :rtype: str
    """
    assert isinstance(value, str)
    return " ".join(value.split()).lower()


##############################################################################
# Geography
##############################################################################

class Geo_Point:
    """A latitude/longitude pair in degrees

    :attribute lat: latitude, valid in [-90, 90]
    :type: float

    :attribute lon: longitude, valid in [-180, 180]
    :type: float
    """
    __slots__ = ("lat", "lon")

    def __init__(self, lat, lon):
        assert isinstance(lat, (int, float)) and not isinstance(lat, bool)
        assert isinstance(lon, (int, float)) and not isinstance(lon, bool)
        self.lat = float(lat)
        self.lon = float(lon)

    def is_valid(self):
        return (math.isfinite(self.lat) and
                math.isfinite(self.lon) and
                -90.0 <= self.lat <= 90.0 and
                -180.0 <= self.lon <= 180.0)

    def __eq__(self, other):
        return isinstance(other, Geo_Point) and \
            (self.lat, self.lon) == (other.lat, other.lon)

    def __hash__(self):
        return hash((self.lat, self.lon))

    def __repr__(self):
        return "Geo_Point(%r, %r)" % (self.lat, self.lon)


class Exact_Address:
    """A normalised street/city/state/nation address

    Fields are normalised on construction (see
    :func:`normalize_text`). Coarser fields are ordered nation, state,
    city, street; a finer field may only be given when all coarser
    fields are given. An address that stops early (e.g. without a
    street) names the whole area under it.

    :attribute point: optional coordinates of the address
    :type: Geo_Point
    """
    __slots__ = ("street", "city", "state", "nation", "point")

    def __init__(self, street, city, state, nation, point=None):
        assert isinstance(street, str)
        assert isinstance(city, str)
        assert isinstance(state, str)
        assert isinstance(nation, str)
        assert isinstance(point, Geo_Point) or point is None
        self.street = normalize_text(street)
        self.city   = normalize_text(city)
        self.state  = normalize_text(state)
        self.nation = normalize_text(nation)
        self.point  = point

    def key(self):
        """Sort and comparison key, coarse to fine

        :rtype: tuple[str, str, str, str]
        """
        return (self.nation, self.state, self.city, self.street)

    def problems(self):
        """List everything that is wrong with this address

        :rtype: list[str]
        """
        rv = []
        if not self.nation:
            rv.append("nation must not be empty")
        fields = (("nation", self.nation),
                  ("state", self.state),
                  ("city", self.city),
                  ("street", self.street))
        for (coarse_name, coarse), (fine_name, fine) in zip(fields,
                                                            fields[1:]):
            if fine and not coarse:
                rv.append("%s given without %s" % (fine_name, coarse_name))
        if self.point is not None and not self.point.is_valid():
            rv.append("coordinates %s are out of range" % repr(self.point))
        return rv

    def __eq__(self, other):
        return isinstance(other, Exact_Address) and \
            self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return "Exact_Address(%s)" % ", ".join(
            field for field in reversed(self.key()) if field)


class Region:
    """Abstract area that may contain points, addresses and regions

    Containment is reflexive and transitive.
    """
    def contains_point(self, point):
        assert isinstance(point, Geo_Point)
        return False

    def contains_address(self, address):
        assert isinstance(address, Exact_Address)
        return False

    def contains_region(self, other):
        assert isinstance(other, Region)
        return self == other


class Bounding_Box(Region):
    """Axis aligned lat/lon box, planar (no great-circle geometry)

    :attribute low: south-west corner
    :type: Geo_Point

    :attribute high: north-east corner
    :type: Geo_Point
    """
    __slots__ = ("low", "high")

    def __init__(self, low, high):
        assert isinstance(low, Geo_Point)
        assert isinstance(high, Geo_Point)
        assert low.lat <= high.lat and low.lon <= high.lon
        self.low  = low
        self.high = high

    @classmethod
    def around(cls, point):
        assert isinstance(point, Geo_Point)
        return cls(point, point)

    def union(self, other):
        assert isinstance(other, Bounding_Box)
        return Bounding_Box(Geo_Point(min(self.low.lat, other.low.lat),
                                      min(self.low.lon, other.low.lon)),
                            Geo_Point(max(self.high.lat, other.high.lat),
                                      max(self.high.lon, other.high.lon)))

    def contains_point(self, point, epsilon=0.0):
        assert isinstance(point, Geo_Point)
        return (self.low.lat - epsilon <= point.lat <= self.high.lat + epsilon
                and
                self.low.lon - epsilon <= point.lon <= self.high.lon + epsilon)

    def contains_address(self, address):
        assert isinstance(address, Exact_Address)
        return address.point is not None and \
            self.contains_point(address.point)

    def contains_region(self, other):
        assert isinstance(other, Region)
        if isinstance(other, Bounding_Box):
            return self.contains_point(other.low) and \
                self.contains_point(other.high)
        return False

    def __eq__(self, other):
        return isinstance(other, Bounding_Box) and \
            (self.low, self.high) == (other.low, other.high)

    def __hash__(self):
        return hash((self.low, self.high))

    def __repr__(self):
        return "Bounding_Box(%r, %r)" % (self.low, self.high)


class Address_Prefix(Region):
    """All addresses sharing an administrative prefix

    For example ``Address_Prefix(("fr", "idf", "paris"))`` contains
    every address in Paris. The empty prefix contains everything.

    :attribute prefix: nation[, state[, city]]
    :type: tuple[str]
    """
    __slots__ = ("prefix",)

    def __init__(self, prefix):
        assert isinstance(prefix, tuple)
        assert len(prefix) <= 3
        assert all(isinstance(item, str) for item in prefix)
        self.prefix = tuple(normalize_text(item) for item in prefix)

    def contains_address(self, address):
        assert isinstance(address, Exact_Address)
        return address.key()[:len(self.prefix)] == self.prefix

    def contains_region(self, other):
        assert isinstance(other, Region)
        if isinstance(other, Address_Prefix):
            return other.prefix[:len(self.prefix)] == self.prefix
        return False

    def __eq__(self, other):
        return isinstance(other, Address_Prefix) and \
            self.prefix == other.prefix

    def __hash__(self):
        return hash(self.prefix)

    def __repr__(self):
        return "Address_Prefix(%s)" % "/".join(self.prefix)


##############################################################################
# Time
##############################################################################

class Time_Interval:
    """When a location is sensitive

    Either ``anytime``, or an optional inclusive date range combined
    with an optional inclusive daily clock window. A window whose start
    is after its end wraps midnight (20:00 to 05:00 covers the night).

    :attribute date_range: first and last day, inclusive
    :type: tuple[datetime.date, datetime.date]

    :attribute daily_window: start and end clock time, inclusive
    :type: tuple[datetime.time, datetime.time]

    :attribute anytime: wildcard
    :type: bool
    """
    __slots__ = ("date_range", "daily_window", "anytime")

    def __init__(self, date_range=None, daily_window=None, anytime=False):
        assert date_range is None or \
            (isinstance(date_range, tuple) and
             len(date_range) == 2 and
             all(isinstance(day, datetime.date) for day in date_range))
        assert daily_window is None or \
            (isinstance(daily_window, tuple) and
             len(daily_window) == 2 and
             all(isinstance(clock, datetime.time) for clock in daily_window))
        assert isinstance(anytime, bool)
        self.date_range   = date_range
        self.daily_window = daily_window
        self.anytime      = anytime

    @classmethod
    def always(cls):
        return cls(anytime=True)

    def problems(self):
        rv = []
        if self.anytime:
            if self.date_range or self.daily_window:
                rv.append("anytime interval cannot also have a date range"
                          " or daily window")
        elif self.date_range is None and self.daily_window is None:
            rv.append("interval needs anytime, a date range or a daily"
                      " window")
        if self.date_range and self.date_range[0] > self.date_range[1]:
            rv.append("date range starts (%s) after it ends (%s)" %
                      (self.date_range[0].isoformat(),
                       self.date_range[1].isoformat()))
        return rv

    def complement_window(self):
        """The daily window covering the rest of the day

        Endpoints are shared with this window.

        :rtype: Time_Interval
        """
        assert self.daily_window is not None
        start, end = self.daily_window
        return Time_Interval(date_range   = self.date_range,
                             daily_window = (end, start))

    def contains(self, timestamp):
        return interval_contains(self, timestamp)

    def __eq__(self, other):
        return isinstance(other, Time_Interval) and \
            (self.date_range, self.daily_window, self.anytime) == \
            (other.date_range, other.daily_window, other.anytime)

    def __hash__(self):
        return hash((self.date_range, self.daily_window, self.anytime))

    def __repr__(self):
        if self.anytime:
            return "Time_Interval(anytime)"
        parts = []
        if self.date_range:
            parts.append("%s..%s" % (self.date_range[0].isoformat(),
                                     self.date_range[1].isoformat()))
        if self.daily_window:
            parts.append("%s-%s" % (self.daily_window[0].strftime("%H:%M"),
                                    self.daily_window[1].strftime("%H:%M")))
        return "Time_Interval(%s)" % " ".join(parts)


def interval_contains(interval, timestamp):
    """Test if a (local civil) timestamp falls into an interval

    :param interval: the interval
    :type interval: Time_Interval

    :param timestamp: when the photo was taken
    :type timestamp: datetime.datetime

    :rtype: bool
    """
    assert isinstance(interval, Time_Interval)
    assert isinstance(timestamp, datetime.datetime)

    if interval.anytime:
        return True

    if interval.date_range is not None:
        first, last = interval.date_range
        if not first <= timestamp.date() <= last:
            return False

    if interval.daily_window is not None:
        start, end = interval.daily_window
        clock = timestamp.time().replace(tzinfo=None)
        if start <= end:
            return start <= clock <= end
        else:
            return clock >= start or clock <= end

    return True


##############################################################################
# Policies
##############################################################################

class Sensitiveness(Enum):
    HIGH = "High"
    LOW  = "Low"

    def __str__(self):
        return self.value


class Location_Type(Enum):
    EXACT    = "E"
    SEMANTIC = "S"

    def __str__(self):
        return self.value


class Semantic_Keyword:
    """A category of place such as "bar" or "university"

    :attribute keyword: normalised keyword
    :type: str
    """
    __slots__ = ("keyword",)

    def __init__(self, keyword):
        assert isinstance(keyword, str)
        self.keyword = normalize_text(keyword)

    def __eq__(self, other):
        return isinstance(other, Semantic_Keyword) and \
            self.keyword == other.keyword

    def __hash__(self):
        return hash(self.keyword)

    def __repr__(self):
        return "Semantic_Keyword(%s)" % self.keyword


class Lampi_Policy:
    """One user's declaration that a place is sensitive

    :attribute pid: unique policy id
    :type: int

    :attribute owner: the user to protect
    :type: str

    :attribute loc: protected location
    :type: Exact_Address or Semantic_Keyword

    :attribute typ: location type, must agree with loc
    :type: Location_Type

    :attribute interval: when the location is sensitive
    :type: Time_Interval

    :attribute xi: how sensitive the location is
    :type: Sensitiveness
    """
    __slots__ = ("pid", "owner", "loc", "typ", "interval", "xi")

    def __init__(self, pid, owner, loc, typ, interval, xi):
        assert isinstance(pid, int) and not isinstance(pid, bool)
        assert isinstance(owner, str)
        assert isinstance(loc, (Exact_Address, Semantic_Keyword))
        assert isinstance(typ, Location_Type)
        assert isinstance(interval, Time_Interval)
        assert isinstance(xi, Sensitiveness)
        self.pid      = pid
        self.owner    = owner
        self.loc      = loc
        self.typ      = typ
        self.interval = interval
        self.xi       = xi

    @property
    def is_exact(self):
        return self.typ is Location_Type.EXACT

    def __eq__(self, other):
        return isinstance(other, Lampi_Policy) and \
            (self.pid, self.owner, self.loc, self.typ,
             self.interval, self.xi) == \
            (other.pid, other.owner, other.loc, other.typ,
             other.interval, other.xi)

    def __hash__(self):
        return hash(self.pid)

    def __repr__(self):
        return "Lampi_Policy(%u, %s, %s, %s, %s, %s)" % (self.pid,
                                                        self.owner,
                                                        self.loc,
                                                        self.typ,
                                                        self.interval,
                                                        self.xi)


def validate_policy(mh, policy, taxonomy, location=None):
    """Check all invariants of a policy

    Issues a (fatal) error for the first problem found.

    :param mh: The message handler to use
    :type mh: Message_Handler

    :param policy: the policy to check
    :type policy: Lampi_Policy

    :param taxonomy: vocabulary for semantic keywords
    :type taxonomy: Semantic_Taxonomy

    :param location: where the policy comes from
    :type location: Location

    :raises LAMP_Error: TypeLocationMismatch, MalformedAddress, \
    InvalidInterval, UnknownKeyword or MalformedInput
    :returns: True
    """
    assert isinstance(mh, Message_Handler)
    assert isinstance(policy, Lampi_Policy)
    assert isinstance(location, Location) or location is None

    if location is None:
        location = Location("<policy %u>" % policy.pid)

    if policy.pid < 1:
        mh.error(location,
                 "policy id %i must be positive" % policy.pid,
                 "MalformedInput")
    if not policy.owner.strip():
        mh.error(location,
                 "policy %u has no owner" % policy.pid,
                 "MalformedInput")

    if policy.is_exact != isinstance(policy.loc, Exact_Address):
        mh.error(location,
                 "policy %u has type %s but its location is %s" %
                 (policy.pid,
                  policy.typ,
                  ("an address"
                   if isinstance(policy.loc, Exact_Address)
                   else "a semantic keyword")),
                 "TypeLocationMismatch")

    if policy.is_exact:
        problems = policy.loc.problems()
        if problems:
            mh.error(location,
                     "malformed address in policy %u: %s" %
                     (policy.pid, "; ".join(problems)),
                     "MalformedAddress")

    problems = policy.interval.problems()
    if problems:
        mh.error(location,
                 "invalid interval in policy %u: %s" %
                 (policy.pid, "; ".join(problems)),
                 "InvalidInterval")

    if not policy.is_exact and \
       not taxonomy.contains(policy.loc.keyword):
        suggestion = taxonomy.suggest(policy.loc.keyword)
        mh.error(location,
                 "unknown keyword %s%s" %
                 (policy.loc.keyword,
                  (", did you mean %s?" % suggestion) if suggestion else ""),
                 "UnknownKeyword")

    return True


##############################################################################
# JSON representation
##############################################################################

def expect_type(mh, location, obj, name, types, optional=False):
    """Fetch a member of a JSON object, complaining if it is malformed

    :returns: the value (or None if optional and absent)
    """
    assert isinstance(mh, Message_Handler)
    assert isinstance(location, Location)
    assert isinstance(name, str)

    if not isinstance(obj, dict):
        mh.error(location,
                 "expected a JSON object",
                 "MalformedInput")
    if name not in obj or obj[name] is None:
        if optional:
            return None
        mh.error(location,
                 "missing required key '%s'" % name,
                 "MalformedInput")
    value = obj[name]
    if isinstance(value, bool) and bool not in types:
        ok = False
    else:
        ok = isinstance(value, types)
    if not ok:
        mh.error(location,
                 "key '%s' must be %s" %
                 (name,
                  " or ".join({str: "a string",
                               int: "an integer",
                               float: "a number",
                               bool: "a boolean",
                               list: "a list",
                               dict: "an object"}[typ]
                              for typ in types)),
                 "MalformedInput")
    return value


def point_from_json(mh, location, obj, error_code):
    lat = expect_type(mh, location, obj, "lat", (int, float), optional=True)
    lon = expect_type(mh, location, obj, "lon", (int, float), optional=True)
    if lat is None and lon is None:
        return None
    elif lat is None or lon is None:
        mh.error(location,
                 "lat and lon must be given together",
                 error_code)
    point = Geo_Point(lat, lon)
    if not point.is_valid():
        mh.error(location,
                 "coordinates %s are out of range" % repr(point),
                 error_code)
    return point


def address_from_json(mh, location, obj):
    fields = {}
    for name in ("street", "city", "state", "nation"):
        fields[name] = expect_type(mh, location, obj, name, (str,),
                                   optional=True) or ""
    return Exact_Address(point = point_from_json(mh, location, obj,
                                                 "MalformedAddress"),
                         **fields)


def address_to_json(address):
    assert isinstance(address, Exact_Address)
    rv = {"street" : address.street,
          "city"   : address.city,
          "state"  : address.state,
          "nation" : address.nation}
    if address.point is not None:
        rv["lat"] = address.point.lat
        rv["lon"] = address.point.lon
    return rv


def parse_timestamp(mh, location, text):
    assert isinstance(text, str)
    try:
        return datetime.datetime.fromisoformat(text)
    except ValueError:
        mh.error(location,
                 "malformed timestamp '%s', expected ISO 8601" % text,
                 "MalformedInput")


def interval_from_json(mh, location, obj):
    if not isinstance(obj, dict):
        mh.error(location,
                 "interval must be a JSON object",
                 "InvalidInterval")

    anytime = expect_type(mh, location, obj, "anytime", (bool,),
                          optional=True)
    raw = {name: expect_type(mh, location, obj, name, (str,), optional=True)
           for name in ("date_start", "date_end", "time_start", "time_end")}

    def parse(name, kind):
        try:
            if kind == "date":
                return datetime.date.fromisoformat(raw[name])
            else:
                return datetime.time.fromisoformat(raw[name])
        except ValueError:
            mh.error(location,
                     "malformed %s '%s'" % (name, raw[name]),
                     "InvalidInterval")

    date_range = None
    if raw["date_start"] is not None or raw["date_end"] is not None:
        if raw["date_start"] is None or raw["date_end"] is None:
            mh.error(location,
                     "date_start and date_end must be given together",
                     "InvalidInterval")
        date_range = (parse("date_start", "date"),
                      parse("date_end", "date"))

    daily_window = None
    if raw["time_start"] is not None or raw["time_end"] is not None:
        if raw["time_start"] is None or raw["time_end"] is None:
            mh.error(location,
                     "time_start and time_end must be given together",
                     "InvalidInterval")
        daily_window = (parse("time_start", "time"),
                        parse("time_end", "time"))

    return Time_Interval(date_range   = date_range,
                         daily_window = daily_window,
                         anytime      = bool(anytime))


def interval_to_json(interval):
    assert isinstance(interval, Time_Interval)
    if interval.anytime:
        return {"anytime": True}
    rv = {}
    if interval.date_range:
        rv["date_start"] = interval.date_range[0].isoformat()
        rv["date_end"]   = interval.date_range[1].isoformat()
    if interval.daily_window:
        rv["time_start"] = interval.daily_window[0].strftime("%H:%M:%S")
        rv["time_end"]   = interval.daily_window[1].strftime("%H:%M:%S")
    return rv


def policy_from_json(mh, obj, location):
    """Build a policy from its wire representation

    The location type and the location are read independently, so a
    mismatch between the two survives parsing and is reported by
    :func:`validate_policy`.

    :param mh: The message handler to use
    :type mh: Message_Handler

    :param obj: the decoded JSON object
    :type obj: dict

    :param location: where the object comes from
    :type location: Location

    :raises LAMP_Error: if the object is malformed
    :rtype: Lampi_Policy
    """
    assert isinstance(mh, Message_Handler)
    assert isinstance(location, Location)

    pid = expect_type(mh, location, obj, "pid", (int,))
    owner = expect_type(mh, location, obj, "owner", (str,))

    raw_typ = expect_type(mh, location, obj, "typ", (str,))
    try:
        typ = Location_Type(raw_typ)
    except ValueError:
        mh.error(location,
                 "typ must be E or S, not '%s'" % raw_typ,
                 "MalformedInput")

    raw_loc = expect_type(mh, location, obj, "loc", (dict, str))
    if isinstance(raw_loc, dict):
        loc = address_from_json(mh, location, raw_loc)
    else:
        loc = Semantic_Keyword(raw_loc)

    interval = interval_from_json(mh, location,
                                  expect_type(mh, location, obj, "int",
                                              (dict,)))

    raw_xi = expect_type(mh, location, obj, "xi", (str,))
    try:
        xi = Sensitiveness(raw_xi)
    except ValueError:
        mh.error(location,
                 "xi must be High or Low, not '%s'" % raw_xi,
                 "MalformedInput")

    return Lampi_Policy(pid      = pid,
                        owner    = owner,
                        loc      = loc,
                        typ      = typ,
                        interval = interval,
                        xi       = xi)


def policy_to_json(policy):
    assert isinstance(policy, Lampi_Policy)
    if isinstance(policy.loc, Exact_Address):
        loc = address_to_json(policy.loc)
    else:
        loc = policy.loc.keyword
    return {"pid"   : policy.pid,
            "owner" : policy.owner,
            "typ"   : str(policy.typ),
            "loc"   : loc,
            "int"   : interval_to_json(policy.interval),
            "xi"    : str(policy.xi)}
