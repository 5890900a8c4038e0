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

import random
import datetime
import time

import numpy as np
import pandas as pd

from lamp.errors import Location, Message_Handler
from lamp.config import Engine_Config
from lamp.policy import (Geo_Point, Exact_Address, Semantic_Keyword,
                         Time_Interval, Lampi_Policy, Location_Type,
                         Sensitiveness)
from lamp.taxonomy import Semantic_Taxonomy, ROOT_KEYWORD
from lamp.dlp import DLP_Tree, Photo_Location, naive_scan
from lamp.face import (Face_Record, Hash_Embedding_Provider,
                       Comparison_Counter, match_candidates)

#
# Synthetic workloads and the five sweeps comparing the DLP tree
# against the naive scan (and parallel against sequential face
# matching). Only the lookup or matching call is timed; every timed
# lamp result is checked against the naive result of the same query.
#

STREETS_PER_CITY  = 100
CITIES_PER_STATE  = 10
STATES_PER_NATION = 10
BENCH_YEAR        = 2019
WARMUP_QUERIES    = 10
GROUP_PHOTO_FACES = 18

# Other names accepted for a preset
PRESET_ALIASES = {"full": "paper"}

CSV_COLUMNS = ["scenario", "x",
               "lamp_p50_ms", "lamp_p95_ms",
               "naive_p50_ms", "speedup"]


class Workload_Spec:
    """Shape of a synthetic workload

    Policies per location are given either as an absolute number or as
    a percentage of all users.

    :attribute keywords_per_location: each location draws between 1 \
    and this many keywords (at most 5)
    :type: int

    :attribute exact_semantic_split: fraction of exact policies
    :type: float
    """
    def __init__(self,
                 n_users,
                 n_locations,
                 keywords_per_location = 5,
                 n_distinct_keywords   = 1000,
                 policies_per_location = None,
                 policies_percent      = None,
                 exact_semantic_split  = 0.5,
                 seed                  = 0):
        assert (policies_per_location is None) != (policies_percent is None)
        self.n_users               = n_users
        self.n_locations           = n_locations
        self.keywords_per_location = keywords_per_location
        self.n_distinct_keywords   = n_distinct_keywords
        self.policies_per_location = policies_per_location
        self.policies_percent      = policies_percent
        self.exact_semantic_split  = exact_semantic_split
        self.seed                  = seed

    @property
    def ppl(self):
        if self.policies_per_location is not None:
            return self.policies_per_location
        return max(1, int(round(self.n_users * self.policies_percent / 100)))

    @property
    def total_policies(self):
        return self.n_locations * self.ppl

    def problems(self):
        rv = []
        if self.n_users < 1:
            rv.append("at least one user is required")
        if self.n_locations < 1:
            rv.append("at least one location is required")
        if not 1 <= self.keywords_per_location <= 5:
            rv.append("keywords per location must be between 1 and 5")
        if self.n_distinct_keywords < 4:
            rv.append("a four level taxonomy needs at least 4 keywords")
        if self.ppl < 1:
            rv.append("at least one policy per location is required")
        elif self.ppl > self.n_users:
            rv.append("%u policies per location but only %u users" %
                      (self.ppl, self.n_users))
        if not 0.0 <= self.exact_semantic_split <= 1.0:
            rv.append("exact/semantic split must be between 0 and 1")
        return rv

    def validate(self, mh):
        assert isinstance(mh, Message_Handler)
        for problem in self.problems():
            mh.error(Location("<workload>"), problem, "InfeasibleSpec")


class Synthetic_Location:
    __slots__ = ("address", "keywords")

    def __init__(self, address, keywords):
        self.address  = address
        self.keywords = keywords


class Workload:
    """A generated policy set with its taxonomy and queries

    :attribute policies: policies in pid order (pids are 1, 2, ...)
    :type: list[Lampi_Policy]

    :attribute queries: photo locations at existing places
    :type: list[Photo_Location]

    :attribute records: one enrolled face per user (only when \
    requested)
    :type: dict[str, Face_Record]
    """
    def __init__(self, spec, taxonomy, locations, policies, queries,
                 records):
        self.spec      = spec
        self.taxonomy  = taxonomy
        self.locations = locations
        self.policies  = policies
        self.queries   = queries
        self.records   = records


def user_name(idx):
    return "user%u" % idx


def generate_taxonomy(mh, n_keywords):
    """A four-level taxonomy with exactly n_keywords keywords

    :returns: the taxonomy and its keywords below the second level
    :rtype: tuple[Semantic_Taxonomy, list[str]]
    """
    assert n_keywords >= 4
    rest    = n_keywords - 1
    generic = max(1, int(round(rest ** (1 / 3))))
    basic   = max(1, min(rest - generic - 1,
                         int(round(rest ** (2 / 3)))))
    fine    = rest - generic - basic

    location = Location("<generated taxonomy>")
    taxonomy = Semantic_Taxonomy()
    taxonomy.add(mh, ROOT_KEYWORD, None, location)
    generics = ["category %u" % i for i in range(generic)]
    basics   = ["place %u" % i for i in range(basic)]
    fines    = ["venue %u" % i for i in range(fine)]
    for keyword in generics:
        taxonomy.add(mh, keyword, ROOT_KEYWORD, location)
    for i, keyword in enumerate(basics):
        taxonomy.add(mh, keyword, generics[i % generic], location)
    for i, keyword in enumerate(fines):
        taxonomy.add(mh, keyword, basics[i % basic], location)
    taxonomy.validate(mh, location)
    return taxonomy, basics + fines


def grid_address(idx):
    street = idx % STREETS_PER_CITY
    city   = idx // STREETS_PER_CITY
    state  = city // CITIES_PER_STATE
    nation = state // STATES_PER_NATION
    point  = Geo_Point(-70.0 + city % 140 + 0.002 * (street % 10),
                       -170.0 + city // 140 + 0.002 * (street // 10))
    return Exact_Address(street = "street %u" % street,
                         city   = "city %u" % city,
                         state  = "state %u" % state,
                         nation = "nation %u" % nation,
                         point  = point)


def random_interval(rng):
    kind = rng.random()
    if kind < 0.4:
        return Time_Interval.always()
    elif kind < 0.7:
        # start after end wraps midnight
        return Time_Interval(daily_window=(datetime.time(rng.randrange(24)),
                                           datetime.time(rng.randrange(24),
                                                         59, 59)))
    else:
        first = datetime.date(BENCH_YEAR, 1, 1) + \
            datetime.timedelta(days=rng.randrange(365))
        last  = min(first + datetime.timedelta(days=rng.randrange(1, 61)),
                    datetime.date(BENCH_YEAR, 12, 31))
        window = None
        if rng.random() < 0.2:
            window = (datetime.time(rng.randrange(12)),
                      datetime.time(rng.randrange(12, 24)))
        return Time_Interval(date_range=(first, last), daily_window=window)


def random_timestamp(rng):
    return datetime.datetime(BENCH_YEAR, 1, 1) + \
        datetime.timedelta(seconds=rng.randrange(365 * 24 * 3600))


def generate_workload(mh, spec, n_queries=100, with_faces=False):
    """Generate policies, taxonomy and queries for a workload shape

    The same spec (including its seed) always gives the same workload.

    :param mh: The message handler to use
    :type mh: Message_Handler

    :param spec: the shape of the workload
    :type spec: Workload_Spec

    :raises LAMP_Error: InfeasibleSpec
    :rtype: Workload
    """
    assert isinstance(mh, Message_Handler)
    assert isinstance(spec, Workload_Spec)
    spec.validate(mh)

    rng = random.Random(spec.seed)
    taxonomy, leaves = generate_taxonomy(mh, spec.n_distinct_keywords)
    keyword_objects = {}

    locations = []
    for idx in range(spec.n_locations):
        keywords = rng.sample(leaves,
                              min(len(leaves),
                                  rng.randint(1,
                                              spec.keywords_per_location)))
        locations.append(Synthetic_Location(grid_address(idx), keywords))

    policies = []
    for loc in locations:
        for owner in rng.sample(range(spec.n_users), spec.ppl):
            pid = len(policies) + 1
            if rng.random() < spec.exact_semantic_split:
                where = loc.address
                typ   = Location_Type.EXACT
            else:
                keyword = rng.choice(loc.keywords)
                if rng.random() < 0.1:
                    keyword = rng.choice([k
                                          for k in taxonomy.ancestors(keyword)
                                          if k != ROOT_KEYWORD])
                if keyword not in keyword_objects:
                    keyword_objects[keyword] = Semantic_Keyword(keyword)
                where = keyword_objects[keyword]
                typ   = Location_Type.SEMANTIC
            policies.append(
                Lampi_Policy(pid      = pid,
                             owner    = user_name(owner),
                             loc      = where,
                             typ      = typ,
                             interval = random_interval(rng),
                             xi       = rng.choice([Sensitiveness.HIGH,
                                                    Sensitiveness.LOW])))

    queries = []
    for _ in range(n_queries):
        loc = rng.choice(locations)
        if rng.random() < 0.25:
            address = None
            point   = loc.address.point
        else:
            address = loc.address
            point   = None
        queries.append(Photo_Location(timestamp = random_timestamp(rng),
                                      address   = address,
                                      point     = point,
                                      keywords  = loc.keywords))

    records = {}
    if with_faces:
        provider = Hash_Embedding_Provider()
        for idx in range(spec.n_users):
            records[user_name(idx)] = Face_Record(
                user_name(idx),
                provider.encode("%u/%s" % (spec.seed, user_name(idx))))

    return Workload(spec      = spec,
                    taxonomy  = taxonomy,
                    locations = locations,
                    policies  = policies,
                    queries   = queries,
                    records   = records)


##############################################################################
# Scenarios
##############################################################################

class Bench_Result:
    """Timings for one point of a sweep

    :attribute comparisons: face pairs evaluated per query (faces \
    scenario only)
    :type: int
    """
    def __init__(self, scenario, x, lamp_ms, naive_ms, comparisons=0,
                 n_policies=0):
        assert isinstance(lamp_ms, list) and isinstance(naive_ms, list)
        self.scenario     = scenario
        self.x            = x
        self.lamp_p50_ms  = float(np.percentile(lamp_ms, 50))
        self.lamp_p95_ms  = float(np.percentile(lamp_ms, 95))
        self.naive_p50_ms = float(np.percentile(naive_ms, 50))
        self.naive_p95_ms = float(np.percentile(naive_ms, 95))
        self.comparisons  = comparisons
        self.n_policies   = n_policies

    @property
    def speedup(self):
        return self.naive_p50_ms / max(self.lamp_p50_ms, 1e-9)

    def row(self):
        return {"scenario"     : self.scenario,
                "x"            : self.x,
                "lamp_p50_ms"  : self.lamp_p50_ms,
                "lamp_p95_ms"  : self.lamp_p95_ms,
                "naive_p50_ms" : self.naive_p50_ms,
                "speedup"      : self.speedup}


class Scenario:
    """A sweep over one workload parameter

    :attribute presets: (first, last, steps) of the sweep per preset
    :type: dict[str, tuple]
    """
    def __init__(self, name, description, presets, make_spec=None):
        self.name        = name
        self.description = description
        self.presets     = presets
        self.make_spec   = make_spec

    def points(self, preset, low=None, high=None, steps=None):
        first, last, default_steps = \
            self.presets[PRESET_ALIASES.get(preset, preset)]
        integral = isinstance(first, int)
        first = first if low is None else low
        last  = last if high is None else high
        steps = default_steps if steps is None else steps
        if steps <= 1 or first == last:
            values = [first]
        else:
            values = np.linspace(first, last, steps)
        if integral:
            return [int(round(value)) for value in values]
        return [float(value) for value in values]


def users_spec(preset, x, seed):
    if preset == "paper":
        return Workload_Spec(n_users=x, n_locations=100000,
                             policies_per_location=1000, seed=seed)
    return Workload_Spec(n_users=x, n_locations=10000,
                         policies_per_location=100, seed=seed)


def locations_spec(preset, x, seed):
    if preset == "paper":
        return Workload_Spec(n_users=1000000, n_locations=x,
                             policies_per_location=1000, seed=seed)
    return Workload_Spec(n_users=10000, n_locations=x,
                         policies_per_location=100, seed=seed)


def keywords_spec(preset, x, seed):
    if preset == "paper":
        return Workload_Spec(n_users=1000000, n_locations=100000,
                             keywords_per_location=5,
                             n_distinct_keywords=x,
                             policies_per_location=1000, seed=seed)
    return Workload_Spec(n_users=10000, n_locations=1000,
                         keywords_per_location=5,
                         n_distinct_keywords=x,
                         policies_per_location=100, seed=seed)


def polloc_spec(preset, x, seed):
    if preset == "paper":
        return Workload_Spec(n_users=1000000, n_locations=100000,
                             policies_percent=x, seed=seed)
    return Workload_Spec(n_users=10000, n_locations=1000,
                         policies_percent=x, seed=seed)


SCENARIOS = {
    "users"     : Scenario("users",
                           "varying the total number of users",
                           {"desk"  : (1000, 10000, 4),
                            "paper" : (100000, 1000000, 4)},
                           users_spec),
    "locations" : Scenario("locations",
                           "varying the number of distinct locations",
                           {"desk"  : (1000, 10000, 4),
                            "paper" : (10000, 100000, 4)},
                           locations_spec),
    "keywords"  : Scenario("keywords",
                           "varying the number of distinct keywords",
                           {"desk"  : (250, 5000, 4),
                            "paper" : (250, 5000, 4)},
                           keywords_spec),
    "polloc"    : Scenario("polloc",
                           "varying the policies per location"
                           " (percent of users)",
                           {"desk"  : (1.0, 10.0, 4),
                            "paper" : (0.1, 1.0, 4)},
                           polloc_spec),
    "faces"     : Scenario("faces",
                           "parallel against sequential face matching",
                           {"desk"  : (100, 5000, 4),
                            "paper" : (100, 5000, 4)}),
}


def elapsed_ms(start):
    return (time.perf_counter() - start) * 1000.0


def run_lookup_point(mh, scenario, spec, n_queries, config):
    workload = generate_workload(mh, spec, n_queries + WARMUP_QUERIES)
    tree = DLP_Tree(taxonomy      = workload.taxonomy,
                    fanout        = config.fanout,
                    point_epsilon = config.point_epsilon)
    for policy in workload.policies:
        tree.insert(mh, policy)

    lamp_ms  = []
    naive_ms = []
    for n, query in enumerate(workload.queries):
        start = time.perf_counter()
        found = tree.lookup(query)
        lamp_time = elapsed_ms(start)

        start = time.perf_counter()
        expected = naive_scan(workload.policies, query, workload.taxonomy,
                              config.point_epsilon)
        naive_time = elapsed_ms(start)

        if found != expected:  # pragma: no cover
            mh.internal_error(Location("<bench %s>" % scenario.name),
                              "tree lookup disagrees with the naive scan for"
                              " query %u" % n)
        if n >= WARMUP_QUERIES:
            lamp_ms.append(lamp_time)
            naive_ms.append(naive_time)

    return Bench_Result(scenario.name, None, lamp_ms, naive_ms,
                        n_policies = len(workload.policies))


def group_photo(provider, records, seed):
    """18 faces: a third of them near enrolled users, the rest strangers"""
    rng   = random.Random(seed)
    faces = []
    known = rng.sample(records, min(len(records), GROUP_PHOTO_FACES // 3))
    for idx in range(GROUP_PHOTO_FACES):
        if idx < len(known):
            vector = provider.perturb(known[idx].vector,
                                      rng.uniform(0.1, 0.5),
                                      "face %u/%u" % (seed, idx))
        else:
            vector = provider.encode("stranger %u/%u" % (seed, idx))
        faces.append((idx, vector))
    return faces


def run_faces_point(mh, scenario, n_candidates, n_queries, seed,
                    config):
    provider   = Hash_Embedding_Provider()
    rng        = random.Random(seed)
    records    = [Face_Record(user_name(idx),
                              provider.encode("%u/%s" % (seed,
                                                         user_name(idx))))
                  for idx in range(n_candidates)]
    candidates = [(record, rng.choice([Sensitiveness.HIGH,
                                       Sensitiveness.LOW]))
                  for record in records]
    faces      = group_photo(provider, records, seed)
    counter    = Comparison_Counter()

    lamp_ms  = []
    naive_ms = []
    for n in range(n_queries + WARMUP_QUERIES):
        start = time.perf_counter()
        parallel = match_candidates(faces, candidates,
                                    tolerance_low  = config.tolerance_low,
                                    tolerance_high = config.tolerance_high,
                                    workers        = config.workers,
                                    counter        = counter)
        lamp_time = elapsed_ms(start)

        start = time.perf_counter()
        sequential = match_candidates(faces, candidates,
                                      tolerance_low  = config.tolerance_low,
                                      tolerance_high = config.tolerance_high,
                                      workers        = 1)
        naive_time = elapsed_ms(start)

        if parallel != sequential:  # pragma: no cover
            mh.internal_error(Location("<bench %s>" % scenario.name),
                              "parallel and sequential matching disagree")
        if n >= WARMUP_QUERIES:
            lamp_ms.append(lamp_time)
            naive_ms.append(naive_time)

    return Bench_Result(scenario.name, None, lamp_ms, naive_ms,
                        comparisons = counter.count //
                        (n_queries + WARMUP_QUERIES))


def run_scenario(mh, name, preset="desk", seed=0, n_queries=100,
                 points=None, config=None, progress=None):
    """Sweep one scenario

    :param name: users, locations, keywords, polloc or faces
    :type name: str

    :param preset: desk or paper (full is accepted for paper)
    :type preset: str

    :param points: x values to use instead of the preset's sweep
    :type points: list

    :param progress: called with each result as it is measured
    :type progress: callable

    :raises LAMP_Error: InfeasibleSpec
    :rtype: list[Bench_Result]
    """
    assert isinstance(mh, Message_Handler)
    assert name in SCENARIOS
    assert n_queries >= 1
    if config is None:
        config = Engine_Config(data_dir=None)

    scenario = SCENARIOS[name]
    preset   = PRESET_ALIASES.get(preset, preset)
    if preset not in scenario.presets:
        mh.error(Location("<bench %s>" % name),
                 "unknown preset %s" % preset,
                 "InfeasibleSpec")
    if points is None:
        points = scenario.points(preset)

    rv = []
    for x in points:
        if scenario.make_spec is None:
            result = run_faces_point(mh, scenario, x, n_queries, seed,
                                     config)
        else:
            result = run_lookup_point(mh, scenario,
                                      scenario.make_spec(preset, x, seed),
                                      n_queries, config)
        result.x = x
        rv.append(result)
        if progress is not None:
            progress(result)
    return rv


def results_table(results):
    return pd.DataFrame([result.row() for result in results],
                        columns=CSV_COLUMNS)


def write_csv(fd, results, scenario, preset, seed, workers):
    fd.write("# lamp bench scenario=%s preset=%s seed=%u workers=%u\n" %
             (scenario, preset, seed, workers))
    results_table(results).to_csv(fd, index=False, float_format="%.4f",
                                  lineterminator="\n")


##############################################################################
# Trend verdicts
##############################################################################

def growth(values):
    return values[-1] / max(values[0], 1e-9)


def slope(xs, values):
    """Least squares slope of values over xs"""
    if len(xs) < 2 or min(xs) == max(xs):
        return 0.0
    return float(np.polyfit(np.asarray(xs, dtype=float),
                            np.asarray(values, dtype=float),
                            1)[0])


def evaluate_trends(name, results):
    """Check the expected shape of a sweep

    :returns: verdicts as (passed, description)
    :rtype: list[tuple[bool, str]]
    """
    assert name in SCENARIOS
    if not results:
        return []

    lamp  = [result.lamp_p50_ms for result in results]
    naive = [result.naive_p50_ms for result in results]
    xs    = [result.x for result in results]
    speedups = [result.speedup for result in results]

    rv = []
    if name == "users":
        rv.append((min(speedups) >= 100,
                   "lamp is at least 100x faster than the naive scan"
                   " (lowest %.1fx)" % min(speedups)))
    elif name == "locations":
        rv.append((growth(lamp) <= 3,
                   "lamp grows at most 3x (%.2fx)" % growth(lamp)))
        rv.append((growth(naive) >= 5,
                   "naive grows at least 5x (%.2fx)" % growth(naive)))
    elif name == "keywords":
        variation = max(lamp) / max(min(lamp), 1e-9)
        rv.append((variation <= 3,
                   "lamp varies at most 3x (%.2fx)" % variation))
        rv.append((slope(xs, speedups) >= 0,
                   "naive grows faster than lamp (speedup slope %.4f per"
                   " keyword over %u points)" %
                   (slope(xs, speedups), len(xs))))
    elif name == "polloc":
        lamp_slope  = slope(xs, lamp)
        naive_slope = slope(xs, naive)
        rv.append((min(speedups) >= 50,
                   "lamp is below 1/50 of naive everywhere"
                   " (lowest %.1fx)" % min(speedups)))
        rv.append((naive_slope > 0,
                   "naive grows with the policies per location"
                   " (%.3f ms per percent)" % naive_slope))
        rv.append((lamp_slope <= naive_slope / 50,
                   "lamp stays flat next to naive"
                   " (%.4f against %.3f ms per percent)" %
                   (lamp_slope, naive_slope)))
    else:
        rv.append((lamp[-1] < 1000,
                   "parallel matching of %u candidates under 1 s"
                   " (%.1f ms)" % (xs[-1], lamp[-1])))
        rv.append((growth(naive) >= 3 * growth(lamp),
                   "sequential grows at least 3x faster than parallel"
                   " (%.2fx vs %.2fx)" % (growth(naive), growth(lamp))))
    return rv
