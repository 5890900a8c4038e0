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

import sys
import json
import argparse

from lamp.version import LAMP_VERSION, BUGS_URL
from lamp.errors import Location, Message_Handler, LAMP_Error
from lamp.config import load_config
from lamp.policy import policy_from_json, policy_to_json
from lamp.taxonomy import Semantic_Taxonomy
from lamp.face import Face_Record
from lamp.enforcement import manifest_from_json
from lamp.engine import Engine
from lamp import bench
from lamp import server

EXIT_OK          = 0
EXIT_VALIDATION  = 1
EXIT_IO          = 2


def read_json_items(mh, file_name):
    """Read a file holding one JSON value, an array, or JSON lines

    :returns: every item with the location it was read from
    :rtype: list[tuple[object, Location]]
    """
    assert isinstance(mh, Message_Handler)
    assert isinstance(file_name, str)

    try:
        with open(file_name, "r", encoding="UTF-8") as fd:
            content = fd.read()
    except OSError as err:
        mh.error(Location(file_name),
                 "cannot read file: %s" % err.strerror,
                 "IOFailure")

    try:
        data = json.loads(content)
        if isinstance(data, list):
            return [(item, Location(file_name)) for item in data]
        else:
            return [(data, Location(file_name))]
    except ValueError:
        pass

    rv = []
    for line_no, line in enumerate(content.splitlines(), 1):
        if not line.strip():
            continue
        location = Location(file_name, line_no)
        try:
            rv.append((json.loads(line), location))
        except ValueError:
            mh.error(location,
                     "not valid JSON",
                     "MalformedInput")
    return rv


def read_json(mh, file_name):
    items = read_json_items(mh, file_name)
    if len(items) != 1:
        mh.error(Location(file_name),
                 "expected exactly one JSON object",
                 "MalformedInput")
    return items[0]


def emit_json(value, pretty=True):
    if pretty:
        print(json.dumps(value, indent=2, sort_keys=True))
    else:
        print(json.dumps(value, sort_keys=True))


##############################################################################
# Commands
##############################################################################

def cmd_policy_add(mh, engine, options):
    items = [(policy_from_json(mh, obj, location), location)
             for obj, location in read_json_items(mh, options.file)]
    engine.add_policies(mh, items)
    return len(items)


def cmd_policy_rm(mh, engine, options):
    engine.remove_policy(mh, options.pid)
    return 1


def cmd_policy_list(mh, engine, options):
    policies = engine.list_policies(options.owner)
    for policy in policies:
        emit_json(policy_to_json(policy), pretty=False)
    return len(policies)


def cmd_enroll(mh, engine, options):
    records = [Face_Record.from_json(mh, location, obj)
               for obj, location in read_json_items(mh, options.file)]
    engine.enroll(mh, records)
    return len(records)


def cmd_check(mh, engine, options):
    obj, location = read_json(mh, options.manifest)
    result = engine.check_photo(mh, manifest_from_json(mh, obj, location))
    emit_json(result.to_json(include_timings=not options.no_timings))
    return 1


def cmd_enforce(mh, engine, options):
    obj, location = read_json(mh, options.manifest)
    report = engine.enforce(mh, manifest_from_json(mh, obj, location))
    emit_json(report.to_json(include_timings=not options.no_timings))
    return 1


def cmd_taxonomy_load(mh, engine, options):
    taxonomy = Semantic_Taxonomy.load(mh, options.file)
    engine.load_taxonomy(mh, taxonomy, Location(options.file))
    return len(taxonomy)


def cmd_taxonomy_show(mh, engine, options):
    emit_json(engine.taxonomy.to_json())
    return len(engine.taxonomy)


def cmd_bench(mh, config, options):
    scenario = bench.SCENARIOS[options.scenario]
    preset   = bench.PRESET_ALIASES.get(options.preset, options.preset)
    if options.min is not None or options.max is not None or \
       options.steps is not None:
        points = scenario.points(preset,
                                 options.min,
                                 options.max,
                                 options.steps)
    else:
        points = None

    def progress(result):
        mh.info(Location("bench %s" % options.scenario),
                "x = %s: lamp %.3f ms, naive %.3f ms" %
                (result.x, result.lamp_p50_ms, result.naive_p50_ms))

    results = bench.run_scenario(mh,
                                 options.scenario,
                                 preset    = preset,
                                 seed      = options.seed,
                                 n_queries = options.queries,
                                 points    = points,
                                 config    = config,
                                 progress  = None if options.brief
                                 else progress)

    if options.out:
        try:
            with open(options.out, "w", encoding="UTF-8") as fd:
                bench.write_csv(fd, results, options.scenario,
                                preset, options.seed,
                                config.workers)
        except OSError as err:
            mh.error(Location(options.out),
                     "cannot write results: %s" % err.strerror,
                     "IOFailure")
    else:
        bench.write_csv(sys.stdout, results, options.scenario,
                        preset, options.seed, config.workers)

    for passed, description in bench.evaluate_trends(options.scenario,
                                                     results):
        print("%s: %s" % ("PASS" if passed else "FAIL", description))
    return len(results)


def cmd_serve(mh, engine, options):
    server.serve(mh, engine, options.host, options.port)
    return engine.policy_count


##############################################################################
# Entry point
##############################################################################

def plural(n, what):
    if n == 1:
        return "1 %s" % what
    elif what.endswith("y") and not what.endswith("ey"):
        return "%u %sies" % (n, what[:-1])
    else:
        return "%u %ss" % (n, what)


def summary(mh, count, what):
    rv = "Processed %s and found" % plural(count, what)
    if mh.errors and mh.warnings:
        rv += " %s and %s" % (plural(mh.warnings, "warning"),
                              plural(mh.errors, "error"))
    elif mh.warnings:
        rv += " %s" % plural(mh.warnings, "warning")
    elif mh.errors:
        rv += " %s" % plural(mh.errors, "error")
    else:
        rv += " no issues"
    return rv


def create_parser():
    ap = argparse.ArgumentParser(
        prog="lamp",
        description=("LAMP %s (location-aware multi-party image privacy)" %
                     LAMP_VERSION),
        epilog=("LAMP is licensed under the GPLv3."
                " Report bugs here: %s" % BUGS_URL),
        allow_abbrev=False,
    )

    og_config = ap.add_argument_group("configuration options")
    og_config.add_argument("--config",
                           default=None,
                           metavar="FILE",
                           help="Read engine configuration from a JSON file.")
    og_config.add_argument("--data-dir",
                           default=None,
                           metavar="DIR",
                           help=("Directory holding policies, faces and the"
                                 " taxonomy. Overrides the configuration"
                                 " file and LAMP_DATA_DIR."))

    og_output = ap.add_argument_group("output options")
    og_output.add_argument("--version",
                           default=False,
                           action="store_true",
                           help="Print LAMP version and exit.")
    og_output.add_argument("--brief",
                           default=False,
                           action="store_true",
                           help=("Simpler output intended for CI. Does not"
                                 " show additional information or the"
                                 " final summary."))

    commands = ap.add_subparsers(dest="command", metavar="COMMAND")

    ap_policy = commands.add_parser("policy", help="Manage LAMPi policies.")
    policy_commands = ap_policy.add_subparsers(dest="policy_command",
                                               metavar="ACTION",
                                               required=True)
    ap_add = policy_commands.add_parser(
        "add",
        help=("Add policies from a file holding one object, an array or"
              " JSON lines. Nothing is added unless all are valid."))
    ap_add.add_argument("file", metavar="FILE")
    ap_add.set_defaults(func=cmd_policy_add, noun="policy")
    ap_rm = policy_commands.add_parser("rm", help="Remove a policy.")
    ap_rm.add_argument("pid", type=int, metavar="PID")
    ap_rm.set_defaults(func=cmd_policy_rm, noun="policy")
    ap_list = policy_commands.add_parser(
        "list",
        help="List policies as JSON lines, sorted by policy id.")
    ap_list.add_argument("--owner", default=None, metavar="USER")
    ap_list.set_defaults(func=cmd_policy_list, noun="policy")

    ap_enroll = commands.add_parser(
        "enroll",
        help="Enroll face vectors ({user, vector} records).")
    ap_enroll.add_argument("file", metavar="FILE")
    ap_enroll.set_defaults(func=cmd_enroll, noun="face record")

    for name, func, text in (("check", cmd_check,
                              "Decide which faces of a photo to replace."),
                             ("enforce", cmd_enforce,
                              "Decide and apply the recording redactor.")):
        ap_photo = commands.add_parser(name, help=text)
        ap_photo.add_argument("manifest", metavar="MANIFEST")
        ap_photo.add_argument("--no-timings",
                              default=False,
                              action="store_true",
                              help=("Leave out the per-stage timings so"
                                    " that the output is reproducible."))
        ap_photo.set_defaults(func=func, noun="photo")

    ap_taxonomy = commands.add_parser("taxonomy",
                                      help="Manage the keyword taxonomy.")
    taxonomy_commands = ap_taxonomy.add_subparsers(dest="taxonomy_command",
                                                   metavar="ACTION",
                                                   required=True)
    ap_load = taxonomy_commands.add_parser(
        "load",
        help="Replace the taxonomy with the one in FILE.")
    ap_load.add_argument("file", metavar="FILE")
    ap_load.set_defaults(func=cmd_taxonomy_load, noun="keyword")
    ap_show = taxonomy_commands.add_parser("show",
                                           help="Print the taxonomy.")
    ap_show.set_defaults(func=cmd_taxonomy_show, noun="keyword")

    ap_bench = commands.add_parser("bench",
                                   help="Run a benchmark sweep.")
    ap_bench.add_argument("scenario",
                          choices=sorted(bench.SCENARIOS))
    ap_bench.add_argument("--preset",
                          choices=["desk", "paper", "full"],
                          default="desk",
                          help=("Workload sizes; paper (or full) needs a"
                                " lot of memory (default: desk)."))
    ap_bench.add_argument("--seed", type=int, default=0)
    ap_bench.add_argument("--out",
                          default=None,
                          metavar="FILE",
                          help="Write the CSV here instead of stdout.")
    ap_bench.add_argument("--min", type=float, default=None)
    ap_bench.add_argument("--max", type=float, default=None)
    ap_bench.add_argument("--steps", type=int, default=None)
    ap_bench.add_argument("--queries",
                          type=int,
                          default=100,
                          help="Timed queries per point (default: 100).")
    ap_bench.set_defaults(func=cmd_bench, noun="data point")

    ap_serve = commands.add_parser("serve",
                                   help="Run the JSON over HTTP service.")
    ap_serve.add_argument("--host", default="127.0.0.1")
    ap_serve.add_argument("--port", type=int, default=8080)
    ap_serve.set_defaults(func=cmd_serve, noun="policy")

    return ap


def main(argv=None):
    ap = create_parser()
    options = ap.parse_args(argv)

    if options.version:
        print(LAMP_VERSION)
        return EXIT_OK
    if options.command is None:
        ap.error("a command is required")
    if options.command == "bench" and options.queries < 1:
        ap.error("--queries must be at least 1")

    mh = Message_Handler(options.brief)

    status = EXIT_OK
    count  = 0
    try:
        config = load_config(mh, options.config, options.data_dir)
        if options.command == "bench":
            count = cmd_bench(mh, config, options)
        else:
            engine = Engine(mh, config)
            count = options.func(mh, engine, options)
    except LAMP_Error as err:
        if not err.reported:
            mh.report(err)
        status = EXIT_IO if err.code == "IOFailure" else EXIT_VALIDATION

    if not options.brief:
        print(summary(mh, count, options.noun))

    return status


if __name__ == "__main__":
    sys.exit(main())
