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
from http.server import ThreadingHTTPServer, BaseHTTPRequestHandler
from urllib.parse import urlsplit, parse_qs

from lamp.errors import (Location, Message_Handler, LAMP_Error,
                         Redactor_Failure)
from lamp.policy import policy_from_json, policy_to_json
from lamp.face import Face_Record
from lamp.enforcement import manifest_from_json
from lamp.engine import Engine
from lamp.version import LAMP_VERSION

STATUS_FOR_CODE = {
    "UnknownPolicyId"   : 404,
    "DuplicatePolicyId" : 409,
    "RedactorFailure"   : 502,
    "IOFailure"         : 500,
}


class Capturing_Handler(Message_Handler):
    """Collects the messages of one request instead of printing them"""
    def __init__(self):
        super().__init__(brief=True)
        self.messages = []

    def emit(self, location, kind, message, fatal=True, code=None):
        self.messages.append({"kind"    : str(kind),
                              "message" : message})
        if fatal:
            raise LAMP_Error(location, kind, message, code)


class Http_Error(Exception):
    def __init__(self, status, error, message):
        super().__init__(message)
        self.status  = status
        self.error   = error
        self.message = message


class Request_Handler(BaseHTTPRequestHandler):
    engine = None
    mh     = None
    server_version = "lamp/%s" % LAMP_VERSION

    def log_message(self, format, *args):  # pylint: disable=redefined-builtin
        self.mh.info(Location(self.address_string()), format % args)

    def do_GET(self):
        self.dispatch()

    def do_POST(self):
        self.dispatch()

    def do_DELETE(self):
        self.dispatch()

    def dispatch(self):
        url      = urlsplit(self.path)
        location = Location("%s %s" % (self.command, url.path))
        rmh      = Capturing_Handler()
        try:
            status, body = self.route(rmh, location, url)
        except Redactor_Failure as err:
            status = STATUS_FOR_CODE[err.code]
            body   = err.to_json()
            body["decisions"] = [d.to_json() for d in err.decisions]
        except LAMP_Error as err:
            status = STATUS_FOR_CODE.get(err.code, 400)
            body   = err.to_json()
        except Http_Error as err:
            status = err.status
            body   = {"error"   : err.error,
                      "message" : err.message}
        except Exception as err:  # pylint: disable=broad-except
            status = 500
            body   = {"error"   : "IOFailure",
                      "message" : "internal error: %s" % err}

        if status >= 500:
            self.mh.warning(location, body["message"])
        self.send_json(status, body)

    def send_json(self, status, body):
        data = (json.dumps(body, sort_keys=True) + "\n").encode("UTF-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def read_json(self, mh, location):
        try:
            length = int(self.headers.get("Content-Length", 0))
        except ValueError:
            length = 0
        raw = self.rfile.read(length) if length > 0 else b""
        try:
            return json.loads(raw.decode("UTF-8"))
        except ValueError:
            mh.error(location,
                     "request body is not valid JSON",
                     "MalformedInput")

    def route(self, mh, location, url):
        parts = [part for part in url.path.split("/") if part]

        if parts == ["healthz"] and self.command == "GET":
            return 200, {"status"   : "ok",
                         "policies" : self.engine.policy_count,
                         "enrolled" : self.engine.enrolled_count,
                         "version"  : LAMP_VERSION}

        elif parts == ["policies"] and self.command == "POST":
            policy = policy_from_json(mh, self.read_json(mh, location),
                                      location)
            self.engine.add_policy(mh, policy, location)
            return 201, {"pid": policy.pid}

        elif parts == ["policies"] and self.command == "GET":
            owner = parse_qs(url.query).get("owner", [None])[0]
            return 200, {"policies": [policy_to_json(policy)
                                      for policy in
                                      self.engine.list_policies(owner)]}

        elif len(parts) == 2 and parts[0] == "policies" and \
             self.command == "DELETE":
            try:
                pid = int(parts[1])
            except ValueError:
                mh.error(location,
                         "policy id must be an integer",
                         "MalformedInput")
            self.engine.remove_policy(mh, pid, location)
            return 200, {"removed": pid}

        elif parts == ["enroll"] and self.command == "POST":
            body = self.read_json(mh, location)
            items = body if isinstance(body, list) else [body]
            records = [Face_Record.from_json(mh, location, item)
                       for item in items]
            self.engine.enroll(mh, records)
            return 200, {"enrolled": [record.user for record in records]}

        elif parts == ["check"] and self.command == "POST":
            manifest = manifest_from_json(mh, self.read_json(mh, location),
                                          location)
            return 200, self.engine.check_photo(mh, manifest).to_json()

        elif parts == ["enforce"] and self.command == "POST":
            manifest = manifest_from_json(mh, self.read_json(mh, location),
                                          location)
            return 200, self.engine.enforce(mh, manifest).to_json()

        else:
            raise Http_Error(404,
                             "NotFound",
                             "no endpoint %s %s" % (self.command, url.path))


def create_server(mh, engine, host="127.0.0.1", port=8080):
    """Bind (but do not start) the service

    Port 0 picks a free port; see ``server.server_address``.

    :rtype: ThreadingHTTPServer
    """
    assert isinstance(mh, Message_Handler)
    assert isinstance(engine, Engine)

    handler = type("Engine_Request_Handler",
                   (Request_Handler,),
                   {"engine" : engine,
                    "mh"     : mh})
    try:
        server = ThreadingHTTPServer((host, port), handler)
    except OSError as err:
        mh.error(Location("%s:%u" % (host, port)),
                 "cannot listen: %s" % err.strerror,
                 "IOFailure")
    server.daemon_threads = True
    return server


def serve(mh, engine, host="127.0.0.1", port=8080):
    server = create_server(mh, engine, host, port)
    mh.info(Location("lamp"),
            "serving %u policies on http://%s:%u" %
            ((engine.policy_count,) + server.server_address[:2]))
    try:
        server.serve_forever()
    except KeyboardInterrupt:  # pragma: no cover
        pass
    finally:
        server.server_close()
