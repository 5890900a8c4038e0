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
import enum

from lamp import version


class Location:
    """Where a message comes from

    Either a real place, such as a line of the policy log, or a virtual
    one such as ``POST /policies`` or ``<manifest photo-7>``.

    :attribute file_name: file name, request or other virtual name
    :type: str

    :attribute line_no: 1-based line, for JSON lines files
    :type: int
    """
    def __init__(self, file_name, line_no=None):
        assert isinstance(file_name, str)
        assert line_no is None or (isinstance(line_no, int) and
                                   line_no >= 1)
        self.file_name = file_name
        self.line_no   = line_no

    def to_string(self):
        """file or file:line, as compilers print it

        :rtype: str
        """
        if self.line_no is None:
            return self.file_name
        return "%s:%u" % (self.file_name, self.line_no)

    def __repr__(self):
        return "Location(%s)" % self.to_string()


@enum.unique
class Kind(enum.Enum):
    SYS_ERROR   = "error"
    SYS_WARNING = "warning"
    SYS_INFO    = "info"

    def __str__(self):
        return self.value


ERROR_CODES = frozenset([
    "UnknownKeyword",
    "MalformedAddress",
    "InvalidInterval",
    "TypeLocationMismatch",
    "DuplicatePolicyId",
    "UnknownPolicyId",
    "DimensionMismatch",
    "RedactorFailure",
    "InfeasibleSpec",
    "MalformedInput",
    "InvalidConfig",
    "InvalidTaxonomy",
    "IOFailure",
])


class LAMP_Error(Exception):
    """Every problem LAMP detects ends up as one of these

    :attribute location: what the problem is attached to
    :type: Location

    :attribute kind: error, or warning for non-fatal problems
    :type: Kind

    :attribute message: human readable text
    :type: str

    :attribute code: one of :data:`ERROR_CODES`, e.g. UnknownKeyword
    :type: str

    :attribute reported: set once a message handler has printed it
    :type: bool
    """
    def __init__(self, location, kind, message, code):
        assert isinstance(location, Location)
        assert isinstance(kind, Kind)
        assert isinstance(message, str)
        assert code in ERROR_CODES

        super().__init__("%s: %s [%s]" % (location.to_string(),
                                          message,
                                          code))
        self.location = location
        self.kind     = kind
        self.message  = message
        self.code     = code
        self.reported = False

    def to_json(self):
        return {"error"   : self.code,
                "message" : self.message}


class Redactor_Failure(LAMP_Error):
    """Raised when a redactor cannot apply a decision list

    The decisions computed before the failure are never lost; they
    travel with the exception.

    :attribute decisions: the decision list the redactor was given
    :type: list[Redaction_Decision]
    """
    def __init__(self, location, message, decisions):
        assert isinstance(decisions, list)
        super().__init__(location, Kind.SYS_ERROR, message, "RedactorFailure")
        self.decisions = decisions


class Message_Handler:
    """Counts and prints every diagnostic

    The command line tool, the service and the engine all report
    through an instance of this class (or of a subclass that captures
    messages instead of printing them). Nothing else in LAMP prints
    diagnostics.

    :attribute brief: print ``lamp`` in front of the kind, for CI logs
    :type: bool

    :attribute warnings: warnings so far
    :type: int

    :attribute errors: errors so far
    :type: int
    """
    def __init__(self, brief=False, stream=None):
        assert isinstance(brief, bool)
        self.brief    = brief
        self.stream   = stream
        self.warnings = 0
        self.errors   = 0

    def emit(self, location, kind, message, fatal=True, code=None):
        """Show one message, raising it if it is fatal

        Subclasses override this to redirect output.
        """
        assert isinstance(location, Location)
        assert isinstance(kind, Kind)
        assert isinstance(message, str)
        assert isinstance(fatal, bool)
        assert code is None or code in ERROR_CODES
        assert code is not None or not fatal

        text = "%s: %s%s: %s" % (location.to_string(),
                                 "lamp " if self.brief else "",
                                 kind,
                                 message)
        if code:
            text += " [%s]" % code
        (self.stream or sys.stdout).write(text + "\n")

        if fatal:
            err = LAMP_Error(location, kind, message, code)
            err.reported = True
            raise err

    def error(self, location, message, code, fatal=True):
        """Report an error, and by default abort with it

        For example::

           mh.error(Location("policies.jsonl", 12),
                    "unknown keyword potato",
                    "UnknownKeyword")

        prints::

           policies.jsonl:12: error: unknown keyword potato [UnknownKeyword]

        :param location: where the problem is
        :type location: Location

        :param code: the machine readable error code
        :type code: str

        :param fatal: raise the error after printing it
        :type fatal: bool

        :raises LAMP_Error: if fatal is true
        """
        assert isinstance(message, str)
        assert code in ERROR_CODES

        self.errors += 1
        self.emit(location = location,
                  kind     = Kind.SYS_ERROR,
                  message  = message,
                  fatal    = fatal,
                  code     = code)

    def warning(self, location, message):
        self.warnings += 1
        self.emit(location = location,
                  kind     = Kind.SYS_WARNING,
                  message  = message,
                  fatal    = False)

    def info(self, location, message):
        self.emit(location = location,
                  kind     = Kind.SYS_INFO,
                  message  = message,
                  fatal    = False)

    def report(self, err):
        """Count and print an error that was raised without a handler

        Pure code (e.g. vector arithmetic) raises :class:`LAMP_Error`
        directly; front-ends pass it here once they catch it.

        :type err: LAMP_Error
        """
        assert isinstance(err, LAMP_Error)
        self.error(location = err.location,
                   message  = err.message,
                   code     = err.code,
                   fatal    = False)

    def internal_error(self, location, message):  # pragma: no cover
        self.errors += 1
        self.emit(location = location,
                  kind     = Kind.SYS_ERROR,
                  message  = "%s (please report this to %s)" % (
                      message,
                      version.BUGS_URL),
                  fatal    = False)
        sys.exit(1)
