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

from lamp.errors import Location, Message_Handler
from lamp.dlp import DEFAULT_FANOUT, DEFAULT_POINT_EPSILON
from lamp.face import DEFAULT_TOLERANCE_LOW, DEFAULT_TOLERANCE_HIGH

DATA_DIR_VARIABLE = "LAMP_DATA_DIR"
DEFAULT_DATA_DIR  = "lamp-data"


def default_workers():
    return min(8, os.cpu_count() or 1)


class Engine_Config:
    """Tunable parameters of the engine

    :attribute fanout: maximum entries per DLP tree node
    :type: int

    :attribute tolerance_low: face distance tolerance for Low policies
    :type: float

    :attribute tolerance_high: face distance tolerance for High policies
    :type: float

    :attribute point_epsilon: degrees within which a geotag matches \
    a stored point
    :type: float

    :attribute strict_keywords: reject photos with unknown keywords
    :type: bool

    :attribute workers: size of the face matching worker pool
    :type: int

    :attribute data_dir: where policies, faces and the taxonomy are kept
    :type: str
    """
    FIELDS = {
        "fanout"          : (int,),
        "tolerance_low"   : (int, float),
        "tolerance_high"  : (int, float),
        "point_epsilon"   : (int, float),
        "strict_keywords" : (bool,),
        "workers"         : (int,),
        "data_dir"        : (str,),
    }

    def __init__(self,
                 fanout          = DEFAULT_FANOUT,
                 tolerance_low   = DEFAULT_TOLERANCE_LOW,
                 tolerance_high  = DEFAULT_TOLERANCE_HIGH,
                 point_epsilon   = DEFAULT_POINT_EPSILON,
                 strict_keywords = False,
                 workers         = None,
                 data_dir        = DEFAULT_DATA_DIR):
        self.fanout          = fanout
        self.tolerance_low   = float(tolerance_low)
        self.tolerance_high  = float(tolerance_high)
        self.point_epsilon   = float(point_epsilon)
        self.strict_keywords = strict_keywords
        self.workers         = \
            default_workers() if workers is None else workers
        self.data_dir        = data_dir

    def problems(self):
        rv = []
        if not self.tolerance_high > self.tolerance_low > 0:
            rv.append("tolerances must satisfy high > low > 0"
                      " (low = %g, high = %g)" % (self.tolerance_low,
                                                  self.tolerance_high))
        if self.fanout < 2:
            rv.append("fanout must be at least 2, got %i" % self.fanout)
        if self.point_epsilon < 0:
            rv.append("point_epsilon must not be negative")
        if self.workers < 1:
            rv.append("workers must be at least 1, got %i" % self.workers)
        return rv

    def validate(self, mh, location):
        assert isinstance(mh, Message_Handler)
        assert isinstance(location, Location)
        for problem in self.problems():
            mh.error(location, problem, "InvalidConfig")

    def to_json(self):
        return {name: getattr(self, name) for name in self.FIELDS}

    @classmethod
    def from_json(cls, mh, obj, location):
        """Build a configuration from a JSON object

        Missing keys take their default; unknown keys are an error.

        :raises LAMP_Error: InvalidConfig
        """
        assert isinstance(mh, Message_Handler)
        assert isinstance(location, Location)

        if not isinstance(obj, dict):
            mh.error(location,
                     "configuration must be a JSON object",
                     "InvalidConfig")
        for name, value in obj.items():
            if name not in cls.FIELDS:
                mh.error(location,
                         "unknown configuration key '%s'" % name,
                         "InvalidConfig")
            types = cls.FIELDS[name]
            if (isinstance(value, bool) and bool not in types) or \
               not isinstance(value, types):
                mh.error(location,
                         "configuration key '%s' has the wrong type" % name,
                         "InvalidConfig")
        config = cls(**obj)
        config.validate(mh, location)
        return config


def load_config(mh, file_name=None, data_dir=None, environ=None):
    """Read the configuration in order of precedence

    Defaults, then the JSON file (if any), then the LAMP_DATA_DIR
    environment variable, then an explicit data directory.

    :raises LAMP_Error: InvalidConfig, or IOFailure if the file \
    cannot be read
    :rtype: Engine_Config
    """
    assert isinstance(mh, Message_Handler)
    assert isinstance(file_name, str) or file_name is None
    assert isinstance(data_dir, str) or data_dir is None
    if environ is None:
        environ = os.environ

    if file_name is None:
        config = Engine_Config()
    else:
        location = Location(file_name)
        try:
            with open(file_name, "r", encoding="UTF-8") as fd:
                obj = json.load(fd)
        except OSError as err:
            mh.error(location,
                     "cannot read configuration: %s" % err.strerror,
                     "IOFailure")
        except ValueError as err:
            mh.error(location,
                     "configuration is not valid JSON: %s" % err,
                     "InvalidConfig")
        config = Engine_Config.from_json(mh, obj, location)

    if environ.get(DATA_DIR_VARIABLE):
        config.data_dir = environ[DATA_DIR_VARIABLE]
    if data_dir is not None:
        config.data_dir = data_dir
    return config
