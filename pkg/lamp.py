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

from lamp import lamp

if __name__ == "__main__":
    sys.exit(lamp.main())
