# BSD 3-Clause License
#
# Copyright (C) 2021 THL A29 Limited, a Tencent company.  All rights reserved.
#
# Redistribution and use in source and binary forms, with or without modification,
# are permitted provided that the following conditions are met:
#
#  * Redistributions of source code must retain the above copyright notice, this
#    list of conditions and the following disclaimer.
#
#  * Redistributions in binary form must reproduce the above copyright notice,
#    this list of conditions and the following disclaimer in the documentation
#    and/or other materials provided with the distribution.
#
#  * Neither the name of the psutil authors nor the names of its contributors
#    may be used to endorse or promote products derived from this software without
#    specific prior written permission.
#
# THIS SOFTWARE IS PROVIDED BY THE COPYRIGHT HOLDERS AND CONTRIBUTORS "AS IS" AND
# ANY EXPRESS OR IMPLIED WARRANTIES, INCLUDING, BUT NOT LIMITED TO, THE IMPLIED
# WARRANTIES OF MERCHANTABILITY AND FITNESS FOR A PARTICULAR PURPOSE ARE
# DISCLAIMED. IN NO EVENT SHALL THE COPYRIGHT OWNER OR CONTRIBUTORS BE LIABLE FOR
# ANY DIRECT, INDIRECT, INCIDENTAL, SPECIAL, EXEMPLARY, OR CONSEQUENTIAL DAMAGES
# (INCLUDING, BUT NOT LIMITED TO, PROCUREMENT OF SUBSTITUTE GOODS OR SERVICES;
# LOSS OF USE, DATA, OR PROFITS; OR BUSINESS INTERRUPTION) HOWEVER CAUSED AND ON
# ANY THEORY OF LIABILITY, WHETHER IN CONTRACT, STRICT LIABILITY, OR TORT
# (INCLUDING NEGLIGENCE OR OTHERWISE) ARISING IN ANY WAY OUT OF THE USE OF THIS
# SOFTWARE, EVEN IF ADVISED OF THE POSSIBILITY OF SUCH DAMAGE.

import csv
import io
import math

import numpy as np
import torch

from hotcone.core import HotspotLocation, hotspot_set_distance
from hotcone.utils import atomic_write_json, atomic_write_text, format_float

FIELD_COLUMNS = ("t", "r", "fiber_coords", "u", "du_dr")
TRACK_COLUMNS = ("t", "r_sup", "r_inf", "max_u", "fiber_coords", "dist_to_H_infinity")
BESSEL_COLUMNS = ("order", "argument", "value", "log_value", "bessel_envelope_ratio", "method_tag")
RADIAL_COLUMNS = ("r", "w", "w_prime")


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (list, tuple, np.ndarray, torch.Tensor)):
        # chart coordinates share one column, separated by ';'
        return ";".join(format_float(v) for v in np.asarray(value, dtype=np.float64).reshape(-1))
    return format_float(value)


def write_csv(path, columns, rows):
    """Byte-stable CSV: fixed column order, '\\n' line ends, repr-exact floats."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    atomic_write_text(path, buffer.getvalue())
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, torch.Tensor):
        return obj.tolist()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if hasattr(obj, "value") and not isinstance(obj, (int, float, str)):
        # enums
        return obj.value
    return obj


def write_json(path, obj):
    atomic_write_json(path, _jsonable(obj))
    return path


def field_rows(field_):
    """One row per (radius, fiber point) of a sampled heat field."""
    points = field_.points.tolist()
    u, du = field_.u.tolist(), field_.du_dr.tolist()
    for i, r in enumerate(field_.r.tolist()):
        for j, x in enumerate(points):
            yield (field_.t, r, x, u[i][j], du[i][j])


def _spot_coords(spot):
    if spot.location == HotspotLocation.CONE_POINT:
        return "cone-point"
    if spot.location == HotspotLocation.FIBER:
        return "fiber"
    return spot.x


def track_rows(traj, pred=None):
    """Per-time summary of a hot-spot trajectory."""
    for hotspots in traj.sets:
        if pred is None:
            distance = None
        elif pred.h_infinity is None:
            distance = math.inf
        else:
            distance = hotspot_set_distance(pred, hotspots)
        yield (
            hotspots.t,
            hotspots.r_sup,
            hotspots.r_inf,
            hotspots.max_value,
            _spot_coords(hotspots.primary),
            distance,
        )


def bessel_rows(evaluations, envelope):
    for ev, ratio in zip(evaluations, envelope):
        yield (ev.order, ev.argument, ev.value, ev.log_value, ratio, ev.method_tag.value)


def radial_rows(pair):
    for r, w, dw in zip(pair.r.tolist(), pair.w.tolist(), pair.w_prime.tolist()):
        yield (r, w, dw)
