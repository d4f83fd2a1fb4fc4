#!/usr/bin/env python3
"""One-shot conversion of the Snow shapefiles shipped with libpysal
(examples/snow_maps, Web Mercator) into the vendored British National Grid
CSVs under data/.

Requires: pyshp, pyproj, and an extracted copy of libpysal's snow_maps
directory. Not part of the build; kept so the vendored files can be
regenerated and audited.

    python3 scripts/curate_snow_data.py /path/to/snow_maps data/

Curation rules:
  * Cases with Count == 0 are dropped (a death record needs count >= 1).
  * Case ids are 1..n in shapefile order after dropping; pump ids 1..13 in
    shapefile order.
  * The pump nearest Broad Street (lon -0.13667, lat 51.51334) is labeled
    "Broad Street"; other labels are left empty.
  * angle_deg orients each bar away from its nearest street segment: the
    bar's local +y axis, rotated counter-clockwise by angle_deg, points from
    the closest street point towards the address. Rounded to whole degrees
    in [0, 360).
  * Polylines are split into consecutive 2-point segments.
  * Coordinates are written with 2 decimals (1 cm).
"""

import math
import sys
from pathlib import Path

import pyproj
import shapefile
from pyproj.transformer import TransformerGroup

BROAD_STREET_LONLAT = (-0.13667, 51.51334)


def closest_point(p, a, b):
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / (dx * dx + dy * dy)
    t = max(0.0, min(1.0, t))
    return ax + t * dx, ay + t * dy


def main(src: Path, dst: Path) -> None:
    group = TransformerGroup(3857, 27700, always_xy=True)
    merc_to_bng = group.transformers[0]
    assert "OSGB36 to WGS 84 (6)" in merc_to_bng.description
    bng_to_geo = pyproj.Transformer.from_crs(27700, 4326, always_xy=True)

    def conv(xy):
        e, n = merc_to_bng.transform(*xy)
        return round(e, 2), round(n, 2)

    streets = []
    for shape in shapefile.Reader(str(src / "Soho_Network")).shapes():
        pts = [conv(p) for p in shape.points]
        for a, b in zip(pts, pts[1:]):
            if a != b:
                streets.append((a, b))

    pumps = [conv(s.points[0]) for s in shapefile.Reader(str(src / "SohoWater")).shapes()]

    def geo_dist(e, n):
        lon, lat = bng_to_geo.transform(e, n)
        return math.hypot(lon - BROAD_STREET_LONLAT[0], lat - BROAD_STREET_LONLAT[1])

    broad = min(range(len(pumps)), key=lambda i: geo_dist(*pumps[i]))

    people = shapefile.Reader(str(src / "SohoPeople"))
    cases = []
    dropped = 0
    for shape, rec in zip(people.shapes(), people.records()):
        count = int(rec[1])
        if count < 1:
            dropped += 1
            continue
        p = conv(shape.points[0])
        best = min(
            (closest_point(p, a, b) for a, b in streets),
            key=lambda q: (q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2,
        )
        ux, uy = p[0] - best[0], p[1] - best[1]
        angle = round(math.degrees(math.atan2(-ux, uy))) % 360
        cases.append((p, count, angle))

    dst.mkdir(parents=True, exist_ok=True)
    with open(dst / "cases.csv", "w", newline="\n") as f:
        f.write("id,easting,northing,count,angle_deg\n")
        for i, (p, count, angle) in enumerate(cases, start=1):
            f.write(f"{i},{p[0]:.2f},{p[1]:.2f},{count},{angle}\n")
    with open(dst / "pumps.csv", "w", newline="\n") as f:
        f.write("id,label,easting,northing\n")
        for i, p in enumerate(pumps):
            label = "Broad Street" if i == broad else ""
            f.write(f"{i + 1},{label},{p[0]:.2f},{p[1]:.2f}\n")
    with open(dst / "streets.csv", "w", newline="\n") as f:
        f.write("start_easting,start_northing,end_easting,end_northing\n")
        for a, b in streets:
            f.write(f"{a[0]:.2f},{a[1]:.2f},{b[0]:.2f},{b[1]:.2f}\n")

    print(f"cases={len(cases)} (dropped {dropped} zero-count) "
          f"deaths={sum(c[1] for c in cases)} pumps={len(pumps)} "
          f"broad_street_id={broad + 1} streets={len(streets)}")


if __name__ == "__main__":
    main(Path(sys.argv[1]), Path(sys.argv[2]))
