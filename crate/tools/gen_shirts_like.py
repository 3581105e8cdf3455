#!/usr/bin/env python3
"""Generate data/shirts99.json, a garment-cutting instance at shirts scale.

The original shirts benchmark coordinates are not redistributable here, so
this builds a same-scale stand-in: 99 pieces on a width-40 strip with the
same convex/nonconvex split (60 convex panels, 39 nonconvex T-shaped
shirts). Shirt bodies and sleeve bars are supplied as explicit convex parts;
panels are outline-only. All coordinates are integers so the seeding raster
is exact at the default cell size.

The construction is a fixed table, not random: rerunning the script always
reproduces the committed file (use --check to confirm).

Only the Python standard library is used.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from convert_esicup import dump_instance  # noqa: E402

# (body w, body h, sleeve overhang, sleeve bar h, count)
SHIRTS = [
    (3, 3, 1, 2, 4),
    (4, 3, 1, 2, 4),
    (4, 4, 1, 2, 4),
    (5, 4, 1, 2, 3),
    (3, 2, 1, 2, 4),
    (4, 2, 1, 2, 3),
    (2, 2, 1, 2, 4),
    (3, 4, 1, 3, 3),
    (5, 3, 2, 2, 3),
    (2, 3, 1, 2, 3),
    (6, 4, 1, 2, 2),
    (4, 5, 2, 2, 2),
]

# (name, vertex ring, count); all rings counterclockwise and convex
PANELS = [
    ("rect22", [(0, 0), (2, 0), (2, 2), (0, 2)], 6),
    ("rect32", [(0, 0), (3, 0), (3, 2), (0, 2)], 6),
    ("rect42", [(0, 0), (4, 0), (4, 2), (0, 2)], 5),
    ("rect52", [(0, 0), (5, 0), (5, 2), (0, 2)], 4),
    ("rect33", [(0, 0), (3, 0), (3, 3), (0, 3)], 5),
    ("tri33", [(0, 0), (3, 0), (0, 3)], 5),
    ("tri42", [(0, 0), (4, 0), (0, 2)], 5),
    ("tri24", [(0, 0), (2, 0), (0, 4)], 4),
    ("trap4", [(0, 0), (4, 0), (3, 2), (1, 2)], 5),
    ("trap5", [(0, 0), (5, 0), (4, 2), (1, 2)], 5),
    ("hex", [(1, 0), (3, 0), (4, 2), (3, 4), (1, 4), (0, 2)], 5),
    ("para", [(0, 0), (3, 0), (4, 2), (1, 2)], 5),
]


def shirt(bw, bh, o, ah):
    """T-shirt silhouette: body rectangle plus a sleeve bar across the top."""
    w = bw + 2 * o
    outline = [
        (o, 0), (o + bw, 0), (o + bw, bh), (w, bh),
        (w, bh + ah), (0, bh + ah), (0, bh), (o, bh),
    ]
    body = [(o, 0), (o + bw, 0), (o + bw, bh), (o, bh)]
    bar = [(0, bh), (w, bh), (w, bh + ah), (0, bh + ah)]
    return outline, [body, bar]


def build():
    pieces = []
    for i, (bw, bh, o, ah, count) in enumerate(SHIRTS, 1):
        outline, parts = shirt(bw, bh, o, ah)
        pieces.append(
            {"id": f"shirt{i:02d}", "count": count, "vertices": outline, "parts": parts}
        )
    for name, ring, count in PANELS:
        pieces.append({"id": name, "count": count, "vertices": ring})

    shirts_n = sum(c for *_, c in SHIRTS)
    panels_n = sum(c for _, _, c in PANELS)
    assert shirts_n == 39 and panels_n == 60, (shirts_n, panels_n)
    return {"name": "shirts99", "strip_width": 40.0, "pieces": pieces}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default_out = os.path.join(
        os.path.dirname(os.path.abspath(__file__)), "..", "data", "shirts99.json"
    )
    ap.add_argument("-o", "--output", default=os.path.normpath(default_out))
    ap.add_argument(
        "--check",
        action="store_true",
        help="compare against the existing file instead of writing",
    )
    args = ap.parse_args()

    text = dump_instance(build())
    if args.check:
        with open(args.output) as f:
            if f.read() != text:
                sys.exit(f"{args.output} differs from generator output")
        print(f"{args.output} matches")
        return
    with open(args.output, "w") as f:
        f.write(text)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
