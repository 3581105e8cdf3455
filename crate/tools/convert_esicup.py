#!/usr/bin/env python3
"""Convert legacy ESICUP nesting instances to the JSON instance format.

The classic text format is a loose sequence of headers and vertex lists:

    NUMBER OF POLYGONS: 2
    WIDTH: 40
    POLYGON 1
    QUANTITY: 2
    NUMBER OF VERTICES: 4
    0 0
    4 0
    4 4
    0 4
    POLYGON 2
    ...

Headers are matched case-insensitively, colons are optional, and vertex
coordinates may be separated by whitespace or commas. Pieces are written
outline-only; the solver decomposes nonconvex outlines on load. Run with
--selftest to exercise the parser and writer on an embedded sample.

Only the Python standard library is used.
"""

import argparse
import json
import re
import sys

NUMBER = r"[-+]?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?"
VERTEX_RE = re.compile(rf"^\(?\s*({NUMBER})\s*[,;\s]\s*({NUMBER})\s*\)?$")
HEADER_RE = re.compile(r"^([A-Za-z][A-Za-z ()./]*?)\s*:?\s*(" + NUMBER + r")?\s*$")


class FormatError(ValueError):
    pass


def parse_legacy(text):
    """Parse legacy text into {"strip_width", "pieces": [{"quantity", "vertices"}]}."""
    width = None
    declared = None
    pieces = []
    current = None  # vertices still expected for the open polygon

    def open_polygon():
        pieces.append({"quantity": 1, "vertices": []})

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("//")[0].strip()
        if not line:
            continue
        m = VERTEX_RE.match(line)
        if m:
            if not pieces or current is None:
                raise FormatError(f"line {lineno}: vertex before any POLYGON header")
            pieces[-1]["vertices"].append((float(m.group(1)), float(m.group(2))))
            current -= 1
            if current == 0:
                current = None
            continue
        m = HEADER_RE.match(line)
        if not m:
            raise FormatError(f"line {lineno}: unrecognized line {line!r}")
        key = re.sub(r"[^a-z]+", " ", m.group(1).lower()).strip()
        value = m.group(2)
        if key in ("width", "strip width"):
            width = float(value)
        elif key in ("number of polygons", "polygons"):
            declared = int(float(value))
        elif key == "polygon":
            open_polygon()
            current = None
        elif key in ("quantity", "number of copies"):
            if not pieces:
                raise FormatError(f"line {lineno}: QUANTITY before any POLYGON")
            pieces[-1]["quantity"] = int(float(value))
        elif key in ("number of vertices", "vertices", "vertices x y"):
            if not pieces:
                raise FormatError(f"line {lineno}: vertex count before any POLYGON")
            current = int(float(value))
        else:
            # tolerate unknown metadata (comments, sheet length hints)
            continue

    if width is None:
        raise FormatError("missing WIDTH header")
    if not pieces:
        raise FormatError("no polygons found")
    if declared is not None and declared != len(pieces):
        raise FormatError(f"header declares {declared} polygons, found {len(pieces)}")
    for i, p in enumerate(pieces, 1):
        if len(p["vertices"]) < 3:
            raise FormatError(f"polygon {i} has {len(p['vertices'])} vertices")
    return {"strip_width": width, "pieces": pieces}


def fmt_ring(ring):
    return json.dumps([[float(x), float(y)] for x, y in ring])


def dump_instance(inst):
    """Write an instance dict in the repository's data-file style."""
    lines = ["{"]
    lines.append(f'  "name": {json.dumps(inst["name"])},')
    lines.append(f'  "strip_width": {json.dumps(float(inst["strip_width"]))},')
    if inst.get("raster_scale") is not None:
        lines.append(f'  "raster_scale": {json.dumps(float(inst["raster_scale"]))},')
    lines.append('  "pieces": [')
    chunks = []
    for p in inst["pieces"]:
        body = [f'      "id": {json.dumps(p["id"])},']
        if int(p.get("count", 1)) != 1:
            body.append(f'      "count": {int(p["count"])},')
        vertices = f'      "vertices": {fmt_ring(p["vertices"])}'
        if p.get("parts"):
            rings = ",\n".join(f"        {fmt_ring(r)}" for r in p["parts"])
            body.append(vertices + ",")
            body.append('      "parts": [\n' + rings + "\n      ]")
        else:
            body.append(vertices)
        chunks.append("    {\n" + "\n".join(body) + "\n    }")
    lines.append(",\n".join(chunks))
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def convert(text, name, raster_scale=None):
    legacy = parse_legacy(text)
    pad = max(2, len(str(len(legacy["pieces"]))))
    pieces = []
    for i, p in enumerate(legacy["pieces"], 1):
        piece = {"id": f"p{i:0{pad}d}", "vertices": p["vertices"]}
        if p["quantity"] != 1:
            piece["count"] = p["quantity"]
        pieces.append(piece)
    return dump_instance(
        {
            "name": name,
            "strip_width": legacy["strip_width"],
            "raster_scale": raster_scale,
            "pieces": pieces,
        }
    )


SAMPLE = """\
NUMBER OF POLYGONS: 2
WIDTH: 10
POLYGON 1
QUANTITY: 2
NUMBER OF VERTICES: 4
0 0
4, 0
4 4
0 4
POLYGON 2
NUMBER OF VERTICES: 3
(0, 0)
(3, 0)
(0, 3)
"""

SAMPLE_JSON = """\
{
  "name": "sample",
  "strip_width": 10.0,
  "pieces": [
    {
      "id": "p01",
      "count": 2,
      "vertices": [[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]]
    },
    {
      "id": "p02",
      "vertices": [[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]]
    }
  ]
}
"""


def selftest():
    got = convert(SAMPLE, "sample")
    assert got == SAMPLE_JSON, f"converter output changed:\n{got}"
    parsed = json.loads(got)
    assert parsed["pieces"][0]["count"] == 2
    assert parsed["pieces"][1]["vertices"][2] == [0.0, 3.0]

    for bad, fragment in [
        ("WIDTH: 10\n0 0\n1 0\n0 1\n", "before any POLYGON"),
        ("POLYGON 1\nNUMBER OF VERTICES: 3\n0 0\n1 0\n0 1\n", "missing WIDTH"),
        ("WIDTH: 5\nNUMBER OF POLYGONS: 3\nPOLYGON 1\nNUMBER OF VERTICES: 3\n0 0\n1 0\n0 1\n",
         "declares 3 polygons"),
        ("WIDTH: 5\nPOLYGON 1\nNUMBER OF VERTICES: 2\n0 0\n1 0\n", "has 2 vertices"),
    ]:
        try:
            parse_legacy(bad)
        except FormatError as e:
            assert fragment in str(e), f"{fragment!r} not in {e}"
        else:
            raise AssertionError(f"accepted bad input: {bad!r}")

    print("selftest ok")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("input", nargs="?", help="legacy instance file")
    ap.add_argument("-o", "--output", help="output JSON path (default: stdout)")
    ap.add_argument("--name", help="instance name (default: input stem)")
    ap.add_argument("--raster-scale", type=float, help="seeding cell size hint")
    ap.add_argument("--selftest", action="store_true", help="run embedded checks and exit")
    args = ap.parse_args()

    if args.selftest:
        selftest()
        return
    if not args.input:
        ap.error("input file required (or --selftest)")
    with open(args.input) as f:
        text = f.read()
    name = args.name or re.sub(r"\.[^.]*$", "", args.input.split("/")[-1])
    try:
        out = convert(text, name, args.raster_scale)
    except FormatError as e:
        sys.exit(f"error: {e}")
    if args.output:
        with open(args.output, "w") as f:
            f.write(out)
    else:
        sys.stdout.write(out)


if __name__ == "__main__":
    main()
