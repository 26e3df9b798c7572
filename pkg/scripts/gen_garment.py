#!/usr/bin/env python3
"""Generate the packaged canonical T-shirt geometry file.

The coordinates are a modeling choice: a mirror-symmetric short-sleeve
T-shirt of roughly 720x620 px centered in a 1280x1024 table frame, with
seam polylines routed a few pixels inside the outline and crossings placed
exactly on shared seam vertices.  Run from the repo root:

    python3 scripts/gen_garment.py
"""

from __future__ import annotations

import json
from pathlib import Path

from seamfold.sim.garment import garment_from_dict, garment_to_dict

FRAME_W, FRAME_H = 1280, 1024
CX = 640.0  # mirror axis


def mirror(points):
    return [[2 * CX - x, y] for x, y in points]


def build() -> dict:
    # outline, clockwise in a y-down frame, starting at the left neck point
    outline = [
        [560, 250],  # left neck point (top edge)
        [610, 285],
        [640, 295],  # neck dip
        [670, 285],
        [720, 250],  # right neck point
        [840, 270],  # right shoulder tip
        [1000, 430],  # right sleeve outer corner
        [930, 510],  # right sleeve lower corner
        [830, 430],  # right armpit
        [830, 870],  # right hem corner
        [450, 870],  # left hem corner
        [450, 430],  # left armpit
        [350, 510],  # left sleeve lower corner
        [280, 430],  # left sleeve outer corner
        [440, 270],  # left shoulder tip
    ]

    # shared vertices so crossings sit exactly on seam intersections
    l_shoulder = [446, 278]
    r_shoulder = [834, 278]
    l_neck = [560, 258]
    r_neck = [720, 258]
    l_hem = [458, 858]
    r_hem = [822, 858]

    seams = []

    def seam(category, visibility, points):
        seams.append({"category": category, "visibility": visibility, "points": points})

    # shoulder seams: neck point out to the shoulder crossing
    seam("solid", "both", [l_neck, l_shoulder])
    seam("solid", "both", [r_neck, r_shoulder])
    # sleeve top seams: shoulder crossing down the sleeve's upper edge
    seam("solid", "both", [l_shoulder, [294, 434]])
    seam("solid", "both", [r_shoulder, [986, 434]])
    # side seams: armpit area down to the hem crossing
    seam("solid", "both", [[458, 438], l_hem])
    seam("solid", "both", [[822, 438], r_hem])
    # sleeve attachment seams: shoulder crossing to armpit
    seam("dotted", "both", [l_shoulder, [456, 430]])
    seam("dotted", "both", [r_shoulder, [824, 430]])
    # sleeve under seams: along the lower sleeve edge, inside the sleeve
    seam("dotted", "both", [[446, 426], [362, 494]])
    seam("dotted", "both", [[834, 426], [918, 494]])
    # hem seam across the bottom, through both hem crossings
    seam("dotted", "both", [l_hem, r_hem])
    # front collar ring through both neck points
    seam("neckline", "both", [l_neck, [610, 288], [640, 297], [670, 288], r_neck])
    # back collar: hidden until a flipped layer shows it
    seam("neckline", "back_only", [l_neck, [585, 272], [640, 302], [695, 272], r_neck])
    # inward hem folds: inside the garment, visible only from the back
    seam("inward", "back_only", [[458, 842], [822, 842]])
    seam("inward", "back_only", [[318, 446], [358, 492]])
    seam("inward", "back_only", [[962, 446], [922, 492]])

    crossings = [
        {"type": "shoulder", "point": l_shoulder},
        {"type": "shoulder", "point": r_shoulder},
        {"type": "bottom_hem", "point": l_hem},
        {"type": "bottom_hem", "point": r_hem},
        {"type": "neck_point", "point": l_neck},
        {"type": "neck_point", "point": r_neck},
    ]

    return {
        "schema_version": 1,
        "frame": {"width": FRAME_W, "height": FRAME_H},
        "outline": outline,
        "seams": seams,
        "crossings": crossings,
    }


def main() -> None:
    obj = build()
    garment = garment_from_dict(obj)  # runs the invariant validation
    out = Path(__file__).resolve().parents[1] / "src" / "seamfold" / "data" / "tshirt_canonical.json"
    out.write_text(json.dumps(garment_to_dict(garment), indent=1) + "\n", encoding="utf-8")
    print(f"wrote {out} (cov_max={garment.cov_max()}, anchor={garment.anchor()})")


if __name__ == "__main__":
    main()
