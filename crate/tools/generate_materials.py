#!/usr/bin/env python3
"""Generate the shipped AlGaN material parameter file and its test fixtures.

The core crate treats refractive-index dispersion as data: it evaluates
whatever Sellmeier-type law the parameter file declares, and never
hard-codes alloy physics. This script is the offline source of that file.

Each alloy carries a single-oscillator Sellmeier law

    n^2(lambda) = 1 + a * lambda^2 / (lambda^2 - b^2),   lambda in um,

the standard below-gap form for nitride alloys (see G. M. Laws et al.,
J. Appl. Phys. 89, 1108 (2001) for AlxGa1-xN dispersion in this form).
The (a, b) pairs below are ordinary-index fits anchored to published GaN
data in the transparency window and to the index contrasts of the
waveguide designs shipped under data/stacks/. Re-running the script
regenerates data/materials.toml and the fixture table used by the
`material_fixtures` integration test, so the three artifacts cannot
drift apart silently.

Usage: python3 tools/generate_materials.py
"""

import math
import os

# (name, al_fraction, a, b_um, d33_pm_per_V)
MATERIALS = [
    ("GaN", 0.00, 4.2978612, 0.1839007, 16.5),
    ("AlGaN_x0.02", 0.02, 4.2308709, 0.1778200, 0.0),
    ("AlGaN_x0.20", 0.20, 3.6487699, 0.1438965, 0.0),
    ("AlGaN_x0.45", 0.45, 2.9024423, 0.1589000, 0.0),
]

VALID_RANGE_NM = (450.0, 2300.0)

# Fixture sampling grid (nm).
FIXTURE_LAMBDAS = [
    450.0, 500.0, 600.0, 700.0, 793.0, 800.0, 806.0, 900.0, 1000.0,
    1200.0, 1400.0, 1550.0, 1600.0, 1653.333333333333, 1700.0, 2000.0, 2300.0,
]


def index(a, b_um, lambda_nm):
    lam = lambda_nm * 1e-3  # um
    n2 = 1.0 + a * lam * lam / (lam * lam - b_um * b_um)
    return math.sqrt(n2)


def sanity_check():
    lo, hi = VALID_RANGE_NM
    grid = [lo + i * (hi - lo) / 2000.0 for i in range(2001)]
    for name, _x, a, b, _d in MATERIALS:
        prev = None
        for lam in grid:
            n = index(a, b, lam)
            assert n > 1.0, f"{name}: n <= 1 at {lam} nm"
            if prev is not None:
                assert n < prev, f"{name}: non-monotonic at {lam} nm"
            prev = n
    # Higher Al fraction must give the lower index everywhere in range.
    ordered = sorted(MATERIALS, key=lambda m: m[1])
    for (na, xa, aa, ba, _), (nb, xb, ab, bb, _) in zip(ordered, ordered[1:]):
        for lam in grid:
            assert index(aa, ba, lam) > index(ab, bb, lam), (
                f"index ordering violated between {na} and {nb} at {lam} nm"
            )
    # Anchors: GaN in the telecom window, and the cladding contrast the
    # quarter-wave design relies on.
    n_gan = index(*MATERIALS[0][2:4], 1550.0)
    assert abs(n_gan - 2.315) < 0.02, n_gan
    lam_i = 1653.333333333333
    n1 = index(*MATERIALS[1][2:4], lam_i)
    n2 = index(*MATERIALS[3][2:4], lam_i)
    assert abs((n1 * n1 - n2 * n2) - 1.3509) < 0.05, n1 * n1 - n2 * n2


def write_materials_toml(path):
    lines = [
        "# AlGaN material dispersion data. Generated by tools/generate_materials.py;",
        "# edit the script, not this file.",
        "#",
        "# Schema (one [[material]] table per material):",
        "#   name            identifier referenced by stack files",
        "#   al_fraction     x in AlxGa1-xN, in [0, 1]",
        "#   valid_range_nm  [min, max] wavelength range the law is trusted over",
        "#   d33_pm_per_v    nonlinear coefficient; nonzero only for the poled core",
        "#   [material.dispersion]",
        "#     form = \"sellmeier1\"  ->  n^2 = 1 + a*l^2/(l^2 - b_um^2), l in um",
        "#     form = \"constant\"    ->  n = value (analysis stub, not a real alloy)",
        "",
    ]
    for name, x, a, b, d33 in MATERIALS:
        lines.append("[[material]]")
        lines.append(f'name = "{name}"')
        lines.append(f"al_fraction = {x}")
        lines.append(f"valid_range_nm = [{VALID_RANGE_NM[0]}, {VALID_RANGE_NM[1]}]")
        lines.append(f"d33_pm_per_v = {d33}")
        lines.append("[material.dispersion]")
        lines.append('form = "sellmeier1"')
        lines.append(f"a = {a:.7f}")
        lines.append(f"b_um = {b:.7f}")
        lines.append("")
    with open(path, "w") as f:
        f.write("\n".join(lines))


def write_fixtures(path):
    lines = ["material,lambda_nm,n"]
    for name, _x, a, b, _d in MATERIALS:
        for lam in FIXTURE_LAMBDAS:
            lines.append(f"{name},{lam:.9f},{index(a, b, lam):.12f}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def main():
    sanity_check()
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    write_materials_toml(os.path.join(root, "crates/core/data/materials.toml"))
    write_fixtures(
        os.path.join(root, "crates/core/tests/fixtures/material_indices.csv")
    )
    print("wrote materials.toml and material_indices.csv")


if __name__ == "__main__":
    main()
