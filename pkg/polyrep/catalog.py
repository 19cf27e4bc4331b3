"""Built-in test polyhedra.

Each entry is stored in the line format of `parse_hrep_text` together with the size of the smallest
representation (``d`` minus the lineality dimension) and whether the polyhedron is simple.
"""

import logging
from dataclasses import dataclass
from functools import cache

from polyrep.errors import PreconditionError
from polyrep.geometry import HPolyhedron, parse_hrep_text

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    hrep: str
    expected_size: int
    simple: bool

    @property
    def polyhedron(self) -> HPolyhedron:
        return load_entry(self.name)


_ENTRIES = (
    CatalogEntry("segment", "[0, 1] in R^1", "1 0\n-1 1", 1, True),
    CatalogEntry("triangle", "conv{(0,0), (1,0), (0,1)}", "1 0 0\n0 1 0\n-1 -1 1", 2, True),
    CatalogEntry("square", "[0, 1]^2", "1 0 0\n-1 0 1\n0 1 0\n0 -1 1", 2, True),
    CatalogEntry(
        "pentagon",
        "conv{(0,0), (2,0), (3,2), (1,3), (-1,2)}",
        "0 1 0\n-2 1 4\n-1 -2 7\n1 -2 5\n2 1 0",
        2,
        True,
    ),
    CatalogEntry(
        "hexagon",
        "conv{(1,0), (2,0), (3,1), (2,2), (1,2), (0,1)}",
        "0 1 0\n-1 1 2\n-1 -1 4\n0 -1 2\n1 -1 1\n1 1 -1",
        2,
        True,
    ),
    CatalogEntry("simplex-3", "conv{0, e1, e2, e3}", "1 0 0 0\n0 1 0 0\n0 0 1 0\n-1 -1 -1 1", 3, True),
    CatalogEntry(
        "cube",
        "[0, 1]^3",
        "1 0 0 0\n-1 0 0 1\n0 1 0 0\n0 -1 0 1\n0 0 1 0\n0 0 -1 1",
        3,
        True,
    ),
    CatalogEntry(
        "octahedron",
        "|x| + |y| + |z| <= 1",
        "\n".join(f"{a} {b} {c} 1" for a in (1, -1) for b in (1, -1) for c in (1, -1)),
        3,
        False,
    ),
    CatalogEntry(
        "square-pyramid",
        "base [-1, 1]^2 x {0}, apex (0, 0, 1)",
        "0 0 1 0\n-1 0 -1 1\n1 0 -1 1\n0 -1 -1 1\n0 1 -1 1",
        3,
        False,
    ),
    CatalogEntry(
        "triangular-prism",
        "conv{(0,0), (1,0), (0,1)} x [0, 1]",
        "1 0 0 0\n0 1 0 0\n-1 -1 0 1\n0 0 1 0\n0 0 -1 1",
        3,
        True,
    ),
    CatalogEntry("quadrant", "x >= 0, y >= 0", "1 0 0\n0 1 0", 2, True),
    CatalogEntry("corner-cut", "x >= 0, y >= 0, x + y >= 1", "1 0 0\n0 1 0\n1 1 -1", 2, True),
    CatalogEntry("half-plane", "x >= 0 in R^2", "1 0 0", 1, True),
    CatalogEntry("slab", "0 <= x <= 1 in R^2", "1 0 0\n-1 0 1", 1, True),
    CatalogEntry("slab-3", "0 <= x <= 1 in R^3", "1 0 0 0\n-1 0 0 1", 1, True),
    CatalogEntry("whole-plane", "R^2 without inequalities", "dim 2", 0, True),
    CatalogEntry("whole-space-3", "R^3 without inequalities", "dim 3", 0, True),
)

CATALOG: dict[str, CatalogEntry] = {entry.name: entry for entry in _ENTRIES}


def get_entry(name: str) -> CatalogEntry:
    """Look up a catalog entry.

    Raises:
        PreconditionError: If no entry has this name.
    """
    try:
        return CATALOG[name]
    except KeyError:
        raise PreconditionError(f"Unknown catalog entry {name!r}; available: {', '.join(CATALOG)}") from None


@cache
def load_entry(name: str) -> HPolyhedron:
    """Parse an entry and check its face lattice against the recorded data."""
    entry = get_entry(name)
    poly = parse_hrep_text(entry.hrep)
    lattice = poly.face_lattice
    if poly.is_simple != entry.simple:
        raise ValueError(f"Catalog entry {name}: simplicity is {poly.is_simple}, recorded {entry.simple}")
    bound = poly.dim - poly.lineality_dim
    if bound != entry.expected_size:
        raise ValueError(f"Catalog entry {name}: size bound {bound}, recorded {entry.expected_size}")
    if poly.is_bounded and lattice.euler_characteristic() != 1 - (-1) ** poly.dim:
        raise ValueError(f"Catalog entry {name}: face lattice fails the Euler relation")
    logger.debug("Loaded catalog entry %s with f-vector %s", name, lattice.f_vector)
    return poly
