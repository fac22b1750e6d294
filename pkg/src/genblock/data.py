"""Built-in example network.

Notes borrowing among 13 students, valued on a line scale (larger = more
borrowing). Loops were not measured, so the diagonal carries no information.

The matrix is kept exactly as originally tabulated. A second, reordered
printing of the same data disagrees in four cells: there the tie 1->13 = 3
sits at 1->12 and the tie 4->3 = 6 sits at 4->2. Derived tables of row
maxima agree with the layout below for unit 4, so this layout is used.
"""

from __future__ import annotations

import numpy as np

from .network import ValuedNetwork, load_network

STUDENTS = np.array([
    [ 0,  0,  0, 15,  0,  0,  0,  1,  8,  0,  0,  0,  3],
    [ 0,  0,  2,  3,  0,  0,  5,  5, 10, 10,  1,  3,  0],
    [ 0,  0,  0, 19,  0,  0,  0,  3,  1,  0,  0,  0,  0],
    [ 2,  0,  6,  0,  1,  0,  0,  1, 19,  0,  1,  0,  0],
    [ 0,  0,  0, 16,  0,  5,  0,  7, 16,  0,  5,  0,  3],
    [ 0,  0,  1,  0,  4,  0,  0,  7,  3,  0,  7,  3,  1],
    [ 0,  0,  6, 14,  0,  0,  0, 14,  6,  0,  0,  0,  0],
    [ 0,  0,  0,  5,  0,  0,  0,  0,  6,  0,  0,  0,  0],
    [ 0,  0,  0, 19,  0,  0,  0,  1,  0,  0,  0,  0,  0],
    [ 0, 16,  2, 16,  0,  1,  0, 16,  0,  0,  1,  2,  0],
    [ 0,  0,  2,  8,  2,  2,  0,  5, 14,  0,  0,  2,  0],
    [ 2,  2,  8,  2,  2,  2,  2,  2,  6,  2, 11,  0,  0],
    [ 0,  0,  0,  1,  8,  0,  0,  8,  3,  0,  0,  0,  0],
], dtype=float)
STUDENTS.setflags(write=False)

# three-cluster solution of the homogeneity reg(mean) models, 0-based units
STUDENTS_HOMOGENEITY_PARTITION = (0, 1, 1, 2, 0, 1, 0, 2, 2, 0, 0, 1, 1)


def students() -> ValuedNetwork:
    return load_network(STUDENTS, diagonal_relevant=False)


BUILTIN = {"students": students}


def builtin(name: str) -> ValuedNetwork:
    try:
        return BUILTIN[name]()
    except KeyError:
        raise KeyError(f"unknown built-in network {name!r}; known: {sorted(BUILTIN)}") from None
