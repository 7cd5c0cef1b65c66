"""Published matrix sizes at the lowest admissible degree, for the bench table."""

# (kind, rational, degree) -> (rows, cols)
MATRIX_SHAPES = {
    ("triangular", False, (2,)): (15, 7),
    ("triangular", False, (3,)): (66, 51),
    ("triangular", False, (4,)): (153, 132),
    ("triangular", True, (2,)): (36, 29),
    ("triangular", True, (3,)): (153, 150),
    ("triangular", True, (4,)): (351, 363),
    ("tensor", False, (1, 1)): (9, 5),
    ("tensor", False, (1, 2)): (24, 16),
    ("tensor", False, (1, 3)): (39, 27),
    ("tensor", False, (2, 2)): (72, 59),
    ("tensor", False, (2, 3)): (117, 98),
    ("tensor", False, (3, 3)): (195, 169),
    ("tensor", True, (1, 1)): (9, 4),
    ("tensor", True, (1, 2)): (30, 20),
    ("tensor", True, (1, 3)): (51, 36),
    ("tensor", True, (2, 2)): (120, 108),
    ("tensor", True, (2, 3)): (204, 188),
    ("tensor", True, (3, 3)): (357, 340),
}
