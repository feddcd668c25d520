"""Printed parity formulas of the worked example codes, used as oracles.

Each parity row maps to {(info_row, node): coefficient}.  For the GF(4)
code the coefficient is an exponent of the primitive element c.
"""

import numpy as np

# r=2, m=2, GF(3): parity 1 (the zigzag column)
TWO_PARITY_Z = {
    0: {(0, 0): 1, (2, 1): 1, (1, 2): 1},
    1: {(1, 0): 1, (3, 1): 1, (0, 2): 2},
    2: {(2, 0): 1, (0, 1): 2, (3, 2): 2},
    3: {(3, 0): 1, (1, 1): 2, (2, 2): 1},
}

# Encoding matrices of nodes 1 and 2 into parity 1 (row = parity row)
TWO_PARITY_P1 = [[0, 0, 1, 0], [0, 0, 0, 1], [2, 0, 0, 0], [0, 2, 0, 0]]
TWO_PARITY_P2 = [[0, 1, 0, 0], [2, 0, 0, 0], [0, 0, 0, 2], [0, 0, 1, 0]]

# r=3, m=2, GF(4): parities 1 and 2, coefficients as powers of c
THREE_PARITY_EXP = {
    1: {
        0: {(0, 0): 1, (6, 1): 0, (2, 2): 0},
        1: {(1, 0): 1, (7, 1): 0, (0, 2): 1},
        2: {(2, 0): 1, (8, 1): 0, (1, 2): 0},
        3: {(3, 0): 1, (0, 1): 1, (5, 2): 1},
        4: {(4, 0): 1, (1, 1): 1, (3, 2): 0},
        5: {(5, 0): 1, (2, 1): 1, (4, 2): 0},
        6: {(6, 0): 1, (3, 1): 0, (8, 2): 0},
        7: {(7, 0): 1, (4, 1): 0, (6, 2): 0},
        8: {(8, 0): 1, (5, 1): 0, (7, 2): 1},
    },
    2: {
        0: {(0, 0): 2, (3, 1): 0, (1, 2): 0},
        1: {(1, 0): 2, (4, 1): 0, (2, 2): 1},
        2: {(2, 0): 2, (5, 1): 0, (0, 2): 1},
        3: {(3, 0): 2, (6, 1): 1, (4, 2): 1},
        4: {(4, 0): 2, (7, 1): 1, (5, 2): 1},
        5: {(5, 0): 2, (8, 1): 1, (3, 2): 0},
        6: {(6, 0): 2, (0, 1): 1, (7, 2): 1},
        7: {(7, 0): 2, (1, 1): 1, (8, 2): 0},
        8: {(8, 0): 2, (2, 1): 1, (6, 2): 1},
    },
}

# Any-node code r=2, m=3, GF(3), alpha=2; node 0/1 are the two systematic columns
ANYNODE_PARITY = {
    0: {
        0: {(0, 0): 1, (0, 1): 1},
        1: {(1, 0): 1, (1, 1): 1},
        2: {(2, 0): 1, (2, 1): 1},
        3: {(3, 0): 1, (3, 1): 1},
        4: {(2, 0): 1, (6, 0): 2, (1, 1): 1, (5, 1): 2},
        5: {(3, 0): 1, (7, 0): 2, (0, 1): 2, (4, 1): 1},
        6: {(0, 0): 2, (4, 0): 1, (3, 1): 2, (7, 1): 1},
        7: {(1, 0): 2, (5, 0): 1, (2, 1): 1, (6, 1): 2},
    },
    1: {
        0: {(2, 0): 1, (6, 0): 1, (1, 1): 1, (5, 1): 1},
        1: {(3, 0): 1, (7, 0): 1, (0, 1): 2, (4, 1): 2},
        2: {(0, 0): 2, (4, 0): 2, (3, 1): 2, (7, 1): 2},
        3: {(1, 0): 2, (5, 0): 2, (2, 1): 1, (6, 1): 1},
        4: {(4, 0): 1, (4, 1): 1},
        5: {(5, 0): 1, (5, 1): 1},
        6: {(6, 0): 1, (6, 1): 1},
        7: {(7, 0): 1, (7, 1): 1},
    },
}


def symbolic_parity(code, l):
    """{row: {(info_row, node): coefficient}} read off the encoding matrices."""
    out = {t: {} for t in range(code.p)}
    for j in range(code.k):
        mat = code.dense(l, j)
        for t, i in zip(*np.nonzero(mat)):
            out[int(t)][(int(i), j)] = int(mat[t, i])
    return out


def exp_table(field, table):
    """Replace exponents of c by field elements."""
    c = field.primitive
    return {t: {key: field.pow(c, e) for key, e in row.items()} for t, row in table.items()}
