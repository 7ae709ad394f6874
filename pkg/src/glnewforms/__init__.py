"""Exact verification of newform vectors for GL_n over local fields.

Finite-field characters, Bessel functions, truncated local-field matrix
windows, Mackey double-coset sums, depth-zero newform vectors and their
coefficients, and minimax stratum checks -- all in exact arithmetic over a
computation prime field.
"""

__version__ = "0.1.0"
