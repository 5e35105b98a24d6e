"""Kazhdan-Lusztig-Stanley polynomials on lower Eulerian posets.

Exact (rational-arithmetic) tools for incidence-algebra kernels and their
f/g/Z-polynomials, strong formal subdivisions and their local invariants,
equivariant refinements under finite group actions, fans with lattice
automorphisms, and equivariant Ehrhart h*/local h* computations.
"""

__version__ = "0.1.0"
