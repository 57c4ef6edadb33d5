"""Exact q-characters for quantum affine type C3.

The package computes q-characters of finite-dimensional modules of the
quantum affine algebra of type C3 as exact sparse Laurent polynomials,
verifies the extended T-system relations as polynomial identities, and
decomposes restrictions into irreducible characters of the underlying
finite-type algebra.

Subpackage map:

- :mod:`c3qchar.cartan` — root/weight data of C3, Freudenthal multiplicities,
  Weyl dimensions.
- :mod:`c3qchar.monomial` — the free abelian group of loop-weight monomials
  ``Y_{i,s}`` and its ``A_{i,s}`` root sublattice.
- :mod:`c3qchar.qchar` — the sparse character ring, exact division, and the
  sl2 string engine.
- :mod:`c3qchar.fm` — the fixed-point character closure for special modules
  and truncation certificates.
- :mod:`c3qchar.tsystem` — module-family catalogue, relation instantiation,
  exact verification, and the recursive character computation.
- :mod:`c3qchar.restriction` — restriction to ordinary characters and
  decomposition into irreducibles.
- :mod:`c3qchar.cli` — command-line interface.
"""

__version__ = "0.1.0"
