"""Exact symbolic calculus for pre-Courant algebroids over polynomial charts.

The library instantiates Courant vector bundles and pre-Courant bracket
structures over a single affine chart with polynomial coefficients, and
verifies their defining identities by exact rational arithmetic: axioms,
Jacobiator properties, cochain coboundaries, two-term algebra structures,
deformations, B-fields and Pontryagin-type obstruction forms.

Entry points:

* :mod:`precourant.poly`, :mod:`precourant.exterior`: the exact Cartan
  calculus (polynomials, vector fields, forms).
* :mod:`precourant.bundle`, :mod:`precourant.algebroid`,
  :mod:`precourant.cochain`: bundles, brackets, cochain spaces.
* :mod:`precourant.twoterm`, :mod:`precourant.deform`,
  :mod:`precourant.construct`: derived structures and builders.
* :mod:`precourant.cli`: the manifest-driven verification tool
  (``precourant --manifest ...``).
"""

__version__ = "1.0.0"
