"""Generalized Igusa equations, universal Kummer equations and their lifts.

Modules:

* ``f2lin``     -- (Z/2Z)^g, subgroups of order <= 4, characters
* ``polycore``  -- sparse multivariate polynomials over Q and F_p
* ``heis``      -- Heisenberg-invariant quartics P_T, quadrics, lifted quartics
* ``igusakern`` -- the substitution map x* and its kernel
* ``lift``      -- F_R, determinant equations, lifts, moduli and Schottky forms
* ``thetanum``  -- multiprecision theta functions and identity checks
* ``kumctl``    -- bundles, manifests and the command line
"""

__version__ = "0.1.0"
