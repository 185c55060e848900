"""Hard-coded classical equations, written in the p_T variables.

``igusa_quartic`` is the g=2 generator of ker x* in degree 4 and
``genus3_quartic`` one element of the 27-dimensional g=3 kernel.  Both
are transcriptions; the test suite checks them against computed kernels.
"""

from __future__ import annotations

from .polycore import Polynomial


def _vars(g: int) -> dict[str, Polynomial]:
    from .igusakern import p_ring

    ring = p_ring(g)
    return {name[2:]: ring.gen(name) for name in ring.names}


def igusa_quartic() -> Polynomial:
    """R_2 in the variables p_0, p_1, p_2, p_3, p_12."""
    v = _vars(2)
    p0, p1, p2, p3, p12 = v["0"], v["1"], v["2"], v["3"], v["12"]
    return (
        p12**4
        + (p0**2 - p1**2 - p2**2 - p3**2) * p12**2
        + p1**2 * p2**2
        + p1**2 * p3**2
        + p2**2 * p3**2
        - 2 * p0 * p1 * p2 * p3
    )


def genus3_quartic() -> Polynomial:
    """R_3, a quartic relation among the 15 genus-3 invariants P_T."""
    v = _vars(3)
    p = [v[str(i)] for i in range(8)]
    p12, p14, p16 = v["12"], v["14"], v["16"]
    p24, p25, p34, p35 = v["24"], v["25"], v["34"], v["35"]
    return (
        (p14 * p16 - p[1] * p12) * (-p24**2 - p25**2 + p34**2 + p35**2)
        + p14 * p16 * (p[2] ** 2 - p[3] ** 2)
        + p34 * p35 * (p[0] * p[2] + p[1] * p[3] - p[4] * p[6] - p[5] * p[7])
        - p24 * p25 * (p[0] * p[3] + p[1] * p[2] - p[4] * p[7] - p[5] * p[6])
        - p12 * (p[2] * p[4] * p[7] + p[2] * p[5] * p[6] - p[3] * p[4] * p[6] - p[3] * p[5] * p[7])
    )
