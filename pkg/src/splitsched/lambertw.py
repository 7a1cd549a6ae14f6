"""Principal-branch Lambert W function.

The closed-form reference power uses W0; the tolerance we hold it to
(|w·e^w − x| ≤ 1e-10 absolute up to x = 1e6) is not reachable in float64 —
the representation error of w alone already costs e^w·(1+w)·ulp(w) ≈ 1.4e-9
at x = 1e6.  ``lambert_w0`` therefore iterates in numpy's extended-precision
longdouble and returns a longdouble scalar.  Kernels use a float64 twin
(:func:`splitsched._kernels.w0_f64`) since compiled code cannot take 80-bit
floats; the two agree to float64 roundoff.

Initial guesses follow the usual regime split (asymptotic log-log for large x,
Taylor near 0, branch-point series near −1/e), then Halley's method, which is
cubically convergent; 100 iterations is a safety cap, 3–5 suffice.
"""

import math

import numpy as np

_LD = np.longdouble
_EXP_M1 = -math.exp(-1.0)


def lambert_w0(x):
    """Principal branch W0(x), extended precision.

    Parameters
    ----------
    x : float
        Argument, must satisfy x >= -1/e.

    Returns
    -------
    numpy longdouble scalar w with w*exp(w) = x.

    Examples
    --------
    >>> float(lambert_w0(1.0))       # omega constant
    0.5671432904097838
    >>> float(lambert_w0(0.0))
    0.0
    """
    xf = float(x)
    if math.isnan(xf):
        raise ValueError("lambert_w0: argument is NaN")
    if xf < _EXP_M1 - 1e-15:
        raise ValueError(
            "lambert_w0: argument %g below -1/e; principal branch undefined" % xf
        )
    xl = _LD(x)
    if xl == 0:
        return _LD(0.0)

    e_ld = np.exp(_LD(1.0))
    if xf > 1.5:
        l1 = np.log(xl)
        l2 = np.log(l1)
        w = l1 - l2 + l2 / l1
    elif xf > -0.25:
        w = xl * (1 - xl + _LD(1.5) * xl * xl)
    else:
        arg = 2 * (e_ld * xl + 1)
        if arg < 0:
            arg = _LD(0.0)
        p = np.sqrt(arg)
        w = -1 + p - p * p / 3 + _LD(11.0) / 72 * p * p * p

    tol = _LD(1e-19)
    for _ in range(100):
        ew = np.exp(w)
        f = w * ew - xl
        wp1 = w + 1
        if wp1 == 0:          # exactly at the branch point; w = -1 is the root
            break
        denom = ew * wp1 - (w + 2) * f / (2 * wp1)
        if denom == 0:
            break
        dw = f / denom
        w = w - dw
        if abs(dw) <= tol * (1 + abs(w)):
            break
    return w


def lambert_w0_f64(x):
    """float64 convenience wrapper (kernel-grade precision)."""
    from ._kernels import w0_f64

    v = w0_f64(float(x))
    if math.isnan(v):
        raise ValueError("lambert_w0: argument below -1/e")
    return v
