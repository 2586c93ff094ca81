"""Sign-change scanning shared by the root and bound-state finders."""
import numpy as np
from scipy.optimize import brentq

from .errors import BracketingError

EPS = np.finfo(float).eps
NOISE = 1024 * EPS


def refine(f, a, b, xtol=1e-14):
    """Brent refinement of a bracketed root; failures carry the interval."""
    try:
        return brentq(f, a, b, xtol=xtol, rtol=4 * EPS, maxiter=300)
    except (ValueError, RuntimeError) as exc:
        raise BracketingError(f"root refinement failed on [{a!r}, {b!r}]: {exc}", (a, b)) from exc


def sign_brackets(vals, floor):
    """Index pairs ``(i, j)`` of consecutive significant samples of opposite sign.

    A sample is significant when ``|vals| > floor``; samples inside the
    roundoff floor are skipped rather than trusted for their sign.
    """
    sig = np.nonzero(np.abs(vals) > floor)[0]
    out = []
    for i, j in zip(sig[:-1], sig[1:]):
        if vals[i] * vals[j] < 0:
            out.append((int(i), int(j)))
    return out


def near_touches(vals, scale, rel_tol, floor):
    """Interior local minima of |vals| below ``rel_tol * scale`` without a sign change.

    Neighbours must be above ``floor`` so roundoff wiggles are not reported.
    """
    mag = np.abs(vals)
    idx = []
    for i in range(1, len(vals) - 1):
        if (mag[i] <= mag[i - 1] and mag[i] <= mag[i + 1]
                and mag[i - 1] > floor[i - 1] and mag[i + 1] > floor[i + 1]
                and mag[i] < rel_tol * scale[i] and vals[i - 1] * vals[i + 1] > 0):
            idx.append(i)
    return idx
