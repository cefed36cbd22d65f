"""Independent reference implementations used only by tests.

Deliberately naive: exact rational arithmetic for kappa, exhaustive pair
counting for AUC, central finite differences for gradients. These stay
decoupled from the library code paths they check.
"""

from fractions import Fraction

import numpy as np


def qwk_exact(counts) -> Fraction:
    """Quadratic weighted kappa in exact rational arithmetic.

    The (K-1)^2 weight normalization cancels in the ratio, leaving pure
    integer numerators: kappa = 1 - N * sum((i-j)^2 O_ij) /
    sum((i-j)^2 row_i col_j). Raises ZeroDivisionError on a degenerate
    matrix (single identical class on both axes).
    """
    o = [[int(v) for v in row] for row in counts]
    k = len(o)
    n = sum(sum(row) for row in o)
    rows = [sum(o[i]) for i in range(k)]
    cols = [sum(o[i][j] for i in range(k)) for j in range(k)]
    num = sum((i - j) ** 2 * o[i][j] for i in range(k) for j in range(k))
    den = sum((i - j) ** 2 * rows[i] * cols[j] for i in range(k) for j in range(k))
    return 1 - Fraction(n * num, den)


def pair_auc_counting(scores, is_positive) -> float:
    """Exhaustive win/tie counting over all (positive, negative) pairs."""
    pos = [s for s, f in zip(scores, is_positive) if f]
    neg = [s for s, f in zip(scores, is_positive) if not f]
    total = 0.0
    for a in pos:
        for b in neg:
            if a > b:
                total += 1.0
            elif a == b:
                total += 0.5
    return total / (len(pos) * len(neg))


def ovo_macro_auc_counting(probs, truth, k) -> float:
    """Unweighted mean over present class pairs of the two-direction
    average, each direction via exhaustive pair counting."""
    probs = np.asarray(probs, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.int64)
    present = set(int(c) for c in np.unique(truth))
    values = []
    for i in range(k):
        for j in range(i + 1, k):
            if i not in present or j not in present:
                continue
            mask = (truth == i) | (truth == j)
            flags = [bool(t == i) for t in truth[mask]]
            a_ij = pair_auc_counting(probs[mask, i], flags)
            a_ji = pair_auc_counting(probs[mask, j], [not f for f in flags])
            values.append(0.5 * (a_ij + a_ji))
    return float(np.mean(values))


def central_difference(f, x, step) -> np.ndarray:
    """Per-coordinate central finite difference of a scalar function."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = grad.ravel()
    xf = x.ravel()
    for i in range(xf.size):
        orig = xf[i]
        xf[i] = orig + step
        hi = f(x)
        xf[i] = orig - step
        lo = f(x)
        xf[i] = orig
        flat[i] = (hi - lo) / (2.0 * step)
    return grad


def max_relative_error(a, b, atol=1e-9) -> float:
    """Largest per-coordinate relative error |a-b| / max(|a|,|b|).

    Differences at or below atol count as exact: central differences
    carry ~eps*|f|/step of cancellation noise (~1e-10 here), so
    coordinates that small cannot be resolved relatively, while a real
    gradient defect errs at the coordinate's own magnitude.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    diff = np.abs(a - b)
    scale = np.maximum(np.abs(a), np.abs(b))
    err = np.zeros_like(scale)
    active = diff > atol
    err[active] = diff[active] / scale[active]
    return float(err.max()) if err.size else 0.0
