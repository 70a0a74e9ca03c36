"""Order-fixed reductions whose bits do not depend on how work was split."""
import numpy as np

_OPS = {"sum": np.add, "min": np.minimum, "max": np.maximum}


def deterministic_reduce(values, op="sum"):
    """Pairwise tree reduction over ascending index.

    Level by level, element ``2i`` is combined with ``2i+1``; an odd tail is
    carried up unchanged.  The tree depends only on ``len(values)``.
    """
    try:
        ufunc = _OPS[op]
    except KeyError:
        raise ValueError(f"op must be one of {sorted(_OPS)}, got {op!r}") from None
    a = np.array(values, dtype=np.float64).ravel()
    if a.size == 0:
        if op == "sum":
            return 0.0
        raise ValueError(f"cannot take {op} of an empty sequence")
    while a.size > 1:
        half = a.size // 2
        paired = ufunc(a[0:2 * half:2], a[1:2 * half:2])
        if a.size % 2:
            paired = np.append(paired, a[-1])
        a = paired
    return float(a[0])
