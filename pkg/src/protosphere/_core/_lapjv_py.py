"""Pure-numpy fallback for the dense linear-assignment kernel.

Same shortest-augmenting-path algorithm as the compiled extension: one
Dijkstra-style search per row over column slack values, with row/column
potentials keeping reduced costs non-negative. Visit order and tie handling
(first minimum wins) match the compiled kernel, so both backends return the
identical permutation.
"""

import numpy as np


def lapjv(cost):
    """Solve the square min-cost assignment for a dense float64 matrix.

    Returns an int64 array mapping row index -> assigned column index.
    """
    a = np.ascontiguousarray(cost, dtype=np.float64)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError("cost matrix must be square")

    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    # match[j]: row matched to column j, 1-based; 0 means free
    match = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)

    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = match[j0]
            slack = a[i0 - 1, :] - u[i0] - v[1:]
            free = ~used[1:]
            better = free & (slack < minv[1:])
            minv[1:][better] = slack[better]
            way[1:][better] = j0
            candidates = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(candidates)) + 1
            delta = candidates[j1 - 1]
            u[match[used]] += delta
            v[used] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1

    row_to_col = np.empty(n, dtype=np.int64)
    row_to_col[match[1:] - 1] = np.arange(n, dtype=np.int64)
    return row_to_col
