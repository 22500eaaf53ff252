"""Complete-graph instances with per-vertex termination probabilities.

An instance couples a dense positive cost matrix with a probability vector:
prob[v] is the chance that visiting v ends the walk. The expected cost of a
visiting order weights each traversed edge by the probability that the walk
is still alive when the edge is taken.
"""

import numpy as np


class InvalidInstanceError(ValueError):
    pass


class InvalidPathError(ValueError):
    pass


class MetricViolationError(ValueError):
    pass


class Instance:
    """Immutable problem instance over a complete directed graph.

    cost: (n, n) float64 matrix, zero diagonal, positive off-diagonal.
    prob: length-n vector of termination probabilities in [0, 1).
    start: index of the fixed first vertex.
    coords: optional (n, 2) planar coordinates (metadata, kept when the
        cost matrix was derived from them).
    seed: optional generator seed recorded for provenance.
    """

    __slots__ = ("cost", "prob", "start", "name", "coords", "seed")

    def __init__(self, cost, prob, start=0, name="", coords=None, seed=None):
        cost = np.array(cost, dtype=np.float64)
        prob = np.array(prob, dtype=np.float64)
        if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
            raise InvalidInstanceError("cost must be a square matrix")
        n = cost.shape[0]
        if n < 1:
            raise InvalidInstanceError("need at least one vertex")
        if prob.shape != (n,):
            raise InvalidInstanceError(
                f"prob length {prob.shape} does not match {n} vertices")
        if not np.all(np.isfinite(cost)):
            raise InvalidInstanceError("cost entries must be finite")
        if np.any(np.diagonal(cost) != 0.0):
            raise InvalidInstanceError("cost diagonal must be zero")
        off = ~np.eye(n, dtype=bool)
        if np.any(cost[off] <= 0.0):
            raise InvalidInstanceError("off-diagonal costs must be positive")
        # strict: probability 1 would make later vertices unreachable in
        # expectation and divides by zero in the heuristic
        if np.any(prob < 0.0) or np.any(prob >= 1.0):
            raise InvalidInstanceError("probabilities must lie in [0, 1)")
        if not (0 <= int(start) < n):
            raise InvalidInstanceError(f"start {start} out of range")
        if coords is not None:
            coords = np.array(coords, dtype=np.float64)
            if coords.shape != (n, 2):
                raise InvalidInstanceError("coords must be (n, 2)")
            coords.setflags(write=False)
        cost.setflags(write=False)
        prob.setflags(write=False)
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "prob", prob)
        object.__setattr__(self, "start", int(start))
        object.__setattr__(self, "name", str(name))
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "seed", None if seed is None else int(seed))

    def __setattr__(self, key, value):
        raise AttributeError("Instance is immutable")

    @property
    def n(self) -> int:
        return self.cost.shape[0]

    def __repr__(self):
        return f"Instance(n={self.n}, start={self.start}, name={self.name!r})"


def check_path(inst: Instance, order, full: bool) -> tuple:
    """Validate a visiting order; returns it as a tuple of ints.

    full=True requires a solution path (every vertex exactly once).
    Partial paths may be empty; nonempty ones must begin at inst.start.
    """
    order = tuple(int(v) for v in order)
    n = inst.n
    for v in order:
        if not (0 <= v < n):
            raise InvalidPathError(f"vertex {v} out of range")
    if len(set(order)) != len(order):
        raise InvalidPathError("repeated vertex in path")
    if order and order[0] != inst.start:
        raise InvalidPathError(
            f"path starts at {order[0]}, instance start is {inst.start}")
    if full and len(order) != n:
        raise InvalidPathError(
            f"solution path must visit all {n} vertices, got {len(order)}")
    return order


def is_solution_path(inst: Instance, order) -> bool:
    try:
        check_path(inst, order, full=True)
        return True
    except InvalidPathError:
        return False


def expected_cost_direct(inst: Instance, order) -> float:
    """Expected cost of a solution path, summed termination case by case.

    Term k covers the event that the walk ends at the (k+1)-th vertex and
    charges the distance travelled up to it; the final term carries no
    termination factor because the walk ends at the last vertex regardless.
    """
    order = check_path(inst, order, full=True)
    n = inst.n
    if n == 1:
        return 0.0
    cost = inst.cost
    prob = inst.prob
    total = 0.0
    q_pref = 1.0
    length = 0.0
    for k in range(1, n):
        q_pref *= 1.0 - prob[order[k - 1]]
        length += cost[order[k - 1], order[k]]
        factor = prob[order[k]] if k < n - 1 else 1.0
        total += q_pref * factor * length
    return float(total)


def expected_cost_q(inst: Instance, order) -> float:
    """Expected cost via survival weights: sum over edges of q_i * c_i.

    q_i is the running product of (1 - prob) over the vertices visited
    before the edge is taken. Accepts partial paths (prefixes); empty and
    singleton paths cost zero.
    """
    order = check_path(inst, order, full=False)
    cost = inst.cost
    prob = inst.prob
    g = 0.0
    q = 1.0
    for i in range(len(order) - 1):
        q *= 1.0 - prob[order[i]]
        g += q * cost[order[i], order[i + 1]]
    return float(g)


def metric_closure(inst: Instance) -> Instance:
    """Replace each cost with the cheapest relay path (Floyd-Warshall).

    Idempotent; the result always satisfies the triangle inequality.
    Coordinates are dropped when the closure changed any entry, since they
    would no longer describe the costs.
    """
    d = np.array(inst.cost)
    n = inst.n
    for k in range(n):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    coords = inst.coords if np.array_equal(d, inst.cost) else None
    return Instance(d, inst.prob, inst.start, inst.name, coords, inst.seed)


def max_metric_violation(inst: Instance) -> float:
    """Largest amount by which any cost exceeds its relay shortcut."""
    d = np.array(inst.cost)
    n = inst.n
    for k in range(n):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    return float(np.max(inst.cost - d))


def is_metric(inst: Instance, rel_tol: float = 1e-9) -> bool:
    scale = max(1.0, float(np.max(inst.cost)))
    return max_metric_violation(inst) <= rel_tol * scale


def require_metric(inst: Instance, rel_tol: float = 1e-9) -> None:
    scale = max(1.0, float(np.max(inst.cost)))
    gap = max_metric_violation(inst)
    if gap > rel_tol * scale:
        raise MetricViolationError(
            f"triangle inequality violated by up to {gap:.6g}; "
            "apply metric_closure to repair")
