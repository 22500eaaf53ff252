"""Frontier-based exploration with probability-weighted goal selection.

Each frontier cell gets a probability from three factors: local unknown
density (phi_u), ray-cast visible-unknown angle (phi_g), and a Gaussian
object prior (phi_o). Frontiers are condensed into cluster goals by
weighted mean shift; the goals plus the robot become a small complete
graph (grid shortest-path costs) handed to a visiting-order planner.
The robot walks one cell at a time toward the first planned goal,
revealing the map as it goes, and replans when the goal is reached or
disappears or the frontier set shifts substantially.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .baselines import blind_hpp_solve, greedy_solve
from .grid import (FREE, OCCUPIED, UNKNOWN, OccupancyGrid, WorldModel,
                   extract_frontiers, grid_distances, reveal,
                   shortest_path_cells)
from .instance import Instance
from .solver import SolverConfig, solve

PROB_CLAMP = 1.0 - 1e-9


@dataclass(frozen=True)
class PriorField:
    """Gaussian mixture prior over metric (x, y) positions, plus the factor
    weights (w_u, w_g, w_o). Each Gaussian is (mean (2,), cov (2, 2));
    densities are peak-normalized, so phi_o is 1 at a mean. Weights must
    not sum above 1 so the combined score stays a probability."""
    gaussians: tuple = ()
    weights: tuple = (0.3, 0.2, 0.5)

    def __post_init__(self):
        gs = []
        for mean, cov in self.gaussians:
            mean = np.asarray(mean, dtype=np.float64).reshape(2)
            cov = np.asarray(cov, dtype=np.float64).reshape(2, 2)
            try:
                np.linalg.cholesky(cov)
            except np.linalg.LinAlgError:
                raise ValueError(
                    f"covariance {cov.tolist()} is not positive definite"
                ) from None
            mean.setflags(write=False)
            cov.setflags(write=False)
            gs.append((mean, cov))
        object.__setattr__(self, "gaussians", tuple(gs))
        w = tuple(float(x) for x in self.weights)
        if len(w) != 3 or any(x < 0 for x in w):
            raise ValueError("weights must be three nonnegative numbers")
        if sum(w) > 1.0 + 1e-12:
            raise ValueError(f"factor weights sum to {sum(w)}, above 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_config(cls, cfg: dict) -> "PriorField":
        gs = tuple((g["mean"], g["cov"]) for g in cfg.get("gaussians", []))
        return cls(gs, tuple(cfg.get("weights", (0.3, 0.2, 0.5))))


@dataclass(frozen=True)
class ClusterConfig:
    """Mean-shift settings, distances in grid cells."""
    bandwidth: float = 8.0
    converge_tol: float = 0.1
    merge_dist: float = 4.0
    max_iter: int = 50

    def __post_init__(self):
        if self.bandwidth <= 0 or self.converge_tol <= 0 or self.merge_dist < 0:
            raise ValueError("cluster distances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


@dataclass(frozen=True)
class ExploreConfig:
    window: int = 5            # phi_u half-width, cells
    phi_g_fov: float = math.pi / 2
    rays: int = 180
    ray_step: float = 0.5      # cells
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    success_dist: float = 5.0  # meters
    vertex_cap: int = 40       # above this, plan with the focal variant
    focal_eps: float = 0.01
    max_steps: int = 20_000
    replan_delta: float = 0.2
    plan_time_limit: float | None = 60.0


def phi_unknown(grid: OccupancyGrid, cell, window: int = 5) -> float:
    """Unknown fraction of the (2w+1)^2 square around cell, clipped at the
    borders; the denominator counts only in-bounds cells."""
    r, c = cell
    h, w = grid.labels.shape
    r0, r1 = max(0, r - window), min(h, r + window + 1)
    c0, c1 = max(0, c - window), min(w, c + window + 1)
    block = grid.labels[r0:r1, c0:c1]
    return float(np.count_nonzero(block == UNKNOWN) / block.size)


def phi_geometric(grid: OccupancyGrid, cell, bearing: float,
                  fov: float = math.pi / 2, rays: int = 180,
                  ray_step: float = 0.5, max_range_cells: float = 20.0) -> float:
    """Fraction of rays from the cell, fanned over fov about bearing, that
    reach an Unknown cell before an Occupied one. Leaving the grid counts
    as reaching Unknown; running out of range counts as neither."""
    h, w = grid.labels.shape
    nsteps = max(1, int(math.ceil(max_range_cells / ray_step)))
    dist = (np.arange(1, nsteps + 1) * ray_step).clip(max=max_range_cells)
    if rays == 1:
        ang = np.array([bearing])
    else:
        ang = bearing + np.linspace(-fov / 2.0, fov / 2.0, rays)
    rr = np.floor(cell[0] + 0.5 + np.sin(ang)[:, None] * dist[None, :])
    cc = np.floor(cell[1] + 0.5 + np.cos(ang)[:, None] * dist[None, :])
    rr = rr.astype(np.intp)
    cc = cc.astype(np.intp)
    inside = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
    lab = grid.labels[rr.clip(0, h - 1), cc.clip(0, w - 1)]
    unknown = (lab == UNKNOWN) | ~inside
    occupied = (lab == OCCUPIED) & inside
    nsamp = dist.shape[0]
    first_unknown = np.where(unknown.any(axis=1), unknown.argmax(axis=1), nsamp)
    first_occupied = np.where(occupied.any(axis=1), occupied.argmax(axis=1),
                              nsamp)
    hits = (first_unknown < nsamp) & (first_unknown < first_occupied)
    return float(np.count_nonzero(hits) / len(hits))


def phi_object(prior: PriorField, grid: OccupancyGrid, cell) -> float:
    """Max over the prior's Gaussians of the peak-normalized density at the
    cell center. Empty mixture scores 0."""
    if not prior.gaussians:
        return 0.0
    x = np.array(grid.center(cell))
    best = 0.0
    for mean, cov in prior.gaussians:
        d = x - mean
        m = float(d @ np.linalg.solve(cov, d))
        best = max(best, math.exp(-0.5 * m))
    return best


def assign_probability(grid: OccupancyGrid, frontiers, prior: PriorField,
                       robot, cfg: ExploreConfig,
                       sensor_radius_cells: float = 20.0) -> np.ndarray:
    """Probability for each frontier cell: w_u*phi_u + w_g*phi_g + w_o*phi_o,
    clamped to [0, 1 - 1e-9]. phi_g rays leave the frontier cell along the
    robot-to-cell bearing."""
    w_u, w_g, w_o = prior.weights
    out = np.empty(len(frontiers))
    for i, cell in enumerate(frontiers):
        bearing = math.atan2(cell[0] - robot[0], cell[1] - robot[1])
        p = 0.0
        if w_u:
            p += w_u * phi_unknown(grid, cell, cfg.window)
        if w_g:
            p += w_g * phi_geometric(grid, cell, bearing, cfg.phi_g_fov,
                                     cfg.rays, cfg.ray_step,
                                     sensor_radius_cells)
        if w_o:
            p += w_o * phi_object(prior, grid, cell)
        out[i] = p
    return np.clip(out, 0.0, PROB_CLAMP)


@dataclass
class GoalCluster:
    cell: tuple
    prob: float
    members: tuple


def mean_shift(points: np.ndarray, weights: np.ndarray,
               cfg: ClusterConfig) -> np.ndarray:
    """Run the weighted mean-shift update from every point until movement
    drops below converge_tol (or max_iter). All-zero weights fall back to
    uniform so the shift still averages positions."""
    pts = np.asarray(points, dtype=np.float64)
    w_p = np.asarray(weights, dtype=np.float64)
    if not np.any(w_p > 0):
        w_p = np.ones(len(pts))
    centers = pts.copy()
    two_bw2 = 2.0 * cfg.bandwidth * cfg.bandwidth
    for _ in range(cfg.max_iter):
        d2 = ((centers[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        w = w_p[None, :] * np.exp(-d2 / two_bw2)
        newc = (w @ pts) / w.sum(axis=1, keepdims=True)
        move = np.sqrt(((newc - centers) ** 2).sum(axis=1))
        centers = newc
        if np.all(move < cfg.converge_tol):
            break
    return centers


def cluster_goals(grid: OccupancyGrid, frontiers, probs,
                  cfg: ClusterConfig) -> list:
    """Condense frontier cells into goal clusters: converge each point by
    mean shift, merge converged centers within merge_dist, take the max
    member probability, and snap each merged center to the nearest Free
    cell. Deterministic for a fixed input order."""
    if len(frontiers) == 0:
        return []
    pts = np.asarray(frontiers, dtype=np.float64)
    probs = np.asarray(probs, dtype=np.float64)
    centers = mean_shift(pts, probs, cfg)
    groups: list[list[int]] = []
    anchors: list[np.ndarray] = []
    for i in range(len(centers)):
        placed = False
        for gi, anchor in enumerate(anchors):
            if np.hypot(*(centers[i] - anchor)) <= cfg.merge_dist:
                groups[gi].append(i)
                placed = True
                break
        if not placed:
            groups.append([i])
            anchors.append(centers[i])
    free = np.argwhere(grid.labels == FREE)
    out: dict[tuple, GoalCluster] = {}
    for members, anchor in zip(groups, anchors):
        center = centers[members].mean(axis=0)
        prob = float(probs[members].max())
        d2 = ((free - center[None, :]) ** 2).sum(axis=1)
        pick = free[int(np.argmin(d2))]
        snapped = (int(pick[0]), int(pick[1]))
        cells = tuple(tuple(pts[m].astype(int)) for m in members)
        prev = out.get(snapped)
        if prev is None:
            out[snapped] = GoalCluster(snapped, prob, cells)
        else:
            # two centers snapped onto the same cell; keep the best evidence
            out[snapped] = GoalCluster(
                snapped, max(prev.prob, prob), prev.members + cells)
    return [out[k] for k in sorted(out)]


def build_search_graph(grid: OccupancyGrid, goals, robot):
    """Complete graph over the robot and the reachable goal clusters with
    grid shortest-path costs. The robot vertex has probability zero.
    Returns (Instance or None, vertex cells, dropped goal cells)."""
    kept = [g for g in goals if g.cell != tuple(robot)]
    if not kept:
        return None, [tuple(robot)], []
    cells = [tuple(robot)] + [g.cell for g in kept]
    dist, _, _, idx = grid_distances(grid, cells)
    node = [idx[c] for c in cells]
    m = len(cells)
    pair = np.empty((m, m))
    for i in range(m):
        pair[i] = dist[i, node]
    reachable = np.isfinite(pair[0])
    reachable[0] = True
    dropped = [cells[i] for i in range(1, m) if not reachable[i]]
    keep_idx = [i for i in range(m) if reachable[i]]
    if len(keep_idx) < 2:
        return None, [tuple(robot)], dropped
    sub = pair[np.ix_(keep_idx, keep_idx)]
    np.fill_diagonal(sub, 0.0)
    probs = np.zeros(len(keep_idx))
    for j, i in enumerate(keep_idx):
        if i > 0:
            probs[j] = min(kept[i - 1].prob, PROB_CLAMP)
    vertex_cells = [cells[i] for i in keep_idx]
    inst = Instance(sub, probs, 0, "explore")
    return inst, vertex_cells, dropped


def _plan_goal(inst: Instance, vertex_cells, planner: str,
               cfg: ExploreConfig):
    """First goal cell of the planned visiting order."""
    if planner == "greedy":
        res = greedy_solve(inst)
    elif planner == "blind":
        res = blind_hpp_solve(inst)
    elif planner == "rpt":
        eps = cfg.focal_eps if inst.n > cfg.vertex_cap else 0.0
        res = solve(inst, SolverConfig(epsilon=eps,
                                       time_limit=cfg.plan_time_limit))
    else:
        raise ValueError(f"unknown planner {planner!r}")
    if res.status != "ok":
        return None
    return vertex_cells[res.path[1]]


@dataclass
class ExploreStep:
    step: int
    time: float
    cell: tuple
    revealed: int
    frontiers: int
    clusters: int
    replanned: bool


@dataclass
class ExploreLog:
    planner: str
    seed: int
    world: str
    status: str  # "found", "exhausted" or "truncated"
    duration: float
    steps: list

    def to_json_lines(self) -> str:
        out = []
        for s in self.steps:
            out.append(json.dumps({
                "step": s.step, "time": round(s.time, 9),
                "cell": list(s.cell), "revealed": s.revealed,
                "frontiers": s.frontiers, "clusters": s.clusters,
                "replanned": s.replanned,
            }))
        out.append(json.dumps({
            "summary": True, "planner": self.planner, "seed": self.seed,
            "world": self.world, "status": self.status,
            "duration": round(self.duration, 9), "steps": len(self.steps),
        }))
        return "\n".join(out) + "\n"


def _goal_alive(frontiers_set, goal, merge_dist) -> bool:
    gr, gc = goal
    lim = merge_dist * merge_dist
    for (r, c) in frontiers_set:
        if (r - gr) * (r - gr) + (c - gc) * (c - gc) <= lim:
            return True
    return False


def run_exploration(world: WorldModel, prior: PriorField, planner: str,
                    cfg: ExploreConfig | None = None, seed: int = 0,
                    name: str = "") -> ExploreLog:
    """Explore until the robot is within success_dist of the target with
    the target cell revealed, the reachable map is exhausted, or the step
    cap is hit. Deterministic for fixed inputs; seed is recorded in the
    log (trial variation comes from the world, e.g. the start cell)."""
    if cfg is None:
        cfg = ExploreConfig()
    grid = OccupancyGrid.all_unknown(world.truth.shape, world.truth.resolution)
    robot = tuple(world.robot)
    res = grid.resolution
    radius_cells = world.sensor_radius / res
    revealed = reveal(grid, world, robot, cfg.rays, cfg.ray_step)
    t = 0.0
    steps: list = []
    status = "truncated"
    path: list = []
    goal = None
    fcount_at_plan = -1
    clusters_n = 0
    target_xy = np.array(grid.center(world.target))

    def success() -> bool:
        if grid.label(world.target) == UNKNOWN:
            return False
        d = np.hypot(*(np.array(grid.center(robot)) - target_xy))
        return d < cfg.success_dist

    while len(steps) < cfg.max_steps:
        if success():
            status = "found"
            break
        frontiers = extract_frontiers(grid)
        if not frontiers:
            status = "exhausted"
            break
        fcount = len(frontiers)
        frontier_set = set(frontiers)
        need_replan = (
            not path
            or goal is None
            or robot == goal
            or not _goal_alive(frontier_set, goal, cfg.cluster.merge_dist)
            or (fcount_at_plan > 0
                and abs(fcount - fcount_at_plan) > cfg.replan_delta * fcount_at_plan)
        )
        replanned = False
        if need_replan:
            replanned = True
            fcount_at_plan = fcount
            probs = assign_probability(grid, frontiers, prior, robot, cfg,
                                       radius_cells)
            goals = cluster_goals(grid, frontiers, probs, cfg.cluster)
            clusters_n = len(goals)
            inst, cells, _dropped = build_search_graph(grid, goals, robot)
            goal = None
            if inst is not None:
                goal = _plan_goal(inst, cells, planner, cfg)
            if goal is None:
                # no plannable cluster; head for the nearest reachable
                # frontier (never the robot's own cell)
                dist, _, _gcells, gidx = grid_distances(grid, [robot])
                best = None
                best_d = np.inf
                for cell in frontiers:
                    j = gidx[cell]
                    if j >= 0 and 0.0 < dist[0, j] < best_d:
                        best_d = float(dist[0, j])
                        best = cell
                if best is None:
                    status = "exhausted"
                    break
                goal = best
            path = shortest_path_cells(grid, robot, goal)
            if path is None or len(path) < 2:
                # every remaining frontier is unreachable from here
                status = "exhausted"
                break
            path = path[1:]
        robot = path.pop(0)
        t += res
        revealed += reveal(grid, world, robot, cfg.rays, cfg.ray_step)
        steps.append(ExploreStep(len(steps) + 1, t, robot, revealed,
                                 len(extract_frontiers(grid)), clusters_n,
                                 replanned))
    else:
        status = "truncated"
    if status == "truncated" and success():
        status = "found"
    return ExploreLog(planner, seed, name or "world", status, t, steps)


def forest_world(size: int = 100, n_trees: int = 90, seed: int = 0,
                 resolution: float = 1.0, sensor_radius: float = 10.0,
                 target=None, robot=None) -> WorldModel:
    """Random forest benchmark world: solid border walls, square tree
    blobs, target and robot on free cells with a guaranteed free path
    between them. Deterministic per seed."""
    for attempt in range(64):
        rng = np.random.default_rng((seed, attempt))
        labels = np.full((size, size), FREE, dtype=np.uint8)
        labels[0, :] = labels[-1, :] = OCCUPIED
        labels[:, 0] = labels[:, -1] = OCCUPIED
        for _ in range(n_trees):
            r = int(rng.integers(2, size - 3))
            c = int(rng.integers(2, size - 3))
            s = int(rng.integers(1, 3))
            labels[r:r + s, c:c + s] = OCCUPIED
        tgt = tuple(target) if target else (size - size // 5, size - size // 5)
        rob = tuple(robot) if robot else (size // 5, size // 5)
        labels[tgt] = FREE
        labels[rob] = FREE
        world = WorldModel(OccupancyGrid(labels, resolution), tgt, rob,
                           sensor_radius=sensor_radius)
        if shortest_path_cells_truth(world, rob, tgt):
            return world
    raise RuntimeError("could not generate a connected forest world")


def shortest_path_cells_truth(world: WorldModel, src, dst):
    """Shortest path over the ground-truth free space (for world checks)."""
    return shortest_path_cells(world.truth, src, dst)


def with_start(world: WorldModel, robot) -> WorldModel:
    if world.truth.label(robot) != FREE:
        raise ValueError(f"start cell {robot} is not free")
    return WorldModel(world.truth, world.target, tuple(robot), world.heading,
                      world.sensor_radius, world.fov)


def sample_start(world: WorldModel, seed: int, radius: float = 8.0) -> tuple:
    """Seeded free cell near the world's nominal start, for trial jitter."""
    rng = np.random.default_rng((seed, 9251))
    free = np.argwhere(world.truth.labels == FREE)
    d = np.sqrt(((free - np.array(world.robot)[None, :]) ** 2).sum(axis=1))
    near = free[d <= radius]
    if len(near) == 0:
        return tuple(world.robot)
    pick = near[int(rng.integers(len(near)))]
    cell = (int(pick[0]), int(pick[1]))
    if shortest_path_cells_truth(world, cell, world.target) is None:
        return tuple(world.robot)
    return cell
