"""Invariant suites behind `verify-all` and `verify-split`, aggregated into RunReports.

Why this design:
- Each suite seeds its own generator from the run seed so suites stay order independent.
- Suites count failures and never raise, so one bad case does not hide the rest.
- Desk counts keep everyday runs short; full counts reproduce the acceptance sizes.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from ..core.cauchy import SpacelikeMap, intersect_fixed_point, random_causal_map
from ..core.diamond import (
    ProductModelPoint,
    conformality_check,
    diamond_membership_oracle,
    in_flat_diamond,
    inversion_phi,
)
from ..core.errors import ConvergenceError, PqCausalError
from ..core.lipgraph import (
    GraphSamples,
    affine_map,
    is_causal_position,
    kirszbraun_extend,
    lipschitz_constant,
    samples_from_points,
)
from ..core.plateau import (
    ALL_PAIRS,
    GridBase,
    GridSection,
    PlateauProblem,
    area,
    area_gradient,
    brute_force_center_scan,
    extract_limit_section,
    harmonic_initialization,
    max_violation,
    project_lipschitz,
    solve_plateau,
)
from ..core.pqform import PseudoMetric, cone_sample
from ..core.split import check_speed_bound, random_foliation, random_level_set, verify_splitting_bijectivity

LOGGER = logging.getLogger("pqcausal.verification")


@dataclass
class CheckResult:
    name: str
    trials: int
    failures: int = 0
    detail: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> dict:
        return {"trials": self.trials, "failures": self.failures, "passed": self.passed, **self.detail}


@dataclass
class RunReport:
    command: List[str]
    seed: int
    wall_time: float = 0.0
    result: Dict[str, Any] = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None and all(self.checks.values())

    def to_dict(self) -> dict:
        out = {
            "command": list(self.command),
            "seed": self.seed,
            "wall_time": round(self.wall_time, 6),
            "result": self.result,
            "checks": dict(self.checks),
            "ok": self.ok,
        }
        if self.error is not None:
            out["error"] = self.error
        return out


def _rng(seed: int, salt: int) -> np.random.Generator:
    return np.random.default_rng([seed, salt])


# -- suites --------------------------------------------------------------------


def graph_characterization_suite(seed: int, count: int) -> CheckResult:
    """Causal position of a point set agrees with the Lipschitz constant of its graph."""
    rng = _rng(seed, 1)
    result = CheckResult("graph_characterization", count)
    for _ in range(count):
        p, q = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        n = int(rng.integers(2, 9))
        sources = rng.uniform(-1.0, 1.0, size=(n, q))
        targets = rng.standard_normal((n, p))
        constant = lipschitz_constant(GraphSamples(sources, targets))
        targets *= rng.uniform(0.2, 1.8) / max(constant, 1e-12)
        points = np.hstack([targets, sources])
        g = PseudoMetric.standard(p, q)
        k = lipschitz_constant(samples_from_points(points, p))
        if is_causal_position(g, points) != (k <= 1.0) or is_causal_position(g, points, strict=True) != (k < 1.0):
            result.failures += 1
    return result


def _queries(rng: np.random.Generator, sources: np.ndarray, count: int, min_gap: float = 1e-3) -> np.ndarray:
    """Query points at least min_gap away from every source."""
    out = []
    while len(out) < count:
        x = rng.uniform(-1.5, 1.5, size=sources.shape[1])
        if np.min(np.linalg.norm(sources - x, axis=1)) >= min_gap:
            out.append(x)
    return np.asarray(out)


def kirszbraun_suite(seed: int, count: int, queries: int = 10, max_points: int = 50) -> CheckResult:
    rng = _rng(seed, 2)
    result = CheckResult("kirszbraun", count)
    worst_excess = 0.0
    worst_residual = 0.0
    for _ in range(count):
        p, q = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        n = int(rng.integers(1, max_points + 1))
        lipschitz = float(rng.uniform(0.2, 2.0))
        sources = rng.uniform(-1.0, 1.0, size=(n, q))
        targets = rng.standard_normal((n, p))
        constant = lipschitz_constant(GraphSamples(sources, targets))
        if constant > 0:
            targets *= lipschitz / constant * rng.uniform(0.5, 1.0)
        samples = GraphSamples(sources, targets)
        for x in _queries(rng, sources, queries):
            try:
                y = kirszbraun_extend(samples, lipschitz, x, tol=1e-12)
            except ConvergenceError:
                result.failures += 1
                continue
            dist = np.linalg.norm(sources - x, axis=1)
            gaps = np.linalg.norm(targets - y, axis=1)
            residual = float(np.max(gaps - lipschitz * dist))
            worst_residual = max(worst_residual, residual)
            mask = dist > 0
            excess = float(np.max(gaps[mask] / dist[mask])) - lipschitz if np.any(mask) else 0.0
            worst_excess = max(worst_excess, excess)
            if residual > 1e-9 or excess > 1e-8:
                result.failures += 1
    result.detail = {"max_constant_excess": worst_excess, "max_residual": worst_residual}
    return result


def fixed_point_suite(seed: int, count: int, starts: int = 5) -> CheckResult:
    rng = _rng(seed, 3)
    result = CheckResult("fixed_point", count)
    worst_rate = 0.0
    slow_steps = 0
    for trial in range(count):
        p, q = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        B = rng.standard_normal((q, p))
        B *= 0.9 / max(float(np.linalg.norm(B, 2)), 1e-300)
        w = SpacelikeMap(affine_map(B, rng.standard_normal(q)))
        f = random_causal_map(rng, q, p, affine=trial % 2 == 0)
        try:
            runs = [intersect_fixed_point(f, w, x0=rng.uniform(-5.0, 5.0, size=q)) for _ in range(starts)]
        except ConvergenceError:
            result.failures += 1
            continue
        spread = max(float(np.linalg.norm(r.x - runs[0].x)) for r in runs)
        pairs = [(r.contraction, a, b) for r in runs for a, b in zip(r.steps, r.steps[1:])]
        # Causal maps here are globally 1-Lipschitz.
        slow = sum(1 for k, a, b in pairs if b > k * a + 1e-12)
        rate = max((b / a for _, a, b in pairs if a > 1e-9), default=0.0)
        worst_rate = max(worst_rate, rate)
        slow_steps += slow
        if spread > 1e-8 or slow:
            result.failures += 1
    result.detail = {"max_step_ratio": worst_rate, "slow_steps": slow_steps}
    return result


DIAMOND_SIGNATURES = ((1, 2), (2, 2), (3, 2), (2, 3))


def diamond_oracle_suite(seed: int, count: int, sphere_samples: int = 1000, band: float = 1e-6) -> CheckResult:
    rng = _rng(seed, 4)
    result = CheckResult("diamond_oracle", count * len(DIAMOND_SIGNATURES))
    skipped = 0
    for p, q in DIAMOND_SIGNATURES:
        points = rng.uniform(-1.5, 1.5, size=(count, p + q))
        gap = np.linalg.norm(points[:, :p], axis=1) + np.linalg.norm(points[:, p:], axis=1) - 1.0
        for pt, g in zip(points, gap):
            if abs(g) < band:
                skipped += 1
                continue
            if bool(in_flat_diamond(pt, p)) != diamond_membership_oracle(pt, p, q, sphere_samples):
                result.failures += 1
    result.detail = {"skipped_in_band": skipped}
    return result


def conformality_suite(seed: int, count: int) -> CheckResult:
    """psi has factor t^2 on the product chart; phi is conformal and maps S- into L."""
    rng = _rng(seed, 5)
    result = CheckResult("conformality", count)
    worst = {"psi_factor": 0.0, "psi_residual": 0.0, "phi_residual": 0.0, "sphere_to_L": 0.0}
    for _ in range(count):
        p, q = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        t = float(rng.uniform(0.5, 2.0))
        model = ProductModelPoint.from_chart(rng.uniform(-1.0, 1.0, p), rng.uniform(-1.0, 1.0, q - 1), t)
        factor, residual = conformality_check("psi", model, p, q)
        factor_error = abs(factor - t * t) / (t * t)
        while True:
            pt = rng.uniform(-1.5, 1.5, p + q)
            d = pt.copy()
            d[p] -= 1.0
            if abs(float(d[:p] @ d[:p] - d[p:] @ d[p:])) > 0.5:
                break
        _, phi_residual = conformality_check("phi", pt, p, q)
        s = rng.standard_normal(q)
        s /= np.linalg.norm(s)
        if s[0] > 0.99:
            s = -s
        image = inversion_phi(np.concatenate([np.zeros(p), s]), p, q)
        to_l = float(np.max(np.abs(image[: p + 1])))
        worst["psi_factor"] = max(worst["psi_factor"], factor_error)
        worst["psi_residual"] = max(worst["psi_residual"], residual)
        worst["phi_residual"] = max(worst["phi_residual"], phi_residual)
        worst["sphere_to_L"] = max(worst["sphere_to_L"], to_l)
        if factor_error > 1e-6 or residual > 1e-6 or phi_residual > 1e-6 or to_l > 1e-12:
            result.failures += 1
    result.detail = worst
    return result


def _unit_square(nodes: int) -> GridBase:
    return GridBase.box((0.0, 0.0), (1.0, 1.0), nodes)


def plateau_constant_suite(seed: int, nodes: int = 17) -> CheckResult:
    base = _unit_square(nodes)
    value = float(_rng(seed, 6).uniform(-1.0, 1.0))
    problem = PlateauProblem.from_map(base, PseudoMetric.standard(1, 2), affine_map([[0.0, 0.0]], [value]))
    solved = solve_plateau(problem)
    sup = float(np.max(np.abs(solved.section.values - value)))
    result = CheckResult("plateau_constant", 1, detail={"area": solved.area, "sup_distance": sup})
    if abs(solved.area - 1.0) > 1e-6 or sup > 1e-4:
        result.failures = 1
    return result


def plateau_affine_suite(seed: int, nodes: int = 17, scan_samples: int = 20_001) -> CheckResult:
    rng = _rng(seed, 7)
    angle = float(rng.uniform(0.0, 2.0 * np.pi))
    slope = 0.5 * np.array([[np.cos(angle), np.sin(angle)]])
    boundary = affine_map(slope, [float(rng.uniform(-1.0, 1.0))])
    metric = PseudoMetric.standard(1, 2)
    base = _unit_square(nodes)
    solved = solve_plateau(PlateauProblem.from_map(base, metric, boundary))
    sup = float(np.max(np.abs(solved.section.values - boundary.evaluate_many(base.coords))))
    small = PlateauProblem.from_map(_unit_square(3), metric, boundary)
    centre, _ = brute_force_center_scan(small, scan_samples)
    small_solved = solve_plateau(small)
    node = int(np.flatnonzero(small.base.interior)[0])
    agreement = abs(float(small_solved.section.values[node, 0]) - centre)
    result = CheckResult(
        "plateau_affine",
        1,
        detail={"area": solved.area, "sup_error": sup, "scan_agreement": agreement},
    )
    if abs(solved.area - np.sqrt(0.75)) > 1e-4 or sup > 1e-3 or agreement > 1e-6:
        result.failures = 1
    return result


def _strict_section(rng: np.random.Generator, base: GridBase, slope: float = 0.3) -> GridSection:
    direction = rng.standard_normal(base.q)
    direction /= np.linalg.norm(direction)
    noise = rng.uniform(-0.02, 0.02, size=base.node_count) * min(base.spacing)
    return GridSection(base, slope * base.coords @ direction + noise)


def area_gradient_suite(seed: int, count: int, fd_step: float = 1e-6) -> CheckResult:
    rng = _rng(seed, 8)
    base = _unit_square(17)
    metric = PseudoMetric.standard(1, 2)
    result = CheckResult("area_gradient", count)
    worst = 0.0
    interior = np.flatnonzero(base.interior)
    for _ in range(count):
        section = _strict_section(rng, base)
        grad = area_gradient(section, metric)
        fd = np.zeros_like(grad)
        for node in interior:
            plus, minus = section.values.copy(), section.values.copy()
            plus[node, 0] += fd_step
            minus[node, 0] -= fd_step
            fd[node, 0] = (area(section.with_values(plus), metric) - area(section.with_values(minus), metric)) / (
                2.0 * fd_step
            )
        error = float(np.max(np.abs(grad - fd)) / max(float(np.max(np.abs(grad))), 1e-300))
        worst = max(worst, error)
        if error > 1e-5:
            result.failures += 1
    result.detail = {"max_relative_error": worst}
    return result


def compactness_suite(seed: int, length: int, tol: float = 1e-6) -> CheckResult:
    rng = _rng(seed, 9)
    base = _unit_square(17)
    boundary = np.zeros((base.node_count, 1))
    boundary[base.boundary, 0] = 0.3 * base.coords[base.boundary, 0]
    centre = harmonic_initialization(base, boundary)
    # Slope 0.3 plus noise under 0.35 grid steps keeps every pair 1-Lipschitz.
    spacing = 1.0 / 16.0
    sequence = []
    for _ in range(length):
        noise = np.zeros_like(centre)
        noise[base.interior] = rng.uniform(-0.35, 0.35, size=(int(base.interior.sum()), 1)) * spacing
        sequence.append(project_lipschitz(GridSection(base, centre + noise), ALL_PAIRS, 1e-12))
    chosen, limit = extract_limit_section(sequence, tol)
    picked = np.stack([sequence[i].values for i in chosen])
    spread = float(np.max(picked.max(axis=0) - picked.min(axis=0)))
    violation = max_violation(limit, ALL_PAIRS)
    boundary_exact = bool(np.array_equal(limit.values[base.boundary], sequence[0].values[base.boundary]))
    result = CheckResult(
        "compactness",
        1,
        detail={"subsequence": len(chosen), "spread": spread, "violation": violation},
    )
    if violation > 1e-10 or not boundary_exact or spread > tol:
        result.failures = 1
    return result


def splitting_suite(seed: int, pairs: int, samples: int, cone_samples: int, tol: float = 1e-10) -> CheckResult:
    rng = _rng(seed, 10)
    result = CheckResult("splitting", pairs)
    worst_error = 0.0
    for index in range(pairs):
        p, q = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        fol = random_foliation(rng, p, q, float(rng.uniform(0.0, 0.9)))
        level = random_level_set(rng, p, q, float(rng.uniform(0.0, 0.9)))
        report = verify_splitting_bijectivity(fol, level, samples, rng_seed=int(rng.integers(2**31)), tol=tol)
        worst_error = max(worst_error, report.max_error)
        if report.failures or report.collisions or report.max_error > 1e-8:
            result.failures += 1
    g = PseudoMetric.standard(2, 2)
    speed_failures = 0
    for v in cone_sample(g, cone_samples, rng_seed=seed):
        bound = check_speed_bound(g, v)
        if not bound.ok or (abs(bound.lhs - bound.rhs) <= 1e-9 and abs(float(g.evaluate(v))) > 1e-9):
            speed_failures += 1
    result.failures += speed_failures
    result.detail = {"max_error": worst_error, "speed_bound_failures": speed_failures}
    return result


DESK_COUNTS = {
    "graph": 200,
    "kirszbraun": 30,
    "fixed_point": 100,
    "diamond": 250,
    "conformality": 25,
    "gradient": 5,
    "compactness": 100,
    "split_pairs": 3,
    "split_samples": 200,
    "cone": 2000,
}

FULL_COUNTS = {
    "graph": 1000,
    "kirszbraun": 1000,
    "fixed_point": 1000,
    "diamond": 10_000,
    "conformality": 100,
    "gradient": 20,
    "compactness": 1000,
    "split_pairs": 10,
    "split_samples": 1000,
    "cone": 10_000,
}


def suite_plan(full: bool = False) -> Dict[str, Callable[[int], CheckResult]]:
    n = FULL_COUNTS if full else DESK_COUNTS
    return {
        "graph_characterization": lambda s: graph_characterization_suite(s, n["graph"]),
        "kirszbraun": lambda s: kirszbraun_suite(s, n["kirszbraun"], max_points=50 if full else 20),
        "fixed_point": lambda s: fixed_point_suite(s, n["fixed_point"]),
        "diamond_oracle": lambda s: diamond_oracle_suite(s, n["diamond"]),
        "conformality": lambda s: conformality_suite(s, n["conformality"]),
        "plateau_constant": plateau_constant_suite,
        "plateau_affine": plateau_affine_suite,
        "area_gradient": lambda s: area_gradient_suite(s, n["gradient"]),
        "compactness": lambda s: compactness_suite(s, n["compactness"]),
        "splitting": lambda s: splitting_suite(s, n["split_pairs"], n["split_samples"], n["cone"]),
    }


def run_suites(plan: Dict[str, Callable[[int], CheckResult]], seed: int, command: List[str]) -> RunReport:
    report = RunReport(command=list(command), seed=seed)
    started = time.perf_counter()
    for name, suite in plan.items():
        try:
            outcome = suite(seed)
        except PqCausalError as exc:
            LOGGER.exception("suite-crashed", extra={"suite": name})
            report.result[name] = {"passed": False, "error": str(exc)}
            report.checks[name] = False
            continue
        report.result[name] = outcome.to_dict()
        report.checks[name] = outcome.passed
        LOGGER.info("suite-finished", extra={"suite": name, "passed": outcome.passed})
    report.wall_time = time.perf_counter() - started
    return report


def verify_all(seed: int = 0, full: bool = False, command: Optional[List[str]] = None) -> RunReport:
    return run_suites(suite_plan(full), seed, command or ["verify-all"])


__all__ = [
    "CheckResult",
    "RunReport",
    "graph_characterization_suite",
    "kirszbraun_suite",
    "fixed_point_suite",
    "diamond_oracle_suite",
    "conformality_suite",
    "plateau_constant_suite",
    "plateau_affine_suite",
    "area_gradient_suite",
    "compactness_suite",
    "splitting_suite",
    "suite_plan",
    "run_suites",
    "verify_all",
]
