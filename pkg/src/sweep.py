"""
Pipeline stage shared by every command: prepare a parameter point (target,
constraints, couplings, physical parameters), solve it and score it. Sweeps
and the (J0, J) optimizer are built on top of it.
"""
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize
from tqdm import tqdm

now_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.append(now_dir)

from cluster_pack.commons import ConstraintError, InstabilityError, OptimizationError, SolverError
from cluster_pack.metrics import fidelity, nullifier_matrix, nullifier_variances
from cluster_pack.model_effective import IDEAL, REALISTIC, adiabatic_report, effective_steady
from cluster_pack.model_full import PhysicalParams, assemble, stability_margin, steady_covariance
from cluster_pack.model_full import STABILITY_TOL
from cluster_pack.synthesis import synthesize
from cluster_pack.target import check_constraints, rect_target, target_covariance
from my_utils import format_value

AXES = {
    'kappa_delta': ('kappa', 'delta'),
    'gamma_T': ('gamma', 'temperature'),
}

CSV_COLUMNS = (
    'x_name', 'y_name', 'x', 'y', 'modes', 'stable', 'stability_margin', 'fidelity',
    'max_nullifier_var', 'min_nullifier_var', 'coupling_ratio', 'dissipation_ratio', 'yw_ratio',
)

ORACLE_FIDELITY = 1 - 1e-6


@dataclass(eq=False)
class PreparedPoint:
    graph: object
    spec: object
    constraints: object
    plan: object
    params: PhysicalParams


def prepare_point(cfg):
    """Target, constraint check, coupling synthesis and physical parameters for one config."""
    phys = cfg.physics
    graph = cfg.build_graph()
    spec = rect_target(graph, cfg.target.J0, cfg.target.J, cfg.z, cfg.target.row_phase)
    constraints = check_constraints(spec, cfg.numerics.tol)
    if not constraints.realizable:
        raise ConstraintError(
            f'Target is not realizable (phase residual {constraints.phase_residual:.3e}, '
            f'anticommutator residual {constraints.anticommutator_residual:.3e}).',
            constraints.to_record())
    plan = synthesize(spec, phys.delta, phys.kappa, policy=cfg.synthesis.policy,
                      delta_omega=phys.delta_omega, drive_phase=cfg.target.drive_phase,
                      bath_phase=phys.phi0, rank_tol=cfg.synthesis.rank_tol, tol=cfg.numerics.tol)
    params = PhysicalParams.from_plan(plan, cfg.kappa0, phys.delta0, phys.gamma, T=phys.temperature,
                                      r=phys.r, phi0=phys.phi0, eps_L0=phys.eps_L0,
                                      omega0=cfg.omega0_rad)
    return PreparedPoint(graph, spec, constraints, plan, params)


@dataclass
class SweepRecord:
    x_name: str
    y_name: str
    x: float
    y: float
    modes: int
    stability_margin: float
    fidelity: Optional[float] = None
    max_nullifier_var: Optional[float] = None
    min_nullifier_var: Optional[float] = None
    coupling_ratio: Optional[float] = None
    dissipation_ratio: Optional[float] = None
    yw_ratio: Optional[float] = None

    @property
    def stable(self):
        return self.fidelity is not None

    def to_row(self):
        return [format_value(getattr(self, name)) for name in CSV_COLUMNS]


def score_covariance(E, point):
    variances = nullifier_variances(E, nullifier_matrix(point.graph, point.spec.theta))
    return {
        'fidelity': fidelity(E, target_covariance(point.spec), point.spec.n_nodes),
        'max_nullifier_var': float(variances.max()),
        'min_nullifier_var': float(variances.min()),
    }


def evaluate_point(cfg, x_name='kappa', y_name='delta'):
    """Full-model evaluation of cfg; unstable points keep empty metric fields."""
    point = prepare_point(cfg)
    model = assemble(point.params, point.plan, point.spec)
    report = adiabatic_report(point.plan, point.params, cfg.numerics.adiabatic_thresholds)
    record = SweepRecord(
        x_name=x_name, y_name=y_name,
        x=float(getattr(cfg.physics, x_name)), y=float(getattr(cfg.physics, y_name)),
        modes=point.plan.M, stability_margin=stability_margin(model),
        coupling_ratio=report.coupling_ratio, dissipation_ratio=report.dissipation_ratio,
        yw_ratio=report.yw_ratio,
    )
    if record.stability_margin <= STABILITY_TOL:
        return record
    result = steady_covariance(model, cfg.numerics.time, cfg.numerics.method, cfg.numerics.tol)
    for key, value in score_covariance(result.covariance, point).items():
        setattr(record, key, value)
    return record


def _evaluate_task(task):
    cfg, x_name, y_name, x, y = task
    return evaluate_point(cfg.with_overrides(**{x_name: x, y_name: y}), x_name, y_name)


def run_sweep(cfg, xs=None, ys=None, workers=None, progress=True):
    """
    Evaluate every (x, y) pair of the configured sweep, x-major. Couplings are
    re-synthesized at each point. Records come back in grid order for any
    worker count.
    """
    x_name, y_name = AXES[cfg.sweep.kind]
    xs = cfg.axis_values(cfg.sweep.x) if xs is None else np.asarray(xs, dtype=float)
    ys = cfg.axis_values(cfg.sweep.y) if ys is None else np.asarray(ys, dtype=float)
    workers = cfg.sweep.workers if workers is None else workers
    tasks = [(cfg, x_name, y_name, float(x), float(y)) for x in xs for y in ys]

    bar = tqdm(total=len(tasks), desc='[~] Sweep', disable=not progress)
    records = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            for record in executor.map(_evaluate_task, tasks):
                records.append(record)
                bar.update(1)
    else:
        for task in tasks:
            records.append(_evaluate_task(task))
            bar.update(1)
    bar.close()
    return records


def write_csv(records, path):
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CSV_COLUMNS)
        for record in records:
            writer.writerow(record.to_row())
    return path


@dataclass
class OptimizationResult:
    J0: float
    J: float
    fidelity: float
    evaluations: int
    grid_best_fidelity: float

    def to_record(self):
        return {
            'J0': self.J0,
            'J': self.J,
            'fidelity': self.fidelity,
            'evaluations': self.evaluations,
            'grid_best_fidelity': self.grid_best_fidelity,
        }


def optimize_chain(cfg, kappa=None, delta=None, bounds=None, grid=None, max_evals=None, progress=True):
    """
    Maximize full-model fidelity over (J0, J) at a pinned (kappa, delta): a
    log-spaced grid followed by a bounded Nelder-Mead refinement in log
    coordinates. The configured (J0, J) is scored as an extra seed when it lies
    inside the bounds.
    """
    pinned = {}
    if kappa is not None:
        pinned['kappa'] = kappa
    if delta is not None:
        pinned['delta'] = delta
    base = cfg.with_overrides(**pinned) if pinned else cfg
    bounds = bounds or (tuple(cfg.optimize.J0_bounds), tuple(cfg.optimize.J_bounds))
    lo = np.array([bounds[0][0], bounds[1][0]], dtype=float)
    hi = np.array([bounds[0][1], bounds[1][1]], dtype=float)
    if np.any(lo <= 0) or np.any(hi < lo):
        raise OptimizationError(f'Invalid optimizer bounds {bounds}.')
    grid = cfg.optimize.grid if grid is None else grid
    max_evals = cfg.optimize.max_evals if max_evals is None else max_evals

    scores = {}
    best = {'point': None, 'fidelity': -np.inf}

    def score(j0, j):
        key = (float(j0), float(j))
        if key not in scores:
            try:
                record = evaluate_point(base.with_overrides(J0=key[0], J=key[1]))
                scores[key] = record.fidelity
            except (InstabilityError, SolverError):
                scores[key] = None
            if scores[key] is not None and scores[key] > best['fidelity']:
                best['point'], best['fidelity'] = key, scores[key]
        return scores[key]

    axes = [np.geomspace(l, h, grid) if h > l else np.array([l]) for l, h in zip(lo, hi)]
    with tqdm(total=axes[0].size * axes[1].size, desc='[~] Coarse grid', disable=not progress) as bar:
        for j0 in axes[0]:
            for j in axes[1]:
                score(j0, j)
                bar.update(1)
    if best['point'] is None:
        raise OptimizationError('Every coarse-grid point is unstable.')
    grid_best = best['fidelity']

    seed = (cfg.target.J0, cfg.target.J)
    if np.all(lo <= seed) and np.all(seed <= hi):
        score(*seed)

    free = np.flatnonzero(hi > lo)
    if free.size and max_evals > 0:
        anchor = np.log(np.array(best['point']))

        def objective(u):
            p = anchor.copy()
            p[free] = u
            f = score(*np.exp(p))
            return 1.0 if f is None else -f

        minimize(objective, anchor[free], method='Nelder-Mead',
                 bounds=[(np.log(lo[i]), np.log(hi[i])) for i in free],
                 options={'maxfev': max_evals, 'xatol': 1e-4, 'fatol': 1e-12})

    j0, j = best['point']
    return OptimizationResult(J0=j0, J=j, fidelity=best['fidelity'],
                              evaluations=len(scores), grid_best_fidelity=grid_best)


def validate_point(cfg):
    """
    Ideal-model oracle (engineered Hamiltonian, squeezed bath only) against the
    target, and the full model against the realistic effective model.
    """
    point = prepare_point(cfg)
    E_target = target_covariance(point.spec)
    ideal = effective_steady(point.spec, point.plan, point.params, IDEAL,
                             cfg.numerics.method, cfg.numerics.tol)
    full = steady_covariance(assemble(point.params, point.plan, point.spec),
                             cfg.numerics.time, cfg.numerics.method, cfg.numerics.tol)
    effective = effective_steady(point.spec, point.plan, point.params, REALISTIC,
                                 cfg.numerics.method, cfg.numerics.tol)
    ideal_fidelity = fidelity(ideal.covariance, E_target, point.spec.n_nodes)
    relative_error = float(np.linalg.norm(full.covariance - effective.covariance)
                           / np.linalg.norm(full.covariance))
    report = adiabatic_report(point.plan, point.params, cfg.numerics.adiabatic_thresholds)
    return {
        'ideal_fidelity': ideal_fidelity,
        'oracle_passed': ideal_fidelity >= ORACLE_FIDELITY,
        'full_fidelity': fidelity(full.covariance, E_target, point.spec.n_nodes),
        'effective_fidelity': fidelity(effective.covariance, E_target, point.spec.n_nodes),
        'full_vs_effective_error': relative_error,
        **report.to_record(),
    }
