import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from cluster_pack.commons import (
    ConfigError,
    ConstraintError,
    InstabilityError,
    SynthesisError,
)
from cluster_pack.graph import edge_list
from cluster_pack.metrics import (
    nullifier_matrix,
    nullifier_variances,
    purity_check,
    target_nullifier_variances,
)
from cluster_pack.model_effective import adiabatic_report, w_asymptote, w_matrix
from cluster_pack.model_full import assemble, residual_oscillation, steady_covariance
from cluster_pack.synthesis import drive_parameters, round_trip_residual, wj_matrix
from cluster_pack.target import bogoliubov_matrix, target_covariance
from config import RunConfig
from my_utils import format_record, write_json
from sweep import optimize_chain, prepare_point, run_sweep, score_covariance, validate_point, write_csv

# Base directories
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
configs_dir = os.path.join(BASE_DIR, 'src', 'configs')

COMMANDS = ('synthesize', 'steady', 'sweep', 'optimize', 'validate', 'dump-target')

EXIT_CODES = (
    (ConfigError, 2, 'config'),
    (InstabilityError, 3, 'instability'),
    (ConstraintError, 4, 'constraint'),
    (SynthesisError, 4, 'synthesis'),
)


def display_progress(message, quiet=False):
    if not quiet:
        print(message)


def raise_exception(error):
    """
    Report an error as one machine-parsable line on stderr and exit with its code.
    """
    code, kind = 1, type(error).__name__
    for cls, cls_code, cls_kind in EXIT_CODES:
        if isinstance(error, cls):
            code, kind = cls_code, cls_kind
            break
    reason = str(error).replace('"', "'").replace('\n', ' ')
    print(f'error={kind} reason="{reason}"', file=sys.stderr)
    sys.exit(code)


def resolve_config(path):
    if path is None:
        return RunConfig()
    if not os.path.exists(path) and os.path.exists(os.path.join(configs_dir, path)):
        path = os.path.join(configs_dir, path)
    return RunConfig.from_json(path)


def get_run_dir(cfg, output_dir=None):
    root = output_dir or cfg.output.dir
    if not os.path.isabs(root):
        root = os.path.join(BASE_DIR, root)
    run_dir = os.path.join(root, cfg.run_id)
    os.makedirs(run_dir, exist_ok=True)
    return run_dir


def synthesize_command(cfg, run_dir, quiet=False):
    display_progress('[~] Building target and synthesizing couplings...', quiet)
    point = prepare_point(cfg)
    plan, params = point.plan, point.params
    wj = wj_matrix(point.spec, cfg.numerics.tol)
    report = adiabatic_report(plan, params, cfg.numerics.adiabatic_thresholds)
    w_exact = w_matrix(plan, params)
    asymptote_error = float(np.linalg.norm(w_asymptote(plan, params) - w_exact)
                            / max(np.linalg.norm(w_exact), 1e-300))
    record = {
        **plan.summary(),
        **point.constraints.to_record(),
        **report.to_record(),
        'round_trip_residual': round_trip_residual(plan, wj),
        'w_asymptote_error': asymptote_error,
    }
    payload = {
        'report': record,
        'g0': plan.g0,
        'Gbar': plan.Gbar,
        'detunings': plan.detunings,
        'kappa': plan.kappa,
        'delta_omega': plan.delta_omega,
        'lam': plan.lam,
        'D': plan.D,
        'WJ': wj,
    }
    if cfg.physics.bare_couplings is not None:
        drive = drive_parameters(plan, cfg.physics.bare_couplings, params.kappa, params.Delta)
        payload['drive'] = {'alpha': drive.alpha, 'amplitude': drive.amplitude,
                            'phase': drive.phase, 'residual': drive.residual}
        record['drive_residual'] = drive.residual
    print(format_record(record))
    path = write_json(os.path.join(run_dir, 'plan.json'), payload)
    display_progress(f'[+] Coupling plan written to {path}', quiet)
    return record


def steady_command(cfg, run_dir, quiet=False):
    display_progress('[~] Solving the full model steady state...', quiet)
    point = prepare_point(cfg)
    model = assemble(point.params, point.plan, point.spec)
    result = steady_covariance(model, cfg.numerics.time, cfg.numerics.method, cfg.numerics.tol)
    purity = purity_check(result.covariance)
    record = {
        'modes': point.plan.M,
        **result.to_record(),
        **score_covariance(result.covariance, point),
        'det': purity.det,
        'min_symplectic': purity.min_symplectic,
        'residual_oscillation': residual_oscillation(model, cfg.numerics.method, cfg.numerics.tol),
    }
    print(format_record(record))
    variances = nullifier_variances(result.covariance, nullifier_matrix(point.graph, point.spec.theta))
    path = write_json(os.path.join(run_dir, 'steady.json'), {
        'report': record,
        'covariance': result.covariance,
        'nullifier_variances': variances,
    })
    display_progress(f'[+] Steady state written to {path}', quiet)
    return record


def sweep_command(cfg, run_dir, workers=None, quiet=False):
    display_progress(f'[~] Running {cfg.sweep.kind} sweep...', quiet)
    records = run_sweep(cfg, workers=workers, progress=not quiet)
    unstable = sum(not r.stable for r in records)
    path = write_csv(records, os.path.join(run_dir, 'sweep.csv'))
    display_progress(f'[+] {len(records)} points ({unstable} unstable) written to {path}', quiet)
    return records


def optimize_command(cfg, run_dir, quiet=False):
    display_progress('[~] Optimizing chain couplings...', quiet)
    result = optimize_chain(cfg, progress=not quiet)
    record = result.to_record()
    print(format_record(record))
    path = write_json(os.path.join(run_dir, 'optimize.json'), record)
    display_progress(f'[+] Optimum written to {path}', quiet)
    return record


def validate_command(cfg, run_dir, quiet=False):
    display_progress('[~] Checking ideal oracle and adiabatic elimination...', quiet)
    record = validate_point(cfg)
    print(format_record(record))
    if not record['oracle_passed']:
        display_progress(f'[!] Ideal-model fidelity {record["ideal_fidelity"]:.9f} below oracle bound.', quiet)
    path = write_json(os.path.join(run_dir, 'validate.json'), record)
    display_progress(f'[+] Validation written to {path}', quiet)
    return record


def dump_target_command(cfg, run_dir, quiet=False):
    display_progress('[~] Dumping target state...', quiet)
    point = prepare_point(cfg)
    spec, graph = point.spec, point.graph
    E = target_covariance(spec)
    purity = purity_check(E)
    write_json(os.path.join(run_dir, 'target.json'), {
        'V': spec.V,
        'theta': spec.theta,
        'bogoliubov': bogoliubov_matrix(spec),
        'covariance': E,
        'nullifiers': nullifier_matrix(graph, spec.theta).Q,
        'nullifier_variances': target_nullifier_variances(graph, spec.z),
        'constraints': point.constraints.to_record(),
        'det': purity.det,
    })
    with open(os.path.join(run_dir, 'edges.txt'), 'w') as f:
        f.write(edge_list(graph) + '\n')
    display_progress(f'[+] Target written to {run_dir}', quiet)
    return E


def apply_overrides(cfg, args):
    values = {}
    for key, arg in (('kappa', args.kappa), ('delta', args.delta), ('J0', args.j0), ('J', args.j)):
        if arg is not None:
            values[key] = arg
    if args.time is not None:
        cfg = replace(cfg, numerics=replace(cfg.numerics, time=args.time))
    return cfg.with_overrides(**values) if values else cfg


def run(args):
    cfg = apply_overrides(resolve_config(args.config), args)
    run_dir = get_run_dir(cfg, args.output_dir)
    display_progress(f'[~] Run {cfg.run_id}: {args.command} on {cfg.n_nodes} nodes', args.quiet)
    if args.command == 'synthesize':
        return synthesize_command(cfg, run_dir, args.quiet)
    if args.command == 'steady':
        return steady_command(cfg, run_dir, args.quiet)
    if args.command == 'sweep':
        return sweep_command(cfg, run_dir, args.workers, args.quiet)
    if args.command == 'optimize':
        return optimize_command(cfg, run_dir, args.quiet)
    if args.command == 'validate':
        return validate_command(cfg, run_dir, args.quiet)
    return dump_target_command(cfg, run_dir, args.quiet)


def build_parser():
    parser = argparse.ArgumentParser(
        description='Dissipative optomechanical cluster-state stabilization.',
        add_help=True
    )
    parser.add_argument('command', choices=COMMANDS,
                        help='Pipeline stage to run')
    parser.add_argument('-c', '--config', type=str, default=None,
                        help='Path to a JSON run config, or the name of a file in src/configs. Defaults are used if omitted')
    parser.add_argument('-o', '--output-dir', type=str, default=None,
                        help='Artifact root; each run writes to <output-dir>/<config hash>')
    parser.add_argument('-w', '--workers', type=int, default=None,
                        help='Worker processes for sweeps (overrides sweep.workers)')
    parser.add_argument('-k', '--kappa', type=float, default=None,
                        help='Optical decay rate in units of omega0')
    parser.add_argument('-d', '--delta', type=float, default=None,
                        help='Auxiliary-mode detuning magnitude in units of omega0')
    parser.add_argument('--j0', type=float, default=None,
                        help='Dissipative coupling J0 in units of omega0')
    parser.add_argument('--j', type=float, default=None,
                        help='Chain coupling J in units of omega0')
    parser.add_argument('-t', '--time', type=float, default=None,
                        help='Evaluation time (units of 1/omega0) for the oscillating steady state')
    parser.add_argument('-q', '--quiet', action='store_true',
                        help='Only print result records')
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        run(args)
    except Exception as e:
        raise_exception(e)
    return 0


if __name__ == '__main__':
    sys.exit(main())
