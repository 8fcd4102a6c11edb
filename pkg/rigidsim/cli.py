import argparse
import itertools
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence

from dotenv import load_dotenv

from rigidsim.charts import Chart, parse_chart
from rigidsim.constants import (
    COMPARE_MAX_ANGLE,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TOL,
    EXIT_FAILED,
    EXIT_GIMBAL_LOCK,
    EXIT_INEXPRESSIBLE,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    TOOL_NAME,
    TOOL_VERSION,
)
from rigidsim.errors import ConfigError, DomainError, GimbalLock, NonFiniteDerivative, RigidSimError, SingularMatrix
from rigidsim.identities import CHART_ORDER, run_identity_suite, run_lemma_suite
from rigidsim.integrate import compare_trajectories, simulate_body, simulate_generalized
from rigidsim.output_utils import format_time, write_json, write_trajectory
from rigidsim.sim_config import BODY, SimConfig, initial_body_state, initial_sim_state, load_sim_config

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _non_negative_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid float value: '{text}'")
    if not x >= 0.0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return x


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid int value: '{text}'")
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return n


def _chart_list(text: str) -> List[Chart]:
    names = [p.strip() for p in text.split(",") if p.strip()]
    if not names:
        raise argparse.ArgumentTypeError("expected a comma-separated list of charts")
    try:
        charts = [parse_chart(n) for n in names]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    # keep first occurrence order, drop repeats
    return list(dict.fromkeys(charts))


def _default_workers() -> int:
    try:
        return max(0, int(os.getenv("RIGIDSIM_WORKERS", "0")))
    except ValueError:
        return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="Rigid-body attitude dynamics in generalized coordinates: identity checks, simulation, cross-formulation comparison.",
    )
    parser.add_argument('--version', action='version', version=f"{TOOL_NAME} {TOOL_VERSION}")
    parser.add_argument('--log-level', default=os.getenv("RIGIDSIM_LOG_LEVEL", "WARNING"),
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], type=str.upper,
                        help='Logging level (default from RIGIDSIM_LOG_LEVEL or WARNING)')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('verify', help='Numerically verify the kinematic identities on random samples')
    p.add_argument('--samples', type=_positive_int, default=DEFAULT_SAMPLES, help=f'Random points per chart (default {DEFAULT_SAMPLES})')
    p.add_argument('--seed', type=int, default=DEFAULT_SEED, help=f'Random seed (default {DEFAULT_SEED})')
    p.add_argument('--tol', type=_non_negative_float, default=DEFAULT_TOL, help=f'Normalized residual tolerance (default {DEFAULT_TOL})')
    p.add_argument('--chart', choices=['all', 'euler321', 'euler313', 'quat'], default='all')
    p.add_argument('--out', default=None, help='Write the JSON report here')
    p.add_argument('--workers', type=int, default=None, help='Processes for the per-chart sweeps. 0=in-process (default from RIGIDSIM_WORKERS)')
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser('simulate', help='Integrate one config and write the trajectory')
    p.add_argument('--config', required=True, help='Path to a config.json')
    p.add_argument('--out', required=True, help='Trajectory output file')
    p.add_argument('--format', choices=['csv', 'jsonl'], default='csv')
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser('compare', help='Run the body-frame reference and each chart from the same initial condition')
    p.add_argument('--config', required=True, help='Path to a config.json')
    p.add_argument('--charts', type=_chart_list, default=list(CHART_ORDER), help="Comma-separated charts (default 'euler321,euler313,quat')")
    p.add_argument('--out', default=None, help='Write the JSON comparison report here')
    p.add_argument('--workers', type=int, default=None, help='Processes for the runs. 0=in-process (default from RIGIDSIM_WORKERS)')
    p.set_defaults(func=cmd_compare)
    return parser


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    charts = list(CHART_ORDER) if args.chart == 'all' else [parse_chart(args.chart)]
    workers = _default_workers() if args.workers is None else args.workers

    start_time = time.time()
    reports = run_identity_suite(charts, args.samples, args.seed, args.tol, workers=workers)
    lemmas = run_lemma_suite(args.samples, args.seed, args.tol)
    elapsed = time.time() - start_time

    print(f"{'identity':<16}{'chart':<10}{'samples':>8}  {'max residual':>14}  result")
    for r in reports + lemmas:
        print(f"{r.identity_id:<16}{r.chart or '-':<10}{r.samples:>8}  {r.max_residual:>14.3e}  {'PASS' if r.passed else 'FAIL'}")

    passed = all(r.passed for r in reports + lemmas)
    n_failed = sum(not r.passed for r in reports + lemmas)
    print(f"{'All identities passed' if passed else f'{n_failed} check(s) failed'} (tol={args.tol:g}, seed={args.seed}) in {format_time(elapsed)}")

    if args.out:
        report = {
            "tool": TOOL_NAME,
            "version": TOOL_VERSION,
            "seed": args.seed,
            "samples": args.samples,
            "tolerance": args.tol,
            "passed": passed,
            "identities": [r.to_dict() for r in reports],
            "lemmas": [r.to_dict() for r in lemmas],
        }
        try:
            write_json(report, args.out)
        except OSError as exc:
            print(f"Error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
    return EXIT_OK if passed else EXIT_FAILED


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def run_formulation(cfg: SimConfig, formulation: str):
    """Trajectory for `formulation` ('body' or a chart name) from the config's physical initial condition."""
    params = cfg.params()
    if formulation == BODY:
        return simulate_body(initial_body_state(cfg), params, cfg.dt, cfg.t_final)
    state = initial_sim_state(cfg, formulation)
    return simulate_generalized(state, params, cfg.dt, cfg.t_final)


def cmd_simulate(args) -> int:
    try:
        cfg = load_sim_config(args.config)
    except ConfigError as exc:
        print(f"Error: invalid config {args.config}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"Error: cannot read config {args.config}: {exc}", file=sys.stderr)
        return EXIT_IO

    code = EXIT_OK
    try:
        samples = run_formulation(cfg, cfg.chart)
    except (GimbalLock, DomainError, SingularMatrix, NonFiniteDerivative) as exc:
        samples = exc.trajectory
        t = getattr(exc, "t", None)
        if t is None:
            t = exc.details.get("t")
        where = f" at t = {t:.9f}" if t is not None else ""
        print(f"Error: {cfg.chart} run stopped{where}: {exc}", file=sys.stderr)
        code = EXIT_GIMBAL_LOCK

    try:
        write_trajectory(samples, args.out, args.format)
    except OSError as exc:
        print(f"Error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"Wrote {len(samples)} samples to {args.out}")
    return code


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def cmd_compare(args) -> int:
    try:
        cfg = load_sim_config(args.config)
    except ConfigError as exc:
        print(f"Error: invalid config {args.config}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"Error: cannot read config {args.config}: {exc}", file=sys.stderr)
        return EXIT_IO

    charts = [parse_chart(c) for c in args.charts]
    for chart in charts:
        try:
            initial_sim_state(cfg, chart)
        except (GimbalLock, DomainError, SingularMatrix) as exc:
            print(f"Error: initial condition is not expressible in {chart.value}: {exc}", file=sys.stderr)
            return EXIT_INEXPRESSIBLE

    formulations = [BODY] + [c.value for c in charts]
    workers = _default_workers() if args.workers is None else args.workers
    start_time = time.time()
    try:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=min(workers, len(formulations))) as executor:
                runs = list(executor.map(run_formulation, [cfg] * len(formulations), formulations))
        else:
            runs = [run_formulation(cfg, f) for f in formulations]
    except (GimbalLock, DomainError, NonFiniteDerivative) as exc:
        print(f"Error: run stopped: {exc}", file=sys.stderr)
        return EXIT_GIMBAL_LOCK
    trajectories: Dict[str, list] = dict(zip(formulations, runs))

    pairs = []
    for a, b in itertools.combinations(formulations, 2):
        comparison = compare_trajectories(trajectories[a], trajectories[b])
        pairs.append({"a": a, "b": b, **comparison.to_dict()})
    passed = all(p["max_rotation_angle_rad"] <= COMPARE_MAX_ANGLE for p in pairs)

    print(f"{'a':<10}{'b':<10}{'max angle [rad]':>16}  {'max |dw|':>12}")
    for p in pairs:
        print(f"{p['a']:<10}{p['b']:<10}{p['max_rotation_angle_rad']:>16.3e}  {p['max_omega_diff']:>12.3e}")
    print(f"{'All formulations agree' if passed else 'Formulations disagree'} (threshold {COMPARE_MAX_ANGLE:g} rad) in {format_time(time.time() - start_time)}")

    if args.out:
        report = {
            "config_id": cfg.id,
            "seed": cfg.seed,
            "charts": [c.value for c in charts],
            "reference": BODY,
            "pairs": pairs,
            "threshold_rad": COMPARE_MAX_ANGLE,
            "passed": passed,
        }
        try:
            write_json(report, args.out)
        except OSError as exc:
            print(f"Error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_IO
    return EXIT_OK if passed else EXIT_FAILED


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 for --help / --version
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    logging.basicConfig(level=getattr(logging, args.log_level), format=LOG_FORMAT)
    try:
        return args.func(args)
    except RigidSimError as exc:
        logger.error("%s", exc)
        return EXIT_FAILED
