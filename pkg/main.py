"""
Main entry point for entspec.
Command-line surface for simulating monitored free fermions and analyzing
their entanglement spectra.

    python main.py simulate run.ini
    python main.py analyze d2_L16 --diagnostics gap_ratio kl1 --output reports
    python main.py collapse reports/gap_ratio.csv --observable gap_ratio
    python main.py synthetic gue --levels 200 --samples 500 --output gue_200
    python main.py figure 5 --sizes 8 12 16 --trajectories 50
"""
import argparse
import logging
import sys
from typing import List, Optional

import colorlog
from pydantic import ValidationError

from entspec import __version__
from entspec.exceptions import (
    ConfigError, IncompleteDataError,
    EXIT_CONFIG_ERROR, EXIT_INCOMPLETE_DATA, EXIT_RUNTIME_FAILURE, EXIT_SUCCESS,
)
from entspec.pipeline import (
    DIAGNOSTICS, FIGURES, analyze, build_recipe, load_run_config, run_collapse, run_recipe, simulate,
    write_synthetic,
)
from entspec.collapse import ANSATZE
from entspec.config import Config, resolve_output_dir
from entspec.rmt import KL_MATCHINGS, SYNTHETIC_KINDS

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

logger = logging.getLogger("entspec")


def setup_logging(verbose: bool = False, quiet: bool = False) -> None:
    """Install a colored stream handler on the root logger."""
    handler = colorlog.StreamHandler()
    handler.setFormatter(colorlog.ColoredFormatter("%(log_color)s" + LOG_FORMAT))
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO)
    # Keep SQLAlchemy quiet
    logging.getLogger("sqlalchemy.engine").setLevel(logging.WARNING)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entspec", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"entspec {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="Warnings only, no progress bars")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Run an ensemble described by an INI file")
    p.add_argument("config", help="Run configuration (.ini)")
    p.add_argument("--workers", type=int, default=None, help="Override the worker count")

    p = sub.add_parser("analyze", help="Compute diagnostics over ensemble directories")
    p.add_argument("directories", nargs="+", help="Ensemble directories")
    p.add_argument("--diagnostics", nargs="*", default=["gap_ratio"], choices=DIAGNOSTICS, metavar="NAME",
                   help=f"Any of: {', '.join(DIAGNOSTICS)}")
    p.add_argument("--output", default="reports", help="Report directory")
    p.add_argument("--eta", type=float, default=Config.SFF_ETA, help="Gaussian filter width factor")
    p.add_argument("--thouless-tolerance", type=float, default=Config.THOULESS_TOLERANCE)
    p.add_argument("--thouless-smoothing", type=float, default=Config.THOULESS_SMOOTHING)
    p.add_argument("--kl2-matching", choices=KL_MATCHINGS, default="rank")

    p = sub.add_parser("collapse", help="Finite-size-scaling collapse of report files")
    p.add_argument("reports", nargs="+", help="Report CSVs with gamma, L, mean, stderr")
    p.add_argument("--observable", required=True, help="Name for outputs")
    p.add_argument("--ansatz", choices=ANSATZE, default="linear")
    p.add_argument("--geometry", default=None, help="Restrict to one geometry")
    p.add_argument("--dimension", type=int, default=None, help="Restrict to one dimension")
    p.add_argument("--window", type=float, default=None, help="Cutoff on |x| of the rescaled variable")
    p.add_argument("--bootstrap", type=int, default=0, help="Bootstrap replicas")
    p.add_argument("--value", default="mean")
    p.add_argument("--error", default="stderr")
    p.add_argument("--jobs", type=int, default=1, help="Parallel workers for the grid scan")
    p.add_argument("--output", default="reports")

    p = sub.add_parser("synthetic", help="Write a GUE or Poisson calibration ensemble")
    p.add_argument("kind", choices=SYNTHETIC_KINDS)
    p.add_argument("--levels", type=int, default=200)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-eigenvectors", action="store_true")
    p.add_argument("--output", required=True, help="Ensemble directory")

    p = sub.add_parser("figure", help="Produce the plot data of one figure")
    p.add_argument("number", type=int, choices=FIGURES)
    p.add_argument("--sizes", type=int, nargs="+", default=None)
    p.add_argument("--gammas", type=float, nargs="+", default=None)
    p.add_argument("--trajectories", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", default="figures")
    return parser


def run_command(args: argparse.Namespace) -> None:
    show_progress = not args.quiet

    if args.command == "simulate":
        summary = simulate(load_run_config(args.config), workers=args.workers, show_progress=show_progress)
        logger.info(f"Wrote {len(summary.outputs)} files to {summary.directory}")

    elif args.command == "analyze":
        options = {"eta": args.eta, "thouless_tolerance": args.thouless_tolerance,
                   "thouless_smoothing": args.thouless_smoothing,
                   "kl2_matching": args.kl2_matching}
        directories = [resolve_output_dir(d) for d in args.directories]
        written = analyze(directories, args.diagnostics, args.output, options)
        logger.info(f"Wrote {len(written)} reports to {args.output}")

    elif args.command == "collapse":
        result = run_collapse(args.reports, args.observable, args.ansatz, args.output,
                              geometry=args.geometry, dimension=args.dimension, window=args.window,
                              bootstrap=args.bootstrap, value=args.value, error=args.error,
                              config={"n_jobs": args.jobs})
        logger.info(f"gamma_c = {result.gamma_c:.4f} +- {result.sigma('gamma_c'):.4f}, "
                    f"nu = {result.nu:.4f} +- {result.sigma('nu'):.4f}")

    elif args.command == "synthetic":
        summary = write_synthetic(args.kind, args.levels, args.samples, args.output, seed=args.seed,
                                  keep_eigenvectors=not args.no_eigenvectors)
        logger.info(f"Synthetic ensemble in {summary.directory}")

    elif args.command == "figure":
        recipe = build_recipe(args.number, args.output, sizes=args.sizes,
                              trajectories=args.trajectories, gammas=args.gammas, seed=args.seed,
                              workers=args.workers)
        run_recipe(recipe, show_progress=show_progress)
        logger.info(f"Figure {args.number} data in {recipe.reports_dir}")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose, args.quiet)
    try:
        run_command(args)
    except (ConfigError, ValidationError) as e:
        logger.error(f"Configuration error: {str(e)}")
        return EXIT_CONFIG_ERROR
    except IncompleteDataError as e:
        logger.warning(f"Incomplete data: {str(e)}")
        return EXIT_INCOMPLETE_DATA
    except Exception as e:
        logger.exception(f"Run failed: {str(e)}")
        return EXIT_RUNTIME_FAILURE
    return EXIT_SUCCESS


if __name__ == "__main__":
    sys.exit(main())
