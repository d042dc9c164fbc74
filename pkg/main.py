"""
Command-line entry point of the interdisciplinarity toolkit.

Subcommands run the pipeline stages over a citation corpus and write their
tables, graphs and a ``run_report.json`` into the output directory::

    python main.py all --config fixtures/fixture_config.json --out out/

Exit codes: 0 on success, 1 on data errors (for example an empty qualified
corpus), 2 on usage, configuration and input file errors.
"""

import argparse
import logging
import sys
from typing import List, Optional

from config import ConfigManager
from errors import ConfigError, DataError, IdrkitError, InputFormatError
from pipeline import COMMANDS, Pipeline
from run_log import WarningLog, configure_logging
from run_report import OutputWriter, StageTimer, write_report

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DATA = 1
EXIT_USAGE = 2

_COMMAND_HELP = {
    "ingest": "parse records and write per-paper discipline assignments",
    "qualify": "apply the qualification thresholds and write corpus statistics",
    "disparity": "write the discipline disparity matrix",
    "metrics": "score papers and write per-period indicator series",
    "cooccur": "build per-period co-occurrence networks and communities",
    "streams": "align communities across periods and export the streams",
    "report": "write corpus statistics into the run report only",
    "all": "run every stage from ingest to streams",
}


def _shared_options() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="JSON configuration file")
    shared.add_argument("--records", help="line-delimited JSON record file")
    shared.add_argument("--catalog", help="journal_title,codes catalog file")
    shared.add_argument("--abbrev-map", dest="abbrev_map", help="abbrev,full_name abbreviation table")
    shared.add_argument("--granularity", choices=["year", "month"])
    shared.add_argument("--from", dest="date_from", metavar="YEAR[-MM]")
    shared.add_argument("--to", dest="date_to", metavar="YEAR[-MM]")
    shared.add_argument("--min-refs", dest="min_refs", type=int, metavar="N")
    shared.add_argument("--min-coverage", dest="min_coverage", type=float, metavar="R")
    shared.add_argument("--query", action="append", metavar="TERM",
                        help="keyword term, repeatable (OR semantics over title and abstract)")
    shared.add_argument("--td-mode", dest="td_mode", choices=["canonical", "paper-example"])
    shared.add_argument("--disparity-basis", dest="disparity_basis", choices=["global", "per-window"])
    shared.add_argument("--seed", type=int)
    shared.add_argument("--resolution", type=float, metavar="R")
    shared.add_argument("--overlap-threshold", dest="overlap_threshold", type=float, metavar="R")
    shared.add_argument("--out", help="output directory")
    return shared


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_options()
    parser = argparse.ArgumentParser(
        prog="idrkit",
        description="Interdisciplinarity indicators and discipline co-occurrence streams for citation corpora",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[shared], help=_COMMAND_HELP[command])
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    """Command-line values by config section; unset flags stay None."""
    return {
        "inputs": {"records": args.records, "catalog": args.catalog, "abbrev_map": args.abbrev_map},
        "policy": {"min_references": args.min_refs, "min_coverage": args.min_coverage},
        "analysis": {
            "granularity": args.granularity,
            "from": args.date_from,
            "to": args.date_to,
            "query_terms": args.query,
            "td_mode": args.td_mode,
            "disparity_basis": args.disparity_basis,
        },
        "network": {
            "seed": args.seed,
            "resolution": args.resolution,
            "overlap_threshold": args.overlap_threshold,
        },
        "output": {"out_dir": args.out},
    }


def _fail(message: str, code: int) -> int:
    print(f"idrkit: error: {message}", file=sys.stderr)
    return code


def run(argv: Optional[List[str]] = None) -> int:
    """Execute one subcommand and return the process exit code."""
    configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help exits 0, usage errors exit 2
        return exc.code if isinstance(exc.code, int) else EXIT_OK

    warnings = WarningLog()
    manager = ConfigManager(warnings=warnings)
    try:
        if args.config:
            manager.load_config(args.config)
        manager.apply_overrides(_overrides(args))
        config = manager.build(require_inputs=True)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_USAGE)

    timer = StageTimer()
    writer = OutputWriter(config.out_dir)
    pipeline = Pipeline(config, warnings=warnings, timer=timer, writer=writer)

    code, error, stats = EXIT_OK, None, None
    try:
        pipeline.run(args.command)
        stats = pipeline.stats.to_dict()
    except DataError as exc:
        code, error = EXIT_DATA, str(exc)
    except (InputFormatError, ConfigError) as exc:
        code, error = EXIT_USAGE, str(exc)
    except FileNotFoundError as exc:
        code, error = EXIT_USAGE, f"file not found: {exc.filename}"
    except (IdrkitError, OSError) as exc:
        code, error = EXIT_USAGE, str(exc)

    write_report(writer, args.command, config.to_dict(), warnings, timer, stats=stats, error=error)
    if error is not None:
        return _fail(error, code)
    log.info("%s finished: %d files, %d warnings", args.command, len(writer.manifest()), len(warnings))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(run())
