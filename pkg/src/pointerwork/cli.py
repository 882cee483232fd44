import argparse
import sys
import warnings
import numpy as np
from pathlib import Path
from typing import List, Optional
from pointerwork.errors import ConfigError, NumericalError
from pointerwork.params import read
from pointerwork.run import EXPERIMENTS, RunManifest, full_suite, self_test, tracking

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

COMMANDS = dict(EXPERIMENTS, **{"full-suite": full_suite})


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pointerwork",
        description="Pointer states, decoherence rates and quantum work for a system in a chaotic bath",
    )
    p.add_argument("--self-test", action="store_true", dest="self_test", help="replay synthetic fits and exit")
    p.add_argument("--config", "-c", type=str, dest="config", help="YAML experiment config")
    p.add_argument("--seed", type=int, dest="seed", help="run a single bath seed instead of sweep.seeds")
    p.add_argument("--workers", "-w", type=int, dest="workers", default=1, help="sweep worker pool size")
    p.add_argument("--out", "-o", type=str, dest="out", help="output directory")
    p.add_argument("command", nargs="?", choices=sorted(COMMANDS), help="experiment to run")
    return p


def run(args: argparse.Namespace) -> int:
    if args.self_test:
        self_test(Path(args.out) if args.out else None)
        return EXIT_OK
    if args.command is None or args.config is None:
        raise ConfigError("An experiment command and --config are required (or pass --self-test)")
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1, got {}".format(args.workers))

    overrides = {}
    if args.seed is not None:
        overrides["sweep.seeds"] = [args.seed]
    if args.out is not None:
        overrides["output.directory"] = args.out
    config = read.config(args.config, overrides)

    manifest = RunManifest.start(args.command, config)
    wandb_run = tracking.start(config, args.command)
    out_dir = Path(config["output"]["directory"])
    paths: List[Path] = [out_dir / "run_config.yaml"]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        new_paths, summary = COMMANDS[args.command](config, args.workers)
    paths.extend(new_paths)
    for w in caught:
        print("Warning: {}".format(w.message), file=sys.stderr)

    tracking.log(wandb_run, summary if args.command != "full-suite" else {})
    if args.command == "full-suite":
        for name, s in summary.items():
            tracking.log(wandb_run, {"{}/{}".format(name, k): v for k, v in s.items()})
    tracking.finish(wandb_run)

    path = manifest.finish(out_dir, paths, EXIT_OK)
    if config["output"]["verbose"] > 0:
        print("Wrote {} files, manifest at {}".format(len(manifest.files), path))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as err:
        print("Configuration error: {}".format(err), file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, np.linalg.LinAlgError, ArithmeticError) as err:
        print("Numerical failure: {}".format(err), file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
