"""Command-line interface: synth, explore, train, eval, kalman and compare."""

import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional

from src.errors import EXIT_INPUT, EXIT_OK, ArgumentError, ConfigurationError, FusionError
from src.fusion import kalman_filter_dataset
from src.ingest import canonical_csv, generate_synthetic
from src.models.serialization import ModelSerializer
from src.pipeline import (
    evaluate_model,
    load_dataset,
    run_comparison,
    synth_config,
    train_model,
    write_comparison,
    write_exploration,
    write_metrics,
)
from src.report_writer import ReportWriter
from src.run_config import DATASET_KINDS, FUSION_MODES, SYNTH_PRESETS, RunConfig, load_adapter

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


class _Parser(argparse.ArgumentParser):
    """Raises instead of exiting so usage errors map to the configuration exit code."""

    def error(self, message: str):
        raise ArgumentError(f"{self.prog}: {message}")


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="JSON run configuration; flags override it")
    parent.add_argument("--input", action="append", dest="inputs", help="input CSV (repeat for per-sensor files)")
    parent.add_argument("--dataset-kind", choices=DATASET_KINDS)
    parent.add_argument("--adapter", help="JSON column mapping for a secondary dataset")
    parent.add_argument("--tolerance-ms", type=int, help="synchronization tolerance in milliseconds")
    parent.add_argument("--out", help="output directory")
    parent.add_argument("--seed", type=int)
    parent.add_argument("--preset", choices=SYNTH_PRESETS, help="synthetic generator preset")
    parent.add_argument("--samples-per-class", type=int)
    parent.add_argument("--n-jobs", type=int, help="worker threads for tree training")
    parent.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return parent


def _model_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--ratio", type=float, help="training fraction")
    parent.add_argument("--model", help="svm, gboost or rf")
    parent.add_argument("--fusion", choices=FUSION_MODES)
    parent.add_argument("--sensors", help="comma-separated sensors, e.g. acc,mag")
    parent.add_argument("--trees", type=int, dest="n_trees", help="random-forest size")
    parent.add_argument("--stages", type=int, dest="gb_stages", help="boosting stages")
    parent.add_argument("--eta", type=float, dest="gb_eta", help="boosting learning rate")
    parent.add_argument("--decision-base", help="family of the per-sensor models in decision fusion")
    parent.add_argument("--q-scale", type=float)
    parent.add_argument("--r-scale", type=float)
    return parent


def build_parser() -> argparse.ArgumentParser:
    """Top-level parser with one sub-parser per command."""
    parser = _Parser(prog="fusionhar", description="Multi-sensor fusion for human activity recognition")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common, model = _common_options(), _model_options()

    commands.add_parser("synth", parents=[common], help="write a seeded synthetic dataset")
    explore = commands.add_parser("explore", parents=[common], help="time series, histograms and correlations")
    explore.add_argument("--bins", type=int, help="histogram bins")
    commands.add_parser("train", parents=[common, model], help="train and save one model")
    evaluate = commands.add_parser("eval", parents=[common, model], help="score a saved model")
    evaluate.add_argument("--model-file", required=True)
    evaluate.add_argument("--subset", choices=("train", "test", "all"))
    kalman = commands.add_parser("kalman", parents=[common], help="append Kalman-filtered columns")
    kalman.add_argument("--q-scale", type=float)
    kalman.add_argument("--r-scale", type=float)
    commands.add_parser("compare", parents=[common, model], help="every model on every sensor and fusion")
    return parser


_NOT_CONFIG = {"command", "config", "verbose", "adapter"}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Configuration file (if any) overridden by the flags that were given."""
    config = RunConfig.load(args.config) if args.config else RunConfig()
    overrides = {key: value for key, value in vars(args).items() if key not in _NOT_CONFIG}
    if overrides.get("sensors") is not None:
        overrides["sensors"] = [name.strip() for name in overrides["sensors"].split(",") if name.strip()]
    if args.adapter:
        overrides["adapter"] = load_adapter(args.adapter)
    return config.with_overrides(**overrides)


def cmd_synth(config: RunConfig) -> None:
    """Write the synthetic dataset and its generator settings."""
    settings = synth_config(config)
    dataset = generate_synthetic(settings)
    with ReportWriter(config.out) as writer:
        writer.write_text("synthetic.csv", canonical_csv(dataset))
        writer.write_json("synth_config.json", settings.to_dict())


def cmd_explore(config: RunConfig) -> None:
    """Write per-channel time series and histograms plus the correlation matrix."""
    dataset = load_dataset(config)
    with ReportWriter(config.out) as writer:
        write_exploration(dataset, config, writer)


def cmd_train(config: RunConfig) -> None:
    """Train on the training split and save the model with its view metadata."""
    model, metadata, _ = train_model(config)
    with ReportWriter(config.out) as writer:
        writer.write_text("model.json", ModelSerializer.dumps(model, metadata))
        config.save(writer.stage("run_config.json"))


def cmd_eval(config: RunConfig) -> None:
    """Score a saved model and write its metrics report."""
    if not config.model_file:
        raise ConfigurationError("eval needs --model-file")
    model, metadata = ModelSerializer.load(config.model_file)
    report, class_names = evaluate_model(model, metadata, config)
    logger.info("Accuracy on %s subset: %.4f", config.subset, report.accuracy)
    with ReportWriter(config.out) as writer:
        writer.write_json("metrics.json", {"subset": config.subset, **report.to_dict(class_names)})
        write_metrics(writer, "eval", report, class_names)


def cmd_kalman(config: RunConfig) -> None:
    """Write the dataset with its three Kalman-filtered columns."""
    filtered = kalman_filter_dataset(load_dataset(config), config.kalman_config())
    with ReportWriter(config.out) as writer:
        writer.write_text("kalman_filtered.csv", canonical_csv(filtered))


def cmd_compare(config: RunConfig) -> None:
    """Run the full model x data-source comparison."""
    result = run_comparison(load_dataset(config), config)
    with ReportWriter(config.out) as writer:
        write_comparison(result, config, writer)


COMMANDS: Dict[str, Callable[[RunConfig], None]] = {
    "synth": cmd_synth,
    "explore": cmd_explore,
    "train": cmd_train,
    "eval": cmd_eval,
    "kalman": cmd_kalman,
    "compare": cmd_compare,
}


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO, format=LOG_FORMAT, stream=sys.stderr, force=True
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit code.

    Exit codes: 0 success, 1 input error, 2 training or numerical error,
    3 configuration or argument error.
    """
    try:
        args = build_parser().parse_args(argv)
    except FusionError as e:
        print(str(e), file=sys.stderr)
        return e.exit_code

    configure_logging(args.verbose)
    try:
        COMMANDS[args.command](resolve_config(args))
    except FusionError as e:
        logger.error("%s", e)
        return e.exit_code
    except OSError as e:
        logger.error("%s", e)
        return EXIT_INPUT
    return EXIT_OK
