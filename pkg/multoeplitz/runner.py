import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import orjson
import pandas as pd
from tqdm import tqdm

from multoeplitz.experiments import Experiment, build_experiment
from multoeplitz.models import RECORD_COLUMNS, ExperimentConfig, ExperimentRecord, RunResult

logger = logging.getLogger(__name__)


def run(config: ExperimentConfig, verbose: bool = False, dump_matrix: str | Path | None = None) -> RunResult:
    """Run one experiment over its schedule; records come back in schedule order whatever the worker count."""
    experiment = build_experiment(config)
    schedule = experiment.schedule()
    run_id = experiment.mint_id()
    logger.info("run %s: %s over %s schedule points with %s workers", run_id, experiment.kind, len(schedule),
                config.experiment.workers)

    with ThreadPoolExecutor(max_workers=config.experiment.workers) as pool:
        pending = pool.map(lambda item: experiment.record(*item), enumerate(schedule))
        records = list(tqdm(pending, total=len(schedule), desc=experiment.kind, disable=not verbose))

    if verbose:
        for record in records:
            print(f"n: {record.n}, size: {record.size}, value: {record.value:.12g}, "
                  f"reference: {record.reference:.12g}, abs_error: {record.abs_error:.3e}")

    if dump_matrix is not None:
        _dump_largest(experiment, schedule, dump_matrix)

    verdict = experiment.verdict(records)
    summary = experiment.summary(records)
    logger.info("run %s: %s", run_id, verdict)
    return RunResult(run_id=run_id, kind=experiment.kind, verdict=verdict, records=records, summary=summary)


def _dump_largest(experiment: Experiment, schedule: list[int], path: str | Path):
    if experiment.symbol is None or experiment.family is None or not schedule:
        logger.warning("%s has no truncated operator to dump", experiment.kind)
        return
    position = len(schedule) - 1
    sigma = experiment.index_set(position, schedule[position])
    experiment.operator(sigma).to_csv(path)
    logger.info("wrote the %sx%s truncated operator to %s", len(sigma), len(sigma), path)


def records_frame(records: list[ExperimentRecord]) -> pd.DataFrame:
    return pd.DataFrame([r.model_dump() for r in records], columns=RECORD_COLUMNS)


def render(result: RunResult, format: str = "csv") -> bytes:
    """CSV of the records, or the whole result (records, verdict, summary) as JSON."""
    if format == "json":
        return orjson.dumps(result.model_dump(mode="json"),
                            option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY)
    return records_frame(result.records).to_csv(index=False, float_format="%.17g").encode("utf-8")


def emit(result: RunResult, format: str = "csv", path: str | Path | None = None) -> bytes:
    """Write the rendered result to path (parents created), or return it for stdout."""
    data = render(result, format)
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        logger.info("wrote %s records to %s", len(result.records), path)
    return data
