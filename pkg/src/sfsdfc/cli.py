"""Command-line front end: ``sfsdfc select|eval|bench``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .dataset import Dataset, DatasetError, ImputePolicy, impute_missing, load_csv, read_schema
from .evaluation import cross_validate, mean_ranks
from .select import PipelineOptions, SelectionResult, mi_top_k, run_pipeline

log = logging.getLogger("sfsdfc")

BENCH_METHODS = ("SFSDFC", "Full", "MI-top-k")


@dataclasses.dataclass
class RunConfig:
    command: str
    input: str
    label: str | None = None
    schema: str | None = None
    epsilon: float | None = None
    beta: float | None = None
    gamma: float | None = None
    impute: str = ImputePolicy.MODE_OR_MEDIAN.value
    folds: int = 5
    repeats: int = 10
    k: int = 3
    seed: int = 0
    subset: str | None = None
    output: str | None = None
    dump_dissim: str | None = None
    dump_clusters: str | None = None
    jobs: int = 1

    def validate(self) -> None:
        for name in ("epsilon", "beta", "gamma"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"--{name} must be positive")
        if self.folds < 2:
            raise ValueError("--folds must be >= 2")
        if self.repeats < 1 or self.k < 1 or self.jobs < 1:
            raise ValueError("--repeats, --k and --jobs must be >= 1")

    def fingerprint(self) -> dict[str, Any]:
        # Thread count never changes results, so it stays out of the fingerprint.
        doc = {k: v for k, v in dataclasses.asdict(self).items() if k != "jobs"}
        doc["version"] = __version__
        return doc

    def pipeline_options(self) -> PipelineOptions:
        return PipelineOptions(epsilon=self.epsilon, beta=self.beta, gamma=self.gamma, n_jobs=self.jobs)


class CliError(Exception):
    pass


def _load(path: str | Path, config: RunConfig, schema: str | Path | None = None) -> Dataset:
    schema = schema if schema is not None else config.schema
    declared = read_schema(schema) if schema else None
    label = config.label
    if label is None and not (declared and "label" in declared.values()):
        label = -1
    ds = load_csv(path, label, declared, epsilon=config.epsilon)
    return impute_missing(ds, config.impute)


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    p = Path(path)
    tmp = p.with_name(p.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    tmp.replace(p)


def _json(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _dump_matrices(result: SelectionResult, path: str) -> None:
    p = Path(path)
    for kind, mat in result.matrices.items():
        mat.to_csv(p.with_name(f"{p.stem}.{kind.value}{p.suffix or '.csv'}"))


def cmd_select(config: RunConfig) -> int:
    ds = _load(config.input, config)
    result = run_pipeline(ds, config.pipeline_options(), keep_matrices=bool(config.dump_dissim))
    doc = result.to_json()
    doc["options"] = config.fingerprint()
    _write_text(config.output, _json(doc))
    if config.dump_dissim:
        _dump_matrices(result, config.dump_dissim)
    if config.dump_clusters:
        clusters = [c for cl in result.clusterings.values() for c in cl.to_json()]
        _write_text(config.dump_clusters, json.dumps(clusters, indent=2) + "\n")
    counts = result.counts()
    print(
        f"{ds.name}: m={ds.m} clusters(cont={counts['clusters_cont']}, disc={counts['clusters_disc']}) "
        f"selected={len(result.selected)}",
        file=sys.stderr,
    )
    return 0


def load_selection(path: str | Path) -> dict[str, Any]:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read selection {path}: {exc}") from exc


def _subset_from(doc: dict[str, Any], ds: Dataset) -> list[int]:
    subset = [int(s["index"]) for s in doc.get("selected", [])]
    if not subset:
        raise CliError("selection is empty")
    for s in doc["selected"]:
        j = int(s["index"])
        if not 0 <= j < ds.m:
            raise CliError(f"selected index {j} out of range for {ds.m} features")
        if "name" in s and s["name"] != ds.features[j].name:
            raise CliError(f"selected index {j} is {ds.features[j].name!r} here, not {s['name']!r}")
    return subset


def cmd_eval(config: RunConfig) -> int:
    ds = _load(config.input, config)
    subset = _subset_from(load_selection(config.subset), ds) if config.subset else None
    report = cross_validate(ds, subset, config.folds, config.repeats, config.k, config.seed, config.jobs)
    report.config = config.fingerprint()
    _write_text(config.output, _json(report.to_json()))
    print(
        f"{ds.name}: subset={report.subset_size}/{ds.m} accuracy={report.mean_accuracy:.4f} "
        f"(sd {report.std_accuracy:.4f})",
        file=sys.stderr,
    )
    return 0


def cmd_bench(config: RunConfig) -> int:
    root = Path(config.input)
    if not root.is_dir():
        raise CliError(f"{root} is not a directory")
    files = sorted(root.glob("*.csv"))
    if not files:
        raise CliError(f"no *.csv datasets in {root}")
    rows = []
    for path in files:
        schema = path.with_suffix(".schema")
        try:
            ds = _load(path, config, schema if schema.exists() else None)
            sel = run_pipeline(ds, config.pipeline_options())
        except (DatasetError, ValueError) as exc:
            log.warning("skipping %s: %s", path.name, exc)
            continue
        subsets = {
            "SFSDFC": sel.selected,
            "Full": None,
            "MI-top-k": mi_top_k(ds, len(sel.selected)),
        }
        reports = {
            name: cross_validate(ds, s, config.folds, config.repeats, config.k, config.seed, config.jobs)
            for name, s in subsets.items()
        }
        rows.append((ds, sel, reports))
        log.info("%s: %s", ds.name, ", ".join(f"{k}={r.mean_accuracy:.4f}" for k, r in reports.items()))
    if not rows:
        raise CliError("every dataset failed to load")

    buf = io.StringIO()
    buf.write(f"# sfsdfc {__version__} config={json.dumps(config.fingerprint(), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dataset", "n", "m", "selected", *BENCH_METHODS, "select_time", "eval_time"])
    for ds, sel, reports in rows:
        w.writerow(
            [ds.name, ds.n, ds.m, len(sel.selected)]
            + [f"{reports[k].mean_accuracy:.6f}" for k in BENCH_METHODS]
            + [f"{sel.wall_time:.4f}", f"{sum(r.wall_time for r in reports.values()):.4f}"]
        )
    table = [[reports[k].mean_accuracy for k in BENCH_METHODS] for _, _, reports in rows]
    ranks = mean_ranks(table, BENCH_METHODS, [ds.name for ds, _, _ in rows]).mean_ranks
    w.writerow(["mean-ranks", "", "", ""] + [f"{ranks[k]:.4f}" for k in BENCH_METHODS] + ["", ""])
    _write_text(config.output, buf.getvalue())
    print(f"bench: {len(rows)}/{len(files)} datasets", file=sys.stderr)
    return 0


def read_bench_csv(path: str | Path) -> tuple[dict[str, Any], list[dict[str, str]]]:
    """Parse a bench CSV back into (config fingerprint, rows)."""
    lines = Path(path).read_text().splitlines()
    config = {}
    if lines and lines[0].startswith("#"):
        config = json.loads(lines[0].split("config=", 1)[1])
    body = [line for line in lines if not line.startswith("#")]
    return config, list(csv.DictReader(body))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sfsdfc", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="CSV file (select/eval) or directory (bench)")
    common.add_argument("--label", help="label column name (default: schema label, else last column)")
    common.add_argument("--schema", help="sidecar file of column=continuous|discrete|label lines")
    common.add_argument("--epsilon", type=float, help="distinct-value threshold for typing (default sqrt(n))")
    common.add_argument("--beta", type=float, help="override the density bandwidth")
    common.add_argument("--gamma", type=float, help="override the density sharpening exponent")
    common.add_argument("--impute", choices=[p.value for p in ImputePolicy], default=ImputePolicy.MODE_OR_MEDIAN.value)
    common.add_argument("--output", help="output file (default: stdout)")
    common.add_argument("--jobs", type=int, default=1, help="worker threads; results do not depend on it")

    cv = argparse.ArgumentParser(add_help=False)
    cv.add_argument("--folds", type=int, default=5)
    cv.add_argument("--repeats", type=int, default=10)
    cv.add_argument("--k", type=int, default=3)
    cv.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("select", parents=[common], help="select a feature subset")
    p.add_argument("--dump-dissim", help="write dissimilarity matrices as <stem>.<kind>.csv")
    p.add_argument("--dump-clusters", help="write clusters as JSON")
    p = sub.add_parser("eval", parents=[common, cv], help="cross-validate k-NN on a subset")
    p.add_argument("--subset", help="selection JSON from 'select' (default: all features)")
    sub.add_parser("bench", parents=[common, cv], help="select + eval every CSV in a directory")
    return parser


COMMANDS = {"select": cmd_select, "eval": cmd_eval, "bench": cmd_bench}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    config = RunConfig(**{k: v for k, v in vars(args).items() if k in fields})
    try:
        config.validate()
        return COMMANDS[config.command](config)
    except (CliError, DatasetError, ValueError) as exc:
        print(f"sfsdfc {config.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
