"""
Experiment orchestration: seeded sample batches, verification suites,
invariance campaigns and the small-graph sweep, each writing its artifacts
into one output directory.
"""
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache, partial
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from jinja2 import Environment, FileSystemLoader

from core.exceptions import ConfigurationError
from core.plugin_loader import ConstructionLoader
from models import Command, ExperimentConfig, InvarianceLaw, SuiteReport
from services.invariance import CylinderEvent, run_campaign, sample_rng
from services.sweep import sweep_cube
from settings import Settings, get_settings


logger = logging.getLogger(__name__)

CONSTRUCTION_FOR = {
    Command.SAMPLE_TILING: "tiling",
    Command.SAMPLE_CUBE: "cube",
    Command.SAMPLE_PRODUCT: "product",
    Command.SAMPLE_ABELIAN: "abelian",
}


@dataclass
class RunOutcome:
    command: Command
    output_dir: Path
    passed: bool
    artifacts: List[Path] = field(default_factory=list)
    report_path: Optional[Path] = None


def dump_json(doc: Any) -> str:
    """Canonical artifact text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def resolve_config(
    command: Command,
    file_values: Optional[Mapping[str, Any]] = None,
    flags: Optional[Mapping[str, Any]] = None,
    loader: Optional[ConstructionLoader] = None,
) -> ExperimentConfig:
    """
    Construction defaults, then the config file, then explicit flags; later
    sources win.
    """
    values: Dict[str, Any] = {}
    construction = CONSTRUCTION_FOR.get(command)
    if construction and loader is not None:
        info = loader.get_plugin(construction)
        if info and info.config:
            values.update(info.config.defaults)
    values.update(file_values or {})
    values.update({k: v for k, v in (flags or {}).items() if v is not None})
    values["command"] = command
    return ExperimentConfig.model_validate(values)


@lru_cache(maxsize=4)
def _worker_loader(constructions_dir: str) -> ConstructionLoader:
    loader = ConstructionLoader(constructions_dir)
    loader.load()
    return loader


def sample_job(
    construction: str, constructions_dir: str, config_doc: str, index: int
) -> Tuple[int, Dict, List[Dict], Dict[str, str]]:
    """Draw, serialize, optionally verify and render sample `index`; runs in worker processes."""
    config = ExperimentConfig.model_validate_json(config_doc)
    adapter = _worker_loader(constructions_dir).get_adapter(construction)
    sample = adapter.sample(config, sample_rng(config.seed, index))
    doc = adapter.to_json(sample)
    checks = []
    if config.verify:
        checks = [r.model_dump(mode="json") for r in adapter.verify(sample, config)]
    artifacts = adapter.render(sample) if config.render and index == 0 else {}
    logger.debug(f"Sample {index} of {construction} done")
    return index, doc, checks, artifacts


class ExperimentRunner:
    def __init__(self, settings: Optional[Settings] = None, loader: Optional[ConstructionLoader] = None):
        self.settings = settings or get_settings()
        if loader is None:
            loader = ConstructionLoader(self.settings.constructions_dir)
            loader.load()
        self.loader = loader
        self.templates = Environment(
            loader=FileSystemLoader(self.settings.templates_dir),
            keep_trailing_newline=True,
            trim_blocks=True,
            lstrip_blocks=True,
        )

    def run(self, config: ExperimentConfig) -> RunOutcome:
        out = Path(config.output_dir or self.settings.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        logger.info(f"Running {config.command.value} with seed {config.seed} into {out}")

        if config.command in CONSTRUCTION_FOR:
            return self._run_samples(config, CONSTRUCTION_FOR[config.command], out)
        if config.command is Command.VERIFY:
            return self._run_verify(config, out)
        if config.command is Command.SWEEP_CUBE:
            return self._run_sweep(config, out)
        if config.command is Command.INVARIANCE:
            return self._run_invariance(config, out)
        raise ConfigurationError(f"unknown command {config.command}")

    def _workers(self, config: ExperimentConfig) -> int:
        return config.workers or self.settings.workers or 1

    def _provenance(self, config: ExperimentConfig, construction: str, index: int) -> Dict:
        return {
            "command": config.command.value,
            "construction": construction,
            "seed": config.seed,
            "index": index,
        }

    def _write(self, path: Path, text: str, outcome: RunOutcome):
        path.write_text(text, encoding="utf-8")
        outcome.artifacts.append(path)
        logger.info(f"Wrote {path}")

    def _run_samples(self, config: ExperimentConfig, construction: str, out: Path) -> RunOutcome:
        self.loader.get_adapter(construction)
        job = partial(
            sample_job,
            construction,
            str(self.loader.constructions_dir),
            config.model_dump_json(),
        )
        workers = self._workers(config)
        indices = range(config.samples)
        logger.info(f"Sampling {config.samples} x {construction} on {workers} worker(s)")
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                results = list(executor.map(job, indices))
        else:
            results = [job(i) for i in indices]
        results.sort(key=lambda r: r[0])

        outcome = RunOutcome(config.command, out, passed=True)
        suites = []
        for index, doc, checks, artifacts in results:
            document = {"provenance": self._provenance(config, construction, index), "sample": doc}
            self._write(out / f"{construction}_{index:04d}.json", dump_json(document), outcome)
            for suffix, text in sorted(artifacts.items()):
                self._write(out / f"{construction}_{index:04d}.{suffix}", text, outcome)
            if config.verify:
                suites.append(SuiteReport(suite=construction, sample=index, checks=checks))

        if config.verify:
            self._finish_suites(config, construction, suites, out, outcome)
        return outcome

    def _run_verify(self, config: ExperimentConfig, out: Path) -> RunOutcome:
        path = Path(config.input)
        try:
            document = json.loads(path.read_text(encoding="utf-8"))
            construction = document["provenance"]["construction"]
            doc = document["sample"]
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as e:
            raise ConfigurationError(f"{path} is not a sample artifact: {e}") from e
        if config.suite is not None and config.suite.value != construction:
            raise ConfigurationError(f"{path} holds a {construction} sample, not a {config.suite.value} one")

        adapter = self.loader.get_adapter(construction)
        sample = adapter.from_json(doc)
        index = int(document["provenance"].get("index", 0))
        suite = SuiteReport(suite=construction, sample=index, checks=adapter.verify(sample, config))

        outcome = RunOutcome(config.command, out, passed=True)
        self._finish_suites(config, construction, [suite], out, outcome)
        return outcome

    def _finish_suites(
        self, config: ExperimentConfig, construction: str, suites: List[SuiteReport], out: Path, outcome: RunOutcome
    ):
        report_path = out / f"{construction}_reports.json"
        self._write(report_path, dump_json([s.model_dump(mode="json") for s in suites]), outcome)
        outcome.report_path = report_path
        outcome.passed = all(s.passed for s in suites)

        rows = []
        for s in suites:
            failed = [c.name for c in s.checks if not c.passed]
            rows.append({"sample": s.sample, "checks": len(s.checks), "failed": failed})
        failures = sum(1 for r in rows if r["failed"])
        if failures:
            logger.warning(f"{construction} suite failed on {failures} of {len(rows)} samples; see {report_path}")
        logger.info(f"{construction} suite: {len(rows) - failures}/{len(rows)} samples passed")
        self._summary(out, outcome, title=f"{construction} suite", seed=config.seed, rows=rows, kind="suite")

    def _run_sweep(self, config: ExperimentConfig, out: Path) -> RunOutcome:
        summary = sweep_cube(
            max_vertices=config.max_vertices,
            exhaustive_orders=config.exhaustive_orders,
            random_orders=config.random_orders,
            seed=config.seed,
            enumeration=config.enumeration,
            workers=self._workers(config),
        )
        outcome = RunOutcome(config.command, out, passed=summary["passed"])
        report_path = out / "sweep_cube.json"
        self._write(report_path, dump_json(summary), outcome)
        outcome.report_path = report_path
        logger.info(
            f"Sweep: {summary['graphs']} graphs, {summary['trees']} trees, "
            f"{summary['assignments']} assignments, {summary['failures']} failures"
        )
        self._summary(out, outcome, title="sweep-cube", seed=config.seed, sweep=summary, kind="sweep")
        return outcome

    def _run_invariance(self, config: ExperimentConfig, out: Path) -> RunOutcome:
        events = None
        if config.events:
            events = [CylinderEvent.of([pair]) for pair in config.events]
        reports = run_campaign(
            config.construction,
            config.radius,
            config.margin,
            config.samples,
            config.alpha,
            config.seed,
            events,
            self._workers(config),
        )
        rejected = any(r.rejected for r in reports)
        # unaveraged tiling is a power check: rejection is the expected outcome
        expect_rejection = config.construction == InvarianceLaw.UNAVERAGED.value
        outcome = RunOutcome(config.command, out, passed=rejected == expect_rejection)

        report_path = out / f"invariance_{config.construction}.json"
        self._write(report_path, dump_json([r.model_dump(mode="json") for r in reports]), outcome)
        outcome.report_path = report_path
        self._summary(
            out,
            outcome,
            title=f"invariance ({config.construction})",
            seed=config.seed,
            invariance=reports,
            expect_rejection=expect_rejection,
            kind="invariance",
        )
        return outcome

    def _summary(self, out: Path, outcome: RunOutcome, **context):
        template = self.templates.get_template("summary.md.j2")
        text = template.render(passed=outcome.passed, **context)
        self._write(out / "summary.md", text, outcome)
