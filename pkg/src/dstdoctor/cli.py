"""Command-line entry point: ``dstdoctor <command> [options]``.

Every command writes its artifacts plus ``<command>.manifest.json`` into
``--out-dir``. The manifest records the exact argument vector, so
``replay(manifest)`` reruns the command.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .bias import POLICIES, bias_report, parse_bias_table, render_bias_table
from .canonicalize import DEFAULT_CONFIG, load_synonyms
from .consistency import (
    CorrectionStats,
    DetectionConfig,
    apply_corrections,
    check_corpus,
    correction_stats,
    load_rules,
    read_records,
    read_worksheet,
    render_source_table,
    render_stats_table,
    sample_verification,
    verification_metrics,
    worksheet_counts,
    write_worksheet,
)
from .corpus import dumps_corpus, load_corpus, load_database, load_ontology, load_predictions
from .dst_eval import EvalConfig, dumps_summary, evaluate, render_per_slot, render_per_turn, render_summary
from .substitute import apply_replacements, build_replacement_map, leakage_audit, load_lexicon

log = logging.getLogger("dstdoctor")

DEFAULT_SEED = 1234
CONFIG_ENV = "DSTDOCTOR_CONFIG"
PATH_KEYS = (
    "corpus", "before", "after", "ontology", "database", "rules", "synonyms", "proposals", "train", "test",
    "lexicon", "gold", "pred", "worksheet", "bias", "eval", "out_dir", "out", "emit_map",
)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    paths: dict[str, str]
    seed: int = DEFAULT_SEED
    policy: str = "final-state"
    fuzzy_threshold: float = 0.9
    fuzzy_mode: str = "partial"
    jobs: int = 1
    out_dir: Path = Path(".")
    extra: dict = field(default_factory=dict)

    def path(self, name: str) -> str | None:
        return self.paths.get(name)


class Artifacts:
    """Collects output files; removes them all if the command fails."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.written: list[Path] = []

    def write(self, name: str, text: str) -> Path:
        path = self.out_dir / name if not os.path.isabs(name) else Path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        if path not in self.written:
            self.written.append(path)
        return path

    def discard(self) -> None:
        for path in self.written:
            path.unlink(missing_ok=True)


def _sha256(path: str) -> str:
    p = Path(path)
    h = hashlib.sha256()
    files = sorted(p.glob("*.json")) if p.is_dir() else [p]
    for f in files:
        h.update(f.read_bytes())
    return h.hexdigest()


# ---------------------------------------------------------------- commands


def _normalization(cfg: RunConfig):
    synonyms = cfg.path("synonyms")
    return load_synonyms(synonyms) if synonyms else DEFAULT_CONFIG


def _load(cfg: RunConfig, key: str, split: str | None = None, **kw):
    return load_corpus(cfg.path(key), cfg.extra.get("format", "native"), split or cfg.extra.get("split"), **kw)


def _detection_inputs(cfg: RunConfig):
    norm = _normalization(cfg)
    ontology = load_ontology(cfg.path("ontology"), norm)
    database = load_database(cfg.path("database"), ontology, norm) if cfg.path("database") else None
    if database is not None:
        for line in database.diagnostics:
            log.warning("database: %s", line)
    corpus = _load(cfg, "corpus", ontology=ontology, config=norm)
    rules = load_rules(cfg.path("rules"))
    detection = DetectionConfig(normalization=norm, allow_overwrite=cfg.extra.get("allow_overwrite", False))
    kwargs = {"database": database} if database is not None else {}
    return corpus, rules, ontology, kwargs, detection


def cmd_check(cfg: RunConfig, out: Artifacts) -> tuple[int, dict]:
    corpus, rules, ontology, kwargs, detection = _detection_inputs(cfg)
    records = check_corpus(corpus, rules, ontology, config=detection, jobs=cfg.jobs, **kwargs)
    out.write("proposals.jsonl", "".join(json.dumps(r.to_json(), ensure_ascii=False) + "\n" for r in records))
    print(f"{len(records)} proposed corrections in {len({r.dialog_id for r in records})} dialogs")
    return (1 if records else 0), {"dialogs": len(corpus), "proposals": len(records)}


def cmd_fix(cfg: RunConfig, out: Artifacts) -> tuple[int, dict]:
    corpus, rules, ontology, kwargs, detection = _detection_inputs(cfg)
    if cfg.path("proposals"):
        records = read_records(cfg.path("proposals"))
    else:
        records = check_corpus(corpus, rules, ontology, config=detection, jobs=cfg.jobs, **kwargs)
    fixed, applied = apply_corrections(corpus, records)
    stats = correction_stats(corpus, fixed, applied)
    out.write("corrected.jsonl", dumps_corpus(fixed))
    out.write("applied.jsonl", "".join(json.dumps(r.to_json(), ensure_ascii=False) + "\n" for r in applied))
    out.write("stats.json", json.dumps(stats.to_json(), indent=2, sort_keys=True) + "\n")
    out.write("stats.tsv", render_stats_table([stats]))
    out.write("sources.tsv", render_source_table(stats))
    sides = stats.side_totals()
    print(f"applied {len(applied)} corrections to {stats.total_modified} of {len(corpus)} dialogs "
          f"(system {sides['system']}, user {sides['user']})")
    return 0, {"dialogs": len(corpus), "applied": len(applied), "modified_dialogs": stats.total_modified}


def cmd_bias(cfg: RunConfig, out: Artifacts) -> tuple[int, dict]:
    corpus = _load(cfg, "corpus", split=cfg.extra.get("split") or "train", config=_normalization(cfg))
    scores = bias_report(corpus, cfg.policy)
    table = render_bias_table(scores, cfg.policy, corpus.split)
    out.write("bias.tsv", table)
    sys.stdout.write(table)
    return 0, {"slots": len(scores)}


def cmd_substitute(cfg: RunConfig, out: Artifacts) -> tuple[int, dict]:
    norm = _normalization(cfg)
    train = _load(cfg, "train", split="train", config=norm)
    test = _load(cfg, "test", split="test", config=norm)
    lexicon = load_lexicon(cfg.path("lexicon"), norm)
    rmap = build_replacement_map(test, train, lexicon, cfg.seed, allow_non_entities=cfg.extra.get("allow_non_entities", False))
    new_test = apply_replacements(test, rmap, norm)
    leaks = leakage_audit(new_test, train, lexicon)
    out.write(cfg.path("out") or "substituted.jsonl", dumps_corpus(new_test))
    if cfg.path("emit_map"):
        out.write(cfg.path("emit_map"), rmap.to_json())
    out.write("leakage.tsv", "domain\tslot_type\tvalue\n" + "".join(f"{t.domain}\t{t.slot_type}\t{t.value}\n" for t in leaks))
    replaced = sum(len(m) for m in rmap.dialogs.values())
    print(f"replaced {replaced} values in {len(rmap.dialogs)} dialogs; {len(leaks)} leaked triples")
    return (1 if leaks else 0), {"dialogs": len(test), "replacements": replaced, "leaks": len(leaks)}


def cmd_eval(cfg: RunConfig, out: Artifacts) -> tuple[int, dict]:
    norm = _normalization(cfg)
    ontology = load_ontology(cfg.path("ontology"), norm) if cfg.path("ontology") else None
    gold = _load(cfg, "gold", split="test", config=norm)
    preds = load_predictions(cfg.path("pred"), gold, ontology, norm)
    config = EvalConfig(cfg.fuzzy_threshold, cfg.fuzzy_mode, norm)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = evaluate(gold, preds, config, ontology)
    for w in caught:
        log.warning("%s", w.message)
    out.write("eval.json", dumps_summary(result))
    renderers = {"summary": render_summary, "per-slot": render_per_slot, "per-turn": render_per_turn}
    report = cfg.extra.get("report", "summary")
    text = renderers[report](result)
    out.write(f"eval-{report}.tsv", text)
    sys.stdout.write(text)
    return 0, {"turns": result.turn_total, "jga": round(result.jga, 6), "fuzzy_jga": round(result.fuzzy_jga, 6)}


def cmd_verify(cfg: RunConfig, out: Artifacts) -> tuple[int, dict]:
    if cfg.path("worksheet"):
        tp, fp, fn, tn = worksheet_counts(read_worksheet(cfg.path("worksheet")))
        m = verification_metrics(tp, fp, fn, tn)
        text = (
            "metric\tvalue\n"
            f"tp\t{tp}\nfp\t{fp}\nfn\t{fn}\ntn\t{tn}\n"
            f"precision\t{m.precision:.3f}\nrecall\t{m.recall:.3f}\nf1\t{m.f1:.3f}\n"
        )
        out.write("verification.tsv", text)
        sys.stdout.write(text)
        return 0, {"tp": tp, "fp": fp, "fn": fn, "tn": tn}
    norm = _normalization(cfg)
    before = _load(cfg, "before", config=norm)
    after = _load(cfg, "after", config=norm)
    rows = sample_verification(before, after, cfg.extra["n_modified"], cfg.extra["n_unchanged"], cfg.seed)
    path = out.write("worksheet.tsv", "")
    write_worksheet(rows, path)
    print(f"wrote {len(rows)} worksheet rows to {path}")
    return 0, {"rows": len(rows)}


def cmd_report(cfg: RunConfig, out: Artifacts) -> tuple[int, dict]:
    sections = []
    stats_files = cfg.extra.get("stats") or []
    if stats_files:
        stats = [CorrectionStats.from_json(json.loads(Path(p).read_text(encoding="utf-8"))) for p in stats_files]
        sections.append("## modified dialogs\n" + render_stats_table(stats))
        for s in stats:
            sections.append(f"## annotation sources ({s.split})\n" + render_source_table(s))
    if cfg.path("bias"):
        scores = parse_bias_table(Path(cfg.path("bias")).read_text(encoding="utf-8"))
        lines = ["domain--slot_type\tH1/H0\tH∞/H0"]
        lines += [f"{s.domain}--{s.slot_type}\t{s.shannon_normalized:.3f}\t{s.min_entropy_normalized:.3f}" for s in scores]
        sections.append("## entity bias\n" + "\n".join(lines) + "\n")
    if cfg.path("eval"):
        summary = json.loads(Path(cfg.path("eval")).read_text(encoding="utf-8"))
        sections.append(
            "## evaluation\nmetric\tvalue\n"
            + "".join(f"{k}\t{summary[k]:.4f}\n" for k in ("jga", "fuzzy_jga", "slot_accuracy"))
            + f"turns\t{summary['turns']}\n"
        )
    if not sections:
        raise UsageError("report needs at least one of --stats, --bias, --eval")
    text = "\n".join(sections)
    out.write("report.txt", text)
    sys.stdout.write(text)
    return 0, {"sections": len(sections)}


COMMANDS = {
    "check": (cmd_check, ("corpus", "ontology")),
    "fix": (cmd_fix, ("corpus", "ontology")),
    "bias": (cmd_bias, ("corpus",)),
    "substitute": (cmd_substitute, ("train", "test", "lexicon")),
    "eval": (cmd_eval, ("gold", "pred")),
    "verify": (cmd_verify, ()),
    "report": (cmd_report, ()),
}


# ---------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"JSON config file (fallback: ${CONFIG_ENV})")
    common.add_argument("--jobs", type=int, help="worker processes (default 1)")
    common.add_argument("--seed", type=int, help=f"random seed (default {DEFAULT_SEED})")
    common.add_argument("--out-dir", dest="out_dir", help="artifact directory (default .)")
    common.add_argument("--format", choices=("native", "multiwoz22"), help="corpus input format")
    common.add_argument("--split", choices=("train", "valid", "test"))
    common.add_argument("--synonyms", help="synonym table")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="dstdoctor", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"dstdoctor {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def detection(p):
        p.add_argument("--corpus")
        p.add_argument("--ontology")
        p.add_argument("--database")
        p.add_argument("--rules", help="correction rules (default: shipped rules)")
        p.add_argument("--allow-overwrite", dest="allow_overwrite", action="store_true", default=None)

    p = sub.add_parser("check", parents=[common], help="propose corrections; exit 1 if any")
    detection(p)
    p = sub.add_parser("fix", parents=[common], help="apply corrections and write statistics")
    detection(p)
    p.add_argument("--proposals", help="apply this proposal file instead of detecting")

    p = sub.add_parser("bias", parents=[common], help="entity-bias table")
    p.add_argument("--corpus")
    p.add_argument("--policy", choices=POLICIES)

    p = sub.add_parser("substitute", parents=[common], help="build an unseen-entity test set")
    p.add_argument("--train")
    p.add_argument("--test")
    p.add_argument("--lexicon")
    p.add_argument("--out", help="output corpus (default <out-dir>/substituted.jsonl)")
    p.add_argument("--emit-map", dest="emit_map", help="also write the replacement map here")
    p.add_argument("--allow-non-entities", dest="allow_non_entities", action="store_true", default=None)

    p = sub.add_parser("eval", parents=[common], help="score DST predictions")
    p.add_argument("--gold")
    p.add_argument("--pred")
    p.add_argument("--ontology")
    p.add_argument("--fuzzy-threshold", dest="fuzzy_threshold", type=float)
    p.add_argument("--fuzzy-mode", dest="fuzzy_mode", choices=("full", "partial"))
    p.add_argument("--report", choices=("summary", "per-slot", "per-turn"))

    p = sub.add_parser("verify", parents=[common], help="emit or score a verification worksheet")
    p.add_argument("--before")
    p.add_argument("--after")
    p.add_argument("--n-modified", dest="n_modified", type=int)
    p.add_argument("--n-unchanged", dest="n_unchanged", type=int)
    p.add_argument("--worksheet", help="labeled worksheet to score")

    p = sub.add_parser("report", parents=[common], help="render tables from earlier artifacts")
    p.add_argument("--stats", action="append", help="stats.json from fix (repeat per split)")
    p.add_argument("--bias", help="bias.tsv from bias")
    p.add_argument("--eval", help="eval.json from eval")
    return parser


DEFAULTS = {
    "jobs": 1, "seed": DEFAULT_SEED, "out_dir": ".", "format": "native", "policy": "final-state",
    "fuzzy_threshold": 0.9, "fuzzy_mode": "partial", "report": "summary", "n_modified": 100, "n_unchanged": 100,
}


def _read_config(path: str | None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    if not Path(path).is_file():
        raise UsageError(f"config file {path} not found")
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    base = Path(path).resolve().parent
    resolved = {}
    for key, value in data.items():
        key = key.replace("-", "_")
        if key in PATH_KEYS and isinstance(value, str):
            value = str(base / value)
        elif key == "stats" and isinstance(value, list):
            value = [str(base / v) for v in value]
        resolved[key] = value
    return resolved


def make_config(args: argparse.Namespace) -> RunConfig:
    values = dict(DEFAULTS)
    values.update(_read_config(args.config))
    values.update({k: v for k, v in vars(args).items() if v is not None})
    command = values["command"]
    _, required = COMMANDS[command]
    missing = [k for k in required if not values.get(k)]
    if command == "verify" and not values.get("worksheet"):
        missing += [k for k in ("before", "after") if not values.get(k)]
    if missing:
        raise UsageError(f"{command}: missing required option(s) " + ", ".join("--" + m.replace("_", "-") for m in missing))
    paths = {k: str(values[k]) for k in PATH_KEYS if values.get(k) and k not in ("out_dir", "out", "emit_map")}
    for key, path in paths.items():
        if not Path(path).exists():
            raise UsageError(f"--{key.replace('_', '-')} {path}: no such file")
    for p in values.get("stats") or []:
        if not Path(p).exists():
            raise UsageError(f"--stats {p}: no such file")
    if not 0 < float(values["fuzzy_threshold"]) <= 1:
        raise UsageError(f"--fuzzy-threshold must be in (0, 1], got {values['fuzzy_threshold']}")
    if int(values["jobs"]) < 1:
        raise UsageError("--jobs must be at least 1")
    for k in ("out", "emit_map"):
        if values.get(k):
            paths[k] = str(values[k])
    return RunConfig(
        command=command,
        paths=paths,
        seed=int(values["seed"]),
        policy=values["policy"],
        fuzzy_threshold=float(values["fuzzy_threshold"]),
        fuzzy_mode=values["fuzzy_mode"],
        jobs=int(values["jobs"]),
        out_dir=Path(values["out_dir"]),
        extra={k: values.get(k) for k in (
            "format", "split", "allow_overwrite", "allow_non_entities", "report", "n_modified", "n_unchanged", "stats",
        )},
    )


def _canonical_argv(cfg: RunConfig) -> list[str]:
    """Argument vector that reproduces ``cfg`` without any config file."""
    argv = [cfg.command, "--out-dir", str(cfg.out_dir), "--seed", str(cfg.seed), "--jobs", str(cfg.jobs)]
    for key, path in sorted(cfg.paths.items()):
        argv += ["--" + key.replace("_", "-"), path]
    extra = cfg.extra
    if cfg.command in ("check", "fix", "bias", "substitute", "eval", "verify"):
        argv += ["--format", extra["format"]]
        if extra.get("split"):
            argv += ["--split", extra["split"]]
    if cfg.command == "bias":
        argv += ["--policy", cfg.policy]
    if cfg.command == "eval":
        argv += ["--fuzzy-threshold", repr(cfg.fuzzy_threshold), "--fuzzy-mode", cfg.fuzzy_mode, "--report", extra["report"]]
    if cfg.command == "verify" and "worksheet" not in cfg.paths:
        argv += ["--n-modified", str(extra["n_modified"]), "--n-unchanged", str(extra["n_unchanged"])]
    if extra.get("allow_overwrite") and cfg.command in ("check", "fix"):
        argv.append("--allow-overwrite")
    if extra.get("allow_non_entities") and cfg.command == "substitute":
        argv.append("--allow-non-entities")
    for p in extra.get("stats") or []:
        argv += ["--stats", p]
    return argv


def run(cfg: RunConfig) -> int:
    fn, _ = COMMANDS[cfg.command]
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    out = Artifacts(cfg.out_dir)
    try:
        code, counts = fn(cfg, out)
        manifest = {
            "command": cfg.command,
            "argv": _canonical_argv(cfg),
            "inputs": {k: {"path": p, "sha256": _sha256(p)} for k, p in sorted(cfg.paths.items()) if k not in ("out", "emit_map")},
            "seed": cfg.seed,
            "versions": {"dstdoctor": __version__, "python": ".".join(map(str, sys.version_info[:2]))},
            "outputs": sorted(os.path.relpath(p, cfg.out_dir) for p in out.written),
            "counts": counts,
            "exit_code": code,
        }
        out.write(f"{cfg.command}.manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except BaseException:
        out.discard()
        raise
    return code


def replay(manifest_path: str | Path) -> int:
    """Re-execute a command from its run manifest."""
    manifest = json.loads(Path(manifest_path).read_text(encoding="utf-8"))
    return main(manifest["argv"])


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = make_config(args)
    except (UsageError, json.JSONDecodeError) as exc:
        parser.error(str(exc))
    try:
        return run(cfg)
    except UsageError as exc:
        parser.error(str(exc))
    except (ValueError, OSError) as exc:
        print(f"dstdoctor {cfg.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
