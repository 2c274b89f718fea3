"""Command-line driver: ``udforest merge|project|stats|export|score``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from functools import partial
from typing import Optional

from . import records
from .alignment import AlignmentMatrix, read_alignment_file
from .codemix import (CodeMixedForest, ProjectionError, RelationInstance, assemble_codemixed_text,
                      construct_forest, merge_annotations, project_relation)
from .encoder import EncoderParams, HashEmbedder, biaffine_score, encode
from .export import DotStyle, graph_record, to_dot, to_graph
from .metrics import BiasAccumulator, DistanceAccumulator, MergeAccumulator, format_table
from .pipeline import ordered_map
from .treebank import UDForestError, UDTree, read_conllu

DEFAULT_THETA = 0.5
MAX_OFFENDERS = 10


@dataclass(frozen=True)
class RunConfig:
    theta: float = DEFAULT_THETA
    keep_unprojected: bool = False
    coarse_labels: bool = False
    group_by_root_upos: bool = False
    lenient: bool = False
    seed: int = 0


class CorpusError(UDForestError):
    pass


def _existing_file(path: str) -> str:
    if not os.path.isfile(path):
        raise argparse.ArgumentTypeError(f"no such file: {path}")
    return path


def _theta(raw: str) -> float:
    value = float(raw)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"theta must lie in [0, 1], got {value}")
    return value


def _theta_list(raw: str) -> list[float]:
    return [_theta(part) for part in raw.split(",") if part.strip()]


# ---------------------------------------------------------------------------
# corpus loading

@dataclass(frozen=True)
class SentenceJob:
    src: UDTree
    tgt: UDTree
    alignment: AlignmentMatrix
    relations: tuple[RelationInstance, ...] = ()


def _index(trees: list[UDTree], what: str) -> dict[str, UDTree]:
    out: dict[str, UDTree] = {}
    for t in trees:
        if t.sent_id in out:
            raise CorpusError(f"duplicate sent_id {t.sent_id!r} in {what}")
        out[t.sent_id] = t
    return out


def load_corpus(src_path: str, tgt_path: str, align_path: str, relations_path: Optional[str],
                lenient: bool) -> list[SentenceJob]:
    """Pair SRC trees, TGT trees and alignments by sent_id, in SRC file order."""
    src = _index(read_conllu(src_path, "src"), src_path)
    tgt = _index(read_conllu(tgt_path, "tgt"), tgt_path)
    aligns = read_alignment_file(align_path)
    ids = [sid for sid in src if sid in tgt and sid in aligns]
    if not lenient:
        everything = list(dict.fromkeys([*src, *tgt, *aligns]))
        offenders = [sid for sid in everything if not (sid in src and sid in tgt and sid in aligns)]
        if offenders:
            shown = ", ".join(repr(s) for s in offenders[:MAX_OFFENDERS])
            more = f" (and {len(offenders) - MAX_OFFENDERS} more)" if len(offenders) > MAX_OFFENDERS else ""
            raise CorpusError(
                f"{len(offenders)} sent_id(s) missing from the src/tgt/alignment inputs: {shown}{more}; "
                "pass --lenient to use the intersection")
    rels: dict[str, list[RelationInstance]] = {}
    if relations_path:
        with open(relations_path, encoding="utf-8") as f:
            for rel in records.read_relations(f):
                rels.setdefault(rel.sent_id, []).append(rel)
    return [SentenceJob(src[s], tgt[s], aligns[s], tuple(rels.get(s, ()))) for s in ids]


# ---------------------------------------------------------------------------
# per-sentence workers (module level so they pickle)

@dataclass(frozen=True)
class MergeResult:
    sent_id: str
    line: Optional[str]
    forest: Optional[CodeMixedForest]
    dropped: int = 0
    error: Optional[str] = None


def merge_sentence(job: SentenceJob, config: RunConfig) -> MergeResult:
    try:
        forest = construct_forest(job.src, job.tgt, job.alignment, config.theta)
        text = assemble_codemixed_text(job.src, forest)
        merged, dropped = [], 0
        for rel in job.relations:
            rel.check_bounds(len(job.src))
            try:
                projected = project_relation(rel, job.alignment, config.theta)
            except ProjectionError:
                if not config.keep_unprojected:
                    dropped += 1
                    continue
                projected = None
            merged.append(merge_annotations(rel, projected, forest))
        line = records.dumps(records.forest_to_record(forest, text, merged))
        return MergeResult(job.src.sent_id, line, forest, dropped)
    except UDForestError as exc:
        return MergeResult(job.src.sent_id, None, None, error=str(exc))


def _open_out(path: Optional[str]):
    if path in (None, "-"):
        return open(sys.stdout.fileno(), "w", encoding="utf-8", closefd=False)
    return open(path, "w", encoding="utf-8")


def _lines_in(path: str):
    with open(path, encoding="utf-8") as f:
        return f.readlines()


# ---------------------------------------------------------------------------
# subcommands

def cmd_merge(args, config: RunConfig) -> int:
    jobs = load_corpus(args.src, args.tgt, args.align, args.relations, config.lenient)
    acc = MergeAccumulator()
    failed = dropped = 0
    with _open_out(args.out) as out:
        for res in ordered_map(partial(merge_sentence, config=config), jobs):
            if res.error is not None:
                failed += 1
                print(f"udforest: {res.error}", file=sys.stderr)
                continue
            out.write(res.line + "\n")
            acc.add(res.forest)
            dropped += res.dropped
    if acc.count:
        print(json.dumps({"merge": acc.report().to_dict(), "dropped_relations": dropped}), file=sys.stderr)
    if failed:
        print(f"udforest: {failed} sentence(s) failed", file=sys.stderr)
        return 1
    if not jobs:
        print("udforest: no sentences to merge", file=sys.stderr)
        return 1
    return 0


def cmd_project(args, config: RunConfig) -> int:
    src = _index(read_conllu(args.src, "src"), args.src)
    aligns = read_alignment_file(args.align)
    rels = records.read_relations(_lines_in(args.relations))
    dropped = 0
    with _open_out(args.out) as out:
        for rel in rels:
            if rel.sent_id not in src or rel.sent_id not in aligns:
                if not config.lenient:
                    raise CorpusError(f"relation for unknown sent_id {rel.sent_id!r}")
                dropped += 1
                continue
            rel.check_bounds(len(src[rel.sent_id]))
            try:
                rec = records.relation_to_record(project_relation(rel, aligns[rel.sent_id], config.theta))
            except ProjectionError as exc:
                dropped += 1
                print(f"udforest: {exc}", file=sys.stderr)
                if not config.keep_unprojected:
                    continue
                rec = records.relation_to_record(rel)
            out.write(records.dumps(rec) + "\n")
    print(f"udforest: {len(rels) - dropped}/{len(rels)} relations projected", file=sys.stderr)
    return 0


def stats_for_theta(jobs: list[SentenceJob], theta: float, config: RunConfig) -> dict:
    bias = BiasAccumulator(theta, config.coarse_labels)
    by_upos: dict[str, BiasAccumulator] = {}
    dist_src, dist_tgt = DistanceAccumulator(), DistanceAccumulator()
    merge = MergeAccumulator()
    for job in jobs:
        bias.add(job.src, job.tgt, job.alignment, job.relations)
        if config.group_by_root_upos:
            group = by_upos.setdefault(job.src.root.upos, BiasAccumulator(theta, config.coarse_labels))
            group.add(job.src, job.tgt, job.alignment, job.relations)
        merge.add(construct_forest(job.src, job.tgt, job.alignment, theta))
        for rel in job.relations:
            rel.check_bounds(len(job.src))
            dist_src.add(job.src, rel)
            try:
                dist_tgt.add(job.tgt, project_relation(rel, job.alignment, theta))
            except ProjectionError:
                pass
    report = {"theta": theta, "bias": bias.report().to_dict()}
    if config.group_by_root_upos:
        report["bias_by_root_upos"] = {k: by_upos[k].report().to_dict() for k in sorted(by_upos)}
    report["distance"] = {"src": dist_src.report().to_dict(), "tgt": dist_tgt.report().to_dict()}
    report["merge"] = merge.report().to_dict()
    return report


def _table(report: dict) -> str:
    rows = [(f"bias theta={report['theta']}", report["bias"])]
    for upos, rep in report.get("bias_by_root_upos", {}).items():
        rows.append((f"bias root_upos={upos}", rep))
    rows += [("distance src", report["distance"]["src"]), ("distance tgt", report["distance"]["tgt"]),
             ("merge", report["merge"])]
    return format_table(rows)


def cmd_stats(args, config: RunConfig) -> int:
    jobs = load_corpus(args.src, args.tgt, args.align, args.relations, config.lenient)
    if not jobs:
        print("udforest: empty corpus", file=sys.stderr)
        return 1
    thetas = args.theta or [DEFAULT_THETA]
    reports = list(ordered_map(partial(_stats_worker, jobs=jobs, config=config), thetas, chunksize=1))
    with _open_out(args.out) as out:
        if args.format == "table":
            out.write("\n".join(_table(r) for r in reports))
        elif len(reports) == 1:
            out.write(json.dumps(reports[0], indent=2) + "\n")
        else:
            out.write(json.dumps({"sweep": reports}, indent=2) + "\n")
    return 0


def _stats_worker(theta: float, jobs, config: RunConfig) -> dict:
    return stats_for_theta(jobs, theta, config)


def cmd_export(args, config: RunConfig) -> int:
    style = DotStyle(edge_labels=not args.no_edge_labels)
    with _open_out(args.out) as out:
        for forest, _ in records.read_forests(_lines_in(args.forests)):
            if args.format == "dot":
                out.write(to_dot(forest, style))
            else:
                out.write(records.dumps(graph_record(forest)) + "\n")
    return 0


def _anchor(forest: CodeMixedForest, nodes: tuple[int, ...]) -> int:
    """Shallowest node of a span; ties go to the smaller id."""
    return min(nodes, key=lambda i: (forest.depth(i), i))


def cmd_score(args, config: RunConfig) -> int:
    data = list(records.read_forests(_lines_in(args.forests)))
    if args.labels:
        labels = [s for s in args.labels.split(",") if s]
    else:
        labels = sorted({r.label for _, rels in data for r in rels})
    if not labels:
        print("udforest: no relation labels (pass --labels or relations in the forest file)", file=sys.stderr)
        return 2
    if args.zero_params:
        params = EncoderParams.zeros(args.dim, len(labels), args.layers)
    else:
        params = EncoderParams.init(args.dim, len(labels), config.seed, args.layers)
    embedder = HashEmbedder(args.dim, salt=str(config.seed))
    with _open_out(args.out) as out:
        for forest, rels in data:
            if not rels:
                continue
            enc = encode(to_graph(forest, embedder), params)
            for rel in rels:
                s, o = _anchor(forest, rel.subj), _anchor(forest, rel.obj)
                probs = biaffine_score(enc, s - 1, o - 1, params)
                out.write(records.dumps(records.score_record(forest.sent_id, s, o, probs)) + "\n")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="udforest", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def corpus_args(p, relations_required=False, needs_tgt=True):
        p.add_argument("--src", required=True, type=_existing_file, help="SRC CoNLL-U")
        if needs_tgt:
            p.add_argument("--tgt", required=True, type=_existing_file, help="TGT CoNLL-U")
        p.add_argument("--align", required=True, type=_existing_file, help="alignment TSV")
        p.add_argument("--relations", required=relations_required, type=_existing_file,
                       help="SRC-side relations JSONL")
        p.add_argument("--lenient", action="store_true", help="use the sent_id intersection")

    p = sub.add_parser("merge", help="build code-mixed forests")
    corpus_args(p)
    p.add_argument("--theta", type=_theta, default=DEFAULT_THETA)
    p.add_argument("--keep-unprojected", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("project", help="project SRC relations onto TGT tokens")
    corpus_args(p, relations_required=True, needs_tgt=False)
    p.add_argument("--theta", type=_theta, default=DEFAULT_THETA)
    p.add_argument("--keep-unprojected", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("stats", help="bias, distance and merge statistics")
    corpus_args(p)
    p.add_argument("--theta", type=_theta_list, help="one value or a comma-separated sweep")
    p.add_argument("--coarse-labels", action="store_true")
    p.add_argument("--group-by-root-upos", action="store_true")
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.add_argument("--out")

    p = sub.add_parser("export", help="forest JSONL to DOT or graph JSONL")
    p.add_argument("forests", type=_existing_file)
    p.add_argument("--format", choices=("dot", "graph"), default="dot")
    p.add_argument("--no-edge-labels", action="store_true")
    p.add_argument("--out")

    p = sub.add_parser("score", help="relation label distributions from the reference encoder")
    p.add_argument("forests", type=_existing_file)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=64, help="embedding width")
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--labels", help="comma-separated label inventory")
    p.add_argument("--zero-params", action="store_true")
    p.add_argument("--out")
    return parser


COMMANDS = {"merge": cmd_merge, "project": cmd_project, "stats": cmd_stats,
            "export": cmd_export, "score": cmd_score}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    theta = args.theta if isinstance(getattr(args, "theta", None), float) else DEFAULT_THETA
    config = RunConfig(
        theta=theta,
        keep_unprojected=getattr(args, "keep_unprojected", False),
        coarse_labels=getattr(args, "coarse_labels", False),
        group_by_root_upos=getattr(args, "group_by_root_upos", False),
        lenient=getattr(args, "lenient", False),
        seed=getattr(args, "seed", 0),
    )
    try:
        return COMMANDS[args.command](args, config)
    except UDForestError as exc:
        print(f"udforest: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
