"""JSONL record formats: forests, relations and label distributions."""

from __future__ import annotations

import json
from typing import Iterable, Iterator, Sequence

import jsonschema

from .codemix import CodeMixedForest, ForestError, ForestNode, Origin, RelationInstance, TextToken
from .treebank import UDForestError

_index = {"type": ["integer", "null"], "minimum": 1}

FOREST_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["sent_id", "src_len", "tgt_len", "merged_count", "nodes", "text", "relations"],
    "additionalProperties": False,
    "properties": {
        "sent_id": {"type": "string"},
        "src_len": {"type": "integer", "minimum": 1},
        "tgt_len": {"type": "integer", "minimum": 1},
        "merged_count": {"type": "integer", "minimum": 0},
        "nodes": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "form", "origin", "src_index", "tgt_index", "deprel", "parent"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "integer", "minimum": 0},
                    "form": {"type": "string"},
                    "origin": {"enum": [o.value for o in Origin]},
                    "src_index": _index,
                    "tgt_index": _index,
                    "deprel": {"type": ["string", "null"]},
                    "parent": {"type": ["integer", "null"], "minimum": 0},
                },
            },
        },
        "text": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["form", "origin", "src_index", "tgt_index"],
                "additionalProperties": False,
                "properties": {
                    "form": {"type": "string"},
                    "origin": {"enum": [Origin.MERGED.value, Origin.SRC_COPY.value]},
                    "src_index": {"type": "integer", "minimum": 1},
                    "tgt_index": _index,
                },
            },
        },
        "relations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["subj_nodes", "obj_nodes", "label"],
                "additionalProperties": False,
                "properties": {
                    "subj_nodes": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
                    "obj_nodes": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
                    "label": {"type": "string"},
                },
            },
        },
    },
}

_forest_validator = jsonschema.Draft202012Validator(FOREST_SCHEMA)


class RecordError(UDForestError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def dumps(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False)


def forest_to_record(
    forest: CodeMixedForest,
    text: Sequence[TextToken] = (),
    relations: Iterable[RelationInstance] = (),
) -> dict:
    return {
        "sent_id": forest.sent_id,
        "src_len": forest.src_len,
        "tgt_len": forest.tgt_len,
        "merged_count": forest.merged_count,
        "nodes": [
            {"id": n.id, "form": n.form, "origin": n.origin.value, "src_index": n.src_index,
             "tgt_index": n.tgt_index, "deprel": n.deprel, "parent": n.parent}
            for n in forest.nodes
        ],
        "text": [
            {"form": t.form, "origin": t.origin.value, "src_index": t.src_index, "tgt_index": t.tgt_index}
            for t in text
        ],
        "relations": [
            {"subj_nodes": list(r.subj), "obj_nodes": list(r.obj), "label": r.label}
            for r in relations
        ],
    }


def validate_forest_record(record: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``record`` breaks the schema."""
    _forest_validator.validate(record)


def forest_from_record(record: dict) -> tuple[CodeMixedForest, list[RelationInstance]]:
    validate_forest_record(record)
    nodes = tuple(
        ForestNode(n["id"], n["form"], Origin(n["origin"]), n["src_index"], n["tgt_index"], n["deprel"], n["parent"])
        for n in record["nodes"]
    )
    forest = CodeMixedForest(record["sent_id"], nodes, record["src_len"], record["tgt_len"], record["merged_count"])
    rels = [RelationInstance(forest.sent_id, tuple(r["subj_nodes"]), tuple(r["obj_nodes"]), r["label"], "FOREST")
            for r in record["relations"]]
    for r in rels:
        if r.subj[-1] > forest.size or r.obj[-1] > forest.size:
            raise ForestError(f"relation {r.label!r} refers to a node beyond the forest")
    return forest, rels


def read_forests(lines: Iterable[str]) -> Iterator[tuple[CodeMixedForest, list[RelationInstance]]]:
    """Parse forest JSONL, reporting the offending line number on any defect."""
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            yield forest_from_record(json.loads(line))
        except json.JSONDecodeError as exc:
            raise RecordError(f"invalid JSON: {exc.msg}", lineno) from None
        except jsonschema.ValidationError as exc:
            raise RecordError(f"schema violation: {exc.message}", lineno) from None
        except (UDForestError, ValueError) as exc:
            raise RecordError(str(exc), lineno) from None


def relation_to_record(rel: RelationInstance) -> dict:
    return {"sent_id": rel.sent_id, "subj": [rel.subj[0], rel.subj[-1]],
            "obj": [rel.obj[0], rel.obj[-1]], "label": rel.label, "side": rel.side}


def read_relations(lines: Iterable[str], side: str = "SRC") -> list[RelationInstance]:
    """Relations JSONL: ``{"sent_id", "subj": [start, end], "obj": [start, end], "label"}``.

    Spans are 1-based and inclusive. A ``side`` key in the record overrides
    the default.
    """
    out = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            out.append(RelationInstance.from_spans(
                str(rec["sent_id"]), tuple(rec["subj"]), tuple(rec["obj"]), str(rec["label"]),
                rec.get("side", side)))
        except json.JSONDecodeError as exc:
            raise RecordError(f"invalid JSON: {exc.msg}", lineno) from None
        except (KeyError, TypeError, ValueError) as exc:
            raise RecordError(f"malformed relation record: {exc}", lineno) from None
    return out


def score_record(sent_id: str, subj: int, obj: int, probs: Sequence[float]) -> dict:
    return {"sent_id": sent_id, "subj": subj, "obj": obj, "probs": [float(p) for p in probs]}
