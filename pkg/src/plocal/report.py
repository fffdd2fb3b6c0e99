"""Canonical report serialization (text, JSON, TSV) with a determinism hash."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .graded import GradedCohomology

ENGINE_VERSION = "0.1.0"


@dataclass
class Report:
    command: str
    prime: int | None = None
    parameters: dict = field(default_factory=dict)
    groups: list = field(default_factory=list)  # (degree, free_rank, torsion, class names)
    verdicts: dict = field(default_factory=dict)
    citations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add_cohomology(self, H: GradedCohomology, start: int = 0):
        for k, free, tors, names in H.table()[start:]:
            self.groups.append((k, free, tuple(tors), tuple(names)))

    def cite(self, citation):
        entry = {"key": citation.key, "statement": citation.statement, "source": citation.source}
        if entry not in self.citations:
            self.citations.append(entry)

    def payload(self) -> dict:
        return {
            "command": self.command,
            "engine_version": ENGINE_VERSION,
            "prime": self.prime,
            "parameters": self.parameters,
            "groups": [{"degree": k, "free_rank": f, "torsion_exponents": list(t),
                        "class_names": list(n)}
                       for k, f, t, n in sorted(self.groups)],
            "verdicts": self.verdicts,
            "citations": sorted(self.citations, key=lambda c: c["key"]),
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        data = self.payload()
        data["determinism_hash"] = determinism_hash(data)
        return canonical_json(data)

    def to_tsv(self) -> str:
        lines = [f"# {self.command}"]
        if self.groups:
            lines.append("degree\tfree_rank\ttorsion")
            for k, f, t, _ in sorted(self.groups):
                lines.append(f"{k}\t{f}\t{','.join(str(e) for e in t)}")
        else:
            lines.append("key\tvalue")
            for key in sorted(self.verdicts):
                lines.append(f"{key}\t{_flat(self.verdicts[key])}")
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        out = [f"$ plocal {self.command}"]
        if self.prime is not None:
            out.append(f"prime: {self.prime}")
        for key in sorted(self.parameters):
            out.append(f"{key}: {_flat(self.parameters[key])}")
        if self.groups:
            out.append("")
            out.append("degree  group")
            for k, f, t, names in sorted(self.groups):
                grp = _group_text(self.prime, f, t)
                label = f"  [{', '.join(names)}]" if names else ""
                out.append(f"{k:>6}  {grp}{label}")
        if self.verdicts:
            out.append("")
            for key in sorted(self.verdicts):
                val = self.verdicts[key]
                if isinstance(val, list) and val and isinstance(val[0], dict):
                    out.append(f"{key}:")
                    for item in val:
                        out.append("  - " + "; ".join(f"{k}={_flat(v)}" for k, v in item.items()))
                else:
                    out.append(f"{key}: {_flat(val)}")
        for n in self.notes:
            out.append(f"note: {n}")
        for c in sorted(self.citations, key=lambda c: c["key"]):
            out.append(f"cited [{c['key']}]: {c['statement']} — {c['source']}")
        return "\n".join(out) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "tsv":
            return self.to_tsv()
        return self.to_text()


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def determinism_hash(data: dict) -> str:
    body = {k: v for k, v in data.items() if k != "determinism_hash"}
    return hashlib.sha256(canonical_json(body).encode("utf-8")).hexdigest()


def _group_text(p, free, tors):
    from .coeff import _fmt_group
    return _fmt_group(p, free, tuple(tors))


def _flat(v):
    if isinstance(v, (list, tuple)):
        return ", ".join(_flat(x) for x in v)
    if isinstance(v, dict):
        return "; ".join(f"{k}={_flat(x)}" for k, x in sorted(v.items()))
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)
