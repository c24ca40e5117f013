"""Result-table emission (markdown or CSV) from persisted search results."""

from __future__ import annotations

import io


def format_hidden(hidden) -> str:
    if not hidden:
        return "|-|"
    return "|" + ",".join(str(h) for h in hidden) + "|"


def _reward(mean, std) -> str:
    if mean is None:
        return "-"
    return f"{mean:.2f} ± {std:.2f}"


COLUMNS = ["Algorithm", "Threshold", "Baseline Size", "Baseline Reward",
           "Symmetric Size", "Symmetric Reward", "Asym Actor Size",
           "Reduction", "Critic Size", "Asym Reward"]


def _result_row(doc: dict) -> list[str]:
    base = doc.get("baseline")
    sym = doc.get("symmetric")
    asym = doc.get("asymmetric")
    red = doc.get("reduction_percent")
    return [
        doc["algo"],
        f"{doc['threshold']['threshold']:g}",
        format_hidden(base["actor_hidden"]) if base else "-",
        _reward(base["mean"], base["std"]) if base else "-",
        format_hidden(sym["actor_hidden"]) if sym else "-",
        _reward(sym["mean"], sym["std"]) if sym else "-",
        format_hidden(asym["actor_hidden"]) if asym else "-",
        f"{red:.2f}%" if red is not None else "-",
        format_hidden(asym["critic_hidden"]) if asym else "-",
        _reward(asym["mean"], asym["std"]) if asym else "-",
    ]


def emit_report(result_docs, format: str = "markdown") -> str:
    """One row per algorithm; markdown table or CSV with identical values."""
    if format not in ("markdown", "csv"):
        raise ValueError(f"unknown report format {format!r}")
    rows = [_result_row(doc) for doc in result_docs]
    if format == "csv":
        out = io.StringIO()
        out.write(",".join(c.replace(" ", "_").lower() for c in COLUMNS) + "\n")
        for row in rows:
            out.write(",".join(f'"{v}"' if "," in v else v for v in row) + "\n")
        return out.getvalue()
    env = result_docs[0]["env"] if result_docs else "?"
    lines = [f"### Minimal-architecture search: {env}", ""]
    lines.append("| " + " | ".join(COLUMNS) + " |")
    lines.append("|" + "|".join("---" for _ in COLUMNS) + "|")
    for row in rows:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"
