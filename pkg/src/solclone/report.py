"""Markdown/JSON renderers for the pipeline's tabular outputs: dataset stats,
version distribution, stripe populations + validation rates, top cloned
functions, and label co-occurrence."""

from __future__ import annotations

from typing import Optional


def _md_table(headers: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(headers) + " |", "|" + "|".join("---" for _ in headers) + "|"]
    for row in rows:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def _fmt(value, digits: int = 1) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:,.{digits}f}"
    return f"{value:,}"


def _pct(value: Optional[float]) -> str:
    if value is None:
        return "-"
    return f"{round(100 * value)}%"


def render_stats_markdown(stats: dict) -> str:
    rows = [
        ["Number of files", _fmt(stats["file_count"])],
        ["Number of contracts", _fmt(stats["contract_count"])],
        ["Number of functions", _fmt(stats["function_count"])],
        ["Number of public and external functions", _fmt(stats["public_external_count"])],
        ["Median function length", _fmt(stats["median_function_length"])],
        ["Longest function length", _fmt(stats["longest_function_length"])],
        ["Shortest function length", _fmt(stats["shortest_function_length"])],
        ["Number of commented functions", _fmt(stats["commented_function_count"])],
        ["Median comment length", _fmt(stats["median_comment_length"])],
        ["Longest comment length", _fmt(stats["longest_comment_length"])],
        ["Shortest comment length", _fmt(stats["shortest_comment_length"])],
    ]
    return "## Dataset statistics\n\n" + _md_table(["Metric", "Value"], rows)


def render_versions_markdown(stats: dict) -> str:
    rows = []
    for version, entry in stats["version_distribution"].items():
        rows.append([version, _fmt(entry["count"]), f"{entry['percentage']:.2f}%"])
    return "## Distribution of Solidity versions\n\n" + _md_table(
        ["Solidity version", "Count", "Percentage"], rows
    )


def render_population_stripes_markdown(stripes: dict) -> str:
    """Stripe populations as produced by the pairs stage."""
    out = ["## Stripe populations\n"]
    for set_label in sorted(stripes["sets"]):
        section = stripes["sets"][set_label]
        total = sum(section.values())
        rows = []
        for stripe_key in sorted(section):
            count = section[stripe_key]
            pct = f"{100 * count / total:.2f}%" if total else "-"
            rows.append([stripe_key, _fmt(count), pct])
        rows.append(["total", _fmt(total), "-"])
        out.append(f"### {set_label}\n\n" + _md_table(["Stripe", "Pairs", "% for stripe"], rows))
    return "\n".join(out)


def render_validation_stripes_markdown(sections: dict) -> str:
    """Manual-validation summary in the shape of the three-sample table."""
    out = ["## Manual validation summary\n"]
    headers = ["Stripe", "Judged", "Val. Rate", "Same Name", "Val. Rate'"]
    for set_label in sorted(sections):
        section = sections[set_label]
        rows = []
        for row in section["rows"]:
            rows.append(
                [
                    row["stripe"],
                    _fmt(row["judged"]),
                    _pct(row["validation_rate"]),
                    _fmt(row["same_name"]),
                    _pct(row["same_name_validation_rate"]),
                ]
            )
        totals = section["totals"]
        rows.append(
            [
                "**total**",
                _fmt(totals["judged"]),
                _pct(totals["validation_rate"]),
                _fmt(totals["same_name"]),
                _pct(totals["same_name_validation_rate"]),
            ]
        )
        out.append(f"### {set_label}\n\n" + _md_table(headers, rows))
    return "\n".join(out)


def render_metrics_markdown(metrics: dict) -> str:
    rows = [
        ["TP", _fmt(metrics["tp"])],
        ["FP", _fmt(metrics["fp"])],
        ["FN", _fmt(metrics["fn"])],
        ["TN", _fmt(metrics["tn"])],
        ["Precision", _pct(metrics["precision"])],
        ["Recall", _pct(metrics["recall"])],
        ["F1-score", _pct(metrics["f1"])],
        ["Specificity", _pct(metrics["specificity"])],
        ["Accuracy", _pct(metrics["accuracy"])],
    ]
    return "## Validation metrics\n\n" + _md_table(["Metric", "Value"], rows)


def render_top_functions_markdown(entries: list[tuple[str, int]]) -> str:
    rows = [[name, _fmt(count)] for name, count in entries]
    return "## Top cloned functions\n\n" + _md_table(["Functions", "Candidates"], rows)


def render_labels_markdown(report: dict) -> str:
    total = report["total"] or 1
    out = ["## Label co-occurrence\n"]
    sections = [
        ("Single value", report["singles"]),
        ("Pairs", report["pairs"]),
        ("Triplets", report["triplets"]),
    ]
    rows = []
    for group, entries in sections:
        ranked = sorted(entries.items(), key=lambda item: (-item[1], item[0]))
        for label, count in ranked:
            rows.append([group, label.replace("+", ", "), _fmt(count), f"{round(100 * count / total)}%"])
    if report["four_plus"]:
        rows.append(["4+", "-", _fmt(report["four_plus"]), f"{round(100 * report['four_plus'] / total)}%"])
    out.append(_md_table(["Group", "Label", "Count", "Percentage"], rows))
    return "\n".join(out)
