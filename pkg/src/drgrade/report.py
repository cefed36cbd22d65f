"""Plain-text result tables (4-decimal score formatting)."""

from __future__ import annotations

from .errors import DataError


def _table(title: str, first_col: str, rows) -> str:
    """rows: (name, qwk, auc) triples."""
    if not rows:
        raise DataError(f"no rows for table {title!r}")
    width = max(len(first_col), *(len(r[0]) for r in rows))
    lines = [title, "-" * len(title)]
    lines.append(f"{first_col:<{width}}  {'QWK':>8}  {'AUC':>8}")
    for name, q, a in rows:
        lines.append(f"{name:<{width}}  {q:>8.4f}  {a:>8.4f}")
    return "\n".join(lines)


def model_table(scores) -> str:
    return _table("Individual models", "model", [(s.model_id, s.qwk, s.auc) for s in scores])


def strategy_table(scores) -> str:
    return _table(
        "Ensemble strategies", "strategy", [(s.model_id, s.qwk, s.auc) for s in scores]
    )


def task_grid(single_scores, multi_scores) -> str:
    """Single-task vs multi-task scores per strategy, side by side."""
    single = {s.model_id: s for s in single_scores}
    multi = {s.model_id: s for s in multi_scores}
    names = sorted(set(single) | set(multi))
    if not names:
        raise DataError("no rows for task grid")
    width = max(len("strategy"), *(len(n) for n in names))
    title = "Single task vs multi-task"
    lines = [title, "-" * len(title)]
    lines.append(
        f"{'strategy':<{width}}  {'ST QWK':>8}  {'ST AUC':>8}  {'MT QWK':>8}  {'MT AUC':>8}"
    )

    def cell(s, attr):
        return f"{getattr(s, attr):>8.4f}" if s is not None else f"{'-':>8}"

    for n in names:
        s, m = single.get(n), multi.get(n)
        lines.append(
            f"{n:<{width}}  {cell(s, 'qwk')}  {cell(s, 'auc')}  {cell(m, 'qwk')}  {cell(m, 'auc')}"
        )
    return "\n".join(lines)


def compose_report(model_scores, strategy_scores, single_scores=None, multi_scores=None) -> str:
    parts = [model_table(model_scores), strategy_table(strategy_scores)]
    if single_scores is not None and multi_scores is not None:
        parts.append(task_grid(single_scores, multi_scores))
    return "\n\n".join(parts) + "\n"
