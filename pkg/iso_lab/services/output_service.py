"""
Output service

Trace and summary CSV writers and YAML echo files. Every file is written to a
temporary sibling and renamed into place, so readers never see a partial file.

Trace CSV columns (one row per round):
    t, Z, then per player j: pred_j, mistake_j, w_j_0..w_j_{K-1},
    l_j_0..l_j_{K-1}, regret_j

Summary CSV columns (one row per run):
    run_id, seed, J, K, m, T, eta, p,
    L_T_j (per player), ctx_regret_j, ext_regret_j, var_j_z (player-major),
    term_a, term_b_j, term_c_j, bound_j, bound_slack2_j, bound_certified_j,
    stated_bound_ok, slack2_bound_ok, certified_bound_ok,
    cce_epsilon, bound_rhs, bound_rhs_max

Floats are written with 12 significant digits.
"""

import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import yaml

from ..config import settings
from ..models.trace import RoundRecord, RunMetrics


def format_value(value: Any, digits: Optional[int] = None) -> str:
    """Render one CSV cell"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), f".{digits or settings.FLOAT_DIGITS}g")
    return str(value)


def write_text_atomic(path: Union[str, Path], text: str) -> Path:
    """
    Write text to path through a temporary file and a rename

    Raises:
        OSError: the directory is not writable
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, temp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    return path


def write_yaml_atomic(path: Union[str, Path], data: Dict) -> Path:
    return write_text_atomic(path, yaml.safe_dump(data, sort_keys=False))


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buffer.getvalue()


# ==================== Trace ====================

def trace_header(num_players: int, num_actions: int) -> List[str]:
    header = ["t", "Z"]
    for j in range(num_players):
        header += [f"pred_{j}", f"mistake_{j}"]
        header += [f"w_{j}_{k}" for k in range(num_actions)]
        header += [f"l_{j}_{k}" for k in range(num_actions)]
        header.append(f"regret_{j}")
    return header


def trace_rows(trace: Sequence[RoundRecord], regrets: Sequence[np.ndarray]) -> Iterable[List[Any]]:
    for record in trace:
        row: List[Any] = [record.round + 1, record.realized_context]
        for j, predicted in enumerate(record.predictions):
            row += [predicted, predicted != record.realized_context]
            row += [float(v) for v in record.strategies[j].probs]
            row += [float(v) for v in record.losses[j].values]
            row.append(float(regrets[j][record.round]))
        yield row


def write_trace(path: Union[str, Path], trace: Sequence[RoundRecord], regrets: Sequence[np.ndarray]) -> Path:
    """Write a per-round trace CSV"""
    num_players = len(trace[0].losses)
    num_actions = trace[0].losses[0].values.size
    return write_text_atomic(path, _csv_text(trace_header(num_players, num_actions), trace_rows(trace, regrets)))


# ==================== Summary ====================

def summary_header(num_players: int, num_contexts: int) -> List[str]:
    players = range(num_players)
    header = ["run_id", "seed", "J", "K", "m", "T", "eta", "p"]
    header += [f"L_T_{j}" for j in players]
    header += [f"ctx_regret_{j}" for j in players]
    header += [f"ext_regret_{j}" for j in players]
    header += [f"var_{j}_{z}" for j in players for z in range(num_contexts)]
    header.append("term_a")
    header += [f"term_b_{j}" for j in players]
    header += [f"term_c_{j}" for j in players]
    header += [f"bound_{j}" for j in players]
    header += [f"bound_slack2_{j}" for j in players]
    header += [f"bound_certified_{j}" for j in players]
    header += ["stated_bound_ok", "slack2_bound_ok", "certified_bound_ok", "cce_epsilon", "bound_rhs", "bound_rhs_max"]
    return header


def summary_row(
    run_id: str,
    seed: Optional[int],
    num_players: int,
    num_actions: int,
    num_contexts: int,
    noise: float,
    metrics: RunMetrics,
) -> List[Any]:
    """Summary CSV row of one run, in summary_header order"""
    row: List[Any] = [run_id, seed, num_players, num_actions, num_contexts, metrics.horizon, metrics.eta, noise]
    row += list(metrics.mistakes)
    row += list(metrics.contextual_regret)
    row += list(metrics.external_regret)
    row += [v for per_player in metrics.variation for v in per_player]
    row.append(metrics.bounds[0].term_a)
    row += [b.term_b for b in metrics.bounds]
    row += [b.term_c for b in metrics.bounds]
    row += [b.total for b in metrics.bounds]
    row += [b.total_slack2 for b in metrics.bounds]
    row += [b.total_certified for b in metrics.bounds]
    row += [
        metrics.stated_bound_ok,
        metrics.slack2_bound_ok,
        metrics.certified_bound_ok,
        metrics.cce_epsilon,
        metrics.cce_bound_rhs,
        metrics.cce_bound_rhs_max,
    ]
    return row


def aggregate_rows(label: str, rows: Sequence[Sequence[Any]], header: Sequence[str]) -> List[List[Any]]:
    """
    Mean and standard-error rows over runs of one sweep cell

    Identifier columns stay blank; eta and p keep the cell value.
    """
    fixed = {"run_id", "seed"}
    mean_row: List[Any] = []
    stderr_row: List[Any] = []
    for index, name in enumerate(header):
        if name in fixed:
            mean_row.append(f"mean[{label}]" if name == "run_id" else None)
            stderr_row.append(f"stderr[{label}]" if name == "run_id" else None)
            continue
        values = np.array([float(r[index]) for r in rows], dtype=np.float64)
        mean_row.append(float(values.mean()))
        if name in ("J", "K", "m", "T", "eta", "p"):
            stderr_row.append(float(values.mean()))
        elif values.size > 1:
            stderr_row.append(float(values.std(ddof=1) / np.sqrt(values.size)))
        else:
            stderr_row.append(0.0)
    return [mean_row, stderr_row]


def write_summary(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write summary.csv"""
    return write_text_atomic(path, _csv_text(header, rows))
