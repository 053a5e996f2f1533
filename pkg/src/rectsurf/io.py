"""CSV/JSON serialisation of sweeps and threshold reports."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .experiments import ChannelSpec, SweepResult, ThresholdEstimate
from .noise import format_delta, parse_delta

CSV_COLUMNS = (
    "dx",
    "dz",
    "delta",
    "kappa",
    "p",
    "trials",
    "x_failures",
    "z_failures",
    "any_failures",
    "p_logical",
    "stderr",
)
META_PREFIX = "# metadata: "


def _num(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def sweep_rows(result: SweepResult) -> list[list[str]]:
    delta = str(format_delta(result.channel.delta))
    rows = []
    for pt in result.points:
        rows.append(
            [
                str(result.d_x),
                str(result.d_z),
                delta,
                _num(pt.kappa),
                _num(pt.p),
                str(pt.trials),
                str(pt.x_failures),
                str(pt.z_failures),
                str(pt.any_failures),
                _num(pt.p_logical),
                _num(pt.stderr),
            ]
        )
    return rows


def sweeps_to_csv(results: list[SweepResult], extra_meta: dict | None = None) -> str:
    """Metadata comment lines, the fixed header, then one row per kappa per curve."""
    buf = io.StringIO()
    for r in results:
        meta = dict(r.metadata(), **(extra_meta or {}))
        buf.write(META_PREFIX + json.dumps(meta, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in results:
        w.writerows(sweep_rows(r))
    return buf.getvalue()


def sweep_to_csv(result: SweepResult) -> str:
    return sweeps_to_csv([result])


def sweeps_from_csv(text: str) -> list[SweepResult]:
    metas, body = [], []
    for line in text.splitlines():
        if line.startswith(META_PREFIX):
            metas.append(json.loads(line[len(META_PREFIX) :]))
        elif line and not line.startswith("#"):
            body.append(line)
    rows = list(csv.DictReader(body))
    results = []
    for meta in metas:
        mine = [r for r in rows if int(r["dx"]) == meta["dx"] and int(r["dz"]) == meta["dz"] and r["delta"] == str(meta["delta"])]
        channel = ChannelSpec(parse_delta(meta["delta"]), meta.get("channel", "biased"))
        points = []
        for r in mine:
            pt = {k: float(r[k]) for k in ("kappa", "p")}
            pt.update({k: int(r[k]) for k in ("trials", "x_failures", "z_failures", "any_failures")})
            pt["counted"] = channel.counted
            points.append(pt)
        results.append(SweepResult.from_dict({"metadata": meta, "points": points}))
    return results


def sweep_to_json(result: SweepResult) -> str:
    return json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n"


def sweep_from_json(text: str) -> SweepResult:
    return SweepResult.from_dict(json.loads(text))


def report_to_json(estimate: ThresholdEstimate, curves: list[SweepResult], **extra) -> str:
    doc = {"estimate": estimate.to_dict(), "curves": [c.to_dict() for c in curves], **extra}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text)
