"""Model files and CSV interchange.

Model files are JSON with a `kind` discriminator ("fo", "discrete",
"copid") and descending-power coefficient arrays, mirroring the printed
form of the models. Floats serialize through repr, so parse(serialize(m))
round-trips bit-exactly. All writers go through a temp file and an atomic
rename; no partial output survives a failure.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile

import numpy as np

from .ctrl_design import ContinuousOrderPid
from .exceptions import ValidationError
from .fotf import CommensurateFoTf, DiscreteTf, FrequencyResponse
from .fo_sim import SimResult
from .orders import RationalOrder
from .sysid_time import TimeSeries

__all__ = [
    "atomic_write_text",
    "save_model",
    "load_model",
    "model_to_dict",
    "model_from_dict",
    "write_timeseries_csv",
    "read_timeseries_csv",
    "write_freqresp_csv",
    "read_freqresp_csv",
    "write_simresult_csv",
    "write_sweep_csv",
    "write_orderdist_csv",
    "write_minangles_csv",
    "write_table_csv",
]


def atomic_write_text(path, text: str) -> None:
    """Write text via a sibling temp file and an atomic replace."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix="~")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _float_list(values) -> list:
    return [float(v) for v in np.asarray(values, dtype=float)]


def model_to_dict(model) -> dict:
    if isinstance(model, CommensurateFoTf):
        return {
            "kind": "fo",
            "q": str(model.q),
            "num": _float_list(model.num_descending()),
            "den": _float_list(model.den_descending()),
        }
    if isinstance(model, DiscreteTf):
        return {
            "kind": "discrete",
            "Ts": float(model.Ts),
            "num": _float_list(model.num),
            "den": _float_list(model.den),
        }
    if isinstance(model, ContinuousOrderPid):
        return {
            "kind": "copid",
            "q": str(model.q),
            "gains": _float_list(model.gains),
        }
    raise ValidationError(f"cannot serialize {type(model).__name__}")


def _require(payload: dict, key: str, context: str):
    if key not in payload:
        raise ValidationError(f"{context}: missing field {key!r}")
    return payload[key]


def model_from_dict(payload: dict, context: str = "model"):
    if not isinstance(payload, dict):
        raise ValidationError(f"{context}: expected an object")
    kind = _require(payload, "kind", context)
    if kind == "fo":
        q = RationalOrder.parse(_require(payload, "q", context))
        num = _require(payload, "num", context)
        den = _require(payload, "den", context)
        return CommensurateFoTf.from_descending(q, num, den)
    if kind == "discrete":
        return DiscreteTf(
            _require(payload, "num", context),
            _require(payload, "den", context),
            _require(payload, "Ts", context),
        )
    if kind == "copid":
        q = RationalOrder.parse(_require(payload, "q", context))
        return ContinuousOrderPid(q, _require(payload, "gains", context))
    raise ValidationError(f"{context}: unknown kind {kind!r}")


def save_model(path, model) -> None:
    atomic_write_text(path, json.dumps(model_to_dict(model), indent=2) + "\n")


def load_model(path):
    path = os.fspath(path)
    try:
        with open(path, "r") as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise ValidationError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"malformed model file {path}: line {exc.lineno}: {exc.msg}"
        ) from exc
    return model_from_dict(payload, context=f"model file {path}")


# ---------------------------------------------------------------------------
# CSV formats; repr float formatting keeps files deterministic and lossless

def _fmt(x: float) -> str:
    return repr(float(x))


def write_table_csv(path, header, rows) -> None:
    """Generic CSV writer for already-formatted string cells (atomic)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    atomic_write_text(path, buf.getvalue())


_write_rows = write_table_csv


def _read_rows(path, expected_header):
    path = os.fspath(path)
    try:
        with open(path, "r", newline="") as handle:
            reader = csv.reader(handle)
            rows = list(reader)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if header != list(expected_header):
        raise ValidationError(
            f"{path}: line 1: expected header {','.join(expected_header)!r},"
            f" got {','.join(header)!r}"
        )
    parsed = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(expected_header):
            raise ValidationError(
                f"{path}: line {lineno}: expected {len(expected_header)}"
                f" fields, got {len(row)}"
            )
        try:
            parsed.append([float(cell) for cell in row])
        except ValueError as exc:
            raise ValidationError(f"{path}: line {lineno}: {exc}") from exc
    if not parsed:
        raise ValidationError(f"{path}: no data rows")
    return np.asarray(parsed)


def write_timeseries_csv(path, data: TimeSeries) -> None:
    rows = [
        (_fmt(t), _fmt(u), _fmt(y))
        for t, u, y in zip(data.t, data.u, data.y)
    ]
    _write_rows(path, ("t", "u", "y"), rows)


def read_timeseries_csv(path) -> TimeSeries:
    table = _read_rows(path, ("t", "u", "y"))
    t = table[:, 0]
    if t.size < 2:
        raise ValidationError(f"{os.fspath(path)}: need at least 2 samples")
    Ts = float(t[1] - t[0])
    if Ts <= 0:
        raise ValidationError(f"{os.fspath(path)}: non-increasing time stamps")
    return TimeSeries(t, table[:, 1], table[:, 2], Ts)


def write_freqresp_csv(path, data: FrequencyResponse) -> None:
    rows = [
        (_fmt(w), _fmt(v.real), _fmt(v.imag))
        for w, v in zip(data.omegas, data.values)
    ]
    _write_rows(path, ("omega", "re", "im"), rows)


def read_freqresp_csv(path) -> FrequencyResponse:
    table = _read_rows(path, ("omega", "re", "im"))
    return FrequencyResponse(table[:, 0], table[:, 1] + 1j * table[:, 2])


def write_simresult_csv(path, result: SimResult) -> None:
    rows = [
        (_fmt(t), _fmt(y), _fmt(u), _fmt(e))
        for t, y, u, e in zip(result.t, result.y, result.u_ctrl, result.e)
    ]
    _write_rows(path, ("t", "y", "u_ctrl", "e"), rows)


def write_sweep_csv(path, cells) -> None:
    rows = []
    for cell in cells:
        if cell.ok:
            rows.append(
                (
                    str(cell.q),
                    cell.weighting,
                    _fmt(cell.fit.J),
                    _fmt(cell.fit.condition),
                    str(cell.flagged).lower(),
                    "",
                )
            )
        else:
            rows.append((str(cell.q), cell.weighting, "", "", "", cell.error))
    _write_rows(path, ("q", "weighting", "J", "condition", "flagged", "error"), rows)


def write_orderdist_csv(path, rows) -> None:
    _write_rows(
        path,
        ("order", "num_coeff", "den_coeff"),
        [(_fmt(o), _fmt(b), _fmt(a)) for o, b, a in rows],
    )


def write_minangles_csv(path, labels, report) -> None:
    rows = []
    for label, pole_set, angle in zip(
        labels, report.pole_sets, report.per_plant_min_deg
    ):
        rows.append(
            (
                label,
                _fmt(angle),
                str(pole_set.stable).lower(),
                str(pole_set.all_hyperdamped).lower(),
            )
        )
    _write_rows(path, ("plant", "min_angle_deg", "stable", "all_hyperdamped"), rows)
