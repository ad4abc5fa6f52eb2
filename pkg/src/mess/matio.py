"""Snapshot matrix files and run reports.

Binary layout (``messbin``), all little-endian::

    offset 0   4 bytes   magic b"MESS"
    offset 4   uint16    version (1)
    offset 6   uint64    m
    offset 14  uint64    n
    offset 22  m*n float64, column-major

CSV files hold one matrix row per line; every line, the last included,
ends with a newline. PGM files are binary ``P5``
grayscale images; pixel values are divided by the header's maxval and image
columns become snapshots.
"""

import csv
import io
import json
import logging
import math
import re
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, ValidationError
from .metrics import as_snapshots

__all__ = [
    "FORMATS",
    "read_matrix",
    "write_matrix",
    "guess_format",
    "write_report",
    "write_trace_csv",
    "sample_record",
    "error_record",
]

log = logging.getLogger(__name__)

FORMATS = ("csv", "messbin", "pgm")
MAGIC = b"MESS"
VERSION = 1
_HEADER = struct.Struct("<4sHQQ")


def guess_format(path):
    """Format name from a file extension (``.csv``, ``.mess``/``.bin``, ``.pgm``)."""
    ext = Path(path).suffix.lower()
    if ext == ".csv":
        return "csv"
    if ext in (".mess", ".bin", ".messbin"):
        return "messbin"
    if ext == ".pgm":
        return "pgm"
    raise FormatError(f"cannot infer matrix format from extension {ext!r}", path=path)


def _check_format(fmt, path):
    fmt = (fmt or guess_format(path)).lower()
    if fmt not in FORMATS:
        raise FormatError(f"unknown matrix format {fmt!r}; expected one of {FORMATS}", path=path)
    return fmt


def read_matrix(path, format=None):
    """Read a snapshot matrix.

    Raises
    ------
    FormatError
        Malformed or truncated file; ``offset`` locates the problem.
    ValidationError
        Parsed values are not finite.
    OSError
        The file cannot be opened.
    """
    fmt = _check_format(format, path)
    data = Path(path).read_bytes()
    if fmt == "messbin":
        return parse_messbin(data, path)
    if fmt == "pgm":
        return parse_pgm(data, path)
    return parse_csv(data, path)


def parse_messbin(data, path=None):
    if len(data) < _HEADER.size:
        raise FormatError(f"truncated header: {len(data)} of {_HEADER.size} bytes", offset=len(data), path=path)
    magic, version, m, n = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}", offset=0, path=path)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", offset=4, path=path)
    if m < 1 or n < 1:
        raise FormatError(f"invalid dimensions {m}x{n}", offset=6 if m < 1 else 14, path=path)
    expected = m * n * 8
    payload = len(data) - _HEADER.size
    if payload != expected:
        kind = "truncated" if payload < expected else "oversized"
        raise FormatError(
            f"{kind} payload: header declares {m}x{n} ({expected} bytes), found {payload}",
            offset=_HEADER.size + min(payload, expected),
            path=path,
        )
    X = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape((m, n), order="F")
    return as_snapshots(X.astype(np.float64), name=str(path or "matrix"))


def _pgm_tokens(data, count, path):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    pos = 0
    size = len(data)
    while len(tokens) < count:
        while pos < size and data[pos : pos + 1] in (b" ", b"\t", b"\n", b"\r", b"\v", b"\f", b"#"):
            if data[pos : pos + 1] == b"#":
                end = data.find(b"\n", pos)
                pos = size if end < 0 else end + 1
            else:
                pos += 1
        start = pos
        while pos < size and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header", offset=pos, path=path)
        tokens.append((data[start:pos], start))
    # exactly one whitespace byte separates the header from the raster
    if pos >= size or not data[pos : pos + 1].isspace():
        raise FormatError("missing whitespace after PGM header", offset=pos, path=path)
    return tokens, pos + 1


def parse_pgm(data, path=None):
    tokens, raster = _pgm_tokens(data, 4, path)
    (magic, _), *fields = tokens
    if magic != b"P5":
        raise FormatError(f"not a binary PGM (magic {magic[:8]!r})", offset=0, path=path)
    values = []
    for tok, off in fields:
        if not re.fullmatch(rb"[0-9]{1,10}", tok):
            raise FormatError(f"invalid PGM header field {tok[:16]!r}", offset=off, path=path)
        values.append(int(tok))
    width, height, maxval = values
    if width < 1 or height < 1:
        raise FormatError(f"invalid PGM size {width}x{height}", offset=fields[0][1], path=path)
    if not 0 < maxval < 256:
        raise FormatError(f"only 8-bit PGM supported, maxval={maxval}", offset=fields[2][1], path=path)
    need = width * height
    have = len(data) - raster
    if have < need:
        raise FormatError(f"truncated raster: {have} of {need} bytes", offset=raster + have, path=path)
    pixels = np.frombuffer(data, dtype=np.uint8, count=need, offset=raster).reshape(height, width)
    if np.any(pixels > maxval):
        bad = int(np.argmax(pixels.ravel() > maxval))
        raise FormatError(f"pixel value exceeds maxval {maxval}", offset=raster + bad, path=path)
    return np.asfortranarray(pixels / float(maxval))


def parse_csv(data, path=None):
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"CSV is not valid UTF-8: {exc.reason}", offset=exc.start, path=path) from None
    rows = []
    width = None
    offset = 0
    for lineno, line in enumerate(text.splitlines(keepends=True), start=1):
        stripped = line.strip()
        if stripped:
            cells = stripped.split(",")
            try:
                row = [float(c) for c in cells]
            except ValueError:
                raise FormatError(f"non-numeric value on line {lineno}", offset=offset, path=path) from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise FormatError(
                    f"line {lineno} has {len(row)} fields, expected {width}", offset=offset, path=path
                )
            if not all(math.isfinite(x) for x in row):
                raise ValidationError(f"non-finite value on line {lineno} of {path}")
            rows.append(row)
        offset += len(line.encode("utf-8"))
    if not rows:
        raise FormatError("empty CSV", offset=0, path=path)
    # a final row without its newline is taken as a cut-off file
    if not text.endswith(("\n", "\r")):
        raise FormatError("truncated CSV: last line has no terminating newline", offset=len(data), path=path)
    return as_snapshots(np.array(rows, dtype=np.float64), name=str(path or "matrix"))


def write_matrix(X, path, format=None):
    """Write ``X`` so that :func:`read_matrix` recovers it.

    CSV uses 17 significant digits (lossless for ``float64``). PGM output
    clamps values into ``[0, 1]`` with a warning and scales to 0..255.
    """
    fmt = _check_format(format, path)
    X = as_snapshots(X)
    path = Path(path)
    try:
        if fmt == "messbin":
            m, n = X.shape
            with open(path, "wb") as fh:
                fh.write(_HEADER.pack(MAGIC, VERSION, m, n))
                fh.write(np.asfortranarray(X).astype("<f8").tobytes(order="F"))
        elif fmt == "csv":
            buf = io.StringIO()
            for row in X:
                buf.write(",".join(f"{x:.17g}" for x in row))
                buf.write("\n")
            path.write_text(buf.getvalue())
        else:
            if X.min() < 0 or X.max() > 1:
                log.warning("clamping values outside [0, 1] for PGM output %s", path)
            pixels = np.rint(np.clip(X, 0.0, 1.0) * 255.0).astype(np.uint8)
            h, w = pixels.shape
            with open(path, "wb") as fh:
                fh.write(b"P5\n%d %d\n255\n" % (w, h))
                fh.write(np.ascontiguousarray(pixels).tobytes())
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {fmt} matrix: {exc.strerror}", str(path)) from exc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def sample_record(result, errors=None, cpu_seconds=None):
    """Report dictionary for a sampling run, optionally with its errors."""
    record = {
        "epsilon_abs": result.epsilon_abs,
        "epsilon_rule": result.rule.describe(),
        "selected_indices": result.selected,
        "ell": result.ell,
        "n_seen": result.n_seen,
        "trace_approximate": result.approximate,
        "max_abs_error": None,
        "max_rel_error": None,
        "cpu_seconds": dict(cpu_seconds or {}),
        "stop_index": result.stop_index,
        "horizon": None if result.horizon is None else result.horizon.as_dict(),
    }
    if errors is not None:
        record.update(error_record(errors))
    return record


def error_record(report):
    return {
        "max_abs_error": report.max_abs,
        "max_rel_error": report.max_rel,
        "error_normalization": report.normalization,
        "bound_holds": report.bound_holds,
    }


def write_report(record, path):
    """Write a report dictionary as indented JSON with sorted keys.

    ``SampleResult`` and ``ErrorReport`` instances are converted with
    :func:`sample_record` / :func:`error_record` first.
    """
    from .basis import ErrorReport
    from .sampler import SampleResult

    if isinstance(record, SampleResult):
        record = sample_record(record)
    elif isinstance(record, ErrorReport):
        record = error_record(record) | {"per_snapshot": record.per_snapshot, "eps_abs": record.eps_abs}
    text = json.dumps(_jsonable(record), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n")


def write_trace_csv(trace, path):
    """Write ``j, v_j, eta_j, h_j`` rows (1-based ``j``; ``h`` empty on the last row)."""
    n = len(trace.v)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["j", "v", "eta", "h"])
        for k in range(n):
            h = f"{trace.h[k]:.17g}" if k < n - 1 else ""
            w.writerow([k + 1, f"{trace.v[k]:.17g}", f"{trace.eta[k]:.17g}", h])
