"""Acceptance checks, one test per criterion.

Each test prints a single ``[criterion N] PASS|FAIL`` line (visible even
under output capture) and then asserts.
"""

import csv
import json
import math
import time

import numpy as np
import pytest

from mess.basis import orthonormalize, project
from mess.cli import main
from mess.datagen import gen_plateau_stream, gen_test_image
from mess.errors import FormatError
from mess.matio import parse_csv, parse_messbin, parse_pgm, read_matrix, write_matrix
from mess.metrics import entropy_trace, pairwise_distances, recurrence_matrix
from mess.pod import pod_basis, svd
from mess.sampler import StopConfig, horizon_bound, mess_sample

GRID = [round(0.01 * k, 2) for k in range(1, 26)]


@pytest.fixture
def report(capsys):
    def _report(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} {title}: {detail}")
        assert ok, detail

    return _report


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


# 1 ---------------------------------------------------------------------------


def test_criterion_1_recursion_oracle(report):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst, bad_delta = 0.0, 0
    for _ in range(200):
        m, n = int(rng.integers(1, 65)), int(rng.integers(1, 301))
        X = rng.standard_normal((m, n)).cumsum(axis=1) if rng.random() < 0.5 else rng.standard_normal((m, n))
        D = pairwise_distances(X)
        R = recurrence_matrix(D, rng.uniform(0.01, 1.2) * max(D.max(), 1e-6))
        tr = entropy_trace(R)
        # direct leading-block sums, one block at a time
        direct = np.array([R[:j, :j].sum() / j**2 for j in range(1, n + 1)])
        worst = max(worst, float(np.max(np.abs(tr.v - direct) / direct)))
        j = np.arange(1, n)
        bad_delta += int(np.sum((tr.delta % 2 != 1) | (tr.delta < 1) | (tr.delta > 2 * j + 1)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and bad_delta == 0 and elapsed < 60
    report(1, "recursion oracle", ok, f"max rel diff {worst:.2e}, delta violations {bad_delta}, {elapsed:.1f} s")


# 2 ---------------------------------------------------------------------------


def test_criterion_2_separation_equivalence(report):
    rng = np.random.default_rng(2)
    mismatches, non_identity, seen = 0, 0, {True: 0, False: 0}
    for k in range(200):
        X = rng.standard_normal((int(rng.integers(1, 6)), int(rng.integers(2, 40))))
        D = pairwise_distances(X)
        off = D[~np.eye(D.shape[0], dtype=bool)]
        # half the cases use a radius below the closest pair so both outcomes occur
        eps = rng.uniform(0.2, 0.99) * off.min() if k % 2 else rng.uniform(0.05, 1.0) * D.max()
        increasing = entropy_trace(recurrence_matrix(D, eps)).is_strictly_increasing()
        separated = bool(np.all(off >= eps))
        mismatches += increasing != separated
        seen[separated] += 1
        sel = mess_sample(X, eps).selected
        Rs = recurrence_matrix(D[np.ix_(sel, sel)], eps)
        non_identity += not np.array_equal(Rs, np.eye(sel.size, dtype=bool))
    ok = mismatches == 0 and non_identity == 0 and min(seen.values()) > 0
    report(2, "separation iff strict entropy growth", ok,
           f"{mismatches} mismatches, {non_identity} non-identity subsets, separated/not {seen[True]}/{seen[False]}")


# 3 and 6 ---------------------------------------------------------------------


@pytest.fixture(scope="module")
def sweeps(tmp_path_factory):
    root = tmp_path_factory.mktemp("sweeps")
    img = root / "test_image.pgm"
    write_matrix(gen_test_image(96, 128, seed=0), img)
    sources = {
        "brusselator": ["--generate", "brusselator", "--grid-points", "100", "--n-snapshots", "500"],
        "random-walk": ["--generate", "random-walk", "-m", "50", "-n", "200"],
        "image": ["--input", str(img)],
    }
    out = {}
    for name, src in sources.items():
        d = root / name
        code = main(["sweep", *src, "--eps-list", ",".join(map(str, GRID)), "--out", str(d)])
        assert code == 0
        out[name] = _rows(d / "sweep.csv")
    return out


def test_criterion_3_error_bound(report, sweeps):
    lines, ok = [], True
    for name, rows in sweeps.items():
        assert [float(r["eps"]) for r in rows] == GRID
        abs_ok = all(float(r["max_abs_error"]) < float(r["eps_abs"]) * (1 + 1e-9) for r in rows)
        below_line = all(float(r["max_rel_error"]) < float(r["eps"]) for r in rows)
        ratio = max(float(r["max_abs_error"]) / float(r["eps_abs"]) for r in rows)
        ok &= abs_ok and below_line
        lines.append(f"{name} max err/eps {ratio:.3f}")
    report(3, "error below eps on every dataset and radius", ok, "; ".join(lines))


def test_criterion_6_monotone_reduction(report, sweeps):
    detail, violations = [], 0
    for name, rows in sweeps.items():
        ells = [int(r["ell"]) for r in rows]
        violations += sum(b > a for a, b in zip(ells, ells[1:]))
        detail.append(f"{name} ell {ells[0]}->{ells[-1]}")
    report(6, "basis size non-increasing in eps", violations == 0, f"{violations} violations; " + "; ".join(detail))


# 4 ---------------------------------------------------------------------------


def _scan(j, v):
    a, b = 1.0 - v, j * v - 0.5 * (1.0 - v)
    i = 0
    while (i + 1) * a < b:
        i += 1
    return i


def test_criterion_4_horizon(report):
    rng = np.random.default_rng(4)
    stop = StopConfig(potential_tol=1e-3, window=10)
    streams, checked, worst, no_stop = 0, 0, 0.0, 0
    for s in range(50):
        eps = float(rng.uniform(0.5, 2.0))
        X, _ = gen_plateau_stream(int(rng.integers(3, 20)), int(rng.integers(2, 9)), 600, eps, seed=s,
                                  noise=float(rng.uniform(0.3, 0.95)))
        res = mess_sample(X, eps, stop)
        if res.stop_index is None:
            no_stop += 1
            continue
        streams += 1
        B = orthonormalize(X[:, res.selected])
        j_star, i_max = res.horizon.j_star, res.horizon.i_max
        last = X.shape[1] if math.isinf(i_max) else min(X.shape[1], j_star + int(i_max))
        future = X[:, j_star:last]
        if future.shape[1]:
            err = np.linalg.norm(future - project(B, future), axis=0).max()
            worst = max(worst, err / eps)
            checked += future.shape[1]
    mismatches = 0
    for _ in range(1000):
        j = int(rng.integers(2, 500))
        v = float(rng.uniform(1.0 / j, 0.999))
        mismatches += horizon_bound(j, v).i_max != _scan(j, v)
    ok = no_stop == 0 and worst < 4 and mismatches == 0
    report(4, "horizon bound", ok,
           f"{streams} streams stopped, {checked} future snapshots, max err/eps {worst:.3f}, "
           f"{mismatches}/1000 arithmetic mismatches")


# 5 ---------------------------------------------------------------------------


def test_criterion_5_pod_optimality(report):
    rng = np.random.default_rng(5)
    worst_ey = 0.0
    for _ in range(100):
        m, n = int(rng.integers(2, 60)), int(rng.integers(2, 51))
        X = rng.standard_normal((m, n)) * (0.8 ** np.arange(n))
        F = svd(X)
        ell = int(rng.integers(1, F.rank() + 1))
        err2 = np.linalg.norm(X - project(pod_basis(X, ell=ell, factors=F), X)) ** 2
        tail = float(np.sum(F.sigma[ell:] ** 2))
        worst_ey = max(worst_ey, abs(err2 - tail) / max(tail, np.sum(F.sigma**2) * 1e-16))
    losses, worst_gap = 0, 0.0
    for _ in range(100):
        m, n = int(rng.integers(2, 31)), int(rng.integers(2, 40))
        X = rng.standard_normal((m, n)) * (0.8 ** np.arange(n))
        F = svd(X)
        # ell < m: a full-space basis is optimal for every competitor alike
        ell = int(rng.integers(1, min(m - 1, F.rank()) + 1))
        best = np.linalg.norm(X - project(pod_basis(X, ell=ell, factors=F), X)) ** 2
        worst_gap = max(worst_gap, abs(best - np.sum(F.sigma[ell:] ** 2)))
        slack = 1e-12 * np.sum(F.sigma**2)
        for _ in range(100):
            Q = orthonormalize(rng.standard_normal((m, ell)))
            losses += np.linalg.norm(X - project(Q, X)) ** 2 < best - slack
    ok = worst_ey <= 1e-10 and losses == 0 and worst_gap <= 1e-8
    report(5, "POD residual identity and optimality", ok,
           f"identity rel diff {worst_ey:.2e}, {losses} competitor wins, tail gap {worst_gap:.2e}")


# 7 ---------------------------------------------------------------------------


def test_criterion_7_matched_comparison(report, tmp_path):
    code = main(["compare", "--generate", "random-walk", "-m", "50000", "-n", "1000", "--eps", "0.1",
                 "--distance", "gram", "--qr", "householder", "--threads", "1", "--out", str(tmp_path)])
    doc = json.loads((tmp_path / "report.json").read_text()) if code == 0 else {}
    ratio = doc.get("offline_cpu_ratio_mess_over_svd")
    ok = code == 0 and doc["mess"]["ell"] == doc["svd"]["ell"] and ratio is not None and ratio < 1
    detail = (f"ell {doc['ell']}, MESS {doc['mess']['offline_cpu_seconds']:.2f} s, "
              f"SVD {doc['svd']['offline_cpu_seconds']:.2f} s, ratio {ratio:.3f}") if doc else f"exit {code}"
    report(7, "MESS+QR offline faster than full SVD at equal ell", ok, detail)


# 8 ---------------------------------------------------------------------------


def test_criterion_8_rom(report, tmp_path):
    code = main(["rom", "--grid-points", "100", "--n-snapshots", "500", "--eps", "0.1", "--out", str(tmp_path)])
    rows = _rows(tmp_path / "rom_error.csv") if code == 0 else []
    mess_err = np.array([float(r["mess_rel_error"]) for r in rows])
    pod_err = np.array([float(r["pod_rel_error"]) for r in rows])
    doc = json.loads((tmp_path / "report.json").read_text()) if code == 0 else {}
    ok = code == 0 and len(rows) == 500 and np.all(np.isfinite(mess_err)) and np.all(np.isfinite(pod_err))
    detail = (f"ell {doc['ell']}, max rel error MESS {mess_err.max():.2e}, POD {pod_err.max():.2e}"
              if ok else f"exit {code}")
    report(8, "Galerkin ROM finite for both bases", ok, detail)


# 9 ---------------------------------------------------------------------------


def test_criterion_9_io(report, tmp_path):
    rng = np.random.default_rng(9)
    failures = []
    files = {"messbin": [], "pgm": [], "csv": []}
    for k in range(20):
        m, n = (int(x) for x in rng.integers(1, 20, size=2))
        X = rng.standard_normal((m, n)) * 10.0 ** rng.integers(-300, 300, size=(m, n))
        for fmt, ext in (("messbin", "mess"), ("csv", "csv")):
            p = tmp_path / f"{k}.{ext}"
            write_matrix(X, p)
            Y = read_matrix(p)
            if fmt == "messbin" and Y.tobytes(order="F") != np.asfortranarray(X).tobytes(order="F"):
                failures.append(f"messbin not bitwise ({k})")
            if fmt == "csv" and not np.array_equal(Y, X):
                failures.append(f"csv not exact ({k})")
            files[fmt].append(p.read_bytes())
        img = rng.uniform(0, 1, (m, n))
        p = tmp_path / f"{k}.pgm"
        write_matrix(img, p)
        raw = p.read_bytes()
        header = b"P5\n%d %d\n255\n" % (n, m)
        if not raw.startswith(header) or len(raw) != len(header) + m * n:
            failures.append(f"pgm header ({k})")
        files["pgm"].append(raw)

    parsers = {"messbin": parse_messbin, "pgm": parse_pgm, "csv": parse_csv}
    cases, crashes, silent = 0, 0, 0
    for _ in range(10_000):
        fmt = ("messbin", "pgm", "csv")[cases % 3]
        data = files[fmt][int(rng.integers(len(files[fmt])))]
        cut = int(rng.integers(0, len(data)))
        if fmt == "csv":
            # a cut right after a newline is a shorter, valid file; move it inside the row
            while cut > 0 and data[cut - 1 : cut] == b"\n":
                cut -= 1
        cases += 1
        try:
            parsers[fmt](data[:cut])
            silent += 1
        except FormatError as exc:
            if exc.offset is None:
                failures.append(f"{fmt} rejection without offset")
        except Exception as exc:  # noqa: BLE001 - any other exception is a crash
            crashes += 1
            failures.append(f"{fmt}: {type(exc).__name__}: {exc}")
    ok = not failures and crashes == 0 and silent == 0
    report(9, "I/O round-trips and truncation fuzzing", ok,
           f"{cases} truncated files, {cases - silent - crashes} rejected with offset, {crashes} crashes, "
           f"{silent} accepted" + (f"; {failures[:3]}" if failures else ""))
