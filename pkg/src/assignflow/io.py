"""File formats: PGM/PPM and CSV inputs, CSV and key-value outputs."""

import csv
from pathlib import Path

import numpy as np

from .errors import DataError


def _pnm_tokens(data):
    tokens, pos = [], 0
    # header: magic, width, height, maxval; comments start with '#'
    while len(tokens) < 4:
        while pos < len(data) and chr(data[pos]).isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not chr(data[pos]).isspace():
            pos += 1
        if start == pos:
            raise DataError("truncated PNM header")
        tokens.append(data[start:pos].decode("ascii"))
    return tokens, pos + 1


def read_pnm(path):
    """Read a PGM/PPM image (P2, P3, P5, P6) with maxval 255.

    Returns ``(features, height, width)``; features are ``(h*w, c)`` floats
    in ``[0, 1]`` in row-major pixel order.
    """
    data = Path(path).read_bytes()
    (magic, w, h, maxval), body = _pnm_tokens(data)
    if magic not in ("P2", "P3", "P5", "P6"):
        raise DataError(f"unsupported PNM type {magic!r}")
    w, h, maxval = int(w), int(h), int(maxval)
    if maxval != 255:
        raise DataError(f"only maxval 255 is supported, got {maxval}")
    c = 3 if magic in ("P3", "P6") else 1
    count = w * h * c
    if magic in ("P5", "P6"):
        raw = np.frombuffer(data[body:body + count], dtype=np.uint8)
    else:
        text = b"\n".join(line.split(b"#")[0] for line in data[body:].splitlines())
        raw = np.array(text.split(), dtype=np.int64)
    if raw.size < count:
        raise DataError(f"PNM body has {raw.size} samples, expected {count}")
    return raw[:count].reshape(h * w, c).astype(float) / 255.0, h, w


def write_ppm(path, rgb, height, width):
    """Binary PPM from ``(h*w, 3)`` values in ``[0, 1]``."""
    arr = np.clip(np.round(np.asarray(rgb) * 255), 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        f.write(arr.reshape(height, width, 3).tobytes())


def read_feature_csv(path):
    """Per-vertex feature rows; a non-numeric first line is treated as a header."""
    with open(path, newline="") as f:
        rows = [r for r in csv.reader(f) if r and any(x.strip() for x in r)]
    if not rows:
        raise DataError(f"{path}: no data")
    try:
        [float(x) for x in rows[0]]
    except ValueError:
        rows = rows[1:]
    try:
        X = np.array([[float(x) for x in r] for r in rows])
    except ValueError as e:
        raise DataError(f"{path}: {e}") from None
    return X


def read_edges_csv(path):
    """Edge list ``i,k,omega`` (header optional); returns ``(m, entries)``."""
    entries = []
    with open(path, newline="") as f:
        for lineno, r in enumerate(csv.reader(f), start=1):
            if not r or not "".join(r).strip():
                continue
            try:
                entries.append((int(r[0]), int(r[1]), float(r[2])))
            except (ValueError, IndexError):
                if lineno == 1:
                    continue
                raise DataError(f"{path}:{lineno}: expected i,k,omega") from None
    if not entries:
        raise DataError(f"{path}: no edges")
    m = 1 + max(max(i, k) for i, k, _ in entries)
    return m, entries


def write_labeling_csv(path, labels, shape=None):
    """Integer labels, one grid row per line (or one vertex per line)."""
    labels = np.asarray(labels, dtype=int)
    grid = labels.reshape(shape) if shape is not None else labels.reshape(-1, 1)
    np.savetxt(path, grid, fmt="%d", delimiter=",")


def read_labeling_csv(path):
    return np.loadtxt(path, dtype=int, delimiter=",", ndmin=2)


def write_kv(path, mapping):
    with open(path, "w") as f:
        if isinstance(mapping, str):
            f.write(mapping)
        else:
            for k, v in mapping.items():
                f.write(f"{k}={v}\n")


def read_kv(path):
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k] = v
    return out


def write_trajectory_csv(path, traj):
    """Long format ``t,i,j,value``."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["t", "i", "j", "value"])
        for t, S in zip(traj.times, traj.states):
            for (i, j), v in np.ndenumerate(S):
                w.writerow([f"{t:.10g}", i, j, f"{v:.17g}"])


def write_diagnostics_csv(path, traj):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["t", "avg_entropy", "lyapunov", "min_rowmax"])
        for row in zip(traj.times, traj.avg_entropy, traj.lyapunov, traj.min_rowmax):
            w.writerow([f"{x:.17g}" for x in row])


def write_spectrum_csv(path, eigenvalues):
    lam = np.asarray(eigenvalues, dtype=complex)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["re", "im"])
        for z in lam:
            w.writerow([f"{z.real:.17g}", f"{z.imag:.17g}"])


def write_rows_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
