"""File formats: headered CSV artifacts, tensor/moment serialization,
flat config files with environment overrides, and run manifests.

Every artifact starts with ``# key = value`` comment lines echoing the full
configuration, and numbers are written with 17 significant digits so values
round-trip exactly through their decimal representation.
"""

from __future__ import annotations

import json
import os
import platform
import sys

import numpy as np

from .bloch import BlochTensor

ENV_PREFIX = "TMSDETECT_"


def fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path, header_pairs, columns, rows):
    """CSV with a comment header; ``rows`` is an iterable of tuples."""
    with open(path, "w") as fh:
        for key, val in header_pairs:
            fh.write(f"# {key} = {val}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(str(c) if isinstance(c, str) else fmt(c) for c in row))
            fh.write("\n")


def read_csv(path):
    """Returns (header dict, column names, list of string rows)."""
    header = {}
    rows = []
    columns = None
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition("=")
                header[key.strip()] = val.strip()
                continue
            if columns is None:
                columns = line.split(",")
            else:
                rows.append(line.split(","))
    return header, columns or [], rows


# ---------------------------------------------------------------------------
# tensors and moments

def write_tensor(path, tensor, header_pairs=()):
    rows = []
    for idx in sorted(tensor.values):
        rows.append(("".join(str(m) for m in idx), tensor.values[idx]))
    pairs = list(header_pairs) + [("kind", tensor.kind), ("n_qubits", tensor.n_qubits)]
    write_csv(path, pairs, ["index", "value"], rows)


def read_tensor(path):
    header, columns, rows = read_csv(path)
    if columns[:2] != ["index", "value"]:
        raise ValueError(f"{path}: expected columns index,value")
    kind = header.get("kind", "sym")
    values = {}
    n_qubits = int(header.get("n_qubits", 0))
    for sidx, sval in rows:
        idx = tuple(int(ch) for ch in sidx)
        values[idx] = float(sval)
        n_qubits = max(n_qubits, len(idx))
    return BlochTensor(kind, n_qubits, values)


def write_moments(path, moments, header_pairs=()):
    n = len(next(iter(moments)))
    cols = [f"alpha{i + 1}" for i in range(n)] + ["value"]
    rows = [tuple(a) + (v,) for a, v in sorted(moments.items())]
    write_csv(path, header_pairs, cols, rows)


def read_moments(path):
    header, columns, rows = read_csv(path)
    n = len(columns) - 1
    out = {}
    for row in rows:
        out[tuple(int(v) for v in row[:n])] = float(row[n])
    return out


# ---------------------------------------------------------------------------
# configuration

def parse_config_text(text):
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, val = line.partition("=")
        out[key.strip()] = val.strip()
    return out


def load_config(path=None, env=None):
    """Flat key = value config; environment variables override the file.

    An environment variable TMSDETECT_<KEY> (upper-case) overrides key <key>.
    """
    cfg = {}
    if path:
        with open(path) as fh:
            cfg.update(parse_config_text(fh.read()))
    env = os.environ if env is None else env
    for key, val in env.items():
        if key.startswith(ENV_PREFIX):
            cfg[key[len(ENV_PREFIX):].lower()] = val
    return cfg


def write_manifest(path, command, config, wall_time_s, artifacts):
    manifest = {
        "command": command,
        "config": {k: str(v) for k, v in config.items()},
        "versions": {
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "platform": platform.platform(),
            "tmsdetect": _pkg_version(),
        },
        "wall_time_s": round(wall_time_s, 3),
        "artifacts": sorted(artifacts),
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _pkg_version():
    from . import __version__

    return __version__
