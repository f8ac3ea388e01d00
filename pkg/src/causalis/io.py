"""JSON and CSV exchange formats.

Operators travel as {"factors": [{"label", "dim"}...], "entries": [[re, im],
...]} with row-major entries; floats are emitted at full precision so a
round-trip is bit-exact. Processes, instruments, games, verdicts, and
certificates wrap that format. Probability tables travel as CSV with one
row per (settings, outcomes) combination.
"""
from __future__ import annotations

import io as _io
import json

import numpy as np

from .causality import CausalGame, CausalityVerdict
from .instruments import Instrument, ProbabilityTable
from .process import LabeledSpace, Party, ProcessMatrix
from .separability import SeparabilityCertificate
from .tensor_core import HermitianOperator, Operator, _canonicalize

HERM_DETECT_TOL = 1e-12


# ---------------------------------------------------------------------------
# operators

def operator_to_json(op: Operator) -> dict:
    return {
        "factors": [{"label": f.label, "dim": f.dim} for f in op.space.factors],
        "entries": [[float(z.real), float(z.imag)] for z in op.mat.ravel()],
    }


def operator_from_json(d: dict) -> Operator:
    factors = [LabeledSpace(f["label"], f["dim"]) for f in d["factors"]]
    dim = 1
    for f in factors:
        dim *= f.dim
    entries = np.asarray(d["entries"], dtype=float)
    if entries.shape != (dim * dim, 2):
        raise ValueError(
            f"expected {dim * dim} [re, im] entries, got shape {entries.shape}"
        )
    mat = (entries[:, 0] + 1j * entries[:, 1]).reshape(dim, dim)
    space, mat = _canonicalize(factors, mat)
    herm = float(np.max(np.abs(mat - mat.conj().T))) <= HERM_DETECT_TOL if dim else True
    return HermitianOperator(space, mat) if herm else Operator(space, mat)


# ---------------------------------------------------------------------------
# processes

def _factors_to_json(factors: tuple[LabeledSpace, ...]):
    items = [{"label": f.label, "dim": f.dim} for f in factors]
    return items[0] if len(items) == 1 else items


def _factors_from_json(node) -> tuple[LabeledSpace, ...]:
    if isinstance(node, dict):
        node = [node]
    return tuple(LabeledSpace(f["label"], f["dim"]) for f in node)


def process_to_json(p: ProcessMatrix) -> dict:
    return {
        "parties": [
            {
                "name": party.name,
                "input": _factors_to_json(party.inputs),
                "output": _factors_to_json(party.outputs),
            }
            for party in p.parties
        ],
        "w": operator_to_json(p.w),
    }


def process_from_json(d: dict) -> ProcessMatrix:
    parties = tuple(
        Party(q["name"], _factors_from_json(q["input"]), _factors_from_json(q["output"]))
        for q in d["parties"]
    )
    w = operator_from_json(d["w"])
    if not isinstance(w, HermitianOperator):
        w = HermitianOperator(w.space, w.mat)  # raises with the deviation
    return ProcessMatrix(parties, w)


# ---------------------------------------------------------------------------
# instruments

def instrument_to_json(ins: Instrument) -> dict:
    return {
        "party": ins.party.name,
        "settings": ins.settings,
        "outcomes": ins.outcomes,
        "chois": {
            f"{x},{a}": operator_to_json(ins.choi(x, a))
            for x in range(ins.settings)
            for a in range(ins.outcomes)
        },
    }


def instrument_from_json(d: dict, parties) -> Instrument:
    """Rebuild an instrument; `parties` maps names to Party objects (the
    JSON stores only the party's name, not its spaces)."""
    if not isinstance(parties, dict):
        parties = {p.name: p for p in parties}
    party = parties[d["party"]]
    settings, outcomes = int(d["settings"]), int(d["outcomes"])
    rows = []
    for x in range(settings):
        row = []
        for a in range(outcomes):
            op = operator_from_json(d["chois"][f"{x},{a}"])
            row.append(HermitianOperator(op.space, op.mat))
        rows.append(tuple(row))
    return Instrument(party, settings, outcomes, tuple(rows))


# ---------------------------------------------------------------------------
# probability tables

def table_to_csv(t: ProbabilityTable) -> str:
    buf = _io.StringIO()
    header = [f"x_{name}" for name in t.parties] + [f"a_{name}" for name in t.parties]
    buf.write(",".join(header + ["p"]) + "\n")
    for idx in np.ndindex(*t.values.shape):
        cells = [str(i) for i in idx] + [format(t.values[idx], ".17g")]
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def table_from_csv(text: str) -> ProbabilityTable:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if len(lines) < 2:
        raise ValueError("table CSV needs a header row and at least one data row")
    header = lines[0].split(",")
    if header[-1] != "p":
        raise ValueError("last column must be the probability column 'p'")
    n = (len(header) - 1) // 2
    parties = tuple(h[2:] for h in header[:n])
    if [f"x_{q}" for q in parties] != header[:n] or [f"a_{q}" for q in parties] != header[n:-1]:
        raise ValueError(f"header {header} is not x_<party>.., a_<party>.., p")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        rows.append(([int(c) for c in cells[:-1]], float(cells[-1])))
    idxmax = np.max([idx for idx, _ in rows], axis=0)
    shape = tuple(int(m) + 1 for m in idxmax)
    vals = np.full(shape, np.nan)
    for idx, pr in rows:
        vals[tuple(idx)] = pr
    if np.isnan(vals).any():
        raise ValueError("table rows do not cover the full settings/outcomes grid")
    return ProbabilityTable(parties, shape[:n], shape[n:], vals)


# ---------------------------------------------------------------------------
# games, verdicts, certificates

def game_to_json(g: CausalGame) -> dict:
    wins = [
        [int(i) for i in idx]
        for idx in np.ndindex(*g.win.shape)
        if g.win[idx] == 1.0
    ]
    return {
        "settings": list(g.settings),
        "outcomes": list(g.outcomes),
        "input_dist": g.input_dist.tolist(),
        "wins": wins,
    }


def game_from_json(d: dict) -> CausalGame:
    settings = tuple(int(s) for s in d["settings"])
    outcomes = tuple(int(o) for o in d["outcomes"])
    win = np.zeros(settings + outcomes)
    for idx in d["wins"]:
        win[tuple(int(i) for i in idx)] = 1.0
    return CausalGame(settings, outcomes, np.asarray(d["input_dist"], dtype=float), win)


def verdict_to_json(v: CausalityVerdict) -> dict:
    return {
        "causal": v.causal,
        "residual": v.residual,
        "q_A_before_B": v.q_A_before_B,
        "weights": None if v.weights is None else [float(w) for w in v.weights],
    }


def certificate_to_json(c: SeparabilityCertificate) -> dict:
    return {
        "separable": c.separable,
        "q": c.q,
        "residual": c.residual,
        "iterations": c.iterations,
        "witness": None if c.witness is None else operator_to_json(c.witness),
        "witness_verified": c.witness_verified,
    }


# ---------------------------------------------------------------------------
# files

def save_json(obj: dict, path: str):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)
