"""Flat-file formats: point sets, graphs and label sets.

Point-set files::

    p n d
    mod c0 c1 ... cn        (only when n > 1; optional)
    x_1 x_2 ... x_d         (one point per line)

Each coordinate is a comma-joined coefficient list, low degree first (a
single residue for prime fields).  Blank lines and ``#`` comments are
ignored; duplicate points are rejected.
"""
from __future__ import annotations

from pathlib import Path

from .errors import FormatError
from .field import FiniteField, PointSet
from .graphs import Graph, LabelSet


def _rows(text: str) -> list[list[str]]:
    rows = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    return [r for r in rows if r]


def parse_point_set(text: str, field: FiniteField | None = None) -> PointSet:
    rows = _rows(text)
    if not rows or len(rows[0]) != 3:
        raise FormatError("point-set file must start with 'p n d'")
    try:
        p, n, d = (int(v) for v in rows[0])
    except ValueError:
        raise FormatError(f"bad header {' '.join(rows[0])!r}") from None
    body = rows[1:]
    modulus = None
    if body and body[0][0] == "mod":
        try:
            modulus = tuple(int(c) for c in body[0][1:])
        except ValueError:
            raise FormatError("bad modulus line") from None
        body = body[1:]
    f = FiniteField(p, n, modulus)
    if field is not None and field != f:
        raise FormatError(f"file describes {f}, expected {field}")
    points = []
    for r in body:
        if len(r) != d:
            raise FormatError(f"point {' '.join(r)!r} does not have {d} coordinates")
        try:
            coeffs = [[int(c) for c in item.split(",")] for item in r]
        except ValueError:
            raise FormatError(f"bad point {' '.join(r)!r}") from None
        for cs in coeffs:
            if len(cs) > n or any(not 0 <= c < p for c in cs):
                raise FormatError(f"coefficients {cs} do not describe an element of {f}")
        points.append(tuple(f.from_coeffs(cs) for cs in coeffs))
    if len(set(points)) != len(points):
        raise FormatError("duplicate point")
    return PointSet(f, d, points)


def format_point_set(A: PointSet) -> str:
    f = A.field
    lines = [f"{f.p} {f.n} {A.d}"]
    if f.n > 1:
        lines.append("mod " + " ".join(str(c) for c in f.modulus))
    for pt in A.points:
        lines.append(" ".join(",".join(str(c) for c in f.to_coeffs(code)) for code in pt))
    return "\n".join(lines) + "\n"


def read_point_set(path, field: FiniteField | None = None) -> PointSet:
    return parse_point_set(Path(path).read_text(), field)


def write_point_set(path, A: PointSet) -> None:
    Path(path).write_text(format_point_set(A))


def read_graph(path) -> Graph:
    return Graph.from_text(Path(path).read_text())


def write_graph(path, G: Graph) -> None:
    Path(path).write_text(G.to_text())


def read_label_set(path, graph: Graph | None = None) -> LabelSet:
    return LabelSet.from_text(Path(path).read_text(), graph)


def write_label_set(path, labels: LabelSet) -> None:
    Path(path).write_text(labels.to_text())
