"""Parsers and writers for the file formats the CLI speaks.

All parsers take text and return validated domain objects, raising
:class:`~structent.errors.ParseError` with a line/column anchor for
malformed input.  Writers round-trip: parsing their output reproduces an
equal object.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .alphabet import Alphabet, Distribution, Partition, PartitionStructure
from .errors import ParseError, ValidationError
from .ultrametric import DistanceMatrix, TreeNode, UltrametricTree, leaf, node

AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"
GAP = "-"


@dataclass(frozen=True)
class Alignment:
    """Named equal-length rows over the amino-acid alphabet plus gap."""

    names: tuple[str, ...]
    rows: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.names) != len(self.rows):
            raise ValidationError("one name per row required")
        if not self.rows:
            raise ValidationError("alignment must have at least one row")
        width = len(self.rows[0])
        allowed = set(AMINO_ACIDS) | {GAP}
        for name, row in zip(self.names, self.rows):
            if len(row) != width:
                raise ValidationError(
                    f"row {name!r} has length {len(row)}, expected {width}"
                )
            for j, ch in enumerate(row):
                if ch not in allowed:
                    raise ValidationError(
                        f"row {name!r} column {j + 1}: invalid character {ch!r}"
                    )

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_cols(self) -> int:
        return len(self.rows[0])

    def column(self, j: int) -> str:
        return "".join(row[j] for row in self.rows)


def _clean_residues(seq: str) -> str:
    return seq.upper().replace(".", GAP)


def parse_fasta(text: str) -> Alignment:
    names: list[str] = []
    chunks: list[list[str]] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(">"):
            name = line[1:].split()[0] if line[1:].strip() else ""
            if not name:
                raise ParseError(f"line {ln}: empty sequence name")
            names.append(name)
            chunks.append([])
        else:
            if not names:
                raise ParseError(f"line {ln}: sequence data before any '>' header")
            chunks[-1].append(_clean_residues(line.replace(" ", "")))
    if not names:
        raise ParseError("no FASTA records found")
    return Alignment(tuple(names), tuple("".join(c) for c in chunks))


def parse_stockholm(text: str) -> Alignment:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# STOCKHOLM"):
        raise ParseError("line 1: missing '# STOCKHOLM' header")
    seqs: dict[str, list[str]] = {}
    order: list[str] = []
    for ln, raw in enumerate(lines[1:], start=2):
        line = raw.rstrip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("//"):
            break
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {ln}: expected 'name sequence', got {line!r}")
        name, seq = parts
        if name not in seqs:
            seqs[name] = []
            order.append(name)
        seqs[name].append(_clean_residues(seq))
    if not order:
        raise ParseError("no sequence lines found")
    return Alignment(tuple(order), tuple("".join(seqs[n]) for n in order))


# ------------------------------------------------------------------ Newick


class _NewickCursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str) -> ParseError:
        return ParseError(f"newick position {self.pos + 1}: {msg}")

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        ch = self.peek()
        self.pos += 1
        return ch

    def skip_ws(self) -> None:
        while self.peek() and self.peek() in " \t\r\n":
            self.pos += 1


def _parse_newick_node(cur: _NewickCursor):
    """Returns (children, name, length) with length None when absent."""
    cur.skip_ws()
    children = []
    if cur.peek() == "(":
        cur.take()
        while True:
            children.append(_parse_newick_node(cur))
            cur.skip_ws()
            ch = cur.take()
            if ch == ",":
                continue
            if ch == ")":
                break
            raise cur.error(f"expected ',' or ')', got {ch!r}")
    name_chars = []
    while cur.peek() not in "():,;" and cur.peek() not in " \t\r\n" and cur.peek():
        name_chars.append(cur.take())
    name = "".join(name_chars)
    length = None
    cur.skip_ws()
    if cur.peek() == ":":
        cur.take()
        num = []
        while cur.peek() and cur.peek() in "0123456789.eE+-":
            num.append(cur.take())
        try:
            length = float("".join(num))
        except ValueError:
            raise cur.error("malformed branch length") from None
    return (children, name, length)


def parse_newick(text: str, lengths: str = "arc") -> UltrametricTree:
    """Parse a Newick tree with branch lengths into an ultrametric tree.

    ``lengths="arc"`` reads branch lengths as physical arc lengths, so a
    node's height is twice its distance to the leaves below it (leaf-to-leaf
    distance through a node then equals the node height).  ``lengths="L"``
    reads them as height drops directly.  All leaves must be equidistant
    from the root.
    """
    if lengths not in ("arc", "L"):
        raise ValidationError("lengths must be 'arc' or 'L'")
    cur = _NewickCursor(text)
    root = _parse_newick_node(cur)
    cur.skip_ws()
    if cur.take() != ";":
        raise cur.error("expected ';' at end of tree")
    factor = 2.0 if lengths == "arc" else 1.0

    depths: list[float] = []

    def depth_of(nd, d: float) -> None:
        children, name, length = nd
        if not children:
            depths.append(d)
            return
        for c in children:
            cl = c[2]
            if cl is None:
                raise ValidationError("newick: branch length missing on an arc")
            depth_of(c, d + cl)

    depth_of(root, 0.0)
    if not depths:
        raise ParseError("newick tree has no leaves")
    dmax, dmin = max(depths), min(depths)
    if dmax - dmin > 1e-9 * max(1.0, dmax):
        raise ValidationError(
            f"newick leaves are not equidistant from the root ({dmin} vs {dmax})"
        )

    letters: list[str] = []

    def build(nd, d: float) -> TreeNode:
        children, name, _ = nd
        if not children:
            if not name:
                raise ParseError("newick leaf without a name")
            letters.append(name)
            return leaf(name)
        height = factor * (dmax - d)
        kids = [build(c, d + c[2]) for c in children]
        return node(height, kids)

    troot = build(root, 0.0)
    return UltrametricTree(Alphabet(tuple(letters)), troot)


def tree_to_newick(T: UltrametricTree, lengths: str = "arc") -> str:
    """Serialize an ultrametric tree; inverse of :func:`parse_newick`."""
    if lengths not in ("arc", "L"):
        raise ValidationError("lengths must be 'arc' or 'L'")
    factor = 0.5 if lengths == "arc" else 1.0

    def walk(nd: TreeNode, parent_height: Optional[float]) -> str:
        if nd.is_leaf:
            body = str(nd.letter)
        else:
            body = "(" + ",".join(walk(c, nd.height) for c in nd.children) + ")"
        if parent_height is None:
            return body
        return f"{body}:{factor * (parent_height - nd.height):.12g}"

    return walk(T.root, None) + ";"


# --------------------------------------------------------------- CSV/JSON


def parse_distance_csv(text: str) -> DistanceMatrix:
    """Square matrix CSV: header row of letters, then one row per letter
    (optionally prefixed by the row letter)."""
    rows = [r.strip() for r in text.splitlines() if r.strip()]
    if not rows:
        raise ParseError("empty distance CSV")
    header = [c.strip() for c in rows[0].split(",")]
    if header and header[0] == "":
        header = header[1:]
    if not header:
        raise ParseError("line 1: no letters in header")
    n = len(header)
    if len(rows) != n + 1:
        raise ParseError(f"expected {n} data rows, found {len(rows) - 1}")
    m = np.zeros((n, n))
    for i, row in enumerate(rows[1:], start=2):
        cells = [c.strip() for c in row.split(",")]
        if len(cells) == n + 1:
            if cells[0] != header[i - 2]:
                raise ParseError(
                    f"line {i}: row label {cells[0]!r} does not match header order"
                )
            cells = cells[1:]
        if len(cells) != n:
            raise ParseError(f"line {i}: expected {n} values, found {len(cells)}")
        for j, c in enumerate(cells):
            try:
                m[i - 2, j] = float(c)
            except ValueError:
                raise ParseError(f"line {i}, column {j + 1}: not a number: {c!r}") from None
    return DistanceMatrix(Alphabet(tuple(header)), m)


def distance_to_csv(D: DistanceMatrix) -> str:
    letters = [str(a) for a in D.alphabet.letters]
    lines = ["," + ",".join(letters)]
    for a, row in zip(letters, D.matrix):
        lines.append(a + "," + ",".join(f"{x:.12g}" for x in row))
    return "\n".join(lines) + "\n"


def _load_json(text: str, what: str) -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{what}: line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(obj, dict):
        raise ParseError(f"{what}: expected a JSON object")
    return obj


def parse_distribution_json(text: str) -> Distribution:
    obj = _load_json(text, "distribution JSON")
    if "alphabet" not in obj or "probs" not in obj:
        raise ParseError("distribution JSON needs 'alphabet' and 'probs'")
    return Distribution(Alphabet(tuple(obj["alphabet"])), obj["probs"])


def distribution_to_json(P: Distribution) -> str:
    return json.dumps(
        {"alphabet": list(P.alphabet.letters), "probs": list(P.probs)}, sort_keys=True
    )


def parse_structure_json(text: str) -> PartitionStructure:
    obj = _load_json(text, "structure JSON")
    if "alphabet" not in obj or "partitions" not in obj:
        raise ParseError("structure JSON needs 'alphabet' and 'partitions'")
    alpha = Alphabet(tuple(obj["alphabet"]))
    items = []
    for k, entry in enumerate(obj["partitions"]):
        if not isinstance(entry, dict) or "measure" not in entry or "components" not in entry:
            raise ParseError(f"partition {k}: needs 'measure' and 'components'")
        items.append((Partition(alpha, entry["components"]), float(entry["measure"])))
    return PartitionStructure(alpha, items)


def structure_to_json(S: PartitionStructure) -> str:
    return json.dumps(
        {
            "alphabet": list(S.alphabet.letters),
            "partitions": [
                {"measure": m, "components": [list(c) for c in s.components]}
                for s, m in S.items()
            ],
        },
        sort_keys=True,
    )


def parse_joint_json(text: str):
    """Joint distribution JSON: row_alphabet, col_alphabet, matrix."""
    from .notions import JointDistribution

    obj = _load_json(text, "joint JSON")
    for key in ("row_alphabet", "col_alphabet", "matrix"):
        if key not in obj:
            raise ParseError(f"joint JSON needs {key!r}")
    return JointDistribution(
        Alphabet(tuple(obj["row_alphabet"])),
        Alphabet(tuple(obj["col_alphabet"])),
        obj["matrix"],
    )


def parse_points_csv(text: str) -> tuple[tuple[float, ...], Optional[tuple[float, ...]]]:
    """One column of values, or two columns (value, probability)."""
    pts: list[float] = []
    probs: list[float] = []
    two_col = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        cells = [c.strip() for c in line.split(",") if c.strip()]
        if ln == 1 and cells and not _is_number(cells[0]):
            continue  # header row
        if two_col is None:
            two_col = len(cells) == 2
        if len(cells) != (2 if two_col else 1):
            raise ParseError(f"line {ln}: inconsistent column count")
        try:
            pts.append(float(cells[0]))
            if two_col:
                probs.append(float(cells[1]))
        except ValueError:
            raise ParseError(f"line {ln}: not a number") from None
    if not pts:
        raise ParseError("no points found")
    return tuple(pts), (tuple(probs) if two_col else None)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False
