"""Serialization: element documents, rational strings, CSV reports.

Wire formats are fixed: group elements as {"lambda": [ints], "w": word},
matrices as row-major rational strings ("3/2") with ';' between rows,
slope multisets as sorted comma lists, CSV files headed by '# schema=1'.
"""

from __future__ import annotations

import csv
import io
import json
import re
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from . import linalg
from .affine import AffineElement, KottwitzClass, kottwitz, length
from .errors import ConfigurationError, PreconditionError
from .leaves import LeafReport
from .rootdata import RootDatum

SCHEMA_COMMENT = "# schema=1"


def rational_str(x) -> str:
    f = Fraction(x)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def parse_rational(s: str) -> Fraction:
    return Fraction(s.strip())


def vector_str(v) -> str:
    return ",".join(rational_str(x) for x in v)


def parse_vector(s: str) -> Tuple[Fraction, ...]:
    s = s.strip()
    if not s:
        return ()
    return tuple(parse_rational(part) for part in s.split(","))


def matrix_str(m) -> str:
    return ";".join(",".join(rational_str(x) for x in row) for row in m)


def parse_matrix(s: str) -> Tuple[Tuple[Fraction, ...], ...]:
    return tuple(tuple(parse_rational(x) for x in row.split(","))
                 for row in s.strip().split(";"))


def slopes_str(slopes) -> str:
    return ",".join(rational_str(s) for s in slopes)


# ---------------------------------------------------------------------------
# Weyl words

def finite_length(datum: RootDatum, w) -> int:
    zero = (0,) * datum.cochar_rank
    return length(AffineElement(datum, zero, w))


def word_of_finite(datum: RootDatum, w) -> str:
    """One reduced word for a finite Weyl element, greedy left descent."""
    if w == linalg.identity(datum.cochar_rank):
        return "e"
    letters = []
    current = w
    cur_len = finite_length(datum, current)
    while cur_len > 0:
        for i in range(datum.rank):
            candidate = linalg.mat_mul(datum.simple_reflections[i], current)
            cand_len = finite_length(datum, candidate)
            if cand_len < cur_len:
                letters.append(i + 1)
                current, cur_len = candidate, cand_len
                break
        else:
            raise ConfigurationError("finite element with no descent")
    return "*".join(f"s{i}" for i in letters)


def parse_word(datum: RootDatum, word: str):
    word = word.strip()
    if word in ("e", "", "1"):
        return linalg.identity(datum.cochar_rank)
    result = linalg.identity(datum.cochar_rank)
    for token in word.split("*"):
        token = token.strip()
        if token == "s":
            token = "s1"
        match = re.fullmatch(r"s(\d+)", token)
        if not match:
            raise PreconditionError(f"cannot parse Weyl word token {token!r}")
        i = int(match.group(1))
        if not 1 <= i <= datum.rank:
            raise PreconditionError(f"simple reflection s{i} out of range")
        result = linalg.mat_mul(result, datum.simple_reflections[i - 1])
    return result


# ---------------------------------------------------------------------------
# element documents

def element_doc(x: AffineElement) -> Dict:
    return {"lambda": [int(v) for v in x.translation],
            "w": word_of_finite(x.datum, x.finite)}


def element_str(x: AffineElement) -> str:
    return json.dumps(element_doc(x), sort_keys=True, separators=(",", ":"))


_BARE_TOKEN = re.compile(r'(?<!")\b([A-Za-z_][A-Za-z0-9_*]*)\b(?!")')


def loads_tolerant(text: str):
    """JSON with a fallback that quotes bare identifiers, so CLI arguments
    like {lambda:[1,0],w:s} parse."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        quoted = _BARE_TOKEN.sub(r'"\1"', text)
        return json.loads(quoted)


def element_from_doc(datum: RootDatum, doc) -> AffineElement:
    if isinstance(doc, str):
        doc = loads_tolerant(doc)
    if not isinstance(doc, dict) or set(doc) - {"lambda", "w"}:
        raise PreconditionError("element document needs keys 'lambda' and 'w'")
    lam = tuple(int(v) for v in doc.get("lambda", []))
    if len(lam) != datum.cochar_rank:
        raise PreconditionError(
            f"lambda has length {len(lam)}, expected {datum.cochar_rank}")
    w = parse_word(datum, str(doc.get("w", "e")))
    return AffineElement(datum, lam, w)


def kappa_str(kappa: KottwitzClass) -> str:
    if not kappa.free and not kappa.torsion:
        return "0"
    parts = ",".join(str(v) for v in kappa.free)
    if kappa.torsion:
        tors = ",".join(f"{v}mod{d}" for v, d in zip(kappa.torsion, kappa.moduli))
        return f"{parts}|{tors}" if parts else tors
    return parts


def parse_kappa(datum: RootDatum, text: str) -> KottwitzClass:
    moduli = datum.pi1.torsion
    if text == "0" and datum.pi1.free_rank == 0 and not moduli:
        return KottwitzClass((), (), ())
    free_part, _, tors_part = text.partition("|")
    free = tuple(int(v) for v in free_part.split(",")) if free_part else ()
    tors = tuple(int(v.split("mod")[0]) for v in tors_part.split(",")) \
        if tors_part else ()
    return KottwitzClass(free, tors, moduli)


# ---------------------------------------------------------------------------
# CSV documents

def render_csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    buf.write(SCHEMA_COMMENT + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def parse_csv(text: str) -> Tuple[List[str], List[List[str]]]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    reader = csv.reader(lines)
    rows = list(reader)
    return rows[0], rows[1:]


LEAF_HEADER = ("element", "length", "nu", "kappa", "basic", "leaf_dim",
               "jb_dim", "adjoint_slopes", "checked")


def leaf_report_row(report: LeafReport) -> Tuple[str, ...]:
    return (element_str(report.element),
            str(length(report.element)),
            vector_str(report.nu_dominant),
            kappa_str(report.kappa),
            "true" if report.basic else "false",
            str(report.leaf_dim),
            str(report.jb_dim),
            slopes_str(report.adjoint_slopes),
            "true" if report.checked else "false")


def leaf_report_from_row(datum: RootDatum, row: Sequence[str]) -> LeafReport:
    element = element_from_doc(datum, row[0])
    nu = parse_vector(row[2])
    kappa = parse_kappa(datum, row[3])
    slopes = parse_vector(row[7])
    return LeafReport(element, nu, kappa, row[4] == "true", int(row[5]),
                      int(row[6]), slopes, row[8] == "true")


CLASS_HEADER = ("block", "element", "length", "nu", "kappa", "basic")

ADM_HEADER = ("element", "length")

ADM_HYPER_HEADER = ("cocharacter",)

ADLV_HEADER = ("lattice", "inv", "kappa", "slope_divisible")

CROSSCHECK_HEADER = ("element", "closed", "oracle", "pass")


def class_rows(partition, datum: RootDatum, sigma=None) -> List[Tuple[str, ...]]:
    from .affine import newton_point
    rows = []
    for b_idx, block in enumerate(partition.blocks):
        for x in block:
            nu = newton_point(x, sigma)
            rows.append((str(b_idx), element_str(x), str(length(x)),
                         vector_str(nu.dominant), kappa_str(kottwitz(x)),
                         "true" if all(datum.pair(a, nu.dominant) == 0
                                       for a in datum.roots) else "false"))
    return rows


def adlv_rows(census) -> List[Tuple[str, ...]]:
    rows = []
    for pt in census.points:
        rows.append((matrix_str(pt.lattice.basis),
                     vector_str(pt.inv),
                     str(pt.kappa),
                     "true" if pt.slope_divisible.divisible else "false"))
    return rows


def structured_text(document) -> str:
    """The hierarchical structured-text format: canonical JSON."""
    return json.dumps(document, sort_keys=True, indent=2) + "\n"
