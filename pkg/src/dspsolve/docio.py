"""Instance and verdict documents.

Both are YAML mappings with a ``format: 1`` header.  An instance document::

    format: 1
    mode: cyclo                 # or sym
    weights: [2, 2, 2]
    xi:                         # one list of w_i values per arm
      - ["2*zeta(1/5)", "1/3*zeta(1/7)"]
      - ["3*zeta(2/5)", "1/5*zeta(3/11)"]
      - ["zeta(1/11)", "5/2*zeta(2/3)"]
    alpha: {"*": 2, "1,1": 1, "2,1": 1, "3,1": 1}   # or "from_matrices"
    matrices: [...]             # optional, k square matrices
    relations: [[2, 0, 0]]      # sym mode: exponent vectors equal to 1
    generators: 3               # sym mode, optional

Cyclo values are written ``r``, ``-r``, ``zeta(a/b)`` or ``r*zeta(a/b)``;
sym values as products like ``g1^2*g3^-1``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any

import numpy as np
import yaml

from .quiver import StarQuiver, Vector, parse_vertex, vertex_label
from .spectral import (
    AnnihilationError,
    Cyclo,
    EncodingError,
    MValue,
    ProblemInstance,
    RelationLattice,
    Sym,
    XiTable,
    alpha_from_matrices,
    is_exact_matrix,
    parse_cyclo,
    parse_sym,
    rank_exact,
    rank_numeric,
    sym_generator_count,
)

FORMAT = 1
STATUSES = ("solvable", "unsolvable", "unknown")


class DocumentError(ValueError):
    pass


class DocumentSyntaxError(DocumentError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


class DocumentSemanticError(DocumentError):
    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def load_yaml(text: str) -> dict:
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise DocumentSyntaxError(str(exc.problem), mark.line + 1, mark.column + 1) from None
    except yaml.YAMLError as exc:
        raise DocumentSyntaxError(str(exc)) from None
    if not isinstance(data, dict):
        raise DocumentSyntaxError("document must be a mapping")
    fmt = data.get("format", FORMAT)
    if fmt != FORMAT:
        raise DocumentSemanticError(f"unsupported format {fmt!r}", "format")
    return data


# -- values ----------------------------------------------------------------------


def format_value(v: MValue) -> str:
    return str(v)


def _parse_value(raw: Any, mode: str, lattice: RelationLattice | None, path: str) -> MValue:
    if isinstance(raw, bool) or not isinstance(raw, (int, str)):
        raise DocumentSemanticError(f"expected an exact value string, got {raw!r}", path)
    try:
        if mode == "cyclo":
            return parse_cyclo(str(raw))
        return parse_sym(str(raw), lattice)
    except ValueError as exc:
        raise DocumentSemanticError(str(exc), path) from None


def _parse_entry(raw: Any, path: str):
    if isinstance(raw, bool):
        raise DocumentSemanticError("boolean matrix entry", path)
    if isinstance(raw, int):
        return raw
    if isinstance(raw, float):
        return raw
    if isinstance(raw, str):
        try:
            return Fraction(raw)
        except ValueError:
            pass
        try:
            return complex(raw.replace(" ", "").replace("i", "j"))
        except ValueError:
            raise DocumentSemanticError(f"cannot parse matrix entry {raw!r}", path) from None
    raise DocumentSemanticError(f"cannot parse matrix entry {raw!r}", path)


def _parse_matrices(raw: Any, k: int) -> tuple:
    if not isinstance(raw, list) or len(raw) != k:
        raise DocumentSemanticError(f"expected a list of {k} matrices", "matrices")
    out = []
    for i, m in enumerate(raw):
        path = f"matrices[{i}]"
        if not isinstance(m, list) or not m or not all(isinstance(r, list) for r in m):
            raise DocumentSemanticError("matrix must be a non-empty list of rows", path)
        n = len(m)
        if any(len(r) != n for r in m):
            raise DocumentSemanticError("matrix is not square", path)
        rows = [[_parse_entry(x, f"{path}[{a}][{b}]") for b, x in enumerate(r)] for a, r in enumerate(m)]
        if all(isinstance(x, (int, Fraction)) for r in rows for x in r):
            mat = [[Fraction(x) for x in r] for r in rows]
            rank = rank_exact(mat)
        else:
            mat = np.array([[complex(x) for x in r] for r in rows])
            rank = rank_numeric(mat)
        if rank != n:
            raise DocumentSemanticError("matrix is not invertible", path)
        out.append(mat)
    sizes = {len(m) for m in out}
    if len(sizes) != 1:
        raise DocumentSemanticError("matrices have different sizes", "matrices")
    return tuple(out)


def format_alpha(quiver: StarQuiver, a: Vector) -> dict[str, int]:
    return {vertex_label(v): int(x) for v, x in zip(quiver.vertices, a) if x}


def parse_alpha(quiver: StarQuiver, raw: Any, path: str = "alpha") -> Vector:
    if isinstance(raw, list):
        if len(raw) != quiver.size or not all(isinstance(x, int) for x in raw):
            raise DocumentSemanticError(f"expected {quiver.size} integer coordinates", path)
        return tuple(raw)
    if not isinstance(raw, dict):
        raise DocumentSemanticError("alpha must be a coordinate map, a list or 'from_matrices'", path)
    coords = {}
    for key, val in raw.items():
        try:
            v = parse_vertex(str(key))
        except ValueError as exc:
            raise DocumentSemanticError(str(exc), f"{path}.{key}") from None
        if v not in quiver.index:
            raise DocumentSemanticError(f"no vertex {key} for weights {list(quiver.weights)}", f"{path}.{key}")
        if isinstance(val, bool) or not isinstance(val, int):
            raise DocumentSemanticError("coordinate must be an integer", f"{path}.{key}")
        coords[v] = val
    return quiver.vector(coords)


# -- instances ----------------------------------------------------------------------


def instance_from_dict(data: dict, strict: bool = True) -> ProblemInstance:
    weights = data.get("weights")
    if not isinstance(weights, list) or not weights or not all(isinstance(w, int) and not isinstance(w, bool) for w in weights):
        raise DocumentSemanticError("weights must be a non-empty list of integers", "weights")
    if any(w < 1 for w in weights):
        raise DocumentSemanticError("weights must be >= 1", "weights")
    quiver = StarQuiver(tuple(weights))
    mode = data.get("mode", "cyclo")
    if mode not in ("cyclo", "sym"):
        raise DocumentSemanticError(f"unknown mode {mode!r}", "mode")

    raw_xi = data.get("xi")
    if not isinstance(raw_xi, list) or len(raw_xi) != len(weights):
        raise DocumentSemanticError(f"expected {len(weights)} eigenvalue lists", "xi")
    lattice = None
    if mode == "sym":
        rel = data.get("relations") or []
        if not isinstance(rel, list) or not all(isinstance(r, list) for r in rel):
            raise DocumentSemanticError("relations must be a list of integer rows", "relations")
        texts = [x for row in raw_xi if isinstance(row, list) for x in row]
        ngens = data.get("generators") or max(sym_generator_count(texts), max((len(r) for r in rel), default=0))
        try:
            lattice = RelationLattice(int(ngens), tuple(tuple(r) for r in rel))
        except (TypeError, ValueError) as exc:
            raise DocumentSemanticError(str(exc), "relations") from None
    elif "relations" in data:
        raise DocumentSemanticError("relations are only allowed in sym mode", "relations")
    rows = []
    for i, (row, w) in enumerate(zip(raw_xi, weights)):
        if not isinstance(row, list) or len(row) != w:
            raise DocumentSemanticError(f"arm {i + 1} needs {w} eigenvalues", f"xi[{i}]")
        rows.append(tuple(_parse_value(x, mode, lattice, f"xi[{i}][{j}]") for j, x in enumerate(row)))
    xi = XiTable(tuple(rows))

    matrices = None
    if data.get("matrices") is not None:
        matrices = _parse_matrices(data["matrices"], len(weights))
    raw_alpha = data.get("alpha", "from_matrices" if matrices else None)
    if raw_alpha is None:
        raise DocumentSemanticError("alpha is required unless matrices are given", "alpha")
    computed = None
    if matrices is not None:
        try:
            computed = alpha_from_matrices(quiver, matrices, xi)
        except AnnihilationError as exc:
            raise DocumentSemanticError(str(exc), f"matrices[{exc.arm - 1}]") from None
        except EncodingError as exc:
            raise DocumentSemanticError(str(exc), "matrices") from None
    if raw_alpha == "from_matrices":
        if computed is None:
            raise DocumentSemanticError("'from_matrices' needs matrices", "alpha")
        alpha = computed
    else:
        alpha = parse_alpha(quiver, raw_alpha)
        if computed is not None and computed != alpha:
            raise DocumentSemanticError(
                f"declared alpha {format_alpha(quiver, alpha)} differs from the matrices' rank data "
                f"{format_alpha(quiver, computed)}",
                "alpha",
            )
    if strict:
        if alpha[0] < 1:
            raise DocumentSemanticError("alpha_* (the matrix size) must be at least 1", "alpha")
        if not quiver.is_strict(alpha):
            raise DocumentSemanticError("alpha is not strict (ranks must decrease along each arm)", "alpha")
    return ProblemInstance(quiver, xi, alpha, matrices)


def parse_instance(text: str, strict: bool = True) -> ProblemInstance:
    return instance_from_dict(load_yaml(text), strict)


def _matrix_out(m) -> list:
    if is_exact_matrix(m):
        return [[int(x) if Fraction(x).denominator == 1 else str(Fraction(x)) for x in r] for r in m]
    return [[_complex_str(complex(x)) for x in r] for r in np.asarray(m)]


def _complex_str(z: complex) -> str | float:
    return repr(z.real) if z.imag == 0 else repr(z).strip("()")


def instance_to_dict(inst: ProblemInstance, include_matrices: bool = True) -> dict:
    out: dict[str, Any] = {"format": FORMAT, "mode": inst.xi.mode, "weights": list(inst.quiver.weights)}
    out["xi"] = [[format_value(x) for x in row] for row in inst.xi.rows]
    if inst.xi.mode == "sym":
        lat = inst.xi.rows[0][0].lattice
        out["generators"] = lat.ngens
        out["relations"] = [list(r) for r in lat.rows]
    out["alpha"] = format_alpha(inst.quiver, inst.alpha)
    if include_matrices and inst.matrices is not None:
        out["matrices"] = [_matrix_out(m) for m in inst.matrices]
    return out


def dump(data: dict) -> str:
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None, width=100)


def print_instance(inst: ProblemInstance) -> str:
    return dump(instance_to_dict(inst))


# -- verdicts -------------------------------------------------------------------------


def certificate_to_dict(quiver: StarQuiver, cert) -> dict | None:
    # imported here so that certificate checking never loads the decider
    from .decider import CharacterNotOne, EncodingUnsupported, GuardHit, NotPositiveRoot, NotStrict, ViolatingDecomposition

    if cert is None:
        return None
    if isinstance(cert, NotPositiveRoot):
        return {"type": "not_positive_root", "alpha": format_alpha(quiver, cert.alpha)}
    if isinstance(cert, NotStrict):
        return {"type": "not_strict", "alpha": format_alpha(quiver, cert.alpha)}
    if isinstance(cert, CharacterNotOne):
        return {"type": "character_not_one", "value": format_value(cert.value)}
    if isinstance(cert, ViolatingDecomposition):
        return {
            "type": "violating_decomposition",
            "parts": [format_alpha(quiver, r) for r in cert.parts],
            "p_alpha": cert.p_alpha,
            "p_parts": list(cert.p_parts),
        }
    if isinstance(cert, EncodingUnsupported):
        return {"type": "encoding_unsupported", "reason": cert.reason}
    if isinstance(cert, GuardHit):
        return {"type": "guard_exceeded", "guard": cert.guard, "required": cert.required, "limit": cert.limit}
    raise TypeError(f"unknown certificate {cert!r}")


def verdict_to_dict(inst: ProblemInstance, v, seed: int | None = None) -> dict:
    q = inst.quiver
    out: dict[str, Any] = {
        "format": FORMAT,
        "kind": "verdict",
        "status": v.status.value,
        "alpha": format_alpha(q, v.alpha),
        "p_of_alpha": v.p_alpha,
        "xi_char_of_alpha": format_value(v.character) if v.character is not None else None,
        "certificate": certificate_to_dict(q, v.certificate),
        "timing": {"seconds": round(v.elapsed, 6)},
        "guards_hit": list(v.guards_hit),
    }
    if seed is not None:
        out["seed"] = seed
    out["instance"] = instance_to_dict(inst, include_matrices=False)
    return out


def parse_verdict(text: str) -> tuple[dict, ProblemInstance]:
    data = load_yaml(text)
    if data.get("kind") != "verdict":
        raise DocumentSemanticError("not a verdict document", "kind")
    if "instance" not in data or not isinstance(data["instance"], dict):
        raise DocumentSemanticError("verdict document lacks its instance", "instance")
    if data.get("status") not in STATUSES:
        raise DocumentSemanticError(f"unknown status {data.get('status')!r}", "status")
    inst = instance_from_dict(data["instance"], strict=False)
    return data, inst
