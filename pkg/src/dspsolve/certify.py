"""Independent re-validation of verdict certificates.

Uses only the quiver forms, the root test and the eigenvalue character; none
of the decision code is imported here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .docio import DocumentSemanticError, parse_alpha, parse_verdict
from .quiver import RootKind
from .spectral import ProblemInstance, parse_cyclo, parse_sym, xi_char


@dataclass
class CertCheck:
    valid: bool
    kind: str
    problems: list[str] = field(default_factory=list)


def _positive_root(quiver, a) -> bool:
    return any(a) and all(x >= 0 for x in a) and quiver.root_kind(a) is not RootKind.NOT_ROOT


def _value(inst: ProblemInstance, text: str):
    if inst.xi.mode == "cyclo":
        return parse_cyclo(text)
    return parse_sym(text, inst.xi.rows[0][0].lattice)


def check_certificate(data: dict, inst: ProblemInstance) -> CertCheck:
    q = inst.quiver
    alpha = parse_alpha(q, data.get("alpha", {}))
    status = data["status"]
    cert = data.get("certificate")
    problems: list[str] = []
    if alpha != inst.alpha:
        problems.append("verdict alpha differs from the instance alpha")
    kind = cert.get("type") if isinstance(cert, dict) else "none"

    if status == "unsolvable" and kind == "none":
        problems.append("unsolvable verdict without a certificate")
    elif kind == "none":
        if status == "solvable":
            if not _positive_root(q, alpha):
                problems.append("solvable verdict but alpha is not a positive root")
            elif not xi_char(q, inst.xi, alpha).is_one():
                problems.append("solvable verdict but the character of alpha is not 1")
    elif kind == "not_positive_root":
        if _positive_root(q, alpha):
            problems.append("alpha is a positive root")
    elif kind == "not_strict":
        if q.is_strict(alpha) and alpha[0] >= 1:
            problems.append("alpha is strict")
    elif kind == "character_not_one":
        actual = xi_char(q, inst.xi, alpha)
        if actual.is_one():
            problems.append("the character of alpha is 1")
        if _value(inst, cert["value"]) != actual:
            problems.append(f"recorded character {cert['value']} differs from {actual}")
    elif kind == "violating_decomposition":
        parts = [parse_alpha(q, p, f"certificate.parts[{i}]") for i, p in enumerate(cert.get("parts", []))]
        if len(parts) < 2:
            problems.append("decomposition has fewer than two parts")
        total = tuple(sum(col) for col in zip(*parts)) if parts else q.zero()
        if total != alpha:
            problems.append("parts do not sum to alpha")
        for i, part in enumerate(parts):
            if not _positive_root(q, part):
                problems.append(f"part {i} is not a positive root")
            elif not xi_char(q, inst.xi, part).is_one():
                problems.append(f"part {i} has non-trivial character")
        p_parts = [q.p(part) for part in parts]
        if cert.get("p_parts") is not None and list(cert["p_parts"]) != p_parts:
            problems.append("recorded p-values of the parts are wrong")
        if cert.get("p_alpha") is not None and cert["p_alpha"] != q.p(alpha):
            problems.append("recorded p(alpha) is wrong")
        if q.p(alpha) > sum(p_parts):
            problems.append("p(alpha) exceeds the sum over the parts")
        if not _positive_root(q, alpha) or not xi_char(q, inst.xi, alpha).is_one():
            problems.append("alpha itself is not a root with trivial character")
    elif kind in ("guard_exceeded", "encoding_unsupported"):
        if status != "unknown":
            problems.append(f"{kind} certificate on a {status} verdict")
    else:
        raise DocumentSemanticError(f"unknown certificate type {kind!r}", "certificate.type")

    if kind not in ("none", "guard_exceeded", "encoding_unsupported") and status != "unsolvable":
        problems.append(f"{kind} certificate on a {status} verdict")
    return CertCheck(not problems, kind, problems)


def validate_verdict_text(text: str) -> CertCheck:
    data, inst = parse_verdict(text)
    return check_certificate(data, inst)
