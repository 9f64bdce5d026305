"""Derivation export: indented ASCII trees and LaTeX proof trees."""

from __future__ import annotations

from .configurations import Config
from .prover import Derivation, RuleInstance
from . import types as _ty


def rule_label(inst: RuleInstance) -> str:
    """ASCII rule name, with the gap index where the schema carries one."""
    rule = inst.rule
    k = inst.bindings.index
    if k is not None and rule in {
        "oL", "oR", "upL", "upR", "dnL", "dnR", "splitL", "splitR", "UPL", "DNL",
    }:
        base, side = rule[:-1], rule[-1]
        return f"{base}{{{k}}}{side}"
    return rule


def to_ascii(d: Derivation) -> str:
    """One node per line, children indented under their conclusion."""
    lines: list[str] = []

    def walk(node: Derivation, depth: int) -> None:
        lines.append(f"{'  ' * depth}{rule_label(node.instance)}: {node.conclusion}")
        for child in node.children:
            walk(child, depth + 1)

    walk(d, 0)
    return "\n".join(lines)


_LATEX_RULES = {
    "Ax": r"\mathit{Ax}",
    "IL": r"I\mathrm{L}",
    "IR": r"I\mathrm{R}",
    "JL": r"J\mathrm{L}",
    "JR": r"J\mathrm{R}",
    "/L": r"/\mathrm{L}",
    "/R": r"/\mathrm{R}",
    "\\L": r"\backslash\mathrm{L}",
    "\\R": r"\backslash\mathrm{R}",
    "*L": r"\bullet\mathrm{L}",
    "*R": r"\bullet\mathrm{R}",
    "oL": r"\odot_{%s}\mathrm{L}",
    "oR": r"\odot_{%s}\mathrm{R}",
    "upL": r"\uparrow_{%s}\mathrm{L}",
    "upR": r"\uparrow_{%s}\mathrm{R}",
    "dnL": r"\downarrow_{%s}\mathrm{L}",
    "dnR": r"\downarrow_{%s}\mathrm{R}",
    "UPL": r"\Uparrow\mathrm{L}",
    "UPR": r"\Uparrow\mathrm{R}",
    "DNL": r"\Downarrow\mathrm{L}",
    "DNR": r"\Downarrow\mathrm{R}",
    "lpL": r"\triangleleft^{-1}\mathrm{L}",
    "lpR": r"\triangleleft^{-1}\mathrm{R}",
    "rpL": r"\triangleright^{-1}\mathrm{L}",
    "rpR": r"\triangleright^{-1}\mathrm{R}",
    "splitL": r"\check{\ }_{%s}\mathrm{L}",
    "splitR": r"\check{\ }_{%s}\mathrm{R}",
    "Cut": r"\mathit{Cut}",
    "AxR": r"\mathit{Ax}_R",
}


def latex_type(t: _ty.SortedType) -> str:
    def opnd(u: _ty.SortedType) -> str:
        text = latex_type(u)
        if isinstance(
            u,
            (
                _ty.Product,
                _ty.Under,
                _ty.Over,
                _ty.DiscProduct,
                _ty.Extract,
                _ty.Infix,
                _ty.NondetExtract,
                _ty.NondetInfix,
            ),
        ):
            return f"({text})"
        return text

    match t:
        case _ty.Prim(name, _):
            return name.replace("_", r"\_")
        case _ty.UnitI():
            return "I"
        case _ty.UnitJ():
            return "J"
        case _ty.Product(a, b):
            return rf"{opnd(a)}\bullet {opnd(b)}"
        case _ty.Under(a, b):
            return rf"{opnd(a)}\backslash {opnd(b)}"
        case _ty.Over(b, a):
            return rf"{opnd(b)}/{opnd(a)}"
        case _ty.DiscProduct(k, a, b):
            return rf"{opnd(a)}\odot_{{{k}}} {opnd(b)}"
        case _ty.Extract(k, b, a):
            return rf"{opnd(b)}\uparrow_{{{k}}} {opnd(a)}"
        case _ty.Infix(k, a, b):
            return rf"{opnd(a)}\downarrow_{{{k}}} {opnd(b)}"
        case _ty.NondetExtract(b, a):
            return rf"{opnd(b)}\Uparrow {opnd(a)}"
        case _ty.NondetInfix(a, b):
            return rf"{opnd(a)}\Downarrow {opnd(b)}"
        case _ty.LeftProj(a):
            return rf"\triangleleft^{{-1}}({latex_type(a)})"
        case _ty.RightProj(a):
            return rf"\triangleright^{{-1}}({latex_type(a)})"
        case _ty.Split(k, a):
            return rf"\check{{\ }}_{{{k}}}({latex_type(a)})"
    raise TypeError(f"not a type: {t!r}")


def latex_config(tokens: Config) -> str:
    if not tokens:
        return r"\Lambda"
    parts = []
    for tok in tokens:
        if isinstance(tok, _ty.Separator):
            parts.append("1")
        elif _ty.sort_of(tok.owner) == 0:
            parts.append(latex_type(tok.owner))
        else:
            parts.append(rf"{{}}^{{{tok.index}}}({latex_type(tok.owner)})")
    return ", ".join(parts)


def latex_sequent(h) -> str:
    return rf"{latex_config(h.antecedent)} \Rightarrow {latex_type(h.succedent)}"


def to_latex(d: Derivation, *, document: bool = False) -> str:
    """Nested prooftree markup; with document=True, a compilable wrapper."""

    def walk(node: Derivation, depth: int) -> str:
        pad = "  " * depth
        inst = node.instance
        template = _LATEX_RULES[inst.rule]
        label = template % inst.bindings.index if "%s" in template else template
        body = "".join(walk(c, depth + 1) for c in node.children)
        return (
            f"{pad}\\prooftree\n"
            f"{body}"
            f"{pad}\\justifies\n"
            f"{pad}  {latex_sequent(inst.conclusion)}\n"
            f"{pad}\\using {label}\n"
            f"{pad}\\endprooftree\n"
        )

    tree = walk(d, 0)
    if not document:
        return tree
    return (
        "\\documentclass{article}\n"
        "\\usepackage{prooftree}\n"
        "\\usepackage{amssymb}\n"
        "\\begin{document}\n"
        "$$\n" + tree + "$$\n"
        "\\end{document}\n"
    )
