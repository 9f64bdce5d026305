"""Sorted types for a calculus of concatenation and intercalation.

Every type denotes a set of strings over an alphabet containing a
distinguished separator; the *sort* of a type is the number of separators
(gaps) its strings carry.  The slashes are the residuals of concatenation,
the indexed arrows are the residuals of "replace the k-th separator", and a
small family of synthetic connectives (projections, split, nondeterministic
arrows) rounds out the grammar used by the prover and the model checker.

Sort arithmetic:

    s(p)        declared per primitive
    s(I) = 0    s(J) = 1
    s(A * B)    = s(A) + s(B)
    s(A \\ B)    = s(B) - s(A)
    s(B / A)    = s(B) - s(A)
    s(A o{k} B) = s(A) + s(B) - 1       1 <= k <= s(A)
    s(B up{k} A) = s(B) - s(A) + 1      1 <= k <= s(B) - s(A) + 1
    s(A dn{k} B) = s(B) - s(A) + 1      1 <= k <= s(A)
    s(B UP A)   = s(B) - s(A) + 1
    s(A DN B)   = s(B) - s(A) + 1
    s(lp(A)) = s(rp(A)) = s(A) - 1
    s(split{k}(A)) = s(A) + 1           1 <= k <= s(A) + 1

All values are immutable after construction and safe to share between
threads; equality is structural throughout.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache


class IllSortedType(ValueError):
    """Raised when sort arithmetic goes negative for some subterm."""


class UnknownPrimitive(ValueError):
    """Raised when a type expression mentions an undeclared primitive."""


class TypeSyntaxError(ValueError):
    """Syntax error in a type, configuration, or sequent expression."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at column {position + 1})")
        self.position = position


class SortedType:
    """Base class for type terms."""

    __slots__ = ()

    def __str__(self) -> str:
        return print_type(self)


@dataclass(frozen=True)
class Prim(SortedType):
    """An atomic type with a declared sort."""

    name: str
    sort: int


@dataclass(frozen=True)
class UnitI(SortedType):
    """Unit of concatenation; denotes {empty string}."""


@dataclass(frozen=True)
class UnitJ(SortedType):
    """Unit of intercalation; denotes {separator}."""


@dataclass(frozen=True)
class Product(SortedType):
    """Concatenation product A * B."""

    left: SortedType
    right: SortedType


@dataclass(frozen=True)
class Under(SortedType):
    """arg \\ val: what concatenates after arg to give val."""

    arg: SortedType
    val: SortedType


@dataclass(frozen=True)
class Over(SortedType):
    """val / arg: what concatenates before arg to give val."""

    val: SortedType
    arg: SortedType


@dataclass(frozen=True)
class DiscProduct(SortedType):
    """A o{k} B: intercalate B at the k-th gap of A."""

    k: int
    left: SortedType
    right: SortedType


@dataclass(frozen=True)
class Extract(SortedType):
    """val up{k} arg: what yields val when arg fills its k-th gap."""

    k: int
    val: SortedType
    arg: SortedType


@dataclass(frozen=True)
class Infix(SortedType):
    """arg dn{k} val: what yields val when put in arg's k-th gap."""

    k: int
    arg: SortedType
    val: SortedType


@dataclass(frozen=True)
class NondetExtract(SortedType):
    """val UP arg: extract at an arbitrary gap of the result."""

    val: SortedType
    arg: SortedType


@dataclass(frozen=True)
class NondetInfix(SortedType):
    """arg DN val: infix at an arbitrary gap of the host."""

    arg: SortedType
    val: SortedType


@dataclass(frozen=True)
class LeftProj(SortedType):
    """lp(A): strings that give A when a separator is appended."""

    body: SortedType


@dataclass(frozen=True)
class RightProj(SortedType):
    """rp(A): strings that give A when a separator is prepended."""

    body: SortedType


@dataclass(frozen=True)
class Split(SortedType):
    """split{k}(A): strings that give A when their k-th gap is erased."""

    k: int
    body: SortedType


def _cached_node_hash(self):
    h = self.__dict__.get("_hash")
    if h is None:
        h = hash(
            (type(self).__name__,)
            + tuple(self.__dict__[name] for name in self.__dataclass_fields__)
        )
        object.__setattr__(self, "_hash", h)
    return h


# memo-heavy search hashes these values constantly; cache per instance
for _cls in (
    Prim, UnitI, UnitJ, Product, Under, Over, DiscProduct, Extract, Infix,
    NondetExtract, NondetInfix, LeftProj, RightProj, Split,
):
    _cls.__hash__ = _cached_node_hash


IMPLICATIVE_NODES = (
    Prim,
    Under,
    Over,
    Extract,
    Infix,
    NondetExtract,
    NondetInfix,
    LeftProj,
    RightProj,
    Split,
)

RESIDUAL_FREE_NODES = (Prim, UnitI, UnitJ, Product, DiscProduct)


@lru_cache(maxsize=1 << 17)
def sort_of(t: SortedType) -> int:
    """Sort of a structurally well-formed type.

    Raises IllSortedType when the arithmetic goes negative for some
    subterm; index-range constraints are the business of validate_type.
    """
    match t:
        case Prim(_, s):
            result = s
        case UnitI():
            result = 0
        case UnitJ():
            result = 1
        case Product(a, b):
            result = sort_of(a) + sort_of(b)
        case Under(a, b) | Over(b, a):
            result = sort_of(b) - sort_of(a)
        case DiscProduct(_, a, b):
            result = sort_of(a) + sort_of(b) - 1
        case Extract(_, b, a) | NondetExtract(b, a):
            result = sort_of(b) - sort_of(a) + 1
        case Infix(_, a, b) | NondetInfix(a, b):
            result = sort_of(b) - sort_of(a) + 1
        case LeftProj(a) | RightProj(a):
            result = sort_of(a) - 1
        case Split(_, a):
            result = sort_of(a) + 1
        case _:
            raise TypeError(f"not a type: {t!r}")
    if result < 0:
        raise IllSortedType(f"negative sort in subterm {print_type(t)}")
    return result


def connective_count(t: SortedType) -> int:
    """Number of connective occurrences; units and every unary count as one."""
    match t:
        case Prim():
            return 0
        case UnitI() | UnitJ():
            return 1
        case LeftProj(a) | RightProj(a) | Split(_, a):
            return 1 + connective_count(a)
        case (
            Product(a, b)
            | Under(a, b)
            | Over(a, b)
            | DiscProduct(_, a, b)
            | Extract(_, a, b)
            | Infix(_, a, b)
            | NondetExtract(a, b)
            | NondetInfix(a, b)
        ):
            return 1 + connective_count(a) + connective_count(b)
    raise TypeError(f"not a type: {t!r}")


def subformulas(t: SortedType) -> tuple[SortedType, ...]:
    """All subterms of t (including t), first occurrence order."""
    seen: dict[SortedType, None] = {}

    def walk(u: SortedType) -> None:
        if u in seen:
            return
        seen[u] = None
        match u:
            case Prim() | UnitI() | UnitJ():
                pass
            case LeftProj(a) | RightProj(a) | Split(_, a):
                walk(a)
            case (
                Product(a, b)
                | Under(a, b)
                | Over(a, b)
                | DiscProduct(_, a, b)
                | Extract(_, a, b)
                | Infix(_, a, b)
                | NondetExtract(a, b)
                | NondetInfix(a, b)
            ):
                walk(a)
                walk(b)

    walk(t)
    return tuple(seen)


def _safe_sort(t: SortedType) -> int | None:
    try:
        return sort_of(t)
    except IllSortedType:
        return None


def validate_type(t: SortedType) -> list[str]:
    """Check every sort constraint; returns [] when t is well sorted.

    Each violation names the offending subterm and the constraint it
    breaks.  Nothing is raised: violations are values.
    """
    problems: list[str] = []

    def walk(u: SortedType) -> int | None:
        match u:
            case Prim(name, sort):
                if not name:
                    problems.append("primitive with empty name")
                if sort < 0:
                    problems.append(f"negative sort for primitive {name!r}")
                    return None
                return sort
            case UnitI():
                return 0
            case UnitJ():
                return 1
            case Product(a, b):
                sa, sb = walk(a), walk(b)
                if sa is None or sb is None:
                    return None
                return sa + sb
            case Under(a, b) | Over(b, a):
                sa, sb = walk(a), walk(b)
                if sa is None or sb is None:
                    return None
                if sb < sa:
                    problems.append(
                        f"s(B)={sb} < s(A)={sa} in {print_type(u)}"
                    )
                    return None
                return sb - sa
            case DiscProduct(k, a, b) | Infix(k, a, b):
                sa, sb = walk(a), walk(b)
                if sa is None or sb is None:
                    return None
                if sa < 1:
                    problems.append(
                        f"intercalation host needs sort >= 1 in {print_type(u)}"
                    )
                    return None
                if not 1 <= k <= sa:
                    problems.append(
                        f"k={k} outside 1..s(A)={sa} in {print_type(u)}"
                    )
                    return None
                if isinstance(u, DiscProduct):
                    return sa + sb - 1
                if sb - sa + 1 < 0:
                    problems.append(
                        f"s(B)={sb} < s(A)-1={sa - 1} in {print_type(u)}"
                    )
                    return None
                return sb - sa + 1
            case Extract(k, b, a):
                sa, sb = walk(a), walk(b)
                if sa is None or sb is None:
                    return None
                d = sb - sa + 1
                if d < 1:
                    problems.append(
                        f"s(B)={sb} < s(A)={sa} in {print_type(u)}"
                    )
                    return None
                if not 1 <= k <= d:
                    problems.append(
                        f"k={k} exceeds s(B)-s(A)+1={d} in {print_type(u)}"
                    )
                    return None
                return d
            case NondetExtract(b, a):
                sa, sb = walk(a), walk(b)
                if sa is None or sb is None:
                    return None
                d = sb - sa + 1
                if d < 1:
                    problems.append(
                        f"s(B)={sb} < s(A)={sa} in {print_type(u)}"
                    )
                    return None
                return d
            case NondetInfix(a, b):
                sa, sb = walk(a), walk(b)
                if sa is None or sb is None:
                    return None
                d = sb - sa + 1
                # Every gap index 1..d must be a gap of A, or neither the
                # right rule nor eta-expansion can instantiate.
                if not 1 <= d <= sa:
                    problems.append(
                        f"gap range s(B)-s(A)+1={d} outside 1..s(A)={sa}"
                        f" in {print_type(u)}"
                    )
                    return None
                return d
            case LeftProj(a) | RightProj(a):
                sa = walk(a)
                if sa is None:
                    return None
                if sa < 1:
                    problems.append(
                        f"projection needs sort >= 1 in {print_type(u)}"
                    )
                    return None
                return sa - 1
            case Split(k, a):
                sa = walk(a)
                if sa is None:
                    return None
                if not 1 <= k <= sa + 1:
                    problems.append(
                        f"k={k} outside 1..s(A)+1={sa + 1} in {print_type(u)}"
                    )
                    return None
                return sa + 1
        problems.append(f"not a type: {u!r}")
        return None

    walk(t)
    return problems


def is_valid_type(t: SortedType) -> bool:
    return not validate_type(t)


def require_valid(t: SortedType) -> SortedType:
    problems = validate_type(t)
    if problems:
        raise IllSortedType("; ".join(problems))
    return t


# --------------------------------------------------------------------------
# Type segments and figures.  A type of sort n contributes n+1 segment
# tokens; antecedent configurations are strings over segments and the
# separator.  A sort-0 type is identified with its only segment, which
# is why Segment(t, 0) prints as the bare type.


@dataclass(frozen=True)
class Separator:
    """The metalinguistic separator token, written 1."""

    def __repr__(self) -> str:
        return "1"


SEP = Separator()


@dataclass(frozen=True)
class Segment:
    """The index-th piece of a type occurrence in an antecedent."""

    owner: SortedType
    index: int

    def __repr__(self) -> str:
        return print_token(self)


Segment.__hash__ = _cached_node_hash


Token = Separator | Segment


def segments_of(t: SortedType) -> tuple[Segment, ...]:
    """The sort_of(t)+1 segment tokens of t, in order."""
    return tuple(Segment(t, j) for j in range(sort_of(t) + 1))


@lru_cache(maxsize=65536)
def figure_of(t: SortedType) -> tuple[Token, ...]:
    """The canonical configuration of t: segments interleaved with separators."""
    segs = segments_of(t)
    out: list[Token] = [segs[0]]
    for seg in segs[1:]:
        out.append(SEP)
        out.append(seg)
    return tuple(out)


def print_token(tok: Token) -> str:
    if isinstance(tok, Separator):
        return "1"
    if sort_of(tok.owner) == 0:
        return print_type(tok.owner)
    return f"^{tok.index}({print_type(tok.owner)})"


# --------------------------------------------------------------------------
# Concrete syntax.
#
#   type    := operand (binop operand)?
#   binop   := '*' | '\' | '/' | 'o{'k'}' | 'up{'k'}' | 'dn{'k'}' | 'UP' | 'DN'
#   operand := prim | 'I' | 'J' | 'lp(' type ')' | 'rp(' type ')'
#            | 'split{'k'}(' type ')' | '(' type ')'
#
# Binary connectives do not associate: nested binaries take parentheses,
# which keeps print/parse a bijection on canonical text.

RESERVED_WORDS = frozenset({"I", "J", "UP", "DN", "lp", "rp", "split", "o", "up", "dn"})

_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<num>\d+)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
      | (?P<arrow>=>)
      | (?P<punct>[*\\/(){};,])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[tuple[str, str, int]]:
    """Lex into (kind, text, position) triples; kinds: num, ident, arrow, punct."""
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise TypeSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            out.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    return out


class TokenStream:
    def __init__(self, tokens: list[tuple[str, str, int]], length: int):
        self.tokens = tokens
        self.i = 0
        self.length = length

    def peek(self, ahead: int = 0):
        j = self.i + ahead
        return self.tokens[j] if j < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise TypeSyntaxError("unexpected end of input", self.length)
        self.i += 1
        return tok

    def expect(self, text: str):
        tok = self.next()
        if tok[1] != text:
            raise TypeSyntaxError(f"expected {text!r}, found {tok[1]!r}", tok[2])
        return tok

    def at_end(self) -> bool:
        return self.i >= len(self.tokens)

    def error(self, message: str):
        tok = self.peek()
        raise TypeSyntaxError(message, tok[2] if tok else self.length)


class Signature:
    """Declared primitives: a name-to-sort table used by the text parsers.

    With default_sort set, undeclared names are accepted at that sort
    (the CLI uses 0); the library default is to reject them.
    """

    def __init__(self, prims=(), *, default_sort: int | None = None):
        self._prims: dict[str, Prim] = {}
        items = prims.items() if isinstance(prims, dict) else prims
        for name, sort in items:
            self.declare(name, sort)
        self.default_sort = default_sort

    def declare(self, name: str, sort: int) -> Prim:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", name):
            raise ValueError(f"bad primitive name {name!r}")
        if name in RESERVED_WORDS:
            raise ValueError(f"{name!r} is reserved")
        if name in self._prims:
            raise ValueError(f"duplicate primitive {name!r}")
        if sort < 0:
            raise ValueError(f"negative sort for primitive {name!r}")
        p = Prim(name, sort)
        self._prims[name] = p
        return p

    def primitive(self, name: str) -> Prim:
        try:
            return self._prims[name]
        except KeyError:
            if self.default_sort is not None and name not in RESERVED_WORDS:
                return self.declare(name, self.default_sort)
            raise UnknownPrimitive(f"unknown primitive {name!r}") from None

    def primitives(self) -> tuple[Prim, ...]:
        return tuple(self._prims.values())

    def __contains__(self, name: str) -> bool:
        return name in self._prims

    @classmethod
    def from_text(cls, text: str, **kwargs) -> "Signature":
        """One primitive per line: `name sort`.  Blank lines and # comments ok."""
        sig = cls(**kwargs)
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2 or not parts[1].lstrip("-").isdigit():
                raise ValueError(f"line {lineno}: expected `name sort`, got {raw!r}")
            try:
                sig.declare(parts[0], int(parts[1]))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        return sig


_BINARY_PUNCT = {"*": Product, "\\": Under, "/": Over}
_INDEXED_OPS = {"o": DiscProduct, "up": Extract, "dn": Infix}
_NONDET_OPS = {"UP": NondetExtract, "DN": NondetInfix}


def _parse_index(ts: TokenStream) -> int:
    ts.expect("{")
    tok = ts.next()
    if tok[0] != "num":
        raise TypeSyntaxError(f"expected an index, found {tok[1]!r}", tok[2])
    k = int(tok[1])
    if k < 1:
        raise TypeSyntaxError("indices start at 1", tok[2])
    ts.expect("}")
    return k


def parse_type_expr(ts: TokenStream, sig: Signature) -> SortedType:
    left = _parse_operand(ts, sig)
    tok = ts.peek()
    if tok is None:
        return left
    kind, text, pos = tok
    if kind == "punct" and text in _BINARY_PUNCT:
        ts.next()
        right = _parse_operand(ts, sig)
        if text == "*":
            return Product(left, right)
        if text == "\\":
            return Under(left, right)
        return Over(left, right)
    if kind == "ident" and text in _INDEXED_OPS:
        nxt = ts.peek(1)
        if nxt is not None and nxt[1] == "{":
            ts.next()
            k = _parse_index(ts)
            right = _parse_operand(ts, sig)
            if text == "o":
                return DiscProduct(k, left, right)
            if text == "up":
                return Extract(k, left, right)
            return Infix(k, left, right)
    if kind == "ident" and text in _NONDET_OPS:
        ts.next()
        right = _parse_operand(ts, sig)
        if text == "UP":
            return NondetExtract(left, right)
        return NondetInfix(left, right)
    return left


def _parse_operand(ts: TokenStream, sig: Signature) -> SortedType:
    tok = ts.next()
    kind, text, pos = tok
    if kind == "punct" and text == "(":
        inner = parse_type_expr(ts, sig)
        ts.expect(")")
        return inner
    if kind != "ident":
        raise TypeSyntaxError(f"expected a type, found {text!r}", pos)
    if text == "I":
        return UnitI()
    if text == "J":
        return UnitJ()
    if text in ("lp", "rp"):
        ts.expect("(")
        inner = parse_type_expr(ts, sig)
        ts.expect(")")
        return LeftProj(inner) if text == "lp" else RightProj(inner)
    if text == "split":
        k = _parse_index(ts)
        ts.expect("(")
        inner = parse_type_expr(ts, sig)
        ts.expect(")")
        return Split(k, inner)
    if text in RESERVED_WORDS:
        raise TypeSyntaxError(f"{text!r} cannot be used as a primitive", pos)
    try:
        return sig.primitive(text)
    except UnknownPrimitive:
        raise TypeSyntaxError(f"unknown primitive {text!r}", pos) from None


def parse_type(text: str, sig: Signature) -> SortedType:
    """Parse and validate a type; raises TypeSyntaxError or IllSortedType."""
    ts = TokenStream(tokenize(text), len(text))
    t = parse_type_expr(ts, sig)
    if not ts.at_end():
        ts.error(f"trailing input after type")
    return require_valid(t)


def _operand_str(t: SortedType) -> str:
    text = print_type(t)
    match t:
        case (
            Product()
            | Under()
            | Over()
            | DiscProduct()
            | Extract()
            | Infix()
            | NondetExtract()
            | NondetInfix()
        ):
            return f"({text})"
    return text


def print_type(t: SortedType) -> str:
    """Canonical text; parse_type(print_type(t)) == t for valid t."""
    match t:
        case Prim(name, _):
            return name
        case UnitI():
            return "I"
        case UnitJ():
            return "J"
        case Product(a, b):
            return f"{_operand_str(a)} * {_operand_str(b)}"
        case Under(a, b):
            return f"{_operand_str(a)} \\ {_operand_str(b)}"
        case Over(b, a):
            return f"{_operand_str(b)} / {_operand_str(a)}"
        case DiscProduct(k, a, b):
            return f"{_operand_str(a)} o{{{k}}} {_operand_str(b)}"
        case Extract(k, b, a):
            return f"{_operand_str(b)} up{{{k}}} {_operand_str(a)}"
        case Infix(k, a, b):
            return f"{_operand_str(a)} dn{{{k}}} {_operand_str(b)}"
        case NondetExtract(b, a):
            return f"{_operand_str(b)} UP {_operand_str(a)}"
        case NondetInfix(a, b):
            return f"{_operand_str(a)} DN {_operand_str(b)}"
        case LeftProj(a):
            return f"lp({print_type(a)})"
        case RightProj(a):
            return f"rp({print_type(a)})"
        case Split(k, a):
            return f"split{{{k}}}({print_type(a)})"
    raise TypeError(f"not a type: {t!r}")
