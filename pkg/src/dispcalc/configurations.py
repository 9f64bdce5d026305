"""Antecedent configurations as flat token strings.

A preconfiguration is any sequence over type segments and the separator;
a configuration is one generated by the mutual recursion

    O ::= empty
    O ::= 1, O
    O ::= A, O                                    for s(A) = 0
    O ::= ^0(A), O, ^1(A), ..., O, ^s(A)(A), O    for s(A) > 0

so the segments of every sorted-type occurrence appear in order with
complete configurations intercalated between them.  The grammar is
unambiguous, which makes membership a linear scan and lets decompositions
be enumerated by choosing where the distinguished material sits.

Configurations are plain tuples; everything here is pure.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .types import (
    SEP,
    DiscProduct,
    Product,
    Segment,
    Separator,
    Signature,
    SortedType,
    Token,
    TokenStream,
    TypeSyntaxError,
    UnitI,
    UnitJ,
    figure_of,
    parse_type_expr,
    print_token,
    require_valid,
    segments_of,
    sort_of,
    tokenize,
)

Config = tuple  # a tuple of Token; sort = number of separators


def config_sort(tokens: Config) -> int:
    """Number of separator tokens."""
    return sum(1 for t in tokens if isinstance(t, Separator))


def structure(tokens: Config):
    """Parse into items, or None if the string is not a configuration.

    Items are either the separator token or a pair (type, gaps) where
    gaps holds the token strings intercalated between consecutive
    segments of the occurrence.
    """
    items, i = [], 0
    n = len(tokens)
    while i < n:
        item, i = _parse_item(tokens, i)
        if item is None:
            return None
        items.append(item)
    return tuple(items)


def _parse_item(tokens: Config, i: int):
    tok = tokens[i]
    if isinstance(tok, Separator):
        return tok, i + 1
    if not isinstance(tok, Segment) or tok.index != 0:
        return None, i
    owner = tok.owner
    s = sort_of(owner)
    if s == 0:
        return (owner, ()), i + 1
    gaps = []
    j = i + 1
    n = len(tokens)
    for idx in range(1, s + 1):
        want = Segment(owner, idx)
        start = j
        while j < n and tokens[j] != want:
            sub, j2 = _parse_item(tokens, j)
            if sub is None:
                return None, i
            j = j2
        if j >= n:
            return None, i
        gaps.append(tokens[start:j])
        j += 1
    return (owner, tuple(gaps)), j


def is_configuration(tokens: Config) -> bool:
    return structure(tokens) is not None


def concat(g1: Config, g2: Config) -> Config:
    """Token concatenation; configurations are closed under it."""
    return tuple(g1) + tuple(g2)


def separator_positions(tokens: Config) -> tuple[int, ...]:
    return tuple(i for i, t in enumerate(tokens) if isinstance(t, Separator))


def wrap(g: Config, k: int, fill: Config) -> Config:
    """Replace the k-th separator of g by fill (fill may be empty)."""
    positions = separator_positions(g)
    if not 1 <= k <= len(positions):
        raise ValueError(f"separator index {k} out of range 1..{len(positions)}")
    p = positions[k - 1]
    return tuple(g[:p]) + tuple(fill) + tuple(g[p + 1 :])


def split_at_separators(tokens: Config) -> list[Config]:
    """The maximal separator-free pieces, in order; len = sort + 1."""
    pieces, start = [], 0
    for i, t in enumerate(tokens):
        if isinstance(t, Separator):
            pieces.append(tokens[start:i])
            start = i + 1
    pieces.append(tokens[start:])
    return pieces


@dataclass(frozen=True)
class Context:
    """A configuration with a hole for distinguished material.

    Plugging a configuration of sort len(fills) puts prefix before its
    first piece, each fill in place of one of its separators (left to
    right), and suffix after its last piece.  Fills must themselves be
    configurations; prefix and suffix may be proper preconfigurations.
    """

    prefix: Config
    fills: tuple[Config, ...]
    suffix: Config

    @property
    def gamma_sort(self) -> int:
        return len(self.fills)


def plug(ctx: Context, gamma: Config) -> Config:
    pieces = split_at_separators(gamma)
    if len(pieces) != len(ctx.fills) + 1:
        raise ValueError(
            f"sort mismatch: context expects sort {len(ctx.fills)},"
            f" got {len(pieces) - 1}"
        )
    out = list(ctx.prefix)
    out.extend(pieces[0])
    for fill, piece in zip(ctx.fills, pieces[1:]):
        out.extend(fill)
        out.extend(piece)
    out.extend(ctx.suffix)
    return tuple(out)


def _join_pieces(pieces) -> Config:
    out = list(pieces[0])
    for piece in pieces[1:]:
        out.append(SEP)
        out.extend(piece)
    return tuple(out)


class EnumerationBudgetExceeded(RuntimeError):
    """A decomposition enumeration outgrew the per-call step budget."""


DECOMPOSE_STEP_LIMIT = 300_000


def _span_table(tokens: Config):
    """ok[a] = the set of b for which tokens[a:b] is a configuration.

    The grammar is deterministic, so the item starting at position i ends
    at one fixed position; valid spans from a are exactly the prefixes of
    the item chain out of a.
    """
    n = len(tokens)
    nxt: list[int | None] = [None] * n
    for i in range(n):
        item, j = _parse_item(tokens, i)
        if item is not None:
            nxt[i] = j
    ok: list[set[int]] = []
    for a in range(n + 1):
        reach = {a}
        b = a
        while b < n and nxt[b] is not None:
            b = nxt[b]
            reach.add(b)
        ok.append(reach)
    return ok


@lru_cache(maxsize=4096)
def _decompose_cached(tokens: Config, gamma_sort: int):
    n = len(tokens)
    sep_free_end = [0] * (n + 1)
    for a in range(n, -1, -1):
        if a == n or isinstance(tokens[a], Separator):
            sep_free_end[a] = a
        else:
            sep_free_end[a] = sep_free_end[a + 1]
    ok_span = _span_table(tokens)

    results: list[tuple[Context, Config]] = []
    m = gamma_sort
    steps = 0

    def place(start: int, idx: int, pieces, fills, p0: int) -> bool:
        # choose the idx-th gamma piece beginning at `start`
        nonlocal steps
        for q in range(start, sep_free_end[start] + 1):
            steps += 1
            if steps > DECOMPOSE_STEP_LIMIT:
                return False
            piece = tokens[start:q]
            if idx == m:
                gamma = _join_pieces(pieces + [piece])
                if is_configuration(gamma):
                    ctx = Context(tokens[:p0], tuple(fills), tokens[q:])
                    results.append((ctx, gamma))
            else:
                for r in sorted(ok_span[q]):
                    ok = place(
                        r,
                        idx + 1,
                        pieces + [piece],
                        fills + [tokens[q:r]],
                        p0,
                    )
                    if not ok:
                        return False
        return True

    for p0 in range(n + 1):
        if not place(p0, 0, [], [], p0):
            return None  # budget tripped; cached so retries stay cheap
    return tuple(results)


def decompose(tokens: Config, gamma_sort: int) -> tuple[tuple[Context, Config], ...]:
    """All (context, gamma) with gamma a configuration of the given sort,
    every fill a configuration, and plug(context, gamma) == tokens.

    Exhaustive and duplicate-free: the split positions are recoverable
    from any result pair, so distinct position choices give distinct
    pairs.  Results come in left-to-right position order.  Enumerations
    that outgrow DECOMPOSE_STEP_LIMIT raise EnumerationBudgetExceeded
    rather than return a silently incomplete answer.
    """
    result = _decompose_cached(tuple(tokens), gamma_sort)
    if result is None:
        raise EnumerationBudgetExceeded(
            f"decomposition of {len(tokens)} tokens at sort {gamma_sort}"
            f" exceeded {DECOMPOSE_STEP_LIMIT} steps"
        )
    return result


def identity_context(gamma: Config) -> Context:
    """The empty context whose fills keep every separator in place."""
    return Context((), tuple((SEP,) for _ in range(config_sort(gamma))), ())


def type_equivalent(tokens: Config) -> SortedType:
    """The type with the same algebraic meaning as the configuration.

    Empty goes to I, a leading separator contributes J under a product,
    and each sorted occurrence folds its intercalated material in with
    discontinuous products at the shifted gap positions.
    """
    items = structure(tokens)
    if items is None:
        raise ValueError("not a configuration")
    return _items_type(items)


def _items_type(items) -> SortedType:
    if not items:
        return UnitI()
    head, rest = items[0], items[1:]
    if isinstance(head, Separator):
        return Product(UnitJ(), _items_type(rest))
    owner, gaps = head
    if not gaps:
        return Product(owner, _items_type(rest))
    acc: SortedType = owner
    k = 1
    for gap in gaps:
        acc = DiscProduct(k, acc, type_equivalent(gap))
        k += config_sort(gap)
    return Product(acc, _items_type(rest))


def enumerate_configurations(
    types, max_tokens: int, sort: int | None = None
) -> list[Config]:
    """All configurations over segments of `types` with at most max_tokens
    tokens, optionally filtered to one sort.  Grammar unambiguity makes the
    generation duplicate-free."""
    pool = tuple(dict.fromkeys(types))
    figs = tuple((t, sort_of(t)) for t in pool)
    memo: dict[int, list[Config]] = {}

    def gen(budget: int) -> list[Config]:
        if budget in memo:
            return memo[budget]
        out: list[Config] = [()]
        if budget >= 1:
            for rest in gen(budget - 1):
                out.append((SEP,) + rest)
            for t, s in figs:
                if s == 0:
                    tok = Segment(t, 0)
                    for rest in gen(budget - 1):
                        out.append((tok,) + rest)
                elif budget >= s + 1:
                    segs = segments_of(t)
                    for parts in _slots(s + 1, budget - (s + 1), gen):
                        body: list[Token] = [segs[0]]
                        for j in range(s):
                            body.extend(parts[j])
                            body.append(segs[j + 1])
                        body.extend(parts[s])
                        out.append(tuple(body))
        memo[budget] = out
        return out

    result = gen(max_tokens)
    if sort is not None:
        result = [c for c in result if config_sort(c) == sort]
    return result


def _slots(k: int, budget: int, gen):
    if k == 0:
        yield ()
        return
    for first in gen(budget):
        for rest in _slots(k - 1, budget - len(first), gen):
            yield (first,) + rest


# --------------------------------------------------------------------------
# Concrete syntax for antecedents: comma-separated items.
#
#   config := (item (',' item)*)?
#   item   := '1' | type | type '{' config (';' config)* '}'
#
# A braced item gives one fill per gap of the type; a bare sorted type
# stands for its figure with bare separators.


def parse_config(text: str, sig: Signature) -> Config:
    ts = TokenStream(tokenize(text), len(text))
    tokens = _parse_config_body(ts, sig, closers=())
    if not ts.at_end():
        ts.error("trailing input after configuration")
    return tokens


def _parse_config_body(ts: TokenStream, sig: Signature, closers) -> Config:
    out: list[Token] = []
    tok = ts.peek()
    if tok is None or tok[1] in closers:
        return ()
    out.extend(_parse_item_tokens(ts, sig))
    while True:
        tok = ts.peek()
        if tok is None or tok[1] in closers:
            return tuple(out)
        ts.expect(",")
        out.extend(_parse_item_tokens(ts, sig))


def _parse_item_tokens(ts: TokenStream, sig: Signature) -> Config:
    tok = ts.peek()
    if tok is None:
        ts.error("expected an item")
    if tok[0] == "num":
        if tok[1] != "1":
            raise TypeSyntaxError("only the separator 1 is a bare item", tok[2])
        ts.next()
        return (SEP,)
    t = require_valid(parse_type_expr(ts, sig))
    s = sort_of(t)
    nxt = ts.peek()
    if nxt is not None and nxt[1] == "{":
        ts.next()
        fills = [_parse_config_body(ts, sig, closers=(";", "}"))]
        while ts.peek() is not None and ts.peek()[1] == ";":
            ts.next()
            fills.append(_parse_config_body(ts, sig, closers=(";", "}")))
        ts.expect("}")
        if len(fills) != s:
            raise TypeSyntaxError(
                f"{len(fills)} fills for a type of sort {s}", nxt[2]
            )
        segs = segments_of(t)
        body: list[Token] = [segs[0]]
        for j, fill in enumerate(fills):
            body.extend(fill)
            body.append(segs[j + 1])
        return tuple(body)
    return figure_of(t)


def print_config(tokens: Config) -> str:
    if not tokens:
        return ""
    return ", ".join(print_token(t) for t in tokens)
