"""Backward proof search for the hypersequent calculus of displacement.

A hypersequent pairs an antecedent configuration with a succedent type of
equal sort.  Rule names use the ASCII operator spellings of the type
grammar:

    Ax  IL IR  JL JR  /L /R  \\L \\R  *L *R  oL oR  upL upR  dnL dnR
    lpL lpR  rpL rpR  splitL splitR  UPL UPR  DNL DNR  Cut  AxR

Left rules are driven by decompositions of the antecedent: a rule instance
exists for every context whose distinguished configuration matches the
rule's pattern.  Cut-free search terminates unconditionally because every
premise of every cut-free rule instance drops the connective-occurrence
measure by at least one; with Cut or non-logical axioms enabled, search is
depth-bounded instead.

All data is immutable; searches may share the module-level caches, which
behave as single logical maps.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .configurations import (
    Config,
    Context,
    EnumerationBudgetExceeded,
    config_sort,
    decompose,
    identity_context,
    is_configuration,
    parse_config,
    plug,
    print_config,
    separator_positions,
    split_at_separators,
    structure,
    wrap,
)
from .types import (
    SEP,
    DiscProduct,
    Extract,
    Infix,
    LeftProj,
    NondetExtract,
    NondetInfix,
    Over,
    Prim,
    Product,
    RightProj,
    Segment,
    Separator,
    Signature,
    SortedType,
    Split,
    TypeSyntaxError,
    Under,
    UnitI,
    UnitJ,
    connective_count,
    figure_of,
    parse_type,
    print_type,
    sort_of,
    subformulas,
    validate_type,
)


class SearchBudgetExceeded(RuntimeError):
    """Search ran out of its node budget; says nothing about provability."""


@dataclass(frozen=True)
class Hypersequent:
    antecedent: Config
    succedent: SortedType

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((self.antecedent, self.succedent))
            object.__setattr__(self, "_hash", h)
        return h

    def validate(self) -> list[str]:
        problems = list(validate_type(self.succedent))
        for tok in self.antecedent:
            if isinstance(tok, Segment):
                problems.extend(validate_type(tok.owner))
        if problems:
            return problems
        if not is_configuration(self.antecedent):
            problems.append("antecedent is not a configuration")
        ante_sort = config_sort(self.antecedent)
        succ_sort = sort_of(self.succedent)
        if ante_sort != succ_sort:
            problems.append(
                f"antecedent sort {ante_sort} != succedent sort {succ_sort}"
            )
        return problems

    def __str__(self) -> str:
        return f"{print_config(self.antecedent)} => {print_type(self.succedent)}"


@dataclass(frozen=True)
class Bindings:
    """How a rule instance was matched; enough to re-instantiate the schema."""

    context: Context | None = None
    principal: SortedType | None = None
    index: int | None = None
    sub: Config | None = None
    split: int | None = None
    span: tuple[int, int] | None = None
    cut_formula: SortedType | None = None
    axiom: Hypersequent | None = None
    subst: tuple | None = None


@dataclass(frozen=True)
class RuleInstance:
    rule: str
    conclusion: Hypersequent
    premises: tuple[Hypersequent, ...]
    bindings: Bindings = Bindings()


@dataclass(frozen=True)
class Derivation:
    instance: RuleInstance
    children: tuple["Derivation", ...] = ()

    @property
    def conclusion(self) -> Hypersequent:
        return self.instance.conclusion

    @property
    def rule(self) -> str:
        return self.instance.rule

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def height(self) -> int:
        return 1 + max((c.height() for c in self.children), default=0)


AxiomSet = tuple  # a sequence of ground Hypersequents


def measure(h: Hypersequent) -> int:
    """Connective occurrences in the sequent; each antecedent type
    occurrence counts once, via its index-0 segment."""
    total = connective_count(h.succedent)
    for tok in h.antecedent:
        if isinstance(tok, Segment) and tok.index == 0:
            total += connective_count(tok.owner)
    return total


def parse_sequent(text: str, sig: Signature) -> Hypersequent:
    if text.count("=>") != 1:
        raise TypeSyntaxError("a sequent needs exactly one =>", 0)
    left, right = text.split("=>")
    h = Hypersequent(parse_config(left, sig), parse_type(right, sig))
    problems = h.validate()
    if problems:
        raise ValueError("; ".join(problems))
    return h


# --------------------------------------------------------------------------
# Rule instance enumeration.


def _h(ante: Config, succ: SortedType) -> Hypersequent:
    return Hypersequent(ante, succ)


def _right_instances(goal: Hypersequent) -> list[RuleInstance]:
    ante, succ = goal.antecedent, goal.succedent
    out: list[RuleInstance] = []
    match succ:
        case Prim():
            if ante == figure_of(succ):
                out.append(RuleInstance("Ax", goal, ()))
        case UnitI():
            if ante == ():
                out.append(RuleInstance("IR", goal, ()))
        case UnitJ():
            if ante == (SEP,):
                out.append(RuleInstance("JR", goal, ()))
        case Product(a, b):
            sa = sort_of(a)
            for i in range(len(ante) + 1):
                left, right = ante[:i], ante[i:]
                if (
                    config_sort(left) == sa
                    and is_configuration(left)
                    and is_configuration(right)
                ):
                    out.append(
                        RuleInstance(
                            "*R",
                            goal,
                            (_h(left, a), _h(right, b)),
                            Bindings(split=i),
                        )
                    )
        case DiscProduct(k, a, b):
            sa, sb = sort_of(a), sort_of(b)
            n = len(ante)
            for start in range(n + 1):
                if config_sort(ante[:start]) != k - 1:
                    continue
                for end in range(start, n + 1):
                    gamma = ante[start:end]
                    if config_sort(gamma) != sb or not is_configuration(gamma):
                        continue
                    host = ante[:start] + (SEP,) + ante[end:]
                    if config_sort(host) != sa or not is_configuration(host):
                        continue
                    out.append(
                        RuleInstance(
                            "oR",
                            goal,
                            (_h(host, a), _h(gamma, b)),
                            Bindings(span=(start, end), index=k),
                        )
                    )
        case Under(a, b):
            out.append(RuleInstance("\\R", goal, (_h(figure_of(a) + ante, b),)))
        case Over(b, a):
            out.append(RuleInstance("/R", goal, (_h(ante + figure_of(a), b),)))
        case Extract(k, b, a):
            out.append(
                RuleInstance(
                    "upR",
                    goal,
                    (_h(wrap(ante, k, figure_of(a)), b),),
                    Bindings(index=k),
                )
            )
        case Infix(k, a, b):
            out.append(
                RuleInstance(
                    "dnR",
                    goal,
                    (_h(wrap(figure_of(a), k, ante), b),),
                    Bindings(index=k),
                )
            )
        case NondetExtract(b, a):
            d = sort_of(b) - sort_of(a) + 1
            prem = tuple(_h(wrap(ante, i, figure_of(a)), b) for i in range(1, d + 1))
            out.append(RuleInstance("UPR", goal, prem))
        case NondetInfix(a, b):
            d = sort_of(b) - sort_of(a) + 1
            if d <= sort_of(a):
                prem = tuple(
                    _h(wrap(figure_of(a), i, ante), b) for i in range(1, d + 1)
                )
                out.append(RuleInstance("DNR", goal, prem))
        case LeftProj(a):
            out.append(RuleInstance("lpR", goal, (_h(ante + (SEP,), a),)))
        case RightProj(a):
            out.append(RuleInstance("rpR", goal, (_h((SEP,) + ante, a),)))
        case Split(k, a):
            out.append(
                RuleInstance(
                    "splitR", goal, (_h(wrap(ante, k, ()), a),), Bindings(index=k)
                )
            )
    return out


def _principal_target_sort(x: SortedType) -> int | None:
    """Sort of the distinguished configuration when x is principal on the left."""
    match x:
        case UnitI():
            return 0
        case UnitJ():
            return 1
        case Product() | DiscProduct():
            return sort_of(x)
        case Under(_, b) | Over(b, _):
            return sort_of(b)
        case Extract(_, b, _) | NondetExtract(b, _):
            return sort_of(b)
        case Infix(_, _, b) | NondetInfix(_, b):
            return sort_of(b)
        case LeftProj(a) | RightProj(a):
            return sort_of(a)
        case Split(_, a):
            return sort_of(a)
    return None


def _gapped_figure_body(g: Config, x: SortedType, i: int) -> Config | None:
    """Match g == figure(x) with its i-th separator replaced by some body."""
    fig = figure_of(x)
    head, tail = fig[: 2 * i - 1], fig[2 * i :]
    if len(g) < len(head) + len(tail):
        return None
    if g[: len(head)] != head or g[len(g) - len(tail) :] != tail:
        return None
    return g[len(head) : len(g) - len(tail)]


def _match_left(g: Config, ctx: Context, goal: Hypersequent) -> list[RuleInstance]:
    if not g:
        return []
    succ = goal.succedent
    out: list[RuleInstance] = []
    first = g[0]
    if isinstance(first, Segment) and first.index == 0:
        x = first.owner
        match x:
            case UnitI() if len(g) == 1:
                out.append(
                    RuleInstance(
                        "IL",
                        goal,
                        (_h(plug(ctx, ()), succ),),
                        Bindings(context=ctx, principal=x),
                    )
                )
            case UnitJ() if g == figure_of(x):
                out.append(
                    RuleInstance(
                        "JL",
                        goal,
                        (_h(plug(ctx, (SEP,)), succ),),
                        Bindings(context=ctx, principal=x),
                    )
                )
            case Product(a, b) if g == figure_of(x):
                out.append(
                    RuleInstance(
                        "*L",
                        goal,
                        (_h(plug(ctx, figure_of(a) + figure_of(b)), succ),),
                        Bindings(context=ctx, principal=x),
                    )
                )
            case DiscProduct(k, a, b) if g == figure_of(x):
                out.append(
                    RuleInstance(
                        "oL",
                        goal,
                        (_h(plug(ctx, wrap(figure_of(a), k, figure_of(b))), succ),),
                        Bindings(context=ctx, principal=x, index=k),
                    )
                )
            case Over(b, a):
                fig = figure_of(x)
                rest = g[len(fig) :]
                if g[: len(fig)] == fig and config_sort(rest) == sort_of(a):
                    if is_configuration(rest):
                        out.append(
                            RuleInstance(
                                "/L",
                                goal,
                                (_h(rest, a), _h(plug(ctx, figure_of(b)), succ)),
                                Bindings(context=ctx, principal=x, sub=rest),
                            )
                        )
            case Extract(k, b, a):
                body = _gapped_figure_body(g, x, k)
                if (
                    body is not None
                    and config_sort(body) == sort_of(a)
                    and is_configuration(body)
                ):
                    out.append(
                        RuleInstance(
                            "upL",
                            goal,
                            (_h(body, a), _h(plug(ctx, figure_of(b)), succ)),
                            Bindings(context=ctx, principal=x, index=k, sub=body),
                        )
                    )
            case NondetExtract(b, a):
                d = sort_of(b) - sort_of(a) + 1
                for i in range(1, d + 1):
                    body = _gapped_figure_body(g, x, i)
                    if (
                        body is not None
                        and config_sort(body) == sort_of(a)
                        and is_configuration(body)
                    ):
                        out.append(
                            RuleInstance(
                                "UPL",
                                goal,
                                (_h(body, a), _h(plug(ctx, figure_of(b)), succ)),
                                Bindings(context=ctx, principal=x, index=i, sub=body),
                            )
                        )
            case LeftProj(a):
                if g == figure_of(x) + (SEP,):
                    out.append(
                        RuleInstance(
                            "lpL",
                            goal,
                            (_h(plug(ctx, figure_of(a)), succ),),
                            Bindings(context=ctx, principal=x),
                        )
                    )
            case Split(k, a):
                if g == wrap(figure_of(x), k, ()):
                    out.append(
                        RuleInstance(
                            "splitL",
                            goal,
                            (_h(plug(ctx, figure_of(a)), succ),),
                            Bindings(context=ctx, principal=x, index=k),
                        )
                    )
    last = g[-1]
    if isinstance(last, Segment):
        x = last.owner
        if isinstance(x, Under) and last.index == sort_of(x):
            fig = figure_of(x)
            rest = g[: len(g) - len(fig)]
            if g[len(rest) :] == fig and config_sort(rest) == sort_of(x.arg):
                if is_configuration(rest):
                    out.append(
                        RuleInstance(
                            "\\L",
                            goal,
                            (_h(rest, x.arg), _h(plug(ctx, figure_of(x.val)), succ)),
                            Bindings(context=ctx, principal=x, sub=rest),
                        )
                    )
        if isinstance(x, RightProj) and last.index == sort_of(x):
            if g == (SEP,) + figure_of(x):
                out.append(
                    RuleInstance(
                        "rpL",
                        goal,
                        (_h(plug(ctx, figure_of(x.body)), succ),),
                        Bindings(context=ctx, principal=x),
                    )
                )
    for pos, tok in enumerate(g):
        if not (isinstance(tok, Segment) and tok.index == 0):
            continue
        x = tok.owner
        if not isinstance(x, (Infix, NondetInfix)):
            continue
        fig = figure_of(x)
        if g[pos : pos + len(fig)] != fig:
            continue
        host = g[:pos] + (SEP,) + g[pos + len(fig) :]
        i = config_sort(g[:pos]) + 1
        arg, val = x.arg, x.val
        if isinstance(x, Infix):
            if i != x.k:
                continue
        else:
            d = sort_of(val) - sort_of(arg) + 1
            if not 1 <= i <= d:
                continue
        if config_sort(host) != sort_of(arg) or not is_configuration(host):
            continue
        rule = "dnL" if isinstance(x, Infix) else "DNL"
        out.append(
            RuleInstance(
                rule,
                goal,
                (_h(host, arg), _h(plug(ctx, figure_of(val)), succ)),
                Bindings(context=ctx, principal=x, index=i, sub=host),
            )
        )
    return out


def _left_instances(goal: Hypersequent) -> list[RuleInstance]:
    ante = goal.antecedent
    target_sorts: dict[int, None] = {}
    for tok in ante:
        if isinstance(tok, Segment) and tok.index == 0:
            m = _principal_target_sort(tok.owner)
            if m is not None:
                target_sorts[m] = None
    out: list[RuleInstance] = []
    for m in target_sorts:
        for ctx, gamma in decompose(ante, m):
            out.extend(_match_left(gamma, ctx, goal))
    return out


def _cut_instances(goal: Hypersequent, pool) -> list[RuleInstance]:
    out: list[RuleInstance] = []
    for a in pool:
        for ctx, gamma in decompose(goal.antecedent, sort_of(a)):
            lowered = plug(ctx, figure_of(a))
            p1 = _h(gamma, a)
            p2 = _h(lowered, goal.succedent)
            if p1 == goal or p2 == goal:
                continue
            out.append(
                RuleInstance(
                    "Cut",
                    goal,
                    (p1, p2),
                    Bindings(context=ctx, cut_formula=a, sub=gamma),
                )
            )
    return out


def _pattern_of(tokens: Config):
    items = structure(tokens)
    if items is None:
        raise ValueError("axiom antecedent is not a configuration")
    out = []
    for it in items:
        if isinstance(it, Separator):
            out.append(it)
        else:
            owner, gaps = it
            out.append((owner, tuple(_pattern_of(g) for g in gaps)))
    return tuple(out)


def _match_pattern(pitems, tokens: Config):
    """Assignments of configurations to the pattern's type occurrences
    (prefix order) whose substitution reproduces tokens."""
    if not pitems:
        if not tokens:
            yield ()
        return
    head, rest = pitems[0], pitems[1:]
    if isinstance(head, Separator):
        if tokens and isinstance(tokens[0], Separator):
            yield from _match_pattern(rest, tokens[1:])
        return
    x, gap_patterns = head
    s = len(gap_patterns)
    n = len(tokens)

    def sep_free_end(a: int) -> int:
        b = a
        while b < n and not isinstance(tokens[b], Separator):
            b += 1
        return b

    def rec(start: int, idx: int, pieces, gap_assigns):
        for q in range(start, sep_free_end(start) + 1):
            piece = tokens[start:q]
            if idx == s:
                joined: list = []
                for j, part in enumerate(pieces + [piece]):
                    if j:
                        joined.append(SEP)
                    joined.extend(part)
                gamma = tuple(joined)
                if is_configuration(gamma):
                    for tail in _match_pattern(rest, tokens[q:]):
                        yield ((x, gamma),) + tuple(gap_assigns) + tail
            else:
                for r in range(q, n + 1):
                    for sub in _match_pattern(gap_patterns[idx], tokens[q:r]):
                        yield from rec(
                            r, idx + 1, pieces + [piece], gap_assigns + list(sub)
                        )

    yield from rec(0, 0, [], [])


def _substitute_pattern(pitems, assigns) -> Config:
    it = iter(assigns)

    def build(items) -> Config:
        out: list = []
        for item in items:
            if isinstance(item, Separator):
                out.append(item)
            else:
                x, gap_patterns = item
                x2, gamma = next(it)
                if x2 != x:
                    raise ValueError("substitution out of order")
                fills = tuple(build(g) for g in gap_patterns)
                out.extend(plug(Context((), fills, ()), gamma))
        return tuple(out)

    result = build(pitems)
    leftover = next(it, None)
    if leftover is not None:
        raise ValueError("unused substitution entries")
    return result


def _axr_instances(goal: Hypersequent, axioms) -> list[RuleInstance]:
    out: list[RuleInstance] = []
    for ax in axioms:
        if ax.succedent != goal.succedent:
            continue
        pattern = _pattern_of(ax.antecedent)
        for assigns in _match_pattern(pattern, goal.antecedent):
            premises = tuple(_h(gamma, x) for (x, gamma) in assigns)
            inst = RuleInstance(
                "AxR", goal, premises, Bindings(axiom=ax, subst=assigns)
            )
            if goal in premises:
                continue
            out.append(inst)
    return out


_CUT_FREE_RULES = frozenset(
    {
        "Ax", "IL", "IR", "JL", "JR", "/L", "/R", "\\L", "\\R", "*L", "*R",
        "oL", "oR", "upL", "upR", "dnL", "dnR", "lpL", "lpR", "rpL", "rpR",
        "splitL", "splitR", "UPL", "UPR", "DNL", "DNR",
    }
)


def expansions(goal: Hypersequent, *, cut_pool=(), axioms=()) -> list[RuleInstance]:
    """Every rule instance whose conclusion equals goal, deterministically
    ordered by (premise count, combined premise measure)."""
    out = _right_instances(goal)
    out.extend(_left_instances(goal))
    if cut_pool:
        out.extend(_cut_instances(goal, cut_pool))
    if axioms:
        out.extend(_axr_instances(goal, axioms))
    if __debug__:
        goal_measure = measure(goal)
        for inst in out:
            for p in inst.premises:
                assert config_sort(p.antecedent) == sort_of(p.succedent), (
                    f"sort broken in {inst.rule}: {p}"
                )
                if inst.rule in _CUT_FREE_RULES:
                    assert measure(p) < goal_measure, (
                        f"measure not decreasing in {inst.rule}: {p} vs {goal}"
                    )
    out.sort(key=lambda ri: (len(ri.premises), sum(measure(p) for p in ri.premises)))
    return out


# --------------------------------------------------------------------------
# Search.

_CF_PROOFS: dict[Hypersequent, Derivation] = {}
_CF_FAILS: set[Hypersequent] = set()


def clear_prove_cache() -> None:
    _CF_PROOFS.clear()
    _CF_FAILS.clear()


class SearchCache:
    """Reusable state for depth-bounded searches.

    Sharing one cache across prove() calls is sound only while the cut
    pool and axiom set stay the same; behaves as a single logical map.
    """

    def __init__(self):
        self.memo: dict = {}
        self.expansions: dict = {}


@dataclass
class _SearchState:
    pool: tuple
    axioms: tuple
    bounded: bool
    single: bool
    max_nodes: int
    nodes: int = 0
    memo: dict = field(default_factory=dict)
    expansion_cache: dict = field(default_factory=dict)

    def expansions_for(self, h: Hypersequent):
        cached = self.expansion_cache.get(h)
        if cached is None:
            try:
                cached = expansions(h, cut_pool=self.pool, axioms=self.axioms)
            except EnumerationBudgetExceeded as exc:
                # a truncated instance list would poison negative caching,
                # so surface this as a budget failure of the whole search
                raise SearchBudgetExceeded(str(exc)) from None
            if len(self.expansion_cache) < 400_000:
                self.expansion_cache[h] = cached
        return cached


def _search(h: Hypersequent, remaining, st: _SearchState):
    if st.bounded and remaining <= 0:
        return
    st.nodes += 1
    if st.nodes > st.max_nodes:
        raise SearchBudgetExceeded(
            f"gave up after {st.max_nodes} goal expansions"
        )
    if st.bounded:
        entry = st.memo.get(h)
        if entry is not None:
            proof, failed_at = entry
            if proof is not None and st.single:
                yield proof
                return
            if proof is None and failed_at >= remaining:
                return
        if st.single:
            # the cut-free fragment is decidable outright, so settle the
            # goal there first; only cut- or axiom-needing goals expand
            quick = _cutfree_decide(h, st)
            if quick is not None:
                st.memo[h] = (quick, -1)
                yield quick
                return
    else:
        if h in _CF_FAILS:
            return
        if st.single:
            cached = _CF_PROOFS.get(h)
            if cached is not None:
                yield cached
                return
    found = False
    for inst in st.expansions_for(h):
        for children in _child_combos(inst.premises, 0, remaining - 1, st):
            d = Derivation(inst, children)
            if not found:
                found = True
                if st.bounded:
                    prev = st.memo.get(h)
                    st.memo[h] = (d, prev[1] if prev else -1)
                else:
                    _CF_PROOFS.setdefault(h, d)
            yield d
            if st.single:
                return
    if not found:
        if st.bounded:
            prev = st.memo.get(h)
            failed_at = max(remaining, prev[1]) if prev else remaining
            st.memo[h] = (prev[0] if prev else None, failed_at)
        else:
            _CF_FAILS.add(h)


def _cutfree_decide(h: Hypersequent, st: _SearchState) -> Derivation | None:
    inner = _SearchState(
        pool=(),
        axioms=(),
        bounded=False,
        single=True,
        max_nodes=st.max_nodes - st.nodes,
    )
    try:
        found = next(_search(h, math.inf, inner), None)
    finally:
        st.nodes += inner.nodes
    return found


def _child_combos(premises, idx, remaining, st):
    if idx == len(premises):
        yield ()
        return
    for d0 in _search(premises[idx], remaining, st):
        for rest in _child_combos(premises, idx + 1, remaining, st):
            yield (d0,) + rest
        if st.single:
            # premise goals are independent, so another proof of this
            # premise cannot unblock a later one
            return


def prove(
    goal: Hypersequent,
    *,
    max_solutions: int = 1,
    cut: bool = False,
    axioms=(),
    max_depth: int | None = None,
    max_nodes: int = 2_000_000,
    cut_pool=None,
    cache: SearchCache | None = None,
) -> list[Derivation]:
    """Complete backward search; returns up to max_solutions derivations.

    Cut-free with no axioms the search is exhaustive and terminating, so
    an empty result means unprovable.  With cut or axioms the search is
    depth-bounded (default depth 8) and an empty result means unprovable
    within the bound.  Exceeding max_nodes raises SearchBudgetExceeded.

    cut_pool overrides the default pool (the subformulas of the goal and
    axioms); cache carries memo tables across calls with the same pool.
    """
    problems = goal.validate()
    if problems:
        raise ValueError("; ".join(problems))
    axioms = tuple(axioms)
    use_cut = cut or bool(axioms)
    bounded = use_cut
    if bounded and max_depth is None:
        max_depth = 8
    pool: tuple = ()
    if use_cut:
        if cut_pool is not None:
            pool = tuple(cut_pool)
        else:
            seen: dict[SortedType, None] = {}
            sources = [goal.succedent]
            sources += [t.owner for t in goal.antecedent if isinstance(t, Segment)]
            for ax in axioms:
                sources.append(ax.succedent)
                sources += [t.owner for t in ax.antecedent if isinstance(t, Segment)]
            for s in sources:
                for sub in subformulas(s):
                    seen[sub] = None
            pool = tuple(
                sorted(seen, key=lambda t: (connective_count(t), print_type(t)))
            )
    if cache is None:
        cache = SearchCache()
    st = _SearchState(
        pool=pool,
        axioms=axioms,
        bounded=bounded,
        single=max_solutions == 1,
        max_nodes=max_nodes,
        memo=cache.memo,
        expansion_cache=cache.expansions,
    )
    remaining = max_depth if bounded else math.inf
    results: list[Derivation] = []
    seen_derivations: set[Derivation] = set()
    for d in _search(goal, remaining, st):
        if d in seen_derivations:
            continue
        seen_derivations.add(d)
        results.append(d)
        if len(results) >= max_solutions:
            break
    return results


# --------------------------------------------------------------------------
# Independent derivation checking: every node re-instantiates its schema
# from its recorded bindings.


def _recheck(inst: RuleInstance) -> list[str]:
    rule, goal, b = inst.rule, inst.conclusion, inst.bindings
    ante, succ = goal.antecedent, goal.succedent
    errors: list[str] = []

    def expect_premises(expected) -> None:
        if tuple(expected) != inst.premises:
            errors.append(f"{rule}: premises do not match the schema")

    def expect_ante(tokens) -> None:
        if tokens != ante:
            errors.append(f"{rule}: conclusion does not match the schema")

    def need_ctx() -> Context | None:
        if b.context is None:
            errors.append(f"{rule}: missing context binding")
            return None
        for fill in b.context.fills:
            if not is_configuration(fill):
                errors.append(f"{rule}: context fill is not a configuration")
        return b.context

    def need_sub(expected_sort: int) -> Config | None:
        if b.sub is None:
            errors.append(f"{rule}: missing sub-configuration binding")
            return None
        if not is_configuration(b.sub):
            errors.append(f"{rule}: sub-configuration is not a configuration")
        if config_sort(b.sub) != expected_sort:
            errors.append(f"{rule}: sub-configuration has the wrong sort")
        return b.sub

    try:
        match rule:
            case "Ax":
                if not isinstance(succ, Prim):
                    errors.append("Ax restricted to primitive types")
                elif ante != figure_of(succ):
                    errors.append("Ax conclusion must be the succedent's figure")
                expect_premises(())
            case "IR":
                if ante != () or succ != UnitI():
                    errors.append("IR concludes the empty antecedent and unit")
                expect_premises(())
            case "JR":
                if ante != (SEP,) or succ != UnitJ():
                    errors.append("JR concludes the bare separator")
                expect_premises(())
            case "IL":
                ctx = need_ctx()
                if ctx is not None:
                    expect_ante(plug(ctx, figure_of(UnitI())))
                    expect_premises((_h(plug(ctx, ()), succ),))
            case "JL":
                ctx = need_ctx()
                if ctx is not None:
                    expect_ante(plug(ctx, figure_of(UnitJ())))
                    expect_premises((_h(plug(ctx, (SEP,)), succ),))
            case "*L":
                ctx = need_ctx()
                if ctx is not None and isinstance(b.principal, Product):
                    x = b.principal
                    expect_ante(plug(ctx, figure_of(x)))
                    expect_premises(
                        (_h(plug(ctx, figure_of(x.left) + figure_of(x.right)), succ),)
                    )
                else:
                    errors.append("*L needs a product principal")
            case "oL":
                ctx = need_ctx()
                if ctx is not None and isinstance(b.principal, DiscProduct):
                    x = b.principal
                    if b.index != x.k:
                        errors.append("oL index must match the connective")
                    expect_ante(plug(ctx, figure_of(x)))
                    expect_premises(
                        (
                            _h(
                                plug(
                                    ctx,
                                    wrap(figure_of(x.left), x.k, figure_of(x.right)),
                                ),
                                succ,
                            ),
                        )
                    )
                else:
                    errors.append("oL needs a discontinuous product principal")
            case "/L":
                ctx = need_ctx()
                if ctx is not None and isinstance(b.principal, Over):
                    x = b.principal
                    rest = need_sub(sort_of(x.arg))
                    if rest is not None:
                        expect_ante(plug(ctx, figure_of(x) + rest))
                        expect_premises(
                            (_h(rest, x.arg), _h(plug(ctx, figure_of(x.val)), succ))
                        )
                else:
                    errors.append("/L needs an over principal")
            case "\\L":
                ctx = need_ctx()
                if ctx is not None and isinstance(b.principal, Under):
                    x = b.principal
                    rest = need_sub(sort_of(x.arg))
                    if rest is not None:
                        expect_ante(plug(ctx, rest + figure_of(x)))
                        expect_premises(
                            (_h(rest, x.arg), _h(plug(ctx, figure_of(x.val)), succ))
                        )
                else:
                    errors.append("\\L needs an under principal")
            case "upL" | "UPL":
                ctx = need_ctx()
                x = b.principal
                ok_type = isinstance(x, Extract) if rule == "upL" else isinstance(
                    x, NondetExtract
                )
                if ctx is not None and ok_type:
                    d_range = sort_of(x.val) - sort_of(x.arg) + 1
                    i = b.index
                    if rule == "upL" and i != x.k:
                        errors.append("upL index must match the connective")
                    if i is None or not 1 <= i <= d_range:
                        errors.append(f"{rule}: index outside 1..{d_range}")
                    else:
                        body = need_sub(sort_of(x.arg))
                        if body is not None:
                            expect_ante(plug(ctx, wrap(figure_of(x), i, body)))
                            expect_premises(
                                (
                                    _h(body, x.arg),
                                    _h(plug(ctx, figure_of(x.val)), succ),
                                )
                            )
                else:
                    errors.append(f"{rule}: wrong principal")
            case "dnL" | "DNL":
                ctx = need_ctx()
                x = b.principal
                ok_type = isinstance(x, Infix) if rule == "dnL" else isinstance(
                    x, NondetInfix
                )
                if ctx is not None and ok_type:
                    d_range = sort_of(x.val) - sort_of(x.arg) + 1
                    i = b.index
                    if rule == "dnL" and i != x.k:
                        errors.append("dnL index must match the connective")
                    if i is None or (rule == "DNL" and not 1 <= i <= d_range):
                        errors.append(f"{rule}: index outside 1..{d_range}")
                    else:
                        host = need_sub(sort_of(x.arg))
                        if host is not None:
                            expect_ante(plug(ctx, wrap(host, i, figure_of(x))))
                            expect_premises(
                                (
                                    _h(host, x.arg),
                                    _h(plug(ctx, figure_of(x.val)), succ),
                                )
                            )
                else:
                    errors.append(f"{rule}: wrong principal")
            case "lpL":
                ctx = need_ctx()
                if ctx is not None and isinstance(b.principal, LeftProj):
                    x = b.principal
                    expect_ante(plug(ctx, figure_of(x) + (SEP,)))
                    expect_premises((_h(plug(ctx, figure_of(x.body)), succ),))
                else:
                    errors.append("lpL needs a left projection principal")
            case "rpL":
                ctx = need_ctx()
                if ctx is not None and isinstance(b.principal, RightProj):
                    x = b.principal
                    expect_ante(plug(ctx, (SEP,) + figure_of(x)))
                    expect_premises((_h(plug(ctx, figure_of(x.body)), succ),))
                else:
                    errors.append("rpL needs a right projection principal")
            case "splitL":
                ctx = need_ctx()
                if ctx is not None and isinstance(b.principal, Split):
                    x = b.principal
                    if b.index != x.k:
                        errors.append("splitL index must match the connective")
                    expect_ante(plug(ctx, wrap(figure_of(x), x.k, ())))
                    expect_premises((_h(plug(ctx, figure_of(x.body)), succ),))
                else:
                    errors.append("splitL needs a split principal")
            case "*R":
                if not isinstance(succ, Product) or b.split is None:
                    errors.append("*R needs a product succedent and a split")
                else:
                    left, right = ante[: b.split], ante[b.split :]
                    if not (is_configuration(left) and is_configuration(right)):
                        errors.append("*R split parts must be configurations")
                    if config_sort(left) != sort_of(succ.left):
                        errors.append("*R split has the wrong sort")
                    expect_premises((_h(left, succ.left), _h(right, succ.right)))
            case "oR":
                if not isinstance(succ, DiscProduct) or b.span is None:
                    errors.append("oR needs a discontinuous product succedent")
                else:
                    start, end = b.span
                    gamma = ante[start:end]
                    host = ante[:start] + (SEP,) + ante[end:]
                    if config_sort(ante[:start]) != succ.k - 1:
                        errors.append("oR span not at the indexed separator")
                    if not (is_configuration(gamma) and is_configuration(host)):
                        errors.append("oR parts must be configurations")
                    expect_premises((_h(host, succ.left), _h(gamma, succ.right)))
            case "/R":
                if isinstance(succ, Over):
                    expect_premises((_h(ante + figure_of(succ.arg), succ.val),))
                else:
                    errors.append("/R needs an over succedent")
            case "\\R":
                if isinstance(succ, Under):
                    expect_premises((_h(figure_of(succ.arg) + ante, succ.val),))
                else:
                    errors.append("\\R needs an under succedent")
            case "upR":
                if isinstance(succ, Extract) and b.index == succ.k:
                    expect_premises(
                        (_h(wrap(ante, succ.k, figure_of(succ.arg)), succ.val),)
                    )
                else:
                    errors.append("upR needs a matching extract succedent")
            case "dnR":
                if isinstance(succ, Infix) and b.index == succ.k:
                    expect_premises(
                        (_h(wrap(figure_of(succ.arg), succ.k, ante), succ.val),)
                    )
                else:
                    errors.append("dnR needs a matching infix succedent")
            case "UPR":
                if isinstance(succ, NondetExtract):
                    d_range = sort_of(succ.val) - sort_of(succ.arg) + 1
                    if len(inst.premises) != d_range:
                        errors.append(
                            f"UPR premise count {len(inst.premises)} != {d_range}"
                        )
                    else:
                        expect_premises(
                            tuple(
                                _h(wrap(ante, i, figure_of(succ.arg)), succ.val)
                                for i in range(1, d_range + 1)
                            )
                        )
                else:
                    errors.append("UPR needs a nondeterministic extract succedent")
            case "DNR":
                if isinstance(succ, NondetInfix):
                    d_range = sort_of(succ.val) - sort_of(succ.arg) + 1
                    if len(inst.premises) != d_range:
                        errors.append(
                            f"DNR premise count {len(inst.premises)} != {d_range}"
                        )
                    elif d_range > sort_of(succ.arg):
                        errors.append("DNR gap range exceeds the host's sort")
                    else:
                        expect_premises(
                            tuple(
                                _h(wrap(figure_of(succ.arg), i, ante), succ.val)
                                for i in range(1, d_range + 1)
                            )
                        )
                else:
                    errors.append("DNR needs a nondeterministic infix succedent")
            case "lpR":
                if isinstance(succ, LeftProj):
                    expect_premises((_h(ante + (SEP,), succ.body),))
                else:
                    errors.append("lpR needs a left projection succedent")
            case "rpR":
                if isinstance(succ, RightProj):
                    expect_premises((_h((SEP,) + ante, succ.body),))
                else:
                    errors.append("rpR needs a right projection succedent")
            case "splitR":
                if isinstance(succ, Split) and b.index == succ.k:
                    if succ.k > config_sort(ante):
                        errors.append("splitR index exceeds the antecedent sort")
                    else:
                        expect_premises((_h(wrap(ante, succ.k, ()), succ.body),))
                else:
                    errors.append("splitR needs a matching split succedent")
            case "Cut":
                ctx = need_ctx()
                if ctx is not None and b.cut_formula is not None:
                    gamma = need_sub(sort_of(b.cut_formula))
                    if gamma is not None:
                        expect_ante(plug(ctx, gamma))
                        expect_premises(
                            (
                                _h(gamma, b.cut_formula),
                                _h(plug(ctx, figure_of(b.cut_formula)), succ),
                            )
                        )
                else:
                    errors.append("Cut needs a context and a cut formula")
            case "AxR":
                if b.axiom is None or b.subst is None:
                    errors.append("AxR needs its axiom and substitution")
                else:
                    if b.axiom.succedent != succ:
                        errors.append("AxR succedent differs from the axiom's")
                    pattern = _pattern_of(b.axiom.antecedent)
                    rebuilt = _substitute_pattern(pattern, b.subst)
                    expect_ante(rebuilt)
                    for x, gamma in b.subst:
                        if not is_configuration(gamma):
                            errors.append("AxR substitute is not a configuration")
                        if config_sort(gamma) != sort_of(x):
                            errors.append("AxR substitute has the wrong sort")
                    expect_premises(tuple(_h(g, x) for (x, g) in b.subst))
            case _:
                errors.append(f"unknown rule {rule!r}")
    except (ValueError, TypeError) as exc:
        errors.append(f"{rule}: {exc}")
    return errors


def check_derivation(d: Derivation) -> list[str]:
    """Re-instantiate every node's schema; [] means the derivation is good."""
    violations: list[str] = []

    def walk(node: Derivation, path: str) -> None:
        inst = node.instance
        here = path or "root"
        for h in (inst.conclusion, *inst.premises):
            problems = h.validate()
            if problems:
                violations.append(f"at {here}: {'; '.join(problems)}")
        child_concs = tuple(c.conclusion for c in node.children)
        if child_concs != inst.premises:
            violations.append(f"at {here}: children do not prove the premises")
        for msg in _recheck(inst):
            violations.append(f"at {here}: {msg}")
        for i, child in enumerate(node.children):
            walk(child, f"{path}.{i}" if path else str(i))

    walk(d, "")
    return violations


# --------------------------------------------------------------------------
# Eta expansion: identity derivations by structural induction, not search.


def eta_expand(t: SortedType) -> Derivation:
    """A derivation of figure(t) => t, built by recursion on t."""
    goal = _h(figure_of(t), t)
    match t:
        case Prim():
            return Derivation(RuleInstance("Ax", goal, ()))
        case UnitI():
            ctx = identity_context(figure_of(t))
            premise = _h((), t)
            inst = RuleInstance(
                "IL", goal, (premise,), Bindings(context=ctx, principal=t)
            )
            return Derivation(inst, (Derivation(RuleInstance("IR", premise, ())),))
        case UnitJ():
            ctx = identity_context(figure_of(t))
            premise = _h((SEP,), t)
            inst = RuleInstance(
                "JL", goal, (premise,), Bindings(context=ctx, principal=t)
            )
            return Derivation(inst, (Derivation(RuleInstance("JR", premise, ())),))
        case Product(a, b):
            ctx = identity_context(figure_of(t))
            mid = figure_of(a) + figure_of(b)
            premise = _h(plug(ctx, mid), t)
            left = RuleInstance(
                "*L", goal, (premise,), Bindings(context=ctx, principal=t)
            )
            right = RuleInstance(
                "*R",
                premise,
                (_h(figure_of(a), a), _h(figure_of(b), b)),
                Bindings(split=len(figure_of(a))),
            )
            return Derivation(
                left, (Derivation(right, (eta_expand(a), eta_expand(b))),)
            )
        case DiscProduct(k, a, b):
            ctx = identity_context(figure_of(t))
            mid = wrap(figure_of(a), k, figure_of(b))
            premise = _h(plug(ctx, mid), t)
            left = RuleInstance(
                "oL", goal, (premise,), Bindings(context=ctx, principal=t, index=k)
            )
            start = 2 * k - 1
            right = RuleInstance(
                "oR",
                premise,
                (_h(figure_of(a), a), _h(figure_of(b), b)),
                Bindings(span=(start, start + len(figure_of(b))), index=k),
            )
            return Derivation(
                left, (Derivation(right, (eta_expand(a), eta_expand(b))),)
            )
        case Over(b, a):
            premise = _h(figure_of(t) + figure_of(a), b)
            rnode = RuleInstance("/R", goal, (premise,))
            ctx = identity_context(premise.antecedent)
            lnode = RuleInstance(
                "/L",
                premise,
                (_h(figure_of(a), a), _h(figure_of(b), b)),
                Bindings(context=ctx, principal=t, sub=figure_of(a)),
            )
            return Derivation(
                rnode, (Derivation(lnode, (eta_expand(a), eta_expand(b))),)
            )
        case Under(a, b):
            premise = _h(figure_of(a) + figure_of(t), b)
            rnode = RuleInstance("\\R", goal, (premise,))
            ctx = identity_context(premise.antecedent)
            lnode = RuleInstance(
                "\\L",
                premise,
                (_h(figure_of(a), a), _h(figure_of(b), b)),
                Bindings(context=ctx, principal=t, sub=figure_of(a)),
            )
            return Derivation(
                rnode, (Derivation(lnode, (eta_expand(a), eta_expand(b))),)
            )
        case Extract(k, b, a):
            premise = _h(wrap(figure_of(t), k, figure_of(a)), b)
            rnode = RuleInstance("upR", goal, (premise,), Bindings(index=k))
            ctx = identity_context(premise.antecedent)
            lnode = RuleInstance(
                "upL",
                premise,
                (_h(figure_of(a), a), _h(figure_of(b), b)),
                Bindings(context=ctx, principal=t, index=k, sub=figure_of(a)),
            )
            return Derivation(
                rnode, (Derivation(lnode, (eta_expand(a), eta_expand(b))),)
            )
        case Infix(k, a, b):
            premise = _h(wrap(figure_of(a), k, figure_of(t)), b)
            rnode = RuleInstance("dnR", goal, (premise,), Bindings(index=k))
            ctx = identity_context(premise.antecedent)
            lnode = RuleInstance(
                "dnL",
                premise,
                (_h(figure_of(a), a), _h(figure_of(b), b)),
                Bindings(context=ctx, principal=t, index=k, sub=figure_of(a)),
            )
            return Derivation(
                rnode, (Derivation(lnode, (eta_expand(a), eta_expand(b))),)
            )
        case NondetExtract(b, a):
            d_range = sort_of(b) - sort_of(a) + 1
            premises = tuple(
                _h(wrap(figure_of(t), i, figure_of(a)), b)
                for i in range(1, d_range + 1)
            )
            rnode = RuleInstance("UPR", goal, premises)
            children = []
            for i, premise in enumerate(premises, start=1):
                ctx = identity_context(premise.antecedent)
                lnode = RuleInstance(
                    "UPL",
                    premise,
                    (_h(figure_of(a), a), _h(figure_of(b), b)),
                    Bindings(context=ctx, principal=t, index=i, sub=figure_of(a)),
                )
                children.append(Derivation(lnode, (eta_expand(a), eta_expand(b))))
            return Derivation(rnode, tuple(children))
        case NondetInfix(a, b):
            d_range = sort_of(b) - sort_of(a) + 1
            premises = tuple(
                _h(wrap(figure_of(a), i, figure_of(t)), b)
                for i in range(1, d_range + 1)
            )
            rnode = RuleInstance("DNR", goal, premises)
            children = []
            for i, premise in enumerate(premises, start=1):
                ctx = identity_context(premise.antecedent)
                lnode = RuleInstance(
                    "DNL",
                    premise,
                    (_h(figure_of(a), a), _h(figure_of(b), b)),
                    Bindings(context=ctx, principal=t, index=i, sub=figure_of(a)),
                )
                children.append(Derivation(lnode, (eta_expand(a), eta_expand(b))))
            return Derivation(rnode, tuple(children))
        case LeftProj(a):
            premise = _h(figure_of(t) + (SEP,), a)
            rnode = RuleInstance("lpR", goal, (premise,))
            ctx = identity_context(premise.antecedent)
            lnode = RuleInstance(
                "lpL",
                premise,
                (_h(figure_of(a), a),),
                Bindings(context=ctx, principal=t),
            )
            return Derivation(rnode, (Derivation(lnode, (eta_expand(a),)),))
        case RightProj(a):
            premise = _h((SEP,) + figure_of(t), a)
            rnode = RuleInstance("rpR", goal, (premise,))
            ctx = identity_context(premise.antecedent)
            lnode = RuleInstance(
                "rpL",
                premise,
                (_h(figure_of(a), a),),
                Bindings(context=ctx, principal=t),
            )
            return Derivation(rnode, (Derivation(lnode, (eta_expand(a),)),))
        case Split(k, a):
            premise = _h(wrap(figure_of(t), k, ()), a)
            rnode = RuleInstance("splitR", goal, (premise,), Bindings(index=k))
            ctx = identity_context(premise.antecedent)
            lnode = RuleInstance(
                "splitL",
                premise,
                (_h(figure_of(a), a),),
                Bindings(context=ctx, principal=t, index=k),
            )
            return Derivation(rnode, (Derivation(lnode, (eta_expand(a),)),))
    raise TypeError(f"not a type: {t!r}")
