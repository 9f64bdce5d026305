"""Lexicalised parsing: sentences to derivations through a word lexicon.

Each entry pairs a word with a phonology (a separated string over word
atoms, defaulting to the word itself) and a type of the phonology's sort.
A discontinuous entry such as `called+1+up` spans two stretches of the
sentence with a gap for other material in between.

Parsing enumerates, by recursive descent over the sentence, every
configuration built from entry figures whose yield matches the input,
then hands each candidate antecedent to the prover.
"""

from __future__ import annotations

from dataclasses import dataclass

from .configurations import Config, config_sort, structure
from .prover import Derivation, Hypersequent, prove
from .types import (
    SEP,
    Segment,
    Separator,
    Signature,
    SortedType,
    parse_type,
    sort_of,
)

SEP_WORD = "1"


@dataclass(frozen=True)
class LexiconEntry:
    word: str
    phonology: tuple[str, ...]
    type: SortedType

    def parts(self) -> list[tuple[str, ...]]:
        pieces, start = [], 0
        for i, atom in enumerate(self.phonology):
            if atom == SEP_WORD:
                pieces.append(self.phonology[start:i])
                start = i + 1
        pieces.append(self.phonology[start:])
        return pieces


class Lexicon:
    def __init__(self, entries=()):
        self.entries: list[LexiconEntry] = []
        for e in entries:
            self.add(e)

    def add(self, entry: LexiconEntry) -> None:
        phon_sort = sum(1 for a in entry.phonology if a == SEP_WORD)
        if phon_sort != sort_of(entry.type):
            raise ValueError(
                f"entry {entry.word!r}: phonology sort {phon_sort}"
                f" != type sort {sort_of(entry.type)}"
            )
        if any(not part for part in entry.parts()):
            # empty stretches around gaps would let candidate enumeration
            # loop without consuming input
            raise ValueError(
                f"entry {entry.word!r}: every stretch between gaps needs an atom"
            )
        self.entries.append(entry)

    def words(self) -> set[str]:
        return {e.word for e in self.entries}

    def surface_atoms(self) -> set[str]:
        atoms = set()
        for e in self.entries:
            atoms.update(a for a in e.phonology if a != SEP_WORD)
        return atoms


def load_lexicon(text: str, sig: Signature) -> Lexicon:
    """One entry per line: `word : phonology : TYPE`, phonology optional.

    The phonology is `+`-separated atoms with `1` for a gap, as in
    `called+1+up`.  Blank lines and # comments are ignored.
    """
    lex = Lexicon()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(":")]
        try:
            if len(fields) == 2:
                word, type_text = fields
                phonology = (word,)
            elif len(fields) == 3:
                word, phon_text, type_text = fields
                phonology = tuple(p.strip() for p in phon_text.split("+"))
                if any(not p for p in phonology):
                    raise ValueError("malformed phonology")
            else:
                raise ValueError("expected `word : phonology : TYPE`")
            if not word:
                raise ValueError("empty word")
            t = parse_type(type_text, sig)
            lex.add(LexiconEntry(word, phonology, t))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return lex


@dataclass(frozen=True)
class ParseResult:
    configuration: Config
    assignment: tuple[LexiconEntry, ...]  # one per type occurrence, in order
    derivation: Derivation


def config_yield(tokens: Config, assignment) -> tuple[str, ...]:
    """Surface string: segments replaced by their entry's phonology parts,
    separators kept as the gap word."""
    items = structure(tokens)
    if items is None:
        raise ValueError("not a configuration")
    entries = iter(assignment)

    def emit(items) -> list[str]:
        out: list[str] = []
        for item in items:
            if isinstance(item, Separator):
                out.append(SEP_WORD)
            else:
                _owner, gaps = item
                entry = next(entries)
                parts = entry.parts()
                out.extend(parts[0])
                for j, gap in enumerate(gaps):
                    out.extend(emit(structure(gap)))
                    out.extend(parts[j + 1])
        return out

    result = emit(items)
    if next(entries, None) is not None:
        raise ValueError("unused assignment entries")
    return tuple(result)


def _candidate_configurations(words, lex: Lexicon):
    """All (configuration, assignment) pairs whose yield is the sentence."""
    n = len(words)
    memo: dict[int, list] = {}

    def matches(parts, i) -> int | None:
        if words[i : i + len(parts)] == tuple(parts):
            return i + len(parts)
        return None

    def configs_from(i: int):
        if i in memo:
            return memo[i]
        results = [((), (), i)]
        firsts = []
        if i < n and words[i] == SEP_WORD:
            firsts.append(((SEP,), (), i + 1))
        if i < n:
            for entry in lex.entries:
                parts = entry.parts()
                pos = matches(parts[0], i)
                if pos is None:
                    continue
                s = sort_of(entry.type)
                segs = [Segment(entry.type, j) for j in range(s + 1)]
                partials = [((segs[0],), (entry,), pos)]
                for j in range(1, s + 1):
                    nxt = []
                    for toks, occs, at in partials:
                        for gap_toks, gap_occs, gap_end in configs_from(at):
                            end = matches(parts[j], gap_end)
                            if end is not None:
                                nxt.append(
                                    (
                                        toks + gap_toks + (segs[j],),
                                        occs + gap_occs,
                                        end,
                                    )
                                )
                    partials = nxt
                firsts.extend(partials)
        for toks, occs, at in firsts:
            for rest_toks, rest_occs, end in configs_from(at):
                results.append((toks + rest_toks, occs + rest_occs, end))
        memo[i] = results
        return results

    seen = set()
    out = []
    for toks, occs, end in configs_from(0):
        if end == n and (toks, occs) not in seen:
            seen.add((toks, occs))
            out.append((toks, occs))
    return out


def parse_sentence(
    words,
    lex: Lexicon,
    goal: SortedType,
    *,
    max_results: int | None = None,
    axioms=(),
    max_depth: int | None = None,
) -> list[ParseResult]:
    """Parse a token sequence to the goal type.

    Unknown words are an error; candidate antecedents are enumerated in a
    fixed order and each is searched for a first derivation.
    """
    words = tuple(words)
    known = lex.surface_atoms() | {SEP_WORD}
    unknown = [w for w in words if w not in known]
    if unknown:
        raise ValueError(f"unknown words: {', '.join(sorted(set(unknown)))}")
    goal_sort = sort_of(goal)
    results: list[ParseResult] = []
    for tokens, assignment in _candidate_configurations(words, lex):
        if config_sort(tokens) != goal_sort:
            continue
        found = prove(
            Hypersequent(tokens, goal),
            axioms=axioms,
            max_depth=max_depth,
            cut=bool(axioms),
        )
        if found:
            result = ParseResult(tokens, assignment, found[0])
            assert config_yield(tokens, assignment) == words
            results.append(result)
            if max_results is not None and len(results) >= max_results:
                break
    return results
