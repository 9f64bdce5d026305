"""dispcalc: proof search, categorial parsing, and finite string models
for the displacement calculus."""

from .types import (
    SEP,
    DiscProduct,
    Extract,
    IllSortedType,
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
    UnknownPrimitive,
    connective_count,
    figure_of,
    parse_type,
    print_type,
    segments_of,
    sort_of,
    subformulas,
    validate_type,
)
from .configurations import (
    Context,
    concat,
    config_sort,
    decompose,
    enumerate_configurations,
    is_configuration,
    parse_config,
    plug,
    print_config,
    type_equivalent,
    wrap,
)
from .prover import (
    Derivation,
    Hypersequent,
    RuleInstance,
    SearchBudgetExceeded,
    check_derivation,
    clear_prove_cache,
    eta_expand,
    expansions,
    measure,
    parse_sequent,
    prove,
)
from .algebra import (
    CanonicalSlice,
    ModelCheck,
    SameSortSet,
    Universe,
    Valuation,
    canonical_slice,
    check_da_axioms,
    check_sequent_in_model,
    da_plus,
    da_times,
    interpret_config,
    interpret_type,
    parse_model,
    parse_string,
    rho_embed,
    rho_set,
    show_string,
    string_sort,
    unique_decomposition,
)
from .lexicon import Lexicon, LexiconEntry, ParseResult, config_yield, load_lexicon, parse_sentence
from .render import to_ascii, to_latex

__version__ = "0.1.0"
