"""Mixed-initiative dialogs for hierarchical websites.

Dialog scripts staged under I/PE/C/A reduce against user input; site
trees generate such dialogs and prune in lockstep; an interaction
manager serves live sessions over HTTP where clicking a link and saying
a label out of turn are the same operation.
"""

from .dialog import (
    Composite,
    DialogNode,
    EnumerationLimitError,
    Prompt,
    ReductionOutcome,
    ScriptError,
    Stager,
    THETA,
    Theta,
    apply_utterance,
    contains_alternator,
    completing_sequences,
    enumerate_sequences,
    is_complete,
    normalize_token,
    parse_script,
    reduce,
    render_script,
    simplify,
    tokenize_utterance,
    valid_tokens,
)
from .site import (
    FunctionalDependency,
    PruneResult,
    SiteError,
    SiteNode,
    SiteTree,
    UnknownTokenError,
    count_sequences,
    expand_input,
    load_site,
    mine_fds,
    prune_site,
    prune_with_expansion,
    site_to_dialog,
    site_to_json,
)
from .manager import InteractionManager
from .service import ServiceConfig, create_app, resolve_config

__version__ = "0.1.0"

__all__ = [
    "Composite", "DialogNode", "EnumerationLimitError", "Prompt",
    "ReductionOutcome", "ScriptError", "Stager", "THETA", "Theta",
    "apply_utterance", "contains_alternator", "completing_sequences",
    "enumerate_sequences", "is_complete", "normalize_token", "parse_script",
    "reduce", "render_script", "simplify", "tokenize_utterance", "valid_tokens",
    "FunctionalDependency", "PruneResult", "SiteError", "SiteNode", "SiteTree",
    "UnknownTokenError", "count_sequences", "expand_input", "load_site",
    "mine_fds", "prune_site", "prune_with_expansion", "site_to_dialog",
    "site_to_json",
    "InteractionManager", "ServiceConfig", "create_app", "resolve_config",
]
