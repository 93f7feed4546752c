"""Stateful mediation of live dialogs: sessions, caching, orientation.

The manager owns no dialog logic.  Dialog and site state evolve through
the pure operations in :mod:`outturn.dialog` and :mod:`outturn.site`;
this layer binds them to session tokens, replays them from a
specialization cache keyed by consumed-token sets, and renders each
state as a JSON-friendly response.  In-turn link clicks and out-of-turn
text arrive through the same entry point and are indistinguishable here.
"""

from __future__ import annotations

import hashlib
import random
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import dialog as dlg
from . import site as sm

DEFAULT_SESSION_TTL = 30 * 60.0
DEFAULT_CACHE_CAP = 1024
SESSION_TOKEN_DIGITS = 10


class ManagerError(Exception):
    """Base for request-level failures; carries a machine-readable code."""

    code = "error"
    status = 400

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class UnknownSiteError(ManagerError):
    code = "unknown_site"
    status = 404


class UnknownSessionError(ManagerError):
    code = "unknown_session"
    status = 404


class BadInputError(ManagerError):
    code = "bad_input"
    status = 400


class BadDocumentError(ManagerError):
    code = "bad_document"
    status = 400


@dataclass(frozen=True)
class SiteRecord:
    site_id: str
    name: str
    tree: sm.SiteTree
    pristine_dialog: dlg.DialogNode
    fds: tuple[sm.FunctionalDependency, ...]
    cacheable: bool


@dataclass(frozen=True)
class CacheEntry:
    site_state: sm.SiteTree
    dialog_state: dlg.DialogNode


def _has_stager_override(node: sm.SiteNode) -> bool:
    if node.stager is not None:
        return True
    return any(_has_stager_override(c) for c in node.children)


@dataclass
class _Snapshot:
    site_state: sm.SiteTree
    dialog_state: dlg.DialogNode
    input_so_far: tuple[str, ...]
    consumed: frozenset[str]


@dataclass
class Session:
    token: str
    site_id: str
    site_state: sm.SiteTree
    dialog_state: dlg.DialogNode
    input_so_far: list[str] = field(default_factory=list)
    consumed: frozenset[str] = frozenset()
    history: list[_Snapshot] = field(default_factory=list)
    created: float = 0.0
    last_active: float = 0.0
    lock: threading.Lock = field(default_factory=threading.Lock)


class InteractionManager:
    """Sessions, specialization caching, and response rendering.

    Concurrency contract: requests on different sessions proceed in
    parallel; requests on the same session serialize on its lock.  The
    cache allows duplicate concurrent computation of an entry (entries
    are value-equal by determinism, so last write wins).  Sites are
    write-once per content hash.
    """

    def __init__(self, *, session_ttl: float = DEFAULT_SESSION_TTL,
                 cache_cap: int = DEFAULT_CACHE_CAP, cache_enabled: bool = True,
                 rng: random.Random | None = None, clock=time.monotonic):
        self.session_ttl = session_ttl
        self.cache_cap = cache_cap
        self.cache_enabled = cache_enabled
        self._rng = rng if rng is not None else random.Random()
        self._clock = clock
        self._lock = threading.RLock()
        self._sites: dict[str, SiteRecord] = {}
        self._caches: dict[str, OrderedDict[frozenset[str], CacheEntry]] = {}
        self._cache_locks: dict[str, threading.Lock] = {}
        self._sessions: dict[str, Session] = {}

    # -- sites -------------------------------------------------------------

    def ingest_site(self, document: str | bytes) -> str:
        """Store a site document under its content hash and precompute
        the pristine dialog; re-ingesting the same bytes is a no-op."""
        raw = document.encode("utf-8") if isinstance(document, str) else document
        site_id = hashlib.sha256(raw).hexdigest()[:16]
        with self._lock:
            if site_id in self._sites:
                return site_id
        try:
            tree = sm.load_site(raw)
        except sm.SiteError as exc:
            raise BadDocumentError(str(exc)) from exc
        record = SiteRecord(
            site_id=site_id,
            name=tree.root.label,
            tree=tree,
            pristine_dialog=dlg.simplify(sm.site_to_dialog(tree, "out_of_turn")),
            fds=tuple(sm.mine_fds(tree)),
            # Set-keyed caching presumes order-insensitive token application;
            # stager overrides (C or I nodes) can make order observable.
            cacheable=not _has_stager_override(tree.root),
        )
        with self._lock:
            self._sites.setdefault(site_id, record)
            self._caches.setdefault(site_id, OrderedDict())
            self._cache_locks.setdefault(site_id, threading.Lock())
        self._cache_store(site_id, frozenset(),
                          CacheEntry(record.tree, record.pristine_dialog))
        return site_id

    def list_sites(self) -> list[dict[str, str]]:
        with self._lock:
            return [{"site_id": r.site_id, "name": r.name}
                    for r in self._sites.values()]

    def _site(self, site_id: str) -> SiteRecord:
        with self._lock:
            record = self._sites.get(site_id)
        if record is None:
            raise UnknownSiteError(f"no site with id {site_id!r}")
        return record

    # -- cache -------------------------------------------------------------

    def _cache_store(self, site_id: str, key: frozenset[str], entry: CacheEntry) -> None:
        if not self.cache_enabled:
            return
        with self._cache_locks[site_id]:
            cache = self._caches[site_id]
            cache[key] = entry
            cache.move_to_end(key)
            while len(cache) > self.cache_cap:
                # LRU, but the pristine empty-set entry stays pinned: it is
                # the fallback base every specialization can start from.
                victim = next((k for k in cache if k), None)
                if victim is None:
                    break
                del cache[victim]

    def lookup_specialized(self, site_id: str, tokens: frozenset[str]
                           ) -> tuple[CacheEntry, frozenset[str]] | None:
        """Best cached base for a token set.

        Exact hit has an empty remainder; otherwise the entry with the
        largest token subset wins, ties broken by lexicographically
        smallest key.  Returns None when nothing applies (possible only
        with caching disabled, since ingest seeds the empty-set entry).
        """
        lock = self._cache_locks.get(site_id)
        if lock is None:
            return None
        with lock:
            cache = self._caches[site_id]
            if tokens in cache:
                cache.move_to_end(tokens)
                return cache[tokens], frozenset()
            best: frozenset[str] | None = None
            for key in cache:
                if key <= tokens:
                    if best is None or len(key) > len(best) or \
                            (len(key) == len(best) and sorted(key) < sorted(best)):
                        best = key
            if best is None:
                return None
            cache.move_to_end(best)
            return cache[best], tokens - best

    # -- sessions ----------------------------------------------------------

    def _new_token(self) -> str:
        while True:
            token = "".join(str(self._rng.randrange(10)) for _ in range(SESSION_TOKEN_DIGITS))
            if token not in self._sessions:
                return token

    def create_session(self, site_id: str) -> Session:
        record = self._site(site_id)
        now = self._clock()
        with self._lock:
            self._expire_idle(now)
            token = self._new_token()
            session = Session(
                token=token,
                site_id=site_id,
                site_state=record.tree,
                dialog_state=record.pristine_dialog,
                created=now,
                last_active=now,
            )
            self._sessions[token] = session
        return session

    def _expire_idle(self, now: float) -> None:
        expired = [tok for tok, s in self._sessions.items()
                   if now - s.last_active > self.session_ttl]
        for tok in expired:
            del self._sessions[tok]

    def _session(self, token: str) -> Session:
        now = self._clock()
        with self._lock:
            session = self._sessions.get(token)
            if session is not None and now - session.last_active > self.session_ttl:
                del self._sessions[token]
                session = None
        if session is None:
            raise UnknownSessionError(f"no live session {token!r}")
        session.last_active = now
        return session

    # -- interaction -------------------------------------------------------

    def submit_input(self, token: str, utterance: Sequence[str]) -> dict[str, Any]:
        """Apply one utterance (a click or out-of-turn text, uniformly).

        The utterance's token set is closed under the site's functional
        dependencies (already-consumed inferences are no-ops); the whole
        expanded sequence is applied atomically.  Rejections return the
        current state flagged, with no state change and no history entry.
        """
        session = self._session(token)
        try:
            tokens = [dlg.normalize_token(t) for t in utterance]
        except ValueError as exc:
            raise BadInputError(str(exc)) from exc
        if not tokens:
            raise BadInputError("utterance must contain at least one token")
        record = self._site(session.site_id)
        with session.lock:
            expanded = sm.expand_input(tokens, record.fds)
            extras = sorted(expanded - set(tokens) - session.consumed)
            sequence = tokens + extras

            outcome = dlg.apply_utterance(session.dialog_state, sequence)
            site_after = self._apply_sequence(session.site_state, sequence)
            if not outcome.accepted or site_after is None:
                return self._render(session, rejected=True)

            target = session.consumed | frozenset(sequence)
            if self.cache_enabled and record.cacheable:
                new_state = self._state_for(record, target)
            else:
                new_state = CacheEntry(site_after, outcome.result)
            session.history.append(_Snapshot(session.site_state, session.dialog_state,
                                             tuple(session.input_so_far), session.consumed))
            session.site_state = new_state.site_state
            session.dialog_state = new_state.dialog_state
            session.input_so_far.extend(tokens)
            session.consumed = target
            return self._render(session)

    @staticmethod
    def _apply_sequence(tree: sm.SiteTree, sequence: Sequence[str]) -> sm.SiteTree | None:
        current = tree
        for tok in sequence:
            if tok not in current.token_universe:
                return None
            current = sm.prune_site(current, tok).tree
        return current

    def _state_for(self, record: SiteRecord, target: frozenset[str]) -> CacheEntry:
        """State for a consumed-token set, via the specialization cache.

        The largest cached subset of the target is specialized w.r.t. the
        remaining tokens (ingest seeds the empty-set entry, so a base
        always exists).  Token application commutes on these dialogs, so
        this lands on the same value as direct application.
        """
        hit = self.lookup_specialized(record.site_id, target)
        assert hit is not None
        entry, missing = hit
        if missing:
            site_state, dialog_state = entry.site_state, entry.dialog_state
            for tok in sorted(missing):
                site_state = sm.prune_site(site_state, tok).tree
                dialog_state = dlg.reduce(dialog_state, tok).result
            entry = CacheEntry(site_state, dialog_state)
        self._cache_store(record.site_id, target, entry)
        return entry

    def get_state(self, token: str) -> dict[str, Any]:
        session = self._session(token)
        with session.lock:
            return self._render(session)

    def reflect(self, token: str) -> frozenset[str]:
        """Legally specifiable inputs right now ("What may I say?")."""
        session = self._session(token)
        with session.lock:
            return dlg.valid_tokens(session.dialog_state)

    def step_back(self, token: str, n: int) -> dict[str, Any]:
        """Restore the state from n accepted turns ago; history truncates."""
        session = self._session(token)
        if n <= 0:
            raise BadInputError("n must be a positive integer")
        with session.lock:
            if n > len(session.history):
                raise BadInputError(
                    f"cannot step back {n} turns; only {len(session.history)} recorded")
            snapshot = session.history[-n]
            del session.history[-n:]
            session.site_state = snapshot.site_state
            session.dialog_state = snapshot.dialog_state
            session.input_so_far = list(snapshot.input_so_far)
            session.consumed = snapshot.consumed
            return self._render(session)

    # -- rendering ---------------------------------------------------------

    def _render(self, session: Session, rejected: bool = False) -> dict[str, Any]:
        """Canonical response for the session's current state.

        ``completed`` appears exactly when the pruned site has collapsed
        to its root page (equivalently, the dialog reduced to theta), and
        then ``options`` is empty.
        """
        response: dict[str, Any] = {"session": session.token}
        root = session.site_state.root
        if root.is_leaf():
            response["options"] = []
            response["completed"] = root.page
        else:
            labels = dlg.solicitation(session.dialog_state)
            response["options"] = [{"label": label, "kind": "link"} for label in labels]
        response["input_so_far"] = list(session.input_so_far)
        if rejected:
            response["rejected"] = True
        return response
