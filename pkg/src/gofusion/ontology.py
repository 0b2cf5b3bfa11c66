"""GO ontology: OBO flat-file parsing and an immutable DAG with closure queries.

Only the OBO 1.2 tag subset needed downstream is interpreted: ``id``,
``name``, ``namespace``, ``is_a``, ``relationship: part_of`` and
``is_obsolete`` inside ``[Term]`` stanzas.  Everything else is skipped
(warned about in strict mode).  Ancestry follows is_a and part_of edges
by default, which is how mainstream GO tooling propagates annotations;
an is_a-only restriction is available on the closure queries.
"""

from __future__ import annotations

import hashlib
import logging
import re
from collections import deque
from dataclasses import dataclass

from .errors import ParseError, UnknownIdError, ValidationError

logger = logging.getLogger(__name__)

#: A GO accession: "GO:" followed by exactly seven decimal digits.
TermId = str

TERM_ID_RE = re.compile(r"GO:\d{7}$")

IS_A = "is_a"
PART_OF = "part_of"
EDGE_KINDS = (IS_A, PART_OF)

NAMESPACES = ("biological_process", "molecular_function", "cellular_component")


def is_term_id(s: str) -> bool:
    return bool(TERM_ID_RE.match(s))


@dataclass(frozen=True)
class Term:
    """One ontology term; ``parents`` holds (parent id, edge kind) pairs."""

    id: TermId
    name: str
    namespace: str
    parents: frozenset[tuple[TermId, str]]
    obsolete: bool = False


class Ontology:
    """Immutable DAG of GO terms with parent/child indices.

    Obsolete terms are kept in ``terms`` (so inputs referencing them can be
    diagnosed) but are excluded from ``topo_order`` and from all closure
    queries.  ``topo_order`` lists every non-obsolete term with parents
    before children.  ``source_digest`` is the SHA-256 of the parsed bytes
    and is carried into all pipeline outputs, since results depend on the
    GO release used.
    """

    def __init__(self, terms: dict[TermId, Term], source_digest: str = ""):
        self.terms = terms
        self.source_digest = source_digest
        self._children: dict[TermId, list[TermId]] = {t: [] for t in terms}
        for term in terms.values():
            if term.obsolete:
                continue
            for parent, _kind in term.parents:
                self._children[parent].append(term.id)
        for kids in self._children.values():
            kids.sort()
        self.roots = self._find_roots()
        self.topo_order = self._toposort()
        self._check_reachability()

    # -- construction checks -------------------------------------------------

    def _live_terms(self):
        return (t for t in self.terms.values() if not t.obsolete)

    def _find_roots(self) -> dict[str, TermId]:
        roots: dict[str, list[TermId]] = {}
        for term in self._live_terms():
            if not term.parents:
                roots.setdefault(term.namespace, []).append(term.id)
        out: dict[str, TermId] = {}
        for ns, ids in roots.items():
            if len(ids) > 1:
                raise ValidationError(
                    f"namespace {ns} has multiple parentless terms: {sorted(ids)}"
                )
            out[ns] = ids[0]
        return out

    def _toposort(self) -> list[TermId]:
        indeg = {t.id: len(t.parents) for t in self._live_terms()}
        queue = sorted(t for t, d in indeg.items() if d == 0)
        order: list[TermId] = []
        ready = deque(queue)
        while ready:
            tid = ready.popleft()
            order.append(tid)
            for child in self._children[tid]:
                indeg[child] -= 1
                if indeg[child] == 0:
                    ready.append(child)
        if len(order) != len(indeg):
            member = min(t for t, d in indeg.items() if d > 0)
            raise ValidationError(f"parent relation contains a cycle through {member}")
        return order

    def _check_reachability(self) -> None:
        for ns, root in self.roots.items():
            covered = self.descendants(root)
            stranded = [
                t.id
                for t in self._live_terms()
                if t.namespace == ns and t.id not in covered
            ]
            if stranded:
                raise ValidationError(
                    f"terms cannot reach the {ns} root {root}: {sorted(stranded)[:5]}"
                )

    # -- queries -------------------------------------------------------------

    def _live(self, t: TermId) -> Term:
        term = self.terms.get(t)
        if term is None:
            raise UnknownIdError(f"unknown term {t!r}")
        if term.obsolete:
            raise UnknownIdError(f"term {t} is obsolete")
        return term

    def ancestors(self, t: TermId, relations: tuple[str, ...] = EDGE_KINDS) -> set[TermId]:
        """Reflexive transitive parent closure of ``t``.

        ``relations`` restricts the edge kinds followed, e.g. ``("is_a",)``.
        """
        self._live(t)
        seen = {t}
        stack = [t]
        while stack:
            cur = stack.pop()
            for parent, kind in self.terms[cur].parents:
                if kind in relations and parent not in seen:
                    seen.add(parent)
                    stack.append(parent)
        return seen

    def descendants(self, t: TermId, relations: tuple[str, ...] = EDGE_KINDS) -> set[TermId]:
        """Reflexive transitive child closure of ``t`` (inverse of ancestors)."""
        self._live(t)
        all_kinds = set(relations) >= set(EDGE_KINDS)
        seen = {t}
        stack = [t]
        while stack:
            cur = stack.pop()
            for child in self._children[cur]:
                if child in seen:
                    continue
                if not all_kinds:
                    kinds = {k for p, k in self.terms[child].parents if p == cur}
                    if not kinds & set(relations):
                        continue
                seen.add(child)
                stack.append(child)
        return seen

    def namespace_root(self, namespace: str) -> TermId:
        try:
            return self.roots[namespace]
        except KeyError:
            raise UnknownIdError(f"no root for namespace {namespace!r}") from None


def parse_obo(data: bytes | str, strict: bool = False) -> Ontology:
    """Parse OBO 1.2 flat text into an :class:`Ontology`.

    Accepts UTF-8 bytes or text with LF or CRLF endings.  Unknown stanzas
    and tags are skipped; with ``strict=True`` they are logged as warnings.
    Obsolete terms are retained with their parent edges dropped.
    """
    if isinstance(data, bytes):
        digest = hashlib.sha256(data).hexdigest()
        text = data.decode("utf-8")
    else:
        digest = hashlib.sha256(data.encode("utf-8")).hexdigest()
        text = data

    terms: dict[TermId, Term] = {}
    in_term = False
    cur_id: TermId | None = None
    cur_name = ""
    cur_ns = ""
    cur_parents: set[tuple[TermId, str]] = set()
    cur_obsolete = False

    def flush(at_line: int) -> None:
        nonlocal cur_id
        if cur_id is None:
            if in_term and (cur_name or cur_parents):
                raise ParseError("[Term] stanza without an id tag", at_line)
            return
        if cur_id in terms:
            raise ParseError(f"duplicate term id {cur_id}", at_line)
        parents = frozenset() if cur_obsolete else frozenset(cur_parents)
        terms[cur_id] = Term(
            id=cur_id,
            name=cur_name,
            namespace=cur_ns,
            parents=parents,
            obsolete=cur_obsolete,
        )
        cur_id = None

    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r").strip()
        if not line:
            continue
        if line.startswith("["):
            flush(lineno)
            in_term = line == "[Term]"
            cur_id, cur_name, cur_ns = None, "", ""
            cur_parents, cur_obsolete = set(), False
            if strict and not in_term:
                logger.warning("obo line %d: skipping stanza %s", lineno, line)
            continue
        if not in_term:
            continue
        tag, sep, value = line.partition(":")
        if not sep:
            raise ParseError(f"expected 'tag: value', got {line!r}", lineno)
        tag = tag.strip()
        value = value.strip()
        if tag == "id":
            if not is_term_id(value):
                raise ParseError(f"malformed term id {value!r}", lineno)
            cur_id, id_line = value, lineno
        elif tag == "name":
            cur_name = value
        elif tag == "namespace":
            cur_ns = value
        elif tag == "is_a":
            target = value.split("!", 1)[0].strip()
            if not is_term_id(target):
                raise ParseError(f"malformed is_a target {value!r}", lineno)
            cur_parents.add((target, IS_A))
        elif tag == "relationship":
            parts = value.split("!", 1)[0].split()
            if len(parts) == 2 and parts[0] == PART_OF:
                if not is_term_id(parts[1]):
                    raise ParseError(f"malformed part_of target {value!r}", lineno)
                cur_parents.add((parts[1], PART_OF))
            elif strict:
                logger.warning("obo line %d: skipping relationship %r", lineno, value)
        elif tag == "is_obsolete":
            cur_obsolete = value == "true"
        elif strict:
            logger.warning("obo line %d: skipping tag %r", lineno, tag)
    flush(lineno + 1)

    dangling = sorted(
        {
            parent
            for term in terms.values()
            for parent, _ in term.parents
            if parent not in terms
        }
    )
    if dangling:
        raise ValidationError(f"parent references to unknown terms: {dangling}")

    return Ontology(terms, source_digest=digest)


def to_obo_text(o: Ontology) -> str:
    """Serialize the supported tag subset; parse(to_obo_text(o)) == structure of o."""
    chunks = []
    for tid in sorted(o.terms):
        term = o.terms[tid]
        lines = ["[Term]", f"id: {term.id}"]
        if term.name:
            lines.append(f"name: {term.name}")
        if term.namespace:
            lines.append(f"namespace: {term.namespace}")
        for parent, kind in sorted(term.parents):
            if kind == IS_A:
                lines.append(f"is_a: {parent}")
            else:
                lines.append(f"relationship: part_of {parent}")
        if term.obsolete:
            lines.append("is_obsolete: true")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"
