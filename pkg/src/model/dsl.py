# src/model/dsl.py
"""Textual path-model language.

Statements are separated by newlines or ``;`` and ``#`` starts a comment::

    M ~ X            # single-headed arrow X -> M
    Y ~ X + M        # several predictors of one outcome
    X1 ~~ X2         # double-headed arrow between exogenous variables

Repeated statements for the same outcome merge their predictor lists.
"""

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from src.errors import (
    CovarianceOnEndogenousError,
    CycleError,
    DataIoError,
    DuplicatePathError,
    EmptyModelError,
    MissingColumnError,
    ModelSyntaxError,
)

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<comment>#[^\n]*)|(?P<cov>~~)|(?P<reg>~)"
    r"|(?P<plus>\+)|(?P<sep>[;\n])|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
)


class VariableRole(Enum):
    """Role of a variable in the path diagram."""

    EXOGENOUS = "exogenous"
    ENDOGENOUS = "endogenous"
    MEDIATOR = "mediator"


@dataclass(frozen=True)
class Regression:
    """Single-headed arrows from each predictor into ``outcome``."""

    outcome: str
    predictors: Tuple[str, ...]


@dataclass(frozen=True)
class ModelSpec:
    """A parsed, validated recursive path model."""

    variables: Tuple[str, ...]
    regressions: Tuple[Regression, ...]
    covariances: Tuple[Tuple[str, str], ...]
    source_text: str = field(default="", compare=False)

    def predictors_of(self, name: str) -> Tuple[str, ...]:
        """Predictors of an outcome in written order; empty for exogenous names."""
        for reg in self.regressions:
            if reg.outcome == name:
                return reg.predictors
        return ()

    @property
    def arrows(self) -> List[Tuple[str, str]]:
        """All (source, target) single-headed arrows."""
        return [(p, reg.outcome) for reg in self.regressions for p in reg.predictors]


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> List[_Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        column = pos - line_start + 1
        if match is None:
            bad = text[pos]
            if text.startswith("=~", pos):
                raise ModelSyntaxError(
                    "measurement statements '=~' are not supported", line, column
                )
            raise ModelSyntaxError(f"unexpected character {bad!r}", line, column)
        kind = match.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, match.group(), line, column))
        if kind == "sep" and match.group() == "\n":
            line += 1
            line_start = match.end()
        pos = match.end()
    tokens.append(_Token("sep", "", line, pos - line_start + 1))
    return tokens


def _split_statements(tokens: Sequence[_Token]) -> List[List[_Token]]:
    statements, current = [], []
    for tok in tokens:
        if tok.kind == "sep":
            if current:
                statements.append(current)
            current = []
        else:
            current.append(tok)
    return statements


def _expect_ident(tok: Optional[_Token], after: _Token, what: str) -> _Token:
    if tok is None:
        raise ModelSyntaxError(
            f"expected {what} after {after.text!r}",
            after.line,
            after.column + len(after.text),
        )
    if tok.kind != "ident":
        raise ModelSyntaxError(f"expected {what}, found {tok.text!r}", tok.line, tok.column)
    return tok


def _find_cycle(variables: Sequence[str], edges: Dict[str, List[str]]) -> Optional[List[str]]:
    """Return one directed cycle as a closed node list, or None."""
    white, grey, black = 0, 1, 2
    colour = {v: white for v in variables}
    stack: List[str] = []

    def visit(node):
        colour[node] = grey
        stack.append(node)
        for nxt in edges.get(node, []):
            if colour[nxt] == grey:
                return stack[stack.index(nxt):] + [nxt]
            if colour[nxt] == white:
                found = visit(nxt)
                if found:
                    return found
        stack.pop()
        colour[node] = black
        return None

    for v in variables:
        if colour[v] == white:
            found = visit(v)
            if found:
                return found
    return None


def parse_model(text: str) -> ModelSpec:
    """Parse model source into a validated :class:`ModelSpec`."""
    tokens = _tokenize(text)
    variables: List[str] = []
    seen = set()
    predictors: Dict[str, List[str]] = {}
    outcome_order: List[str] = []
    covariances: List[Tuple[str, str]] = []
    cov_keys = set()

    def note(name):
        if name not in seen:
            seen.add(name)
            variables.append(name)

    for stmt in _split_statements(tokens):
        head = stmt[0]
        if head.kind != "ident":
            raise ModelSyntaxError(
                f"statement must start with a variable name, found {head.text!r}",
                head.line,
                head.column,
            )
        if len(stmt) < 2 or stmt[1].kind not in ("reg", "cov"):
            where = stmt[1] if len(stmt) > 1 else head
            col = where.column if len(stmt) > 1 else head.column + len(head.text)
            raise ModelSyntaxError("expected '~' or '~~'", where.line, col)
        op = stmt[1]
        if op.kind == "cov":
            other = _expect_ident(stmt[2] if len(stmt) > 2 else None, op, "a variable name")
            if len(stmt) > 3:
                extra = stmt[3]
                raise ModelSyntaxError(
                    f"unexpected {extra.text!r} after covariance", extra.line, extra.column
                )
            if other.text == head.text:
                raise ModelSyntaxError(
                    "a covariance needs two distinct variables", other.line, other.column
                )
            key = frozenset((head.text, other.text))
            if key in cov_keys:
                raise DuplicatePathError(
                    f"covariance {head.text} ~~ {other.text} declared twice (line {head.line})"
                )
            cov_keys.add(key)
            note(head.text)
            note(other.text)
            covariances.append((head.text, other.text))
            continue

        # regression: IDENT ~ IDENT (+ IDENT)*
        note(head.text)
        rhs: List[str] = []
        prev = op
        idx = 2
        while True:
            tok = _expect_ident(stmt[idx] if idx < len(stmt) else None, prev, "a predictor")
            rhs.append(tok.text)
            note(tok.text)
            idx += 1
            if idx >= len(stmt):
                break
            if stmt[idx].kind != "plus":
                bad = stmt[idx]
                raise ModelSyntaxError(f"expected '+', found {bad.text!r}", bad.line, bad.column)
            prev = stmt[idx]
            idx += 1
        if head.text not in predictors:
            predictors[head.text] = []
            outcome_order.append(head.text)
        merged = predictors[head.text]
        for name in rhs:
            if name in merged:
                raise DuplicatePathError(
                    f"path {name} -> {head.text} declared twice (line {head.line})"
                )
            merged.append(name)

    if not variables:
        raise EmptyModelError("model contains no statements")

    edges: Dict[str, List[str]] = {}
    for outcome in outcome_order:
        for pred in predictors[outcome]:
            edges.setdefault(pred, []).append(outcome)
    cycle = _find_cycle(variables, edges)
    if cycle:
        raise CycleError(cycle)

    for a, b in covariances:
        for name in (a, b):
            if name in predictors:
                raise CovarianceOnEndogenousError(
                    f"covariance {a} ~~ {b}: '{name}' has incoming arrows; "
                    "only exogenous variables may covary"
                )

    spec = ModelSpec(
        variables=tuple(variables),
        regressions=tuple(Regression(o, tuple(predictors[o])) for o in outcome_order),
        covariances=tuple(covariances),
        source_text=text,
    )
    logger.debug(
        f"Parsed model: {len(spec.variables)} variables, "
        f"{len(spec.arrows)} arrows, {len(spec.covariances)} covariances"
    )
    return spec


def classify_roles(spec: ModelSpec) -> Dict[str, VariableRole]:
    """Assign each variable its role from incoming/outgoing arrows."""
    incoming = {reg.outcome for reg in spec.regressions if reg.predictors}
    outgoing = {src for src, _ in spec.arrows}
    roles = {}
    for name in spec.variables:
        if name not in incoming:
            roles[name] = VariableRole.EXOGENOUS
        elif name in outgoing:
            roles[name] = VariableRole.MEDIATOR
        else:
            roles[name] = VariableRole.ENDOGENOUS
    return roles


def validate_against_columns(spec: ModelSpec, columns: Iterable[str]) -> None:
    """Raise MissingColumnError for the first model variable absent from data."""
    available = set(columns)
    for name in spec.variables:
        if name not in available:
            raise MissingColumnError(name)


def _advance(names: Sequence[str], target: Sequence[str], pos: int) -> Optional[int]:
    """New first-appearance position after ``names``, or None if out of order."""
    seen = set(target[:pos])
    for name in names:
        if name in seen:
            continue
        if pos < len(target) and target[pos] == name:
            seen.add(name)
            pos += 1
        else:
            return None
    return pos


def _atom_order(spec: ModelSpec) -> List[Tuple[str, Tuple[str, str]]]:
    """Single arrows and covariances in an order ``parse_model`` maps back to ``spec``.

    Outcomes must start in regression order, predictors keep their order,
    covariances keep their order and variables first appear as in
    ``spec.variables``.
    """
    outcomes = [reg.outcome for reg in spec.regressions]
    preds = [reg.predictors for reg in spec.regressions]
    covs = spec.covariances
    target = spec.variables
    dead = set()

    def search(done: Tuple[int, ...], ci: int, pos: int):
        if ci == len(covs) and all(d == len(p) for d, p in zip(done, preds)):
            return [] if pos == len(target) else None
        key = (done, ci)
        if key in dead:
            return None
        started = sum(1 for d in done if d > 0)
        options = []
        for k in range(min(started + 1, len(outcomes))):
            if done[k] < len(preds[k]):
                options.append(("reg", (outcomes[k], preds[k][done[k]]), k))
        if ci < len(covs):
            options.append(("cov", covs[ci], None))
        for kind, pair, k in options:
            nxt = _advance(pair, target, pos)
            if nxt is None:
                continue
            if kind == "reg":
                rest = search(done[:k] + (done[k] + 1,) + done[k + 1:], ci, nxt)
            else:
                rest = search(done, ci + 1, nxt)
            if rest is not None:
                return [(kind, pair)] + rest
        dead.add(key)
        return None

    atoms = search(tuple(0 for _ in outcomes), 0, 0)
    if atoms is None:
        raise ValueError("model cannot be written in canonical form")
    return atoms


def render_model(spec: ModelSpec) -> str:
    """Canonical text for ``spec``; ``parse_model`` reproduces the same spec.

    Consecutive arrows into one outcome are written as one statement.
    """
    lines: List[str] = []
    last_outcome = None
    for kind, pair in _atom_order(spec):
        if kind == "reg":
            outcome, pred = pair
            if last_outcome == outcome:
                lines[-1] += f" + {pred}"
            else:
                lines.append(f"{outcome} ~ {pred}")
            last_outcome = outcome
        else:
            lines.append(f"{pair[0]} ~~ {pair[1]}")
            last_outcome = None
    return "\n".join(lines) + "\n"


def read_model_file(path) -> ModelSpec:
    """Read and parse a ``.path`` model file (UTF-8)."""
    try:
        with open(path, "r", encoding="utf-8-sig") as f:
            text = f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise DataIoError(f"cannot read model file {path}: {e}") from e
    logger.info(f"Loaded model file {path}")
    return parse_model(text)
