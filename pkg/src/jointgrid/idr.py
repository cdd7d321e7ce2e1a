"""Textual rule language for inter-dependency relations (IDRs).

A rule gives one entity's operational level as an expression over other
entities' levels:

    C(2,1,1,0) <- (C(2,1,2,0) & C(2,2,1,2)) | (C(2,1,6,0) & C(2,2,1,6))

Ternary-model operators: ``&`` (min-AND, tightest), ``|`` (max-OR), ``^``
(new-XOR, loosest), all left-associative.  Binary-model rules use ``.``
(AND) and ``+`` (OR) instead.  Operator nodes are n-ary: unparenthesized
chains of one operator flatten into a single node, while explicit
parentheses are preserved, so ``parse(format(rule))`` reproduces the rule
exactly.

Rule files (``.idr``) hold one rule per line; ``#`` starts a comment and
blank lines are ignored.  A ``#model: miim|iim`` comment line sets the
model for subsequent operator-free rules.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import Dict, FrozenSet, Iterable, List, Mapping, Set, Tuple, Union

from jointgrid import ternary
from jointgrid.entities import EntityId, EntityError, parse_entity_id

MIIM = "miim"
IIM = "iim"

OP_MIN_AND = "min_and"
OP_MAX_OR = "max_or"
OP_NEW_XOR = "new_xor"
OP_BOOL_AND = "bool_and"
OP_BOOL_OR = "bool_or"

_MIIM_OPS = frozenset({OP_MIN_AND, OP_MAX_OR, OP_NEW_XOR})
_IIM_OPS = frozenset({OP_BOOL_AND, OP_BOOL_OR})

_OP_SYMBOL = {
    OP_MIN_AND: "&",
    OP_MAX_OR: "|",
    OP_NEW_XOR: "^",
    OP_BOOL_AND: ".",
    OP_BOOL_OR: "+",
}
_SYMBOL_OP = {sym: op for op, sym in _OP_SYMBOL.items()}

# Binding strength: higher parses tighter.  ^ is loosest, & / . tightest.
_OP_LEVEL = {
    OP_NEW_XOR: 0,
    OP_MAX_OR: 1,
    OP_BOOL_OR: 1,
    OP_MIN_AND: 2,
    OP_BOOL_AND: 2,
}
_LEVEL_OPS = {
    0: (OP_NEW_XOR,),
    1: (OP_MAX_OR, OP_BOOL_OR),
    2: (OP_MIN_AND, OP_BOOL_AND),
}

_TRANSLATION = {OP_MIN_AND: OP_BOOL_AND, OP_MAX_OR: OP_BOOL_OR, OP_NEW_XOR: OP_BOOL_AND}


class IdrSyntaxError(ValueError):
    """Lexical or structural error in rule text."""


class IdrModelError(ValueError):
    """Rule violates the operator discipline of its model."""


class UnknownEntityError(KeyError):
    """Expression references an entity absent from the evaluation state."""

    def __init__(self, entity: EntityId):
        super().__init__(str(entity))
        self.entity = entity

    def __str__(self):
        return f"unknown entity {self.entity}"


@dataclass(frozen=True)
class Literal:
    entity: EntityId


@dataclass(frozen=True)
class Op:
    op: str
    children: Tuple["IdrExpr", ...]

    def __post_init__(self):
        if self.op not in _OP_SYMBOL:
            raise IdrSyntaxError(f"unknown operator: {self.op!r}")
        if len(self.children) < 2:
            raise IdrSyntaxError(f"operator {_OP_SYMBOL[self.op]!r} needs >=2 operands")


IdrExpr = Union[Literal, Op]


@dataclass(frozen=True)
class IdrRule:
    target: EntityId
    body: IdrExpr
    model: str

    def __post_init__(self):
        if self.model not in (MIIM, IIM):
            raise IdrModelError(f"unknown model: {self.model!r}")
        ops = _collect_ops(self.body)
        allowed = _MIIM_OPS if self.model == MIIM else _IIM_OPS
        if not ops <= allowed:
            raise IdrModelError(
                f"{self.model} rule for {self.target} uses foreign operators: "
                f"{sorted(ops - allowed)}"
            )


def _collect_ops(expr: IdrExpr) -> Set[str]:
    if isinstance(expr, Literal):
        return set()
    ops = {expr.op}
    for child in expr.children:
        ops |= _collect_ops(child)
    return ops


# --- Lexer -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<entity>[A-Z]+\s*\(\s*\d+(?:\s*,\s*\d+)*\s*\))
  | (?P<arrow><-)
  | (?P<op>[&|^.+])
  | (?P<lparen>\()
  | (?P<rparen>\))
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if not match:
            raise IdrSyntaxError(f"unexpected character {text[pos]!r} at position {pos}")
        kind = match.lastgroup
        if kind != "ws":
            tokens.append((kind, match.group(), pos))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, tokens: List[Tuple[str, str, int]]):
        self.tokens = tokens
        self.index = 0

    def peek(self):
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def advance(self):
        token = self.peek()
        if token is None:
            raise IdrSyntaxError("unexpected end of input")
        self.index += 1
        return token

    def expect(self, kind: str):
        token = self.peek()
        if token is None or token[0] != kind:
            found = "end of input" if token is None else f"{token[1]!r} at position {token[2]}"
            raise IdrSyntaxError(f"expected {kind}, found {found}")
        return self.advance()

    def parse_expr(self, level: int = 0) -> IdrExpr:
        if level > 2:
            return self.parse_primary()
        operands = [self.parse_expr(level + 1)]
        chain_op = None
        while True:
            token = self.peek()
            if token is None or token[0] != "op":
                break
            op = _SYMBOL_OP[token[1]]
            if _OP_LEVEL[op] != level:
                if _OP_LEVEL[op] > level:
                    raise IdrSyntaxError(
                        f"internal precedence error at position {token[2]}"
                    )
                break
            if chain_op is None:
                chain_op = op
            elif op != chain_op:
                raise IdrSyntaxError(
                    f"mixed operators {_OP_SYMBOL[chain_op]!r} and {token[1]!r} "
                    f"in one chain at position {token[2]}; parenthesize"
                )
            self.advance()
            operands.append(self.parse_expr(level + 1))
        if len(operands) == 1:
            return operands[0]
        return Op(chain_op, tuple(operands))

    def parse_primary(self) -> IdrExpr:
        token = self.peek()
        if token is None:
            raise IdrSyntaxError("unexpected end of input")
        kind, text, pos = token
        if kind == "entity":
            self.advance()
            try:
                return Literal(parse_entity_id(text))
            except EntityError as exc:
                raise IdrSyntaxError(f"bad entity at position {pos}: {exc}") from exc
        if kind == "lparen":
            self.advance()
            inner = self.parse_expr(0)
            self.expect("rparen")
            return inner
        raise IdrSyntaxError(f"expected entity or '(', found {text!r} at position {pos}")


def parse_expr(text: str) -> IdrExpr:
    """Parse a bare rule body."""
    parser = _Parser(_tokenize(text))
    expr = parser.parse_expr(0)
    if parser.peek() is not None:
        kind, tok, pos = parser.peek()
        raise IdrSyntaxError(f"trailing input {tok!r} at position {pos}")
    return expr


def parse_idr(text: str, default_model: str = MIIM) -> IdrRule:
    """Parse ``target <- body`` rule text.

    The model is inferred from the operators in the body; a body with no
    operators (a bare entity literal) takes ``default_model``.
    """
    tokens = _tokenize(text)
    arrow_positions = [i for i, tok in enumerate(tokens) if tok[0] == "arrow"]
    if len(arrow_positions) != 1:
        raise IdrSyntaxError("rule must contain exactly one '<-'")
    split = arrow_positions[0]
    target_parser = _Parser(tokens[:split])
    target_expr = target_parser.parse_primary()
    if target_parser.peek() is not None or not isinstance(target_expr, Literal):
        raise IdrSyntaxError("rule target must be a single entity")
    body_parser = _Parser(tokens[split + 1 :])
    body = body_parser.parse_expr(0)
    if body_parser.peek() is not None:
        kind, tok, pos = body_parser.peek()
        raise IdrSyntaxError(f"trailing input {tok!r} at position {pos}")
    ops = _collect_ops(body)
    if ops & _MIIM_OPS and ops & _IIM_OPS:
        raise IdrModelError("rule mixes ternary and binary operators")
    if ops & _IIM_OPS:
        model = IIM
    elif ops & _MIIM_OPS:
        model = MIIM
    else:
        model = default_model
    return IdrRule(target_expr.entity, body, model)


# --- Printing ---------------------------------------------------------------


def format_expr(expr: IdrExpr) -> str:
    """Canonical text of a rule body; operator children are parenthesized."""
    if isinstance(expr, Literal):
        return str(expr.entity)
    symbol = f" {_OP_SYMBOL[expr.op]} "
    parts = []
    for child in expr.children:
        text = format_expr(child)
        if isinstance(child, Op):
            text = f"({text})"
        parts.append(text)
    return symbol.join(parts)


def format_idr(rule: IdrRule) -> str:
    """Canonical rule text; ``parse_idr(format_idr(r))`` reproduces ``r``."""
    return f"{rule.target} <- {format_expr(rule.body)}"


# --- Analysis and evaluation -------------------------------------------------


def free_entities(rule_or_expr: Union[IdrRule, IdrExpr]) -> FrozenSet[EntityId]:
    """All entity literals appearing in a rule body or expression."""
    expr = rule_or_expr.body if isinstance(rule_or_expr, IdrRule) else rule_or_expr
    found: Set[EntityId] = set()
    stack: List[IdrExpr] = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Literal):
            found.add(node.entity)
        else:
            stack.extend(node.children)
    return frozenset(found)


def evaluate(expr: IdrExpr, state: Mapping[EntityId, int]) -> int:
    """Bottom-up evaluation of an expression against an entity-state map."""
    if isinstance(expr, Literal):
        try:
            return state[expr.entity]
        except KeyError:
            raise UnknownEntityError(expr.entity) from None
    values = [evaluate(child, state) for child in expr.children]
    if expr.op == OP_MIN_AND:
        return reduce(ternary.min_and, values)
    if expr.op == OP_MAX_OR:
        return reduce(ternary.max_or, values)
    if expr.op == OP_NEW_XOR:
        return ternary.new_xor(values)
    if expr.op == OP_BOOL_AND:
        return reduce(ternary.binary_and, values)
    return reduce(ternary.binary_or, values)


def translate_to_iim(rule: IdrRule) -> IdrRule:
    """Rewrite a ternary-model rule into its binary-model counterpart.

    min-AND and new-XOR become Boolean AND, max-OR becomes Boolean OR; the
    tree shape and every literal are preserved.
    """
    if rule.model == IIM:
        raise IdrModelError("already binary")
    return IdrRule(rule.target, _translate_expr(rule.body), IIM)


def _translate_expr(expr: IdrExpr) -> IdrExpr:
    if isinstance(expr, Literal):
        return expr
    return Op(_TRANSLATION[expr.op], tuple(_translate_expr(c) for c in expr.children))


# --- Compiled evaluation (cascade engine fast path) --------------------------


def _nx(*values: int) -> int:
    first = values[0]
    for v in values:
        if v != first:
            return ternary.REDUCED
    return first


_COMPILE_GLOBALS = {"_nx": _nx, "min": min, "max": max, "__builtins__": {}}


def compile_expr(expr: IdrExpr, slots: Dict[EntityId, int]):
    """Compile an expression to a code object over a state array ``a``.

    ``slots`` maps each entity to its array index.  The compiled object is
    evaluated with ``eval(code, compiled_globals(), {"a": array})`` and
    returns the same value as :func:`evaluate`.
    """
    return compile(_expr_source(expr, slots), "<idr>", "eval")


def compiled_globals() -> dict:
    return dict(_COMPILE_GLOBALS)


def _expr_source(expr: IdrExpr, slots: Dict[EntityId, int]) -> str:
    if isinstance(expr, Literal):
        return f"a[{slots[expr.entity]}]"
    parts = [_expr_source(child, slots) for child in expr.children]
    if expr.op == OP_MIN_AND:
        return f"min({', '.join(parts)})"
    if expr.op == OP_MAX_OR:
        return f"max({', '.join(parts)})"
    if expr.op == OP_NEW_XOR:
        return f"_nx({', '.join(parts)})"
    joiner = " & " if expr.op == OP_BOOL_AND else " | "
    return "(" + joiner.join(parts) + ")"


# --- Rule files ---------------------------------------------------------------

_MODEL_DIRECTIVE_RE = re.compile(r"^#\s*model\s*:\s*(miim|iim)\s*$")


def parse_idr_file(text: str) -> List[IdrRule]:
    """Parse the lines of an ``.idr`` file into rules."""
    rules = []
    model = MIIM
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        directive = _MODEL_DIRECTIVE_RE.match(line)
        if directive:
            model = directive.group(1)
            continue
        if not line or line.startswith("#"):
            continue
        try:
            rules.append(parse_idr(line, default_model=model))
        except (IdrSyntaxError, IdrModelError) as exc:
            raise IdrSyntaxError(f"line {lineno}: {exc}") from exc
    return rules


def format_idr_file(rules: Iterable[IdrRule], header: Iterable[str] = ()) -> str:
    """Serialize rules to ``.idr`` text, emitting a model directive whenever
    the model changes between consecutive rules."""
    lines = [f"# {note}" for note in header]
    current_model = None
    for rule in rules:
        if rule.model != current_model:
            lines.append(f"#model: {rule.model}")
            current_model = rule.model
        lines.append(format_idr(rule))
    return "\n".join(lines) + "\n"
