"""Parser for policy documents.

Grammar (UTF-8 text, ``#`` starts a comment running to end of line)::

    document   := policy+
    policy     := "policy" IDENT group
    group      := term (("seq"|"par"|"gchoice"|"uchoice") term)*
    term       := rule | "(" group ")"
    rule       := ["appliesTo" IDENT] ["when" trig ("or" trig)*] ["if" cond] "do" act
    trig       := IDENT "(" [arglist] ")"
    cond       := cterm (("and"|"or") cterm)*
    cterm      := ["not"] (IDENT "(" [arglist] ")" | "(" cond ")")
    act        := aterm (("and"|"andthen"|"or"|"orelse") aterm)*
    aterm      := IDENT "(" [arglist] ")" | "(" act ")"
    arglist    := arg ("," arg)* ;  arg := IDENT | NUMBER | STRING

All binary operators sit at a single precedence level and associate to
the left; parentheses override. Keywords are reserved and cannot be used
as identifiers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import DocumentError, ParseError
from .ast import (
    ACTION_OPS,
    GROUP_OPS,
    Action,
    ActionCall,
    ActionOp,
    AndCond,
    Arg,
    Condition,
    GroupNode,
    Ident,
    NotCond,
    Number,
    OrCond,
    Policy,
    PolicyDocument,
    PolicyRule,
    Pred,
    RuleGroup,
    RuleLeaf,
    Text,
    TriggerSpec,
)

KEYWORDS = frozenset(
    ["policy", "appliesTo", "when", "if", "do", "not"]
    + list(ACTION_OPS)
    + list(GROUP_OPS)
)

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"[0-9]+")


@dataclass(frozen=True)
class Token:
    kind: str  # keyword itself, or one of IDENT NUMBER STRING ( ) , EOF
    value: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "(),":
            tokens.append(Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            chars: list[str] = []
            while i < n and text[i] != '"':
                c = text[i]
                if c == "\n":
                    raise ParseError("unterminated string", start_line, start_col)
                if c == "\\":
                    if i + 1 >= n or text[i + 1] not in '"\\':
                        raise ParseError("bad escape in string", line, col)
                    chars.append(text[i + 1])
                    i += 2
                    col += 2
                    continue
                chars.append(c)
                i += 1
                col += 1
            if i >= n:
                raise ParseError("unterminated string", start_line, start_col)
            i += 1
            col += 1
            tokens.append(Token("STRING", "".join(chars), start_line, start_col))
            continue
        m = _NUMBER_RE.match(text, i)
        if m:
            tokens.append(Token("NUMBER", m.group(), line, col))
            col += m.end() - i
            i = m.end()
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            word = m.group()
            kind = word if word in KEYWORDS else "IDENT"
            tokens.append(Token(kind, word, line, col))
            col += m.end() - i
            i = m.end()
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.cur
        self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        if self.cur.kind != kind:
            self.fail(kind)
        return self.advance()

    def fail(self, *expected: str):
        tok = self.cur
        got = tok.value if tok.kind != "EOF" else "end of input"
        raise ParseError(f"unexpected {got!r}", tok.line, tok.col, expected)

    # document / policy ------------------------------------------------

    def document(self) -> PolicyDocument:
        policies = []
        seen: dict[str, tuple[int, int]] = {}
        while self.cur.kind != "EOF":
            policies.append(self.policy(seen))
        if not policies:
            self.fail("policy")
        return PolicyDocument(tuple(policies))

    def policy(self, seen: dict[str, tuple[int, int]]) -> Policy:
        head = self.expect("policy")
        name = self.expect("IDENT").value
        if name in seen:
            raise DocumentError(
                f"duplicate policy name {name!r} (first defined at "
                f"{seen[name][0]}:{seen[name][1]})",
                head.line,
                head.col,
            )
        seen[name] = (head.line, head.col)
        return Policy(name, self.group(), pos=(head.line, head.col))

    # rule groups --------------------------------------------------------

    def group(self) -> RuleGroup:
        node = self.term()
        while self.cur.kind in GROUP_OPS:
            op = self.advance().kind
            node = GroupNode(op, node, self.term())
        return node

    def term(self) -> RuleGroup:
        if self.cur.kind == "(":
            self.advance()
            node = self.group()
            self.expect(")")
            return node
        return RuleLeaf(self.rule())

    def rule(self) -> PolicyRule:
        start = self.cur
        if start.kind not in ("appliesTo", "when", "if", "do"):
            self.fail("appliesTo", "when", "if", "do", "(")
        location = None
        if self.cur.kind == "appliesTo":
            self.advance()
            location = self.expect("IDENT").value
        triggers: list[TriggerSpec] = []
        if self.cur.kind == "when":
            self.advance()
            triggers.append(self.trigger())
            while self.cur.kind == "or":
                self.advance()
                triggers.append(self.trigger())
        condition = None
        if self.cur.kind == "if":
            self.advance()
            condition = self.condition()
        self.expect("do")
        action = self.action()
        return PolicyRule(
            location, tuple(triggers), condition, action, pos=(start.line, start.col)
        )

    def trigger(self) -> TriggerSpec:
        name = self.expect("IDENT")
        args = self.call_args()
        return TriggerSpec(name.value, args, pos=(name.line, name.col))

    # conditions ---------------------------------------------------------

    def condition(self) -> Condition:
        node = self.cterm()
        while self.cur.kind in ("and", "or"):
            op = self.advance().kind
            right = self.cterm()
            node = AndCond(node, right) if op == "and" else OrCond(node, right)
        return node

    def cterm(self) -> Condition:
        if self.cur.kind == "not":
            self.advance()
            return NotCond(self.cterm_base())
        return self.cterm_base()

    def cterm_base(self) -> Condition:
        if self.cur.kind == "(":
            self.advance()
            node = self.condition()
            self.expect(")")
            return node
        name = self.cur
        if name.kind != "IDENT":
            self.fail("IDENT", "(", "not")
        self.advance()
        args = self.call_args()
        return Pred(name.value, args, pos=(name.line, name.col))

    # actions --------------------------------------------------------------

    def action(self) -> Action:
        node = self.aterm()
        while self.cur.kind in ACTION_OPS:
            op = self.advance().kind
            node = ActionOp(op, node, self.aterm())
        return node

    def aterm(self) -> Action:
        if self.cur.kind == "(":
            self.advance()
            node = self.action()
            self.expect(")")
            return node
        name = self.cur
        if name.kind != "IDENT":
            self.fail("IDENT", "(")
        self.advance()
        args = self.call_args()
        return ActionCall(name.value, args, pos=(name.line, name.col))

    # argument lists -------------------------------------------------------

    def call_args(self) -> tuple[Arg, ...]:
        self.expect("(")
        args: list[Arg] = []
        if self.cur.kind != ")":
            args.append(self.arg())
            while self.cur.kind == ",":
                self.advance()
                args.append(self.arg())
        self.expect(")")
        return tuple(args)

    def arg(self) -> Arg:
        tok = self.cur
        if tok.kind == "IDENT":
            self.advance()
            return Ident(tok.value)
        if tok.kind == "NUMBER":
            self.advance()
            return Number(int(tok.value))
        if tok.kind == "STRING":
            self.advance()
            return Text(tok.value)
        self.fail("IDENT", "NUMBER", "STRING")
        raise AssertionError("unreachable")


def parse_policy_document(text: str) -> PolicyDocument:
    """Parse policy text into a document AST.

    Raises :class:`ParseError` on malformed input (with line/column and
    the expected-token set) and :class:`DocumentError` when two policies
    share a name.
    """
    return _Parser(tokenize(text)).document()
