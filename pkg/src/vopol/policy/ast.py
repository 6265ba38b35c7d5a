"""AST for core policy documents.

The core language is domain-agnostic: triggers, condition predicates and
actions are opaque names with argument lists. All nodes are frozen
dataclasses, so two parses of the same text compare equal structurally.
Source positions are carried for diagnostics but excluded from equality,
which keeps parse/render round-trips comparable with ``==``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

GROUP_OPS = ("seq", "par", "gchoice", "uchoice")
ACTION_OPS = ("and", "andthen", "or", "orelse")


@dataclass(frozen=True)
class Ident:
    value: str


@dataclass(frozen=True)
class Number:
    value: int


@dataclass(frozen=True)
class Text:
    value: str


Arg = Union[Ident, Number, Text]


@dataclass(frozen=True)
class TriggerSpec:
    name: str
    args: tuple[Arg, ...] = ()
    pos: tuple[int, int] | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Pred:
    """Condition leaf: a domain predicate applied to arguments."""

    name: str
    args: tuple[Arg, ...] = ()
    pos: tuple[int, int] | None = field(default=None, compare=False)


@dataclass(frozen=True)
class NotCond:
    child: "Condition"


@dataclass(frozen=True)
class AndCond:
    left: "Condition"
    right: "Condition"


@dataclass(frozen=True)
class OrCond:
    left: "Condition"
    right: "Condition"


Condition = Union[Pred, NotCond, AndCond, OrCond]


@dataclass(frozen=True)
class ActionCall:
    """Action leaf: a domain action applied to arguments."""

    name: str
    args: tuple[Arg, ...] = ()
    pos: tuple[int, int] | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ActionOp:
    """Composite action. ``op`` is one of ``and``, ``andthen``, ``or``,
    ``orelse``; all four share one precedence level, left-associative."""

    op: str
    left: "Action"
    right: "Action"


Action = Union[ActionCall, ActionOp]


@dataclass(frozen=True)
class PolicyRule:
    """``[appliesTo location] [when trigger] [if condition] do action``.

    An empty trigger tuple is the documented wildcard: the rule is
    considered on every trigger arriving at its location.
    """

    location: str | None
    triggers: tuple[TriggerSpec, ...]
    condition: Condition | None
    action: Action
    pos: tuple[int, int] | None = field(default=None, compare=False)


@dataclass(frozen=True)
class RuleLeaf:
    rule: PolicyRule


@dataclass(frozen=True)
class GroupNode:
    """Rule-group composition. ``op`` is one of ``seq``, ``par``,
    ``gchoice``, ``uchoice``; binary, left-associative in flat text."""

    op: str
    left: "RuleGroup"
    right: "RuleGroup"


RuleGroup = Union[RuleLeaf, GroupNode]


@dataclass(frozen=True)
class Policy:
    name: str
    body: RuleGroup
    pos: tuple[int, int] | None = field(default=None, compare=False)


@dataclass(frozen=True)
class PolicyDocument:
    policies: tuple[Policy, ...]


def iter_rules(group: RuleGroup):
    """Yield ``(index, rule)`` for every leaf in textual (in-order) order.

    The index is the rule's identifier within its policy.
    """
    counter = 0

    def walk(node: RuleGroup):
        nonlocal counter
        if isinstance(node, RuleLeaf):
            yield counter, node.rule
            counter += 1
        else:
            yield from walk(node.left)
            yield from walk(node.right)

    yield from walk(group)


def iter_action_calls(action: Action):
    """Yield every action leaf in textual order."""
    if isinstance(action, ActionCall):
        yield action
    else:
        yield from iter_action_calls(action.left)
        yield from iter_action_calls(action.right)


def iter_predicates(cond: Condition):
    """Yield every predicate leaf of a condition tree in textual order."""
    if isinstance(cond, Pred):
        yield cond
    elif isinstance(cond, NotCond):
        yield from iter_predicates(cond.child)
    else:
        yield from iter_predicates(cond.left)
        yield from iter_predicates(cond.right)
