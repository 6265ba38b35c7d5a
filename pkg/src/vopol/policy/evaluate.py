"""Core evaluation semantics for rule groups and composite actions.

Evaluation is domain-agnostic: condition predicates are decided by a
caller-supplied boolean function and action leaves are executed through a
caller-supplied attempt function that reports success or failure. The
engine wires both to the live organisation state; unit tests wire them to
recording stubs.

Choice operators are deterministic (textual-left-first); there is no
randomized mode, so identical inputs always evaluate identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .ast import (
    Action,
    ActionCall,
    AndCond,
    Condition,
    NotCond,
    OrCond,
    PolicyRule,
    Pred,
    RuleGroup,
    RuleLeaf,
    TriggerSpec,
)

PredicateEval = Callable[[Pred], bool]
ActionAttempt = Callable[[ActionCall], bool]


def match_trigger(rule: PolicyRule, event: TriggerSpec, location: str) -> bool:
    """True when ``rule`` is a candidate for ``event`` raised at ``location``.

    A rule without a location applies everywhere; a rule without triggers
    is the wildcard and matches any event. Trigger arguments never take
    part in matching, only names do.
    """
    if rule.location is not None and rule.location != location:
        return False
    if not rule.triggers:
        return True
    return any(t.name == event.name for t in rule.triggers)


def eval_condition(cond: Condition, predicate_eval: PredicateEval) -> bool:
    if isinstance(cond, Pred):
        return bool(predicate_eval(cond))
    if isinstance(cond, NotCond):
        return not eval_condition(cond.child, predicate_eval)
    if isinstance(cond, AndCond):
        return eval_condition(cond.left, predicate_eval) and eval_condition(
            cond.right, predicate_eval
        )
    if isinstance(cond, OrCond):
        return eval_condition(cond.left, predicate_eval) or eval_condition(
            cond.right, predicate_eval
        )
    raise TypeError(f"not a condition node: {cond!r}")


@dataclass
class ActionOutcome:
    """Result of executing one action tree.

    ``attempts`` lists every leaf that was attempted, in execution order,
    paired with its success flag; a leaf is attempted at most once.
    """

    succeeded: bool
    attempts: list[tuple[ActionCall, bool]] = field(default_factory=list)

    @property
    def failed_calls(self) -> list[ActionCall]:
        return [call for call, ok in self.attempts if not ok]


def linearize_actions(tree: Action, attempt: ActionAttempt) -> ActionOutcome:
    """Execute a composite action through ``attempt``.

    Operator semantics (left operand always goes first):

    - ``andthen``: right runs only if left succeeded; fails on either failure.
    - ``and``: both run regardless; succeeds only if both did.
    - ``or``: exactly one alternative runs, deterministically the left.
    - ``orelse``: right runs only if left failed; succeeds if either did.
    """
    outcome = ActionOutcome(succeeded=True)

    def run(node: Action) -> bool:
        if isinstance(node, ActionCall):
            ok = bool(attempt(node))
            outcome.attempts.append((node, ok))
            return ok
        if node.op == "andthen":
            return run(node.left) and run(node.right)
        if node.op == "and":
            left_ok = run(node.left)
            right_ok = run(node.right)
            return left_ok and right_ok
        if node.op == "or":
            return run(node.left)
        if node.op == "orelse":
            return run(node.left) or run(node.right)
        raise TypeError(f"unknown action operator: {node.op!r}")

    outcome.succeeded = run(tree)
    return outcome


def evaluate_rule_group(
    group: RuleGroup,
    event: TriggerSpec,
    location: str,
    predicate_eval: PredicateEval,
    action_sink: ActionAttempt,
) -> list[int]:
    """Evaluate a policy body against one trigger event.

    Returns the identifiers (textual in-order leaf indices) of the rules
    that applied. A rule applies when its trigger matches and its
    condition holds; its action tree is then executed through
    ``action_sink`` via :func:`linearize_actions`. Group operators:

    - ``seq``: left then right; the right side observes whatever state
      changes the sink made for the left side.
    - ``par``: both sides, left's actions emitted before right's
      (serialized; this engine never interleaves).
    - ``gchoice``: right is evaluated only if left did not apply.
    - ``uchoice``: the first side (textual order) that applies is the
      only one applied.

    Predicate evaluation errors propagate to the caller.
    """
    applied: list[int] = []
    index = -1

    def next_index() -> int:
        nonlocal index
        index += 1
        return index

    def skip(node: RuleGroup):
        # keep leaf numbering stable across unevaluated branches
        nonlocal index
        if isinstance(node, RuleLeaf):
            index += 1
        else:
            skip(node.left)
            skip(node.right)

    def eval_leaf(rule: PolicyRule) -> bool:
        idx = next_index()
        if not match_trigger(rule, event, location):
            return False
        if rule.condition is not None and not eval_condition(
            rule.condition, predicate_eval
        ):
            return False
        applied.append(idx)
        linearize_actions(rule.action, action_sink)
        return True

    def walk(node: RuleGroup) -> bool:
        if isinstance(node, RuleLeaf):
            return eval_leaf(node.rule)
        if node.op in ("seq", "par"):
            left_applied = walk(node.left)
            right_applied = walk(node.right)
            return left_applied or right_applied
        if node.op in ("gchoice", "uchoice"):
            if walk(node.left):
                skip(node.right)
                return True
            return walk(node.right)
        raise TypeError(f"unknown group operator: {node.op!r}")

    walk(group)
    return applied
