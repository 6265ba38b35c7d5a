"""Policy language core: AST, parser, renderer, evaluation, validation."""

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
    iter_action_calls,
    iter_predicates,
    iter_rules,
)
from .evaluate import (
    ActionOutcome,
    eval_condition,
    evaluate_rule_group,
    linearize_actions,
    match_trigger,
)
from .parser import parse_policy_document, tokenize
from .render import render_policy, render_policy_document
from .validate import THIS, Vocabulary, validate_policies

__all__ = [
    "ACTION_OPS",
    "GROUP_OPS",
    "Action",
    "ActionCall",
    "ActionOp",
    "ActionOutcome",
    "AndCond",
    "Arg",
    "Condition",
    "GroupNode",
    "Ident",
    "NotCond",
    "Number",
    "OrCond",
    "Policy",
    "PolicyDocument",
    "PolicyRule",
    "Pred",
    "RuleGroup",
    "RuleLeaf",
    "THIS",
    "Text",
    "TriggerSpec",
    "Vocabulary",
    "eval_condition",
    "evaluate_rule_group",
    "iter_action_calls",
    "iter_predicates",
    "iter_rules",
    "linearize_actions",
    "match_trigger",
    "parse_policy_document",
    "render_policy",
    "render_policy_document",
    "tokenize",
    "validate_policies",
]
