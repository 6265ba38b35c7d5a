"""Domain vocabulary for organisation reconfiguration.

Maps the policy-level action and predicate names onto the structural
model: nine actions (workflow control/data, task typing, membership,
duties), five read-only predicates, the three task-lifecycle triggers and
the hidden bootstrap allocator that runs when a task starts.

Every ``apply_*`` function is all-or-nothing: it returns a fresh model
that passes :func:`vopol.model.validate_model`, or raises with the input
model untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .policy.ast import ActionCall, Arg, Ident, Number, Text
from .policy.validate import THIS, Vocabulary
from .errors import (
    ActiveTaskError,
    AlreadyMemberError,
    AtomicityViolationError,
    CapabilityMissingError,
    CapacityExceededError,
    InvalidArgumentError,
    NotAMemberError,
    TaskFailure,
    UnknownActionError,
    UnknownDutyError,
    UnknownMemberError,
    UnknownPredicateError,
    UnknownTaskError,
    UnresolvedIdentifierError,
)
from .model import TaskType, VoModel, free_capacity, insert_task_node, remove_task_node, set_dataflow_edge
from .state import Hold, InstanceState

TRIGGER_NAMES = ("task_entry", "task_exit", "task_failure")

COMPETITION = "competition"

VOCABULARY = Vocabulary(
    triggers={name: (0, 1) for name in TRIGGER_NAMES},
    predicates={
        "can_run": (1, 1),
        "active": (1, 1),
        "task_type": (2, 2),
        "has_capacity": (3, 3),
        "has_capability": (2, 2),
    },
    actions={
        "add_task": (3, 3),
        "delete_task": (1, 1),
        "provide_input": (2, 2),
        "remove_input": (2, 2),
        "change_type": (2, 3),
        "add_member": (1, 1),
        "remove_member": (1, 1),
        "assign_duty": (2, 4),
        "unassign_duty": (2, 3),
    },
)

_KIND_RANK = {"Partner": 0, "Associate": 1, "ExtEntity": 2}
_NO_BID = 10**9  # members without a bid sort after any real offer


@dataclass(frozen=True)
class DomainTrigger:
    name: str
    task: str


@dataclass(frozen=True)
class DomainAction:
    """A resolved reconfiguration request: action name plus literal
    arguments. ``assign_duty`` normalizes to (member, task, capability,
    amount-or-None); a None amount means "the task's remaining shortfall,
    decided at application time"."""

    name: str
    args: tuple[str | int | None, ...]

    def render(self) -> str:
        shown = ["?" if a is None else str(a) for a in self.args]
        return f"{self.name}({','.join(shown)})"


@dataclass
class EvalContext:
    """Evaluation environment for predicates and actions: the current
    model, the running instance (may be absent for pure library use), the
    triggering task, and a sink collecting capacity holds created by
    removals that touch active tasks."""

    model: VoModel
    instance: InstanceState | None = None
    this_task: str | None = None
    hold_sink: list[Hold] = field(default_factory=list)

    @property
    def params(self) -> dict[str, int]:
        return self.model.params

    def is_active(self, task: str) -> bool:
        return self.instance.is_active(task) if self.instance is not None else False


# ---------------------------------------------------------------------------
# argument resolution
# ---------------------------------------------------------------------------


def _name_arg(ctx: EvalContext, arg: Arg, what: str) -> str:
    """Entity-position argument: an identifier (``this`` resolves to the
    triggering task) or a quoted string used verbatim."""
    if isinstance(arg, Ident):
        if arg.value == THIS:
            if ctx.this_task is None:
                raise UnresolvedIdentifierError("no triggering task bound for 'this'", THIS)
            return ctx.this_task
        return arg.value
    if isinstance(arg, Text):
        return arg.value
    raise InvalidArgumentError(f"{what} must be a name, got {arg.value!r}")


def _amount_arg(ctx: EvalContext, arg: Arg, what: str) -> int:
    """Amount-position argument: an integer literal or a declared model
    parameter."""
    if isinstance(arg, Number):
        return arg.value
    if isinstance(arg, Ident):
        if arg.value in ctx.params:
            return ctx.params[arg.value]
        raise UnresolvedIdentifierError(
            f"{what}: {arg.value!r} is not a declared parameter", arg.value
        )
    raise InvalidArgumentError(f"{what} must be an integer or parameter")


def resolve_action(ctx: EvalContext, call: ActionCall) -> DomainAction:
    """Normalize a syntactic action call into a :class:`DomainAction`.

    Fills the defaults the short forms leave out: an omitted duty task
    defaults to the triggering task, an omitted duty amount stays None and
    is sized at application time.
    """
    name = call.name
    if name not in VOCABULARY.actions:
        raise UnknownActionError(f"unknown action {name!r}", name)
    lo, hi = VOCABULARY.actions[name]
    if not lo <= len(call.args) <= hi:
        want = str(lo) if lo == hi else f"{lo}..{hi}"
        raise InvalidArgumentError(f"{name} takes {want} argument(s), got {len(call.args)}", name)

    def names(upto: int | None = None) -> list[str]:
        picked = call.args if upto is None else call.args[:upto]
        return [_name_arg(ctx, a, f"{name} argument") for a in picked]

    if name == "assign_duty":
        if len(call.args) == 2:
            member, capability = names()
            task, amount = ctx.this_task, None
            if task is None:
                raise UnresolvedIdentifierError("assign_duty without a task needs a triggering task", name)
        elif len(call.args) == 3:
            member, task, capability = names()
            amount = None
        else:
            member, task, capability = names(3)
            amount = _amount_arg(ctx, call.args[3], "assign_duty amount")
        return DomainAction(name, (member, task, capability, amount))
    if name == "unassign_duty":
        if len(call.args) == 2:
            member, capability = names()
            task = ctx.this_task
            if task is None:
                raise UnresolvedIdentifierError("unassign_duty without a task needs a triggering task", name)
        else:
            member, task, capability = names()
        return DomainAction(name, (member, task, capability))
    if name == "change_type" and len(call.args) == 2:
        first, second = names()
        return DomainAction(name, (first, second, None))
    return DomainAction(name, tuple(names()))


# ---------------------------------------------------------------------------
# actions
# ---------------------------------------------------------------------------


def _coverage(m: VoModel, task: str, capability: str) -> int:
    return sum(
        amount
        for (mid, tid, cap), amount in m.duties.items()
        if tid == task and cap == capability and mid in m.members
    )


def remaining_shortfall(m: VoModel, task: str, capability: str) -> int:
    """Required amount minus what current members' duties already cover."""
    required = m.tasks[task].required.get(capability, 0)
    return max(0, required - _coverage(m, task, capability))


def _drop_duty(out: VoModel, ctx: EvalContext, member: str, task: str, capability: str, amount: int):
    """Remove one duty; its reservation is either released now or, when
    the task is running, held until that instance finishes."""
    del out.duties[(member, task, capability)]
    if ctx.is_active(task):
        ctx.hold_sink.append(Hold(task, member, capability, amount))
    else:
        out.ledger.add(member, capability, -amount)


def apply_member_action(ctx: EvalContext, action: DomainAction) -> VoModel:
    m = ctx.model
    (who,) = action.args
    assert isinstance(who, str)
    if action.name == "add_member":
        if who in m.members:
            raise AlreadyMemberError(f"{who!r} is already a member", who)
        if who not in m.registry:
            raise UnknownMemberError(f"{who!r} is not in the candidate registry", who)
        out = m.clone()
        out.members[who] = out.registry.pop(who)
        return out
    if who not in m.members:
        raise NotAMemberError(f"{who!r} is not a member", who)
    out = m.clone()
    for duty in m.duties_of(who):
        _drop_duty(out, ctx, duty.member, duty.task, duty.capability, duty.amount)
    out.registry[who] = out.members.pop(who)
    return out


def apply_duty_action(ctx: EvalContext, action: DomainAction) -> VoModel:
    m = ctx.model
    member, task = action.args[0], action.args[1]
    capability = action.args[2]
    assert isinstance(member, str) and isinstance(task, str) and isinstance(capability, str)
    if m.anyone(member) is None:
        raise UnknownMemberError(f"unknown member {member!r}", member)
    if task not in m.tasks:
        raise UnknownTaskError(f"unknown task {task!r}", task)

    if action.name == "unassign_duty":
        amount = m.duties.get((member, task, capability))
        if amount is None:
            raise UnknownDutyError(f"no duty ({member}, {task}, {capability}) to unassign", member)
        out = m.clone()
        _drop_duty(out, ctx, member, task, capability, amount)
        return out

    if member not in m.members:
        raise NotAMemberError(f"{member!r} is not a member", member)
    if capability not in m.members[member].capabilities:
        raise CapabilityMissingError(f"{member!r} declares no capability {capability!r}", member)
    if capability not in m.tasks[task].required:
        raise CapabilityMissingError(f"task {task!r} does not require {capability!r}", task)
    task_def = m.tasks[task]
    if task_def.ttype is TaskType.ATOMIC:
        others = {d.member for d in m.duties_on(task)} - {member}
        if others:
            raise AtomicityViolationError(
                f"atomic task {task!r} is already assigned to {sorted(others)[0]!r}", task
            )
    amount = action.args[3]
    if amount is None:
        amount = remaining_shortfall(m, task, capability)
    assert isinstance(amount, int)
    if amount < 0:
        raise InvalidArgumentError("duty amount must be non-negative", member)
    old = m.duties.get((member, task, capability), 0)
    delta = amount - old
    free = free_capacity(m, member, capability) or 0
    if delta > free:
        raise CapacityExceededError(
            f"assigning {amount} of ({member}, {capability}) exceeds free capacity {free} + held {old}",
            member,
        )
    out = m.clone()
    out.duties[(member, task, capability)] = amount
    if delta >= 0:
        out.ledger.add(member, capability, delta)
    elif ctx.is_active(task):
        # commitment to a running task remains until it finishes
        ctx.hold_sink.append(Hold(task, member, capability, -delta))
    else:
        out.ledger.add(member, capability, delta)
    return out


def apply_change_type(ctx: EvalContext, task: str, new_type: str, sharing: str | None) -> VoModel:
    m = ctx.model
    if task not in m.tasks:
        raise UnknownTaskError(f"unknown task {task!r}", task)
    try:
        ttype = TaskType(new_type)
    except ValueError:
        raise InvalidArgumentError(f"unknown task type {new_type!r}", task) from None
    if ttype is TaskType.ATOMIC:
        holders = {d.member for d in m.duties_on(task)}
        if len(holders) > 1:
            raise AtomicityViolationError(
                f"cannot make {task!r} atomic: duties from {len(holders)} members", task
            )
    out = m.clone()
    out.tasks[task].ttype = ttype
    if sharing is not None:
        out.tasks[task].sharing = sharing
    return out


def apply_workflow_action(ctx: EvalContext, action: DomainAction) -> VoModel:
    m = ctx.model
    if action.name == "add_task":
        t1, t2, relation = action.args
        return insert_task_node(m, str(t1), str(t2), str(relation))
    if action.name == "delete_task":
        (task,) = action.args
        assert isinstance(task, str)
        if ctx.is_active(task):
            raise ActiveTaskError(f"task {task!r} is active and cannot be deleted", task)
        return remove_task_node(m, task)
    item, task = action.args
    assert isinstance(item, str) and isinstance(task, str)
    mode = "add" if action.name == "provide_input" else "remove"
    out, _warning = set_dataflow_edge(m, item, task, mode)
    return out


def apply_action(ctx: EvalContext, action: DomainAction) -> VoModel:
    """Dispatch one resolved action; returns the new model or raises with
    the old one untouched."""
    if action.name in ("add_member", "remove_member"):
        return apply_member_action(ctx, action)
    if action.name in ("assign_duty", "unassign_duty"):
        return apply_duty_action(ctx, action)
    if action.name == "change_type":
        task, new_type, sharing = action.args
        assert isinstance(task, str) and isinstance(new_type, str)
        return apply_change_type(ctx, task, new_type, sharing if isinstance(sharing, str) else None)
    if action.name in ("add_task", "delete_task", "provide_input", "remove_input"):
        return apply_workflow_action(ctx, action)
    raise UnknownActionError(f"unknown action {action.name!r}", action.name)


# ---------------------------------------------------------------------------
# predicates
# ---------------------------------------------------------------------------


def can_run(m: VoModel, task: str) -> bool:
    """All required capabilities covered by duties of current members."""
    task_def = m.tasks.get(task)
    if task_def is None:
        raise UnresolvedIdentifierError(f"unknown task {task!r}", task)
    if any(d.member not in m.members for d in m.duties_on(task)):
        return False
    return all(remaining_shortfall(m, task, cap) == 0 for cap in task_def.required)


def eval_predicate(ctx: EvalContext, name: str, args: tuple[Arg, ...]) -> bool:
    """Evaluate one condition predicate; read-only on the model."""
    m = ctx.model
    if name not in VOCABULARY.predicates:
        raise UnknownPredicateError(f"unknown predicate {name!r}", name)
    lo, hi = VOCABULARY.predicates[name]
    if not lo <= len(args) <= hi:
        raise InvalidArgumentError(f"{name} takes {lo} argument(s), got {len(args)}", name)

    if name == "can_run":
        return can_run(m, _name_arg(ctx, args[0], "can_run task"))
    if name == "active":
        task = _name_arg(ctx, args[0], "active task")
        if task not in m.tasks:
            raise UnresolvedIdentifierError(f"unknown task {task!r}", task)
        return ctx.is_active(task)
    if name == "task_type":
        task = _name_arg(ctx, args[0], "task_type task")
        wanted = _name_arg(ctx, args[1], "task_type type")
        if task not in m.tasks:
            raise UnresolvedIdentifierError(f"unknown task {task!r}", task)
        try:
            return m.tasks[task].ttype is TaskType(wanted)
        except ValueError:
            raise InvalidArgumentError(f"unknown task type {wanted!r}", wanted) from None
    if name == "has_capacity":
        member = _name_arg(ctx, args[0], "has_capacity member")
        capability = _name_arg(ctx, args[1], "has_capacity capability")
        amount = _amount_arg(ctx, args[2], "has_capacity amount")
        if m.anyone(member) is None:
            raise UnresolvedIdentifierError(f"unknown member {member!r}", member)
        free = free_capacity(m, member, capability)
        return free is not None and free >= amount
    # has_capability: declaration is required, reservations are irrelevant
    member = _name_arg(ctx, args[0], "has_capability member")
    capability = _name_arg(ctx, args[1], "has_capability capability")
    if m.anyone(member) is None:
        raise UnresolvedIdentifierError(f"unknown member {member!r}", member)
    return m.declared(member, capability) is not None


# ---------------------------------------------------------------------------
# bootstrap
# ---------------------------------------------------------------------------


def _member_order(m: VoModel, ids: list[str], capability: str, competition: bool) -> list[str]:
    if not competition:
        return sorted(ids)
    return sorted(ids, key=lambda mid: (m.anyone(mid).cost.get(capability, _NO_BID), mid))


def _candidate_order(m: VoModel, capability: str, competition: bool) -> list[str]:
    def key(mid: str):
        who = m.registry[mid]
        rank = _KIND_RANK[who.kind.value]
        if competition:
            return (rank, who.cost.get(capability, _NO_BID), mid)
        return (rank, mid)

    return sorted(m.registry, key=key)


def run_bootstrap(ctx: EvalContext, task: str) -> tuple[VoModel, list[DomainAction]]:
    """Default start-of-task allocation: top up under-covered capabilities
    from current members first, then by admitting registry candidates.

    Returns the (possibly unchanged) model and the actions performed, or
    raises :class:`TaskFailure` with nothing applied when the requirements
    cannot be covered. Atomic tasks only ever draw on a single member.
    """
    m = ctx.model
    if task not in m.tasks:
        raise UnknownTaskError(f"unknown task {task!r}", task)
    if can_run(m, task):
        return m, []
    task_def = m.tasks[task]
    competition = task_def.sharing == COMPETITION
    scratch = m.clone()
    performed: list[DomainAction] = []

    def allowed(mid: str) -> bool:
        if scratch.tasks[task].ttype is not TaskType.ATOMIC:
            return True
        holders = {d.member for d in scratch.duties_on(task)}
        return not holders or holders == {mid}

    def take_from(mid: str, capability: str, shortfall: int) -> int:
        free = free_capacity(scratch, mid, capability)
        if not free or free <= 0:
            return 0
        take = min(free, shortfall)
        new_amount = scratch.duties.get((mid, task, capability), 0) + take
        scratch.duties[(mid, task, capability)] = new_amount
        scratch.ledger.add(mid, capability, take)
        performed.append(DomainAction("assign_duty", (mid, task, capability, new_amount)))
        return take

    for capability in sorted(task_def.required):
        shortfall = remaining_shortfall(scratch, task, capability)
        for mid in _member_order(scratch, list(scratch.members), capability, competition):
            if shortfall == 0:
                break
            if allowed(mid):
                shortfall -= take_from(mid, capability, shortfall)
        for mid in _candidate_order(scratch, capability, competition):
            if shortfall == 0:
                break
            if not allowed(mid):
                continue
            free = free_capacity(scratch, mid, capability)
            if not free or free <= 0:
                continue
            scratch.members[mid] = scratch.registry.pop(mid)
            performed.append(DomainAction("add_member", (mid,)))
            shortfall -= take_from(mid, capability, shortfall)
        if shortfall > 0:
            raise TaskFailure(
                f"task {task!r} needs {shortfall} more of {capability!r} and no suitable member can cover it",
                task,
            )
    return scratch, performed
