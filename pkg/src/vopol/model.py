"""Structural state of a virtual organisation and its primitive mutations.

The model holds members, the task catalogue, the control-flow graph over
in-process tasks, data flows, the candidate registry, named integer
parameters, duty assignments and the capacity ledger. Mutating operations
never modify their input: they return a fresh model, and a successful
result always satisfies :func:`validate_model`. Failed operations raise
and leave the caller's model untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    AlreadyInProcessError,
    CapabilityMissingError,
    CapacityExceededError,
    DanglingRefError,
    Diagnostic,
    InvalidArgumentError,
    ParseError,
    UnderflowError,
    UnknownMemberError,
    UnknownTaskError,
)

CUSTOMER = "customer"


class MemberKind(str, Enum):
    PARTNER = "Partner"
    ASSOCIATE = "Associate"
    EXT_ENTITY = "ExtEntity"


class TaskType(str, Enum):
    ATOMIC = "Atomic"
    REPLICABLE = "Replicable"
    COMPOSABLE = "Composable"


RELATIONS = ("parallel", "after")


@dataclass
class Member:
    id: str
    kind: MemberKind
    capabilities: dict[str, int] = field(default_factory=dict)
    cost: dict[str, int] = field(default_factory=dict)

    def clone(self) -> "Member":
        return Member(self.id, self.kind, dict(self.capabilities), dict(self.cost))


@dataclass
class TaskDef:
    id: str
    ttype: TaskType
    sharing: str | None = None
    required: dict[str, int] = field(default_factory=dict)
    inputs: set[str] = field(default_factory=set)
    in_process: bool = True

    def clone(self) -> "TaskDef":
        return TaskDef(
            self.id, self.ttype, self.sharing, dict(self.required), set(self.inputs), self.in_process
        )


@dataclass(frozen=True)
class DataFlow:
    item: str
    source: str  # CUSTOMER or a task id
    target: str


@dataclass(frozen=True)
class Duty:
    member: str
    task: str
    capability: str
    amount: int


@dataclass
class CapacityLedger:
    """Reserved units per (member, capability); never exceeds the declared
    capacity and never goes negative."""

    reserved: dict[tuple[str, str], int] = field(default_factory=dict)

    def get(self, member: str, capability: str) -> int:
        return self.reserved.get((member, capability), 0)

    def add(self, member: str, capability: str, delta: int):
        key = (member, capability)
        new = self.reserved.get(key, 0) + delta
        if new:
            self.reserved[key] = new
        else:
            self.reserved.pop(key, None)

    def clone(self) -> "CapacityLedger":
        return CapacityLedger(dict(self.reserved))


@dataclass
class VoModel:
    name: str
    members: dict[str, Member] = field(default_factory=dict)
    registry: dict[str, Member] = field(default_factory=dict)
    tasks: dict[str, TaskDef] = field(default_factory=dict)
    control_edges: set[tuple[str, str]] = field(default_factory=set)
    dataflows: set[DataFlow] = field(default_factory=set)
    vbe_resources: set[str] = field(default_factory=set)
    params: dict[str, int] = field(default_factory=dict)
    duties: dict[tuple[str, str, str], int] = field(default_factory=dict)
    ledger: CapacityLedger = field(default_factory=CapacityLedger)

    def clone(self) -> "VoModel":
        return VoModel(
            name=self.name,
            members={k: v.clone() for k, v in self.members.items()},
            registry={k: v.clone() for k, v in self.registry.items()},
            tasks={k: v.clone() for k, v in self.tasks.items()},
            control_edges=set(self.control_edges),
            dataflows=set(self.dataflows),
            vbe_resources=set(self.vbe_resources),
            params=dict(self.params),
            duties=dict(self.duties),
            ledger=self.ledger.clone(),
        )

    # lookups ----------------------------------------------------------

    def anyone(self, member_id: str) -> Member | None:
        """Member or registry candidate with this id."""
        return self.members.get(member_id) or self.registry.get(member_id)

    def declared(self, member_id: str, capability: str) -> int | None:
        who = self.anyone(member_id)
        if who is None or capability not in who.capabilities:
            return None
        return who.capabilities[capability]

    def in_process_tasks(self) -> list[str]:
        return sorted(t for t, d in self.tasks.items() if d.in_process)

    def predecessors(self, task: str) -> set[str]:
        return {p for p, s in self.control_edges if s == task}

    def successors(self, task: str) -> set[str]:
        return {s for p, s in self.control_edges if p == task}

    def iter_duties(self) -> list[Duty]:
        return [
            Duty(m, t, c, amount)
            for (m, t, c), amount in sorted(self.duties.items())
        ]

    def duties_on(self, task: str) -> list[Duty]:
        return [d for d in self.iter_duties() if d.task == task]

    def duties_of(self, member_id: str) -> list[Duty]:
        return [d for d in self.iter_duties() if d.member == member_id]


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------


def _int(tok: str, line_no: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {tok!r}", line_no, 1) from None


def _kv(tok: str, line_no: int) -> tuple[str, str]:
    if "=" not in tok:
        raise ParseError(f"expected key=value, got {tok!r}", line_no, 1)
    key, _, value = tok.partition("=")
    return key, value


def _parse_member(tokens: list[str], line_no: int) -> Member:
    if len(tokens) < 2:
        raise ParseError("member row needs an id and kind=", line_no, 1)
    mid = tokens[1]
    kind: MemberKind | None = None
    caps: dict[str, int] = {}
    costs: dict[str, int] = {}
    i = 2
    while i < len(tokens):
        tok = tokens[i]
        if tok == "cap":
            if i + 1 >= len(tokens):
                raise ParseError("cap clause needs name=amount", line_no, 1)
            cap_name, cap_val = _kv(tokens[i + 1], line_no)
            caps[cap_name] = _int(cap_val, line_no, f"capacity of {cap_name!r}")
            i += 2
            if i < len(tokens) and tokens[i].startswith("cost="):
                costs[cap_name] = _int(tokens[i][5:], line_no, "cost")
                i += 1
            continue
        key, value = _kv(tok, line_no)
        if key == "kind":
            try:
                kind = MemberKind(value)
            except ValueError:
                raise ParseError(f"unknown member kind {value!r}", line_no, 1) from None
        else:
            raise ParseError(f"unknown member attribute {key!r}", line_no, 1)
        i += 1
    if kind is None:
        raise ParseError(f"member {mid!r} is missing kind=", line_no, 1)
    return Member(mid, kind, caps, costs)


def _parse_task(tokens: list[str], line_no: int) -> TaskDef:
    if len(tokens) < 2:
        raise ParseError("task row needs an id", line_no, 1)
    tid = tokens[1]
    ttype: TaskType | None = None
    sharing = None
    required: dict[str, int] = {}
    inputs: set[str] = set()
    in_process = True
    i = 2
    while i < len(tokens):
        tok = tokens[i]
        if tok == "requires":
            if i + 1 >= len(tokens):
                raise ParseError("requires clause needs cap=amount", line_no, 1)
            cap_name, cap_val = _kv(tokens[i + 1], line_no)
            required[cap_name] = _int(cap_val, line_no, f"requirement {cap_name!r}")
            i += 2
            continue
        if tok == "input":
            if i + 1 >= len(tokens):
                raise ParseError("input clause needs an item name", line_no, 1)
            inputs.add(tokens[i + 1])
            i += 2
            continue
        key, value = _kv(tok, line_no)
        if key == "type":
            try:
                ttype = TaskType(value)
            except ValueError:
                raise ParseError(f"unknown task type {value!r}", line_no, 1) from None
        elif key == "sharing":
            sharing = value
        elif key == "inprocess":
            if value not in ("true", "false"):
                raise ParseError(f"inprocess must be true or false, got {value!r}", line_no, 1)
            in_process = value == "true"
        else:
            raise ParseError(f"unknown task attribute {key!r}", line_no, 1)
        i += 1
    if ttype is None:
        raise ParseError(f"task {tid!r} is missing type=", line_no, 1)
    return TaskDef(tid, ttype, sharing, required, inputs, in_process)


def load_model(text: str) -> VoModel:
    """Parse a model file. Raises :class:`ParseError` on malformed rows and
    :class:`DanglingRefError` when a row references an undefined id."""
    model: VoModel | None = None
    pending_edges: list[tuple[int, str, str]] = []
    pending_flows: list[tuple[int, str, str, str]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        row = tokens[0]
        if model is None:
            if row != "vo":
                raise ParseError("model file must start with a vo row", line_no, 1)
            if len(tokens) != 2:
                raise ParseError("vo row needs exactly one name", line_no, 1)
            model = VoModel(name=tokens[1])
            continue
        if row == "vo":
            raise ParseError("duplicate vo row", line_no, 1)
        if row == "param":
            if len(tokens) != 3:
                raise ParseError("param row needs a name and a value", line_no, 1)
            model.params[tokens[1]] = _int(tokens[2], line_no, f"param {tokens[1]!r}")
        elif row in ("member", "candidate"):
            who = _parse_member(tokens, line_no)
            if model.anyone(who.id) is not None:
                raise ParseError(f"duplicate member id {who.id!r}", line_no, 1)
            (model.members if row == "member" else model.registry)[who.id] = who
        elif row == "task":
            task = _parse_task(tokens, line_no)
            if task.id in model.tasks:
                raise ParseError(f"duplicate task id {task.id!r}", line_no, 1)
            model.tasks[task.id] = task
        elif row == "edge":
            if len(tokens) != 3:
                raise ParseError("edge row needs from and to", line_no, 1)
            pending_edges.append((line_no, tokens[1], tokens[2]))
        elif row == "dataflow":
            if len(tokens) != 4:
                raise ParseError("dataflow row needs item, from= and to=", line_no, 1)
            attrs = dict(_kv(tok, line_no) for tok in tokens[2:])
            if set(attrs) != {"from", "to"}:
                raise ParseError("dataflow row needs from= and to=", line_no, 1)
            pending_flows.append((line_no, tokens[1], attrs["from"], attrs["to"]))
        elif row == "resource":
            if len(tokens) != 2:
                raise ParseError("resource row needs an id", line_no, 1)
            model.vbe_resources.add(tokens[1])
        else:
            raise ParseError(f"unknown row kind {row!r}", line_no, 1)
    if model is None:
        raise ParseError("empty model file", 1, 1)
    for line_no, src, dst in pending_edges:
        for tid in (src, dst):
            if tid not in model.tasks:
                raise DanglingRefError(f"edge references undefined task {tid!r}", line_no, 1)
        model.control_edges.add((src, dst))
    for line_no, item, source, target in pending_flows:
        if source != CUSTOMER and source not in model.tasks:
            raise DanglingRefError(f"dataflow source {source!r} is not a task", line_no, 1)
        if target not in model.tasks:
            raise DanglingRefError(f"dataflow target {target!r} is not a task", line_no, 1)
        model.dataflows.add(DataFlow(item, source, target))
        model.tasks[target].inputs.add(item)
    return model


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def _cycle_free(tasks: list[str], edges: set[tuple[str, str]]) -> bool:
    indeg = {t: 0 for t in tasks}
    for _, s in edges:
        if s in indeg:
            indeg[s] += 1
    queue = sorted(t for t, d in indeg.items() if d == 0)
    seen = 0
    while queue:
        node = queue.pop()
        seen += 1
        for p, s in edges:
            if p == node and s in indeg:
                indeg[s] -= 1
                if indeg[s] == 0:
                    queue.append(s)
    return seen == len(tasks)


def _reaches(start: set[str], edges: set[tuple[str, str]], forward: bool) -> set[str]:
    seen = set(start)
    frontier = list(start)
    while frontier:
        node = frontier.pop()
        for p, s in edges:
            nxt = s if forward and p == node else p if not forward and s == node else None
            if nxt is not None and nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def validate_model(m: VoModel) -> list[Diagnostic]:
    """Empty result iff every structural invariant holds."""
    out: list[Diagnostic] = []

    def bad(code: str, message: str, subject: str):
        out.append(Diagnostic(code=code, message=message, subject=subject))

    overlap = sorted(set(m.members) & set(m.registry))
    for mid in overlap:
        bad("DuplicateId", f"id {mid!r} is both a member and a registry candidate", mid)
    for who in list(m.members.values()) + list(m.registry.values()):
        for cap, amount in sorted(who.capabilities.items()):
            if amount < 0:
                bad("NegativeCapacity", f"{who.id}: declared capacity {cap}={amount} is negative", who.id)

    in_process = m.in_process_tasks()
    in_process_set = set(in_process)
    for p, s in sorted(m.control_edges):
        for tid in (p, s):
            if tid not in m.tasks:
                bad("DanglingEdge", f"edge ({p} -> {s}) references undefined task {tid!r}", tid)
            elif tid not in in_process_set:
                bad("EdgeOutsideProcess", f"edge ({p} -> {s}) touches catalogue-only task {tid!r}", tid)

    edges_ok = not any(d.code in ("DanglingEdge", "EdgeOutsideProcess") for d in out)
    if edges_ok:
        if not _cycle_free(in_process, m.control_edges):
            bad("CycleError", "control graph contains a cycle", m.name)
        else:
            entries = {t for t in in_process_set if not m.predecessors(t)}
            exits = {t for t in in_process_set if not m.successors(t)}
            from_entry = _reaches(entries, m.control_edges, forward=True)
            to_exit = _reaches(exits, m.control_edges, forward=False)
            for t in in_process:
                if t not in from_entry:
                    bad("Unreachable", f"task {t!r} is unreachable from any entry task", t)
                if t not in to_exit:
                    bad("NoExitPath", f"task {t!r} reaches no exit task", t)

    for flow in sorted(m.dataflows, key=lambda f: (f.item, f.source, f.target)):
        if flow.target not in m.tasks:
            bad("DanglingFlow", f"dataflow {flow.item!r} targets undefined task {flow.target!r}", flow.target)
        elif not m.tasks[flow.target].in_process:
            bad("FlowOutsideProcess", f"dataflow {flow.item!r} targets catalogue-only task {flow.target!r}", flow.target)
        if flow.source != CUSTOMER and flow.source not in m.tasks:
            bad("DanglingFlow", f"dataflow {flow.item!r} has undefined source {flow.source!r}", flow.source)

    holders: dict[str, set[str]] = {}
    for duty in m.iter_duties():
        holders.setdefault(duty.task, set()).add(duty.member)
        if duty.member not in m.members:
            bad("DanglingDuty", f"duty on {duty.task!r} references non-member {duty.member!r}", duty.member)
            continue
        if duty.task not in m.tasks:
            bad("DanglingDuty", f"duty of {duty.member!r} references undefined task {duty.task!r}", duty.task)
            continue
        if duty.capability not in m.members[duty.member].capabilities:
            bad(
                "CapabilityMissing",
                f"duty ({duty.member}, {duty.task}): capability {duty.capability!r} not declared by member",
                duty.member,
            )
        if duty.capability not in m.tasks[duty.task].required:
            bad(
                "CapabilityMissing",
                f"duty ({duty.member}, {duty.task}): capability {duty.capability!r} not required by task",
                duty.task,
            )
        if duty.amount < 0:
            bad("NegativeCapacity", f"duty ({duty.member}, {duty.task}) has negative amount", duty.member)

    for task, who in sorted(holders.items()):
        task_def = m.tasks.get(task)
        if task_def is not None and task_def.ttype is TaskType.ATOMIC and len(who) > 1:
            bad(
                "AtomicityViolation",
                f"atomic task {task!r} has duties from {len(who)} members: {', '.join(sorted(who))}",
                task,
            )

    for (mid, cap), reserved in sorted(m.ledger.reserved.items()):
        declared = m.declared(mid, cap)
        if declared is None:
            bad("CapabilityMissing", f"ledger entry ({mid}, {cap}) has no declared capacity", mid)
        elif reserved < 0:
            bad("NegativeCapacity", f"ledger entry ({mid}, {cap}) is negative", mid)
        elif reserved > declared:
            bad(
                "CapacityExceeded",
                f"ledger entry ({mid}, {cap}): reserved {reserved} exceeds declared {declared}",
                mid,
            )
    return out


# ---------------------------------------------------------------------------
# primitive mutations
# ---------------------------------------------------------------------------


def _need_task(m: VoModel, task: str, in_process: bool | None = None) -> TaskDef:
    task_def = m.tasks.get(task)
    if task_def is None:
        raise UnknownTaskError(f"unknown task {task!r}", task)
    if in_process is True and not task_def.in_process:
        raise UnknownTaskError(f"task {task!r} is not in the process", task)
    return task_def


def insert_task_node(m: VoModel, t1: str, t2: str, relation: str) -> VoModel:
    """Wire catalogue task ``t1`` into the process next to ``t2``.

    ``after``: t1 takes over every outgoing edge of t2 and a single edge
    t2 -> t1 is added. ``parallel``: t1 receives copies of all incoming
    and outgoing edges of t2.
    """
    if relation not in RELATIONS:
        raise InvalidArgumentError(f"relation must be one of {RELATIONS}, got {relation!r}", relation)
    _need_task(m, t1)
    if m.tasks[t1].in_process:
        raise AlreadyInProcessError(f"task {t1!r} is already in the process", t1)
    _need_task(m, t2, in_process=True)
    out = m.clone()
    if relation == "after":
        succ = out.successors(t2)
        out.control_edges -= {(t2, s) for s in succ}
        out.control_edges |= {(t1, s) for s in succ}
        out.control_edges.add((t2, t1))
    else:
        out.control_edges |= {(p, t1) for p in out.predecessors(t2)}
        out.control_edges |= {(t1, s) for s in out.successors(t2)}
    out.tasks[t1].in_process = True
    return out


def _has_path(edges: set[tuple[str, str]], start: str, goal: str) -> bool:
    seen = {start}
    frontier = [start]
    while frontier:
        node = frontier.pop()
        for p, s in edges:
            if p == node and s not in seen:
                if s == goal:
                    return True
                seen.add(s)
                frontier.append(s)
    return False


def remove_task_node(m: VoModel, t: str) -> VoModel:
    """Unwire ``t`` from the process, bridging predecessors to successors.

    A bridge p -> s is added for every predecessor/successor pair that is
    not already connected by a remaining path; pairs the rest of the graph
    still orders need no repair, which is what lets inserting and then
    removing a fresh task restore the exact prior edge set. The task
    definition stays in the catalogue; its duties are dropped (with their
    reservations) and its dataflow edges removed. The caller must ensure
    ``t`` has no active instance.
    """
    _need_task(m, t, in_process=True)
    out = m.clone()
    preds = out.predecessors(t)
    succs = out.successors(t)
    out.control_edges -= {(p, t) for p in preds} | {(t, s) for s in succs}
    remaining = set(out.control_edges)
    out.control_edges |= {
        (p, s) for p in preds for s in succs if not _has_path(remaining, p, s)
    }
    for (mid, task, cap), amount in sorted(m.duties.items()):
        if task == t:
            del out.duties[(mid, task, cap)]
            out.ledger.add(mid, cap, -amount)
    out.dataflows = {f for f in out.dataflows if f.source != t and f.target != t}
    out.tasks[t].in_process = False
    return out


def set_dataflow_edge(
    m: VoModel, item: str, t: str, mode: str
) -> tuple[VoModel, Diagnostic | None]:
    """Add or remove the dataflow ``item -> t``; ``t.inputs`` mirrors it.

    Adding picks the item's existing source when one is already known
    (smallest by name for determinism), otherwise the customer. Removing
    an absent edge is a no-op reported through a warning diagnostic.
    """
    if mode not in ("add", "remove"):
        raise InvalidArgumentError(f"mode must be add or remove, got {mode!r}", mode)
    _need_task(m, t, in_process=True)
    existing = {f for f in m.dataflows if f.item == item and f.target == t}
    if mode == "add":
        out = m.clone()
        if not existing:
            sources = sorted({f.source for f in m.dataflows if f.item == item})
            out.dataflows.add(DataFlow(item, sources[0] if sources else CUSTOMER, t))
        out.tasks[t].inputs.add(item)
        return out, None
    if not existing:
        warning = Diagnostic(
            code="AbsentFlow",
            message=f"no dataflow {item!r} -> {t!r} to remove",
            subject=item,
            severity="warning",
        )
        return m, warning
    out = m.clone()
    out.dataflows -= existing
    out.tasks[t].inputs.discard(item)
    return out, None


def adjust_reserved_capacity(m: VoModel, member: str, capability: str, delta: int) -> VoModel:
    """Shift the reserved amount for (member, capability) by ``delta``,
    holding 0 <= reserved <= declared."""
    declared = m.declared(member, capability)
    if m.anyone(member) is None:
        raise UnknownMemberError(f"unknown member {member!r}", member)
    if declared is None:
        raise CapabilityMissingError(
            f"{member!r} declares no capability {capability!r}", capability
        )
    new = m.ledger.get(member, capability) + delta
    if new < 0:
        raise UnderflowError(
            f"releasing {-delta} of ({member}, {capability}) would leave {new} reserved", member
        )
    if new > declared:
        raise CapacityExceededError(
            f"reserving {delta} of ({member}, {capability}) would exceed declared {declared}", member
        )
    out = m.clone()
    out.ledger.reserved.pop((member, capability), None)
    if new:
        out.ledger.reserved[(member, capability)] = new
    return out


def free_capacity(m: VoModel, member: str, capability: str) -> int | None:
    """Declared minus reserved; ``None`` when the capability is not
    declared at all (distinguishable from declared-but-exhausted)."""
    if m.anyone(member) is None:
        raise UnknownMemberError(f"unknown member {member!r}", member)
    declared = m.declared(member, capability)
    if declared is None:
        return None
    return declared - m.ledger.get(member, capability)


# ---------------------------------------------------------------------------
# canonical dump
# ---------------------------------------------------------------------------


def canonical_dump(m: VoModel) -> str:
    """Deterministic full-state snapshot, suitable for hashing and diffs.

    This is a superset of the input format (duties and reservations have
    no input rows); it is not meant to be loaded back.
    """
    lines = [f"vo {m.name}"]
    for name, value in sorted(m.params.items()):
        lines.append(f"param {name} {value}")
    for row, table in (("member", m.members), ("candidate", m.registry)):
        for mid in sorted(table):
            who = table[mid]
            caps = ""
            for cap in sorted(who.capabilities):
                caps += f" cap {cap}={who.capabilities[cap]}"
                if cap in who.cost:
                    caps += f" cost={who.cost[cap]}"
            lines.append(f"{row} {mid} kind={who.kind.value}{caps}")
    for tid in sorted(m.tasks):
        task = m.tasks[tid]
        bits = [f"task {tid} type={task.ttype.value}"]
        if task.sharing is not None:
            bits.append(f"sharing={task.sharing}")
        for cap in sorted(task.required):
            bits.append(f"requires {cap}={task.required[cap]}")
        for item in sorted(task.inputs):
            bits.append(f"input {item}")
        bits.append(f"inprocess={'true' if task.in_process else 'false'}")
        lines.append(" ".join(bits))
    for p, s in sorted(m.control_edges):
        lines.append(f"edge {p} {s}")
    for flow in sorted(m.dataflows, key=lambda f: (f.item, f.source, f.target)):
        lines.append(f"dataflow {flow.item} from={flow.source} to={flow.target}")
    for rid in sorted(m.vbe_resources):
        lines.append(f"resource {rid}")
    for duty in m.iter_duties():
        lines.append(f"duty {duty.member} {duty.task} {duty.capability}={duty.amount}")
    for (mid, cap), amount in sorted(m.ledger.reserved.items()):
        lines.append(f"reserved {mid} {cap}={amount}")
    return "\n".join(lines) + "\n"
