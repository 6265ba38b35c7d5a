"""Deterministic execution of one workflow instance over a model.

The engine consumes scenario events strictly in order, maintains the task
lifecycle, raises task_entry/task_exit/task_failure triggers, dispatches
the active policies against them and applies the surviving actions. Every
observable consequence lands in the trace; identical inputs produce
byte-identical traces.

A dispatch runs in phases: (1) evaluate every active policy in order
against a speculative copy of the model, so later conditions observe
earlier actions while collecting each attempted action; (2) detect
conflicts in the collected list and suppress the later half of each
conflicting pair (first writer wins); (3) apply the survivors in order to
the authoritative model, recording success or failure per action; (4) for
task_entry only, run the bootstrap allocator, failing the task when it
cannot cover the requirements.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .policy.ast import ActionCall, Ident, Policy, PolicyDocument, Pred, TriggerSpec
from .policy.evaluate import evaluate_rule_group
from .policy.parser import parse_policy_document
from .policy.validate import validate_policies
from .conflict import detect_conflicts
from .domain import (
    VOCABULARY,
    DomainAction,
    DomainTrigger,
    EvalContext,
    apply_action,
    can_run,
    eval_predicate,
    remaining_shortfall,
    resolve_action,
    run_bootstrap,
)
from .errors import (
    IllegalTransitionError,
    InvalidModelError,
    ModelError,
    ParseError,
    TaskFailure,
    VopolError,
)
from .model import CUSTOMER, VoModel, adjust_reserved_capacity, validate_model
from .state import InstanceState, Status
from .trace import TraceRecord

BOOTSTRAP_POLICY = "@bootstrap"


@dataclass(frozen=True)
class ScenarioEvent:
    """One line of a scenario file: ``start``, ``activate <task>``,
    ``complete <task>``, ``fail <task>``, ``consume <member> <cap> <n>``,
    ``release <member> <cap> <n>``, ``load-policy <path>`` or
    ``retract-policy <name>``."""

    kind: str
    args: tuple[str | int, ...] = ()


def _eligible(m: VoModel, s: InstanceState, task: str) -> bool:
    task_def = m.tasks[task]
    preds = {p for p in m.predecessors(task) if m.tasks[p].in_process}
    if any(s.status.get(p) is not Status.COMPLETED for p in preds):
        return False
    return task_def.inputs <= s.available_data


def ready_set(m: VoModel, s: InstanceState) -> set[str]:
    """Pending tasks whose in-process predecessors are all completed and
    whose inputs have arrived."""
    return {
        t
        for t, status in s.status.items()
        if status is Status.PENDING and _eligible(m, s, t)
    }


def init_instance(m: VoModel) -> InstanceState:
    """Fresh instance: in-process tasks pending, customer data available,
    entry-eligible tasks promoted to ready."""
    problems = validate_model(m)
    if problems:
        raise InvalidModelError(f"model is invalid: {problems[0].message}", m.name)
    state = InstanceState(
        status={t: Status.PENDING for t in m.in_process_tasks()},
        available_data={f.item for f in m.dataflows if f.source == CUSTOMER},
    )
    for task in ready_set(m, state):
        state.status[task] = Status.READY
    return state


@dataclass
class _Collected:
    """One attempted action from the evaluation phase."""

    policy: str
    call: ActionCall
    action: DomainAction | None
    error: ModelError | None


class Engine:
    """Runs one instance; processes events strictly sequentially."""

    def __init__(self, model: VoModel, policies: PolicyDocument, base_dir: Path | None = None):
        self.model = model.clone()
        self.policies: list[Policy] = list(policies.policies)
        self.base_dir = base_dir
        self.records: list[TraceRecord] = []
        self._seq = 0
        self.instance = init_instance(self.model)
        self._emit_state()

    # trace helpers ------------------------------------------------------

    def _emit(self, kind: str, *pairs: tuple[str, str]) -> TraceRecord:
        self._seq += 1
        rec = TraceRecord(self._seq, kind, tuple(pairs))
        self.records.append(rec)
        return rec

    def _emit_state(self):
        tasks = ",".join(
            f"{t}:{self.instance.status[t].value}" for t in sorted(self.instance.status)
        )
        data = ",".join(sorted(self.instance.available_data))
        members = ",".join(sorted(self.model.members))
        self._emit("STATE", ("tasks", tasks), ("data", data), ("members", members))

    def _emit_error(self, err: VopolError, detail: str | None = None):
        self._emit("ERROR", ("error", err.code), ("detail", detail or err.message))

    # lifecycle helpers ----------------------------------------------------

    def _refresh_readiness(self):
        """Sync the status map with the (possibly rewired) process graph.

        Tasks that joined the process appear as pending, tasks that left it
        are dropped, and pending/ready assignments are recomputed from the
        current graph; started tasks are never touched.
        """
        in_proc = {t for t, d in self.model.tasks.items() if d.in_process}
        for task in list(self.instance.status):
            if task not in in_proc:
                del self.instance.status[task]
        for task in sorted(in_proc):
            if task not in self.instance.status:
                self.instance.status[task] = Status.PENDING
        for task in sorted(in_proc):
            status = self.instance.status[task]
            if status is Status.PENDING and _eligible(self.model, self.instance, task):
                self.instance.status[task] = Status.READY
            elif status is Status.READY and not _eligible(self.model, self.instance, task):
                self.instance.status[task] = Status.PENDING

    def _release_holds(self, task: str):
        for hold in self.instance.release_holds(task):
            # a scenario release event may already have freed held units
            current = self.model.ledger.get(hold.member, hold.capability)
            self.model.ledger.add(hold.member, hold.capability, -min(hold.amount, current))

    # dispatch -------------------------------------------------------------

    def dispatch_trigger(self, trig: DomainTrigger) -> list[TraceRecord]:
        mark = len(self.records)
        self._emit("TRIGGER", ("trigger", trig.name), ("task", trig.task))
        event_spec = TriggerSpec(trig.name, (Ident(trig.task),))

        # phase 1: evaluate policies against a speculative model, collecting
        # every attempted action
        box = [self.model.clone()]
        collected: list[_Collected] = []

        def predicate(pred: Pred) -> bool:
            ctx = EvalContext(box[0], self.instance, trig.task)
            return eval_predicate(ctx, pred.name, pred.args)

        def make_attempt(policy_name: str):
            def attempt(call: ActionCall) -> bool:
                ctx = EvalContext(box[0], self.instance, trig.task)
                try:
                    action = resolve_action(ctx, call)
                except ModelError as err:
                    collected.append(_Collected(policy_name, call, None, err))
                    return False
                collected.append(_Collected(policy_name, call, action, None))
                try:
                    box[0] = apply_action(ctx, action)
                except ModelError:
                    return False
                return True

            return attempt

        for policy in list(self.policies):
            collect_mark = len(collected)
            try:
                applied = evaluate_rule_group(
                    policy.body, event_spec, trig.task, predicate, make_attempt(policy.name)
                )
            except ModelError as err:
                del collected[collect_mark:]
                self._emit_error(err, f"policy {policy.name!r}: {err.message}")
                continue
            for rule_idx in applied:
                self._emit("POLICY-FIRED", ("policy", policy.name), ("rule", str(rule_idx)))

        # phase 2: conflict detection over the collected list
        resolved_idx = [i for i, c in enumerate(collected) if c.action is not None]
        conflicts = detect_conflicts(
            [(collected[i].policy, collected[i].action) for i in resolved_idx]  # type: ignore[misc]
        )
        suppressed = set()
        for conflict in conflicts:
            suppressed.add(resolved_idx[conflict.second_index])
            self._emit(
                "CONFLICT",
                ("class", conflict.reason),
                ("first_policy", conflict.first[0]),
                ("first_action", conflict.first[1].render()),
                ("second_policy", conflict.second[0]),
                ("second_action", conflict.second[1].render()),
            )

        # phase 3: apply survivors in order to the authoritative model
        for i, entry in enumerate(collected):
            if i in suppressed:
                continue
            if entry.error is not None or entry.action is None:
                err = entry.error
                self._emit(
                    "ACTION-FAILED",
                    ("policy", entry.policy),
                    ("action", entry.call.name),
                    ("args", ",".join(str(getattr(a, "value", a)) for a in entry.call.args)),
                    ("error", err.code if err else "UnknownAction"),
                    ("detail", err.message if err else "unresolvable action"),
                )
                continue
            action = self._materialize(entry.action)
            ctx = EvalContext(self.model, self.instance, trig.task)
            try:
                new_model = apply_action(ctx, action)
            except ModelError as err:
                self._emit(
                    "ACTION-FAILED",
                    ("policy", entry.policy),
                    ("action", action.name),
                    ("args", ",".join(str(a) for a in action.args if a is not None)),
                    ("error", err.code),
                    ("detail", err.message),
                )
                continue
            self.model = new_model
            self.instance.holds.extend(ctx.hold_sink)
            self._emit(
                "ACTION-APPLIED",
                ("policy", entry.policy),
                ("action", action.name),
                ("args", ",".join(str(a) for a in action.args if a is not None)),
            )

        # phase 4: bootstrap, task_entry only
        bootstrap_failed = False
        if trig.name == "task_entry":
            ctx = EvalContext(self.model, self.instance, trig.task)
            try:
                new_model, performed = run_bootstrap(ctx, trig.task)
            except TaskFailure as err:
                self._emit(
                    "ACTION-FAILED",
                    ("policy", BOOTSTRAP_POLICY),
                    ("action", "bootstrap"),
                    ("args", trig.task),
                    ("error", err.code),
                    ("detail", err.message),
                )
                bootstrap_failed = True
            else:
                self.model = new_model
                for action in performed:
                    self._emit(
                        "ACTION-APPLIED",
                        ("policy", BOOTSTRAP_POLICY),
                        ("action", action.name),
                        ("args", ",".join(str(a) for a in action.args if a is not None)),
                    )

        if bootstrap_failed and self.instance.status.get(trig.task) is Status.ACTIVE:
            self.instance.status[trig.task] = Status.FAILED
            self._release_holds(trig.task)

        self._refresh_readiness()
        self._emit_state()

        if bootstrap_failed:
            self.dispatch_trigger(DomainTrigger("task_failure", trig.task))
        return self.records[mark:]

    def _materialize(self, action: DomainAction) -> DomainAction:
        """Fill application-time defaults (a duty amount left open becomes
        the task's current shortfall)."""
        if action.name == "assign_duty" and action.args[3] is None:
            member, task, capability, _ = action.args
            assert isinstance(task, str) and isinstance(capability, str)
            if task in self.model.tasks:
                amount = remaining_shortfall(self.model, task, capability)
                return DomainAction(action.name, (member, task, capability, amount))
        return action

    # events ---------------------------------------------------------------

    def handle_event(self, ev: ScenarioEvent) -> list[TraceRecord]:
        mark = len(self.records)
        self.instance.clock += 1
        handler = getattr(self, "_ev_" + ev.kind.replace("-", "_"), None)
        if handler is None:
            self._emit("EVENT", ("event", ev.kind))
            self._emit_error(
                IllegalTransitionError(f"unknown event kind {ev.kind!r}", ev.kind)
            )
            return self.records[mark:]
        handler(ev)
        return self.records[mark:]

    def _ev_start(self, ev: ScenarioEvent):
        self._emit("EVENT", ("event", "start"))

    def _require_status(self, task: str, wanted: Status, verb: str) -> bool:
        current = self.instance.status.get(task)
        if current is not wanted:
            shown = current.value if current is not None else "not in the process"
            self._emit_error(
                IllegalTransitionError(
                    f"cannot {verb} task {task!r}: status is {shown}, needs {wanted.value}",
                    task,
                )
            )
            return False
        return True

    def _ev_activate(self, ev: ScenarioEvent):
        task = str(ev.args[0])
        self._emit("EVENT", ("event", "activate"), ("task", task))
        if not self._require_status(task, Status.READY, "activate"):
            return
        self.instance.status[task] = Status.ACTIVE
        self.dispatch_trigger(DomainTrigger("task_entry", task))

    def _ev_complete(self, ev: ScenarioEvent):
        task = str(ev.args[0])
        self._emit("EVENT", ("event", "complete"), ("task", task))
        if not self._require_status(task, Status.ACTIVE, "complete"):
            return
        self.instance.status[task] = Status.COMPLETED
        self._release_holds(task)
        for flow in sorted(self.model.dataflows, key=lambda f: (f.item, f.target)):
            if flow.source == task:
                self.instance.available_data.add(flow.item)
        self._refresh_readiness()
        self.dispatch_trigger(DomainTrigger("task_exit", task))

    def _ev_fail(self, ev: ScenarioEvent):
        task = str(ev.args[0])
        self._emit("EVENT", ("event", "fail"), ("task", task))
        if not self._require_status(task, Status.ACTIVE, "fail"):
            return
        self.instance.status[task] = Status.FAILED
        self._release_holds(task)
        self._refresh_readiness()
        self.dispatch_trigger(DomainTrigger("task_failure", task))

    def _ev_consume(self, ev: ScenarioEvent):
        member, capability, amount = str(ev.args[0]), str(ev.args[1]), int(ev.args[2])
        self._emit(
            "EVENT",
            ("event", "consume"),
            ("member", member),
            ("capability", capability),
            ("amount", str(amount)),
        )
        try:
            self.model = adjust_reserved_capacity(self.model, member, capability, amount)
        except ModelError as err:
            self._emit_error(err)

    def _ev_release(self, ev: ScenarioEvent):
        member, capability, amount = str(ev.args[0]), str(ev.args[1]), int(ev.args[2])
        self._emit(
            "EVENT",
            ("event", "release"),
            ("member", member),
            ("capability", capability),
            ("amount", str(amount)),
        )
        try:
            self.model = adjust_reserved_capacity(self.model, member, capability, -amount)
        except ModelError as err:
            self._emit_error(err)

    def _ev_load_policy(self, ev: ScenarioEvent):
        rel = str(ev.args[0])
        self._emit("EVENT", ("event", "load-policy"), ("path", rel))
        path = Path(rel)
        if not path.is_absolute() and self.base_dir is not None:
            path = self.base_dir / path
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as err:
            self._emit("ERROR", ("error", "IOError"), ("detail", str(err)))
            return
        try:
            doc = parse_policy_document(text)
        except ParseError as err:
            self._emit_error(err)
            return
        problems = [d for d in validate_policies(doc, VOCABULARY) if d.severity == "error"]
        if problems:
            self._emit(
                "ERROR",
                ("error", "InvalidPolicy"),
                ("detail", f"{len(problems)} diagnostic(s), first: {problems[0].message}"),
            )
            return
        # dynamic update: a reloaded name keeps its evaluation position
        by_name = {p.name: i for i, p in enumerate(self.policies)}
        for policy in doc.policies:
            if policy.name in by_name:
                self.policies[by_name[policy.name]] = policy
            else:
                by_name[policy.name] = len(self.policies)
                self.policies.append(policy)

    def _ev_retract_policy(self, ev: ScenarioEvent):
        name = str(ev.args[0])
        self._emit("EVENT", ("event", "retract-policy"), ("policy", name))
        remaining = [p for p in self.policies if p.name != name]
        if len(remaining) == len(self.policies):
            self._emit(
                "ERROR",
                ("error", "UnknownPolicy"),
                ("detail", f"no active policy named {name!r}"),
            )
            return
        self.policies = remaining


def run_scenario(
    model: VoModel,
    policies: PolicyDocument,
    events: list[ScenarioEvent],
    base_dir: Path | None = None,
) -> tuple[VoModel, InstanceState, list[TraceRecord]]:
    """Fold the events over a fresh engine; returns the final model, the
    final instance state and the complete trace."""
    engine = Engine(model, policies, base_dir)
    for ev in events:
        engine.handle_event(ev)
    return engine.model, engine.instance, engine.records


__all__ = [
    "BOOTSTRAP_POLICY",
    "Engine",
    "ScenarioEvent",
    "init_instance",
    "ready_set",
    "run_scenario",
    "can_run",
]
