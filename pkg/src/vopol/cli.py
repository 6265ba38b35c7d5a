"""Command-line front end.

``vopol validate --model M --policies P`` checks all inputs and reports
diagnostics; ``vopol run --model M --policies P --scenario S`` executes a
scenario and writes the trace. Exit codes are a stable contract:
0 = ran / valid, 1 = validation failure, 2 = input or IO failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from .policy.ast import PolicyDocument
from .policy.parser import parse_policy_document
from .policy.validate import THIS, validate_policies
from .domain import VOCABULARY
from .engine import ScenarioEvent, run_scenario
from .errors import Diagnostic, ParseError, VopolError
from .model import CUSTOMER, RELATIONS, MemberKind, TaskType, VoModel, load_model, validate_model
from .trace import format_text, format_trace


@dataclass
class RunConfig:
    model_path: Path
    policy_path: Path
    scenario_path: Path
    trace_out: Path | None = None  # None writes to stdout
    format: str = "records"


def parse_scenario(text: str) -> list[ScenarioEvent]:
    """Parse a scenario file into events, strictly in file order."""
    events: list[ScenarioEvent] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind, args = tokens[0], tokens[1:]
        if kind == "start":
            wanted = 0
        elif kind in ("activate", "complete", "fail", "load-policy", "retract-policy"):
            wanted = 1
        elif kind in ("consume", "release"):
            wanted = 3
        else:
            raise ParseError(f"unknown scenario command {kind!r}", line_no, 1)
        if len(args) != wanted:
            raise ParseError(
                f"{kind} takes {wanted} argument(s), got {len(args)}", line_no, 1
            )
        if kind in ("consume", "release"):
            try:
                amount = int(args[2])
            except ValueError:
                raise ParseError(f"amount must be an integer, got {args[2]!r}", line_no, 1) from None
            events.append(ScenarioEvent(kind, (args[0], args[1], amount)))
        else:
            events.append(ScenarioEvent(kind, tuple(args)))
    return events


def model_symbols(m: VoModel) -> set[str]:
    """Names a policy identifier argument may legitimately refer to."""
    symbols: set[str] = {THIS, CUSTOMER}
    symbols.update(m.members)
    symbols.update(m.registry)
    symbols.update(m.tasks)
    symbols.update(m.params)
    symbols.update(m.vbe_resources)
    symbols.update(t.value for t in TaskType)
    symbols.update(k.value for k in MemberKind)
    symbols.update(RELATIONS)
    symbols.add("competition")
    for who in list(m.members.values()) + list(m.registry.values()):
        symbols.update(who.capabilities)
    for task in m.tasks.values():
        symbols.update(task.required)
        symbols.update(task.inputs)
        if task.sharing:
            symbols.add(task.sharing)
    for flow in m.dataflows:
        symbols.add(flow.item)
    return symbols


def _read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


def _print_diagnostics(diagnostics: list[Diagnostic], path: Path):
    for diag in diagnostics:
        print(diag.render(str(path)), file=sys.stderr)


def _parse_error_diag(err: ParseError) -> Diagnostic:
    return Diagnostic(code=err.code, message=err.bare_message, line=err.line, col=err.col)


def _load_inputs(
    model_path: Path, policy_path: Path
) -> tuple[VoModel | None, PolicyDocument | None, int]:
    """Load and validate both inputs, printing diagnostics. Returns the
    parsed values and the number of validation findings."""
    findings = 0
    model = policies = None
    try:
        model = load_model(_read(model_path))
    except ParseError as err:
        _print_diagnostics([_parse_error_diag(err)], model_path)
        findings += 1
    if model is not None:
        problems = validate_model(model)
        _print_diagnostics(problems, model_path)
        findings += len(problems)
    try:
        policies = parse_policy_document(_read(policy_path))
    except ParseError as err:
        _print_diagnostics([_parse_error_diag(err)], policy_path)
        findings += 1
    if policies is not None:
        symbols = model_symbols(model) if model is not None else None
        problems = [
            d
            for d in validate_policies(policies, VOCABULARY, symbols)
            if d.severity == "error"
        ]
        _print_diagnostics(problems, policy_path)
        findings += len(problems)
    return model, policies, findings


def cmd_validate(model_path: Path, policy_path: Path) -> int:
    for path in (model_path, policy_path):
        if not path.is_file():
            print(f"{path}: no such file", file=sys.stderr)
            return 2
    try:
        _, _, findings = _load_inputs(model_path, policy_path)
    except OSError as err:
        print(str(err), file=sys.stderr)
        return 2
    return 0 if findings == 0 else 1


def cmd_run(config: RunConfig) -> int:
    for path in (config.model_path, config.policy_path, config.scenario_path):
        if not path.is_file():
            print(f"{path}: no such file", file=sys.stderr)
            return 2
    try:
        model, policies, findings = _load_inputs(config.model_path, config.policy_path)
        if findings or model is None or policies is None:
            return 2
        try:
            events = parse_scenario(_read(config.scenario_path))
        except ParseError as err:
            _print_diagnostics([_parse_error_diag(err)], config.scenario_path)
            return 2
        _, _, records = run_scenario(
            model, policies, events, base_dir=config.scenario_path.parent
        )
    except OSError as err:
        print(str(err), file=sys.stderr)
        return 2
    except VopolError as err:
        print(err.message, file=sys.stderr)
        return 2
    rendered = format_trace(records) if config.format == "records" else format_text(records)
    if config.trace_out is None:
        sys.stdout.write(rendered)
    else:
        config.trace_out.write_text(rendered, encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vopol",
        description="Validate and run policy-driven virtual-organisation scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    validate = sub.add_parser("validate", help="check a model and a policy file")
    validate.add_argument("--model", required=True, type=Path)
    validate.add_argument("--policies", required=True, type=Path)

    run = sub.add_parser("run", help="execute a scenario and emit the trace")
    run.add_argument("--model", required=True, type=Path)
    run.add_argument("--policies", required=True, type=Path)
    run.add_argument("--scenario", required=True, type=Path)
    run.add_argument("--format", choices=("records", "text"), default="records")
    run.add_argument("--out", type=Path, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return cmd_validate(args.model, args.policies)
    config = RunConfig(
        model_path=args.model,
        policy_path=args.policies,
        scenario_path=args.scenario,
        trace_out=args.out,
        format=args.format,
    )
    return cmd_run(config)


if __name__ == "__main__":
    sys.exit(main())
