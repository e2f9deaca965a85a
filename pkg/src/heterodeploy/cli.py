"""Command-line interface.

One subcommand per user-visible pipeline step plus a few utilities:

    analyze <src> --patterns <db>          detection only, no provisioning
    deploy <src> --patterns <db> --inventory <inv>
    approve <deployment-id>
    reject <deployment-id>
    reconfigure <deployment-id> <resource> <logic-id>
    report <deployment-id>
    list
    patterns validate <db>
    patterns seed <path>
    inventory show <inv>
    sim dump

Every subcommand takes --workspace (default: $HETERO_WORKSPACE or
./workspace) and --format human|json. Exit codes: 0 success, 2 input or
schema error, 3 provisioning failure, 4 lifecycle error, 5 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import jsonio, pipeline, simulator
from .detector import (DEFAULT_MIN_MATCH_TOKENS, DEFAULT_SIMILARITY_THRESHOLD,
                       DetectorConfig)
from .errors import (HeterodeployError, InputError, InternalError,
                     LifecycleError)
from .patterns import load_pattern_db, seed_database_path
from .placement import (DEFAULT_HOST_MODE, PROVISIONING_MODES,
                        inventory_to_dict, load_inventory)
from .pipeline import PipelineConfig, Workspace

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_PROVISION_FAILED = 3
EXIT_LIFECYCLE_ERROR = 4
EXIT_INTERNAL_ERROR = 5

FORMAT_HUMAN = "human"
FORMAT_JSON = "json"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--workspace", type=Path,
        default=Path(os.environ.get("HETERO_WORKSPACE", "workspace")),
        help="workspace directory (default: $HETERO_WORKSPACE or ./workspace)")
    common.add_argument(
        "--format", choices=(FORMAT_HUMAN, FORMAT_JSON), default=FORMAT_HUMAN,
        help="output format (default: human)")

    detection = argparse.ArgumentParser(add_help=False)
    detection.add_argument(
        "--patterns", required=True, type=Path, metavar="DB",
        help="pattern database file")
    detection.add_argument(
        "--threshold", type=float, default=DEFAULT_SIMILARITY_THRESHOLD,
        help="similarity threshold in (0, 1] (default: %(default)s)")
    detection.add_argument(
        "--min-tokens", type=int, default=DEFAULT_MIN_MATCH_TOKENS,
        help="minimum matched tokens (default: %(default)s)")

    parser = argparse.ArgumentParser(
        prog="heterodeploy",
        description="Detect offloadable regions in C-like source, generate "
                    "device kernels, and deploy onto a simulated "
                    "heterogeneous cloud.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common, detection],
                       help="detect offloadable regions without deploying")
    p.add_argument("source", type=Path, help="application source file")
    p.set_defaults(handler=_cmd_analyze)

    p = sub.add_parser("deploy", parents=[common, detection],
                       help="run the full pipeline and provision a stack")
    p.add_argument("source", type=Path, help="application source file")
    p.add_argument("--inventory", required=True, type=Path, metavar="INV",
                   help="server inventory file")
    p.add_argument("--host-mode", choices=PROVISIONING_MODES,
                   default=DEFAULT_HOST_MODE,
                   help="provisioning mode for the host application "
                        "(default: %(default)s)")
    p.set_defaults(handler=_cmd_deploy)

    p = sub.add_parser("approve", parents=[common],
                       help="accept a provisioned deployment; billing starts")
    p.add_argument("deployment_id")
    p.set_defaults(handler=_cmd_approve)

    p = sub.add_parser("reject", parents=[common],
                       help="refuse a provisioned deployment; its stack is "
                            "deleted")
    p.add_argument("deployment_id")
    p.set_defaults(handler=_cmd_reject)

    p = sub.add_parser("reconfigure", parents=[common],
                       help="swap the logic on one FPGA resource")
    p.add_argument("deployment_id")
    p.add_argument("resource_name")
    p.add_argument("logic_id")
    p.set_defaults(handler=_cmd_reconfigure)

    p = sub.add_parser("report", parents=[common],
                       help="show the report of an existing deployment")
    p.add_argument("deployment_id")
    p.set_defaults(handler=_cmd_report)

    p = sub.add_parser("list", parents=[common],
                       help="list deployments in the workspace")
    p.set_defaults(handler=_cmd_list)

    p = sub.add_parser("patterns", parents=[],
                       help="pattern database utilities")
    psub = p.add_subparsers(dest="patterns_command", required=True)
    q = psub.add_parser("validate", parents=[common],
                        help="check a pattern database file")
    q.add_argument("path", type=Path)
    q.set_defaults(handler=_cmd_patterns_validate)
    q = psub.add_parser("seed", parents=[common],
                        help="write the bundled seed pattern database")
    q.add_argument("path", type=Path)
    q.set_defaults(handler=_cmd_patterns_seed)

    p = sub.add_parser("inventory", parents=[],
                       help="inventory utilities")
    isub = p.add_subparsers(dest="inventory_command", required=True)
    q = isub.add_parser("show", parents=[common],
                        help="validate and display an inventory file")
    q.add_argument("path", type=Path)
    q.set_defaults(handler=_cmd_inventory_show)

    p = sub.add_parser("sim", parents=[],
                       help="simulator utilities")
    ssub = p.add_subparsers(dest="sim_command", required=True)
    q = ssub.add_parser("dump", parents=[common],
                        help="print the simulator state as canonical JSON")
    q.set_defaults(handler=_cmd_sim_dump)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except LifecycleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIFECYCLE_ERROR
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except InternalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL_ERROR
    except HeterodeployError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


def script_main() -> None:
    sys.exit(main())


def _pipeline_config(args) -> PipelineConfig:
    try:
        DetectorConfig(args.min_tokens, args.threshold)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    host_mode = getattr(args, "host_mode", DEFAULT_HOST_MODE)
    return PipelineConfig(workspace=args.workspace,
                          min_match_tokens=args.min_tokens,
                          similarity_threshold=args.threshold,
                          host_mode=host_mode)


def _emit(args, document, human_lines) -> None:
    if args.format == FORMAT_JSON:
        print(jsonio.dumps(document))
    else:
        for line in human_lines:
            print(line)


def _cmd_analyze(args) -> int:
    config = _pipeline_config(args)
    result = pipeline.analyze(args.source, args.patterns, config)
    lines = [f"{len(result['matches'])} matches"]
    for m in result["matches"]:
        lines.append("  " + _match_line(m))
    _emit(args, result, lines)
    return EXIT_OK


def _cmd_deploy(args) -> int:
    config = _pipeline_config(args)
    record = pipeline.deploy(args.source, args.patterns, args.inventory,
                             config)
    _emit(args, record["report"], _report_lines(record["report"]))
    if record["status"] == pipeline.FAILED:
        return EXIT_PROVISION_FAILED
    return EXIT_OK


def _cmd_approve(args) -> int:
    record = pipeline.approve(args.workspace, args.deployment_id)
    lines = [f"deployment {record['deployment_id']}: {record['status']}",
             "billing started: yes"]
    _emit(args, record["report"], lines)
    return EXIT_OK


def _cmd_reject(args) -> int:
    record = pipeline.reject(args.workspace, args.deployment_id)
    lines = [f"deployment {record['deployment_id']}: {record['status']}",
             "stack deleted, slots returned to the pool"]
    _emit(args, record["report"], lines)
    return EXIT_OK


def _cmd_reconfigure(args) -> int:
    record = pipeline.reconfigure(args.workspace, args.deployment_id,
                                  args.resource_name, args.logic_id)
    lines = [f"deployment {record['deployment_id']}: {record['status']}"]
    for r in record["report"]["resources"]:
        if r["name"] == args.resource_name:
            lines.append(f"resource {r['name']} on {r['server_id']} now "
                         f"runs logic {r['active_logic_id']}")
    _emit(args, record["report"], lines)
    return EXIT_OK


def _cmd_report(args) -> int:
    report = pipeline.get_report(args.workspace, args.deployment_id)
    _emit(args, report, _report_lines(report))
    return EXIT_OK


def _cmd_list(args) -> int:
    rows = pipeline.list_deployments(args.workspace)
    lines = []
    for row in rows:
        cost = row["total_hourly"]
        cost_text = f"{cost}/h" if cost is not None else "-"
        billing = "yes" if row["billing_started"] else "no"
        lines.append(f"{row['deployment_id']} {row['status']} "
                     f"stack={row['stack_id'] or '-'} billing={billing} "
                     f"cost={cost_text}")
    if not lines:
        lines = ["no deployments"]
    _emit(args, rows, lines)
    return EXIT_OK


def _cmd_patterns_validate(args) -> int:
    db = load_pattern_db(args.path)
    document = {
        "ok": True,
        "patterns": [
            {"id": p.id, "device_target": p.device_target,
             "tokens": len(db.fingerprints[p.id].tokens)}
            for p in db.patterns
        ],
    }
    lines = [f"pattern database OK: {len(db.patterns)} patterns"]
    for entry in document["patterns"]:
        lines.append(f"  {entry['id']} -> {entry['device_target']} "
                     f"({entry['tokens']} tokens)")
    _emit(args, document, lines)
    return EXIT_OK


def _cmd_patterns_seed(args) -> int:
    source = seed_database_path()
    db = load_pattern_db(source)
    args.path.parent.mkdir(parents=True, exist_ok=True)
    args.path.write_bytes(source.read_bytes())
    document = {"path": str(args.path), "patterns": len(db.patterns)}
    _emit(args, document,
          [f"wrote seed pattern database ({len(db.patterns)} patterns) "
           f"to {args.path}"])
    return EXIT_OK


def _cmd_inventory_show(args) -> int:
    inv = load_inventory(args.path)
    document = inventory_to_dict(inv)
    lines = [f"{len(inv.servers)} servers"]
    for s in inv.servers:
        extra = ""
        if s.kind == "FPGA":
            logic = ",".join(s.configured_logic_ids) or "<none>"
            extra = f" logic={logic}"
        lines.append(f"  {s.server_id} {s.kind} "
                     f"modes={','.join(s.provisioning_modes)} "
                     f"slots={s.capacity_slots} cost={s.hourly_cost}/h{extra}")
    _emit(args, document, lines)
    return EXIT_OK


def _cmd_sim_dump(args) -> int:
    ws = Workspace(args.workspace)
    state = ws.load_state()
    if state is None:
        raise InputError(f"workspace {ws.root} has no simulator state")
    print(simulator.dump_state(state))
    return EXIT_OK


def _match_line(m: dict) -> str:
    lines = m["source_line_range"]
    where = f"lines {lines[0]}-{lines[1]}" if lines else "lines ?"
    return (f"{m['pattern_id']} {where} similarity "
            f"{m['similarity']:.3f} ({m['match_length']} tokens)")


def _report_lines(report: dict) -> list[str]:
    status = report["status"]
    head = f"deployment {report['deployment_id']}: {status}"
    if report.get("failure_reason"):
        head += f" ({report['failure_reason']})"
    lines = [head, f"matches: {len(report['matches'])}"]
    for m in report["matches"]:
        where = (f"lines {m['lines'][0]}-{m['lines'][1]}"
                 if m["lines"] else "lines ?")
        lines.append(f"  {m['pattern_id']} {where} similarity "
                     f"{m['similarity']:.3f}")
    if report["placements"]:
        lines.append("placements:")
        for d in report["placements"]:
            text = (f"  {d['pattern_id']} -> {d['server_id']} "
                    f"{d['provisioning_mode']}")
            if d["needs_fpga_configuration"]:
                text += " (configure before run)"
            lines.append(text)
    if report["kernels"]:
        lines.append("kernels:")
        for k in report["kernels"]:
            quality = "complete" if k["binding_complete"] else "incomplete"
            lines.append(f"  {k['file'] or '-'} ({quality})")
    if report["resources"]:
        lines.append("resources:")
        for r in report["resources"]:
            text = f"  {r['name']} {r['type']}"
            if r["server_id"]:
                text += f" on {r['server_id']}"
            if r["active_logic_id"]:
                text += f" logic={r['active_logic_id']}"
            lines.append(text)
    if report["cost"]:
        lines.append(f"cost: {report['cost']['total_hourly']} "
                     f"{report['cost']['currency']} per hour")
        for item in report["cost"]["line_items"]:
            lines.append(f"  {item['server_id']} {item['hourly_cost']}")
    if report["warnings"]:
        lines.append("warnings:")
        for w in report["warnings"]:
            lines.append(f"  {w}")
    return lines
