"""End-to-end deployment pipeline and lifecycle management.

deploy() runs the whole chain for one application source: tokenize and
normalize, detect offloadable regions, extract kernel artifacts, plan
placement, provision a stack on the simulated IaaS, write kernel files,
and assemble a report for the user. The user then either approves the
deployment (billing starts) or rejects it (the stack is deleted and its
slots return to the pool), and may swap the logic loaded on an FPGA
resource while the deployment is provisioned or approved.

Everything lives in a workspace directory:

    workspace/
      deployments/<deployment-id>.json   one record per deployment
      kernels/<deployment-id>/*.cl       generated kernel sources
      kernels/<deployment-id>/manifest.json
      simstate.json                      simulator state

All files are canonical JSON (or plain kernel text), so identical
inputs yield byte-identical workspaces. A single lock file serializes
access; concurrent invocations fail fast instead of corrupting state.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from pathlib import Path

from filelock import FileLock, Timeout

from . import jsonio, lexer, simulator
from .detector import (DEFAULT_MIN_MATCH_TOKENS, DEFAULT_SIMILARITY_THRESHOLD,
                       CloneMatch, DetectorConfig, detect)
from .errors import InputError, WrongState
from .extractor import KernelArtifact, extract_all
from .patterns import load_pattern_db
from .placement import (DEFAULT_HOST_MODE, NoCapacity, cost_to_dict,
                        decision_to_dict, load_inventory, plan,
                        render_inventory, template_to_dict)
from .simulator import SimState

ANALYZED = "ANALYZED"
PROVISIONED = "PROVISIONED"
APPROVED = "APPROVED"
REJECTED = "REJECTED"
FAILED = "FAILED"

DEPLOYMENT_STATUSES = (ANALYZED, PROVISIONED, APPROVED, REJECTED, FAILED)

_ALLOWED_TRANSITIONS = {
    (ANALYZED, PROVISIONED),
    (ANALYZED, FAILED),
    (PROVISIONED, APPROVED),
    (PROVISIONED, REJECTED),
}

NO_OFFLOAD_MESSAGE = "no offloadable logic found"

_RECORD_NAME_RE = re.compile(r"^dep-(\d+)\.json$")


class UnknownDeployment(InputError):
    def __init__(self, deployment_id: str):
        super().__init__(f"unknown deployment {deployment_id!r}")
        self.deployment_id = deployment_id


class LockError(InputError):
    """Another invocation currently holds the workspace."""


@dataclass(frozen=True)
class PipelineConfig:
    """Workspace location plus the detection and placement knobs."""

    workspace: Path
    min_match_tokens: int = DEFAULT_MIN_MATCH_TOKENS
    similarity_threshold: float = DEFAULT_SIMILARITY_THRESHOLD
    host_mode: str = DEFAULT_HOST_MODE


class Workspace:
    """Paths and persistence for one pipeline workspace."""

    def __init__(self, root):
        self.root = Path(root)
        self.deployments_dir = self.root / "deployments"
        self.kernels_dir = self.root / "kernels"
        self.simstate_path = self.root / "simstate.json"
        self.lock_path = self.root / ".lock"

    def lock(self) -> "_WorkspaceLock":
        self.root.mkdir(parents=True, exist_ok=True)
        return _WorkspaceLock(self.lock_path)

    def record_path(self, deployment_id: str) -> Path:
        return self.deployments_dir / f"{deployment_id}.json"

    def load_record(self, deployment_id: str) -> dict:
        path = self.record_path(deployment_id)
        if not path.is_file():
            raise UnknownDeployment(deployment_id)
        return jsonio.read(path)

    def save_record(self, record: dict) -> None:
        self.deployments_dir.mkdir(parents=True, exist_ok=True)
        jsonio.write(self.record_path(record["deployment_id"]), record)

    def deployment_ids(self) -> list[str]:
        if not self.deployments_dir.is_dir():
            return []
        numbers = []
        for path in self.deployments_dir.iterdir():
            m = _RECORD_NAME_RE.match(path.name)
            if m:
                numbers.append(int(m.group(1)))
        return [f"dep-{n}" for n in sorted(numbers)]

    def next_deployment_id(self) -> str:
        taken = [int(d.split("-", 1)[1]) for d in self.deployment_ids()]
        return f"dep-{max(taken, default=0) + 1}"

    def load_state(self) -> SimState | None:
        if not self.simstate_path.is_file():
            return None
        return simulator.load_state(jsonio.read(self.simstate_path))

    def save_state(self, state: SimState) -> None:
        jsonio.write(self.simstate_path, simulator.state_to_dict(state))


class _WorkspaceLock:
    def __init__(self, path: Path):
        self._lock = FileLock(str(path))

    def __enter__(self):
        try:
            self._lock.acquire(timeout=0)
        except Timeout as exc:
            raise LockError("workspace is locked by another invocation") from exc
        return self

    def __exit__(self, *exc_info):
        self._lock.release()
        return False


def analyze(source_path, pattern_db_path, config: PipelineConfig) -> dict:
    """Detection only: the matches deploy() would act on, as a document."""
    source = _read_source(source_path)
    db = load_pattern_db(pattern_db_path)
    tokens = lexer.tokenize(source)
    seq = lexer.normalize(tokens)
    cfg = DetectorConfig(config.min_match_tokens, config.similarity_threshold)
    matches = detect(seq, db, cfg, raw_tokens=tokens)
    return {
        "source_digest": _digest(source),
        "matches": [_match_to_dict(m) for m in matches],
    }


def deploy(source_path, pattern_db_path, inventory_path,
           config: PipelineConfig) -> dict:
    """Run the full pipeline for one source file; returns the persisted
    deployment record (status PROVISIONED or FAILED)."""
    ws = Workspace(config.workspace)
    with ws.lock():
        source = _read_source(source_path)
        db = load_pattern_db(pattern_db_path)
        file_inventory = load_inventory(inventory_path)
        state = _load_or_init_state(ws, file_inventory)

        tokens = lexer.tokenize(source)
        seq = lexer.normalize(tokens)
        cfg = DetectorConfig(config.min_match_tokens,
                             config.similarity_threshold)
        matches = detect(seq, db, cfg, raw_tokens=tokens)
        artifacts = extract_all(matches, tokens, db)
        complete = [a for a in artifacts if a.binding_complete]

        warnings = []
        for art in artifacts:
            if not art.binding_complete:
                details = ", ".join(
                    [f"{c.slot} bound to both {c.first_lexeme!r} and "
                     f"{c.other_lexeme!r}" for c in art.conflicts]
                    + [f"{slot} not covered by the match"
                       for slot in art.missing_slots])
                warnings.append(f"incomplete binding for pattern "
                                f"{art.pattern_id}: {details}; excluded from "
                                "placement")
        if not matches:
            warnings.append(NO_OFFLOAD_MESSAGE)

        record = {
            "deployment_id": ws.next_deployment_id(),
            "source_digest": _digest(source),
            "status": ANALYZED,
            "billing_started": False,
            "matches": [_match_to_dict(m) for m in matches],
            "artifacts": [_artifact_to_dict(a) for a in artifacts],
            "decisions": [],
            "template": None,
            "stack_id": None,
            "cost": None,
            "failure_reason": None,
            "logic_ids": db.logic_ids(),
            "report": None,
        }

        try:
            decisions, template, cost = plan(complete, state.inventory,
                                             host_mode=config.host_mode)
        except NoCapacity as exc:
            _transition(record, FAILED, "provision")
            record["failure_reason"] = f"NoCapacity:{exc.kind}"
            record["report"] = _build_report(record, warnings, state)
            ws.save_state(state)
            ws.save_record(record)
            return record

        record["decisions"] = [decision_to_dict(d) for d in decisions]
        record["template"] = template_to_dict(template)
        record["cost"] = cost_to_dict(cost)

        stack_id = simulator.stack_create(state, template)
        record["stack_id"] = stack_id
        stack = state.stacks[stack_id]
        if stack.status == simulator.CREATE_FAILED:
            _transition(record, FAILED, "provision")
            record["failure_reason"] = stack.failure_reason
            record["report"] = _build_report(record, warnings, state)
            ws.save_state(state)
            ws.save_record(record)
            return record

        simulator.check_conservation(state)
        _write_kernels(ws, record, artifacts)
        _transition(record, PROVISIONED, "provision")
        record["report"] = _build_report(record, warnings, state)
        ws.save_state(state)
        ws.save_record(record)
        return record


def approve(workspace, deployment_id: str) -> dict:
    """Accept a provisioned deployment; billing starts now."""
    ws = Workspace(workspace)
    with ws.lock():
        record = ws.load_record(deployment_id)
        _transition(record, APPROVED, "approve")
        record["billing_started"] = True
        state = ws.load_state()
        record["report"] = _refresh_report(record, state)
        ws.save_record(record)
        return record


def reject(workspace, deployment_id: str) -> dict:
    """Refuse a provisioned deployment: its stack is deleted, the slots
    return to the pool, and nothing is ever billed."""
    ws = Workspace(workspace)
    with ws.lock():
        record = ws.load_record(deployment_id)
        _transition(record, REJECTED, "reject")
        state = ws.load_state()
        if state is not None and record["stack_id"]:
            simulator.stack_delete(state, record["stack_id"])
            simulator.check_conservation(state)
            ws.save_state(state)
        record["report"] = _refresh_report(record, state)
        ws.save_record(record)
        return record


def reconfigure(workspace, deployment_id: str, resource_name: str,
                logic_id: str) -> dict:
    """Swap the logic on one FPGA resource of a live deployment."""
    ws = Workspace(workspace)
    with ws.lock():
        record = ws.load_record(deployment_id)
        if record["status"] not in (PROVISIONED, APPROVED):
            raise WrongState(f"cannot reconfigure deployment "
                             f"{deployment_id} in state {record['status']}")
        state = ws.load_state()
        if state is None or not record["stack_id"]:
            raise UnknownDeployment(deployment_id)
        simulator.reconfigure_fpga(state, record["stack_id"], resource_name,
                                   logic_id, record["logic_ids"])
        ws.save_state(state)
        record["report"] = _refresh_report(record, state)
        ws.save_record(record)
        return record


def list_deployments(workspace) -> list[dict]:
    """One summary row per deployment, oldest first."""
    ws = Workspace(workspace)
    with ws.lock():
        rows = []
        for deployment_id in ws.deployment_ids():
            record = ws.load_record(deployment_id)
            rows.append({
                "deployment_id": record["deployment_id"],
                "status": record["status"],
                "billing_started": record["billing_started"],
                "stack_id": record["stack_id"],
                "total_hourly": (record["cost"] or {}).get("total_hourly"),
            })
        return rows


def get_report(workspace, deployment_id: str) -> dict:
    ws = Workspace(workspace)
    with ws.lock():
        record = ws.load_record(deployment_id)
        return record["report"]


def _read_source(source_path) -> str:
    try:
        return Path(source_path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read source {source_path}: {exc}") from exc


def _digest(source: str) -> str:
    return "sha256:" + hashlib.sha256(source.encode("utf-8")).hexdigest()


def _load_or_init_state(ws: Workspace, file_inventory) -> SimState:
    state = ws.load_state()
    if state is None:
        return simulator.new_state(file_inventory)
    # The workspace is already bound to an inventory; a deploy against a
    # different one would silently double-book servers.
    if render_inventory(state.inventory) != render_inventory(file_inventory):
        raise InputError("inventory file does not match the inventory this "
                         "workspace was provisioned from")
    return state


def _transition(record: dict, new_status: str, operation: str) -> None:
    old = record["status"]
    if (old, new_status) not in _ALLOWED_TRANSITIONS:
        raise WrongState(f"cannot {operation} deployment "
                         f"{record['deployment_id']} in state {old}")
    record["status"] = new_status


def _match_to_dict(match: CloneMatch) -> dict:
    return {
        "pattern_id": match.pattern_id,
        "source_token_range": list(match.source_token_range),
        "source_line_range": (list(match.source_line_range)
                              if match.source_line_range else None),
        "match_length": match.match_length,
        "similarity": match.similarity,
    }


def _artifact_to_dict(art: KernelArtifact) -> dict:
    return {
        "pattern_id": art.pattern_id,
        "device_target": art.device_target,
        "binding": dict(art.binding),
        "binding_complete": art.binding_complete,
        "logic_id": art.logic_id,
        "source_line_range": (list(art.source_line_range)
                              if art.source_line_range else None),
        "conflicts": [
            {
                "slot": c.slot,
                "first_lexeme": c.first_lexeme,
                "first_token_index": c.first_token_index,
                "other_lexeme": c.other_lexeme,
                "other_token_index": c.other_token_index,
            }
            for c in art.conflicts
        ],
        "missing_slots": list(art.missing_slots),
        "kernel_file": None,
    }


def _write_kernels(ws: Workspace, record: dict,
                   artifacts: list[KernelArtifact]) -> None:
    deployment_id = record["deployment_id"]
    out_dir = ws.kernels_dir / deployment_id
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = []
    for art, art_dict in zip(artifacts, record["artifacts"]):
        filename = f"{art.pattern_id}.cl"
        (out_dir / filename).write_text(art.kernel_source, encoding="utf-8")
        rel_path = f"kernels/{deployment_id}/{filename}"
        art_dict["kernel_file"] = rel_path
        manifest.append({
            "pattern_id": art.pattern_id,
            "device_target": art.device_target,
            "binding": dict(art.binding),
            "binding_complete": art.binding_complete,
            "source_line_range": (list(art.source_line_range)
                                  if art.source_line_range else None),
            "file": filename,
        })
    jsonio.write(out_dir / "manifest.json", manifest)


def _build_report(record: dict, warnings: list[str],
                  state: SimState | None) -> dict:
    report = {
        "deployment_id": record["deployment_id"],
        "status": record["status"],
        "matches": [
            {
                "pattern_id": m["pattern_id"],
                "lines": m["source_line_range"],
                "similarity": m["similarity"],
            }
            for m in record["matches"]
        ],
        "placements": list(record["decisions"]),
        "kernels": [
            {
                "pattern_id": a["pattern_id"],
                "device_target": a["device_target"],
                "binding_complete": a["binding_complete"],
                "file": a["kernel_file"],
            }
            for a in record["artifacts"]
            if a["kernel_file"] is not None
        ],
        "cost": record["cost"],
        "resources": _stack_resources(record, state),
        "warnings": list(warnings),
    }
    if record["failure_reason"]:
        report["failure_reason"] = record["failure_reason"]
    return report


def _refresh_report(record: dict, state: SimState | None) -> dict:
    """Bring the persisted report in line with the record's status and
    the live stack (resources change on reconfigure)."""
    report = dict(record["report"])
    report["status"] = record["status"]
    report["resources"] = _stack_resources(record, state)
    return report


def _stack_resources(record: dict, state: SimState | None) -> list[dict]:
    if state is None or not record["stack_id"]:
        return []
    stack = state.stacks.get(record["stack_id"])
    if stack is None:
        return []
    return [
        {
            "name": r.resource_name,
            "type": r.type,
            "server_id": r.server_id,
            "active_logic_id": r.active_logic_id,
        }
        for r in sorted(stack.resources, key=lambda r: r.resource_name)
    ]
