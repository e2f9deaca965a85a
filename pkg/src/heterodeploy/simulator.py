"""Deterministic in-memory stand-in for an IaaS orchestration service.

Stacks are created from orchestration templates atomically: either
every resource gets a server slot or the stack is recorded as
CREATE_FAILED and no slot is consumed. Deleting a stack returns its
slots; reconfiguring an FPGA resource swaps the logic it is loaded
with. All state serializes to canonical JSON, so a fixed operation
sequence always produces byte-identical dumps.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from . import jsonio
from .errors import InputError, InternalError, SchemaError, WrongState
from .placement import (FPGA, SERVER_KINDS, Inventory, OrchestrationTemplate,
                        cheapest_eligible, inventory_to_dict, parse_inventory,
                        parse_template, template_to_dict)

CREATE_COMPLETE = "CREATE_COMPLETE"
CREATE_FAILED = "CREATE_FAILED"
DELETED = "DELETED"

STACK_STATUSES = (CREATE_COMPLETE, CREATE_FAILED, DELETED)


class UnknownStack(InputError):
    def __init__(self, stack_id: str):
        super().__init__(f"unknown stack {stack_id!r}")
        self.stack_id = stack_id


class UnknownResource(InputError):
    def __init__(self, stack_id: str, resource_name: str):
        super().__init__(f"stack {stack_id!r} has no resource "
                         f"{resource_name!r}")
        self.resource_name = resource_name


class NotFpgaResource(InputError):
    def __init__(self, resource_name: str):
        super().__init__(f"resource {resource_name!r} is not an FPGA compute "
                         "resource")
        self.resource_name = resource_name


class UnknownLogicId(InputError):
    def __init__(self, logic_id: str):
        super().__init__(f"logic id {logic_id!r} is not known to the pattern "
                         "database")
        self.logic_id = logic_id


@dataclass
class ProvisionedResource:
    """One resource inside a stack. server_id and active_logic_id are
    only set where they make sense (compute, FPGA compute)."""

    resource_id: str
    resource_name: str
    type: str
    server_id: str | None = None
    active_logic_id: str | None = None


@dataclass
class Stack:
    """One provisioning attempt and its outcome."""

    stack_id: str
    status: str
    resources: list[ProvisionedResource]
    template: OrchestrationTemplate
    failure_reason: str | None = None


@dataclass
class SimState:
    """Live inventory plus every stack ever requested."""

    inventory: Inventory
    stacks: dict[str, Stack] = field(default_factory=dict)
    next_id: int = 1


def new_state(inventory: Inventory) -> SimState:
    return SimState(inventory=inventory)


def stack_create(state: SimState, template: OrchestrationTemplate) -> str:
    """Provision a stack from a template; returns the new stack id.

    Compute resources are provisioned in sorted resource-name order.
    On any shortfall the whole attempt is rolled back and the stack is
    recorded as CREATE_FAILED with the reason; errors are never raised
    for capacity or unknown-kind problems.
    """
    stack_id = f"stack-{state.next_id}"
    state.next_id += 1

    working = dict(state.inventory.free_slots)
    resources: list[ProvisionedResource] = []
    failure = None
    for name in sorted(template.resources):
        entry = template.resources[name]
        rtype = entry["type"]
        if rtype in ("router", "storage"):
            resources.append(ProvisionedResource(
                resource_id=f"{stack_id}/{name}", resource_name=name,
                type=rtype))
            continue
        props = entry["properties"]
        kind = props["server_kind"]
        if kind not in SERVER_KINDS:
            failure = f"UnknownServerKind:{kind}"
            break
        logic = props.get("fpga_logic_id")
        configure = bool(props.get("configure_before_run"))
        server = cheapest_eligible(
            state.inventory, working, kind, props["provisioning_mode"],
            logic_id=logic if (kind == FPGA and not configure) else None,
            require_unconfigured=(kind == FPGA and configure))
        if server is None:
            failure = f"NoCapacity:{kind}"
            break
        working[server.server_id] -= 1
        resources.append(ProvisionedResource(
            resource_id=f"{stack_id}/{name}", resource_name=name,
            type="compute", server_id=server.server_id,
            active_logic_id=logic if kind == FPGA else None))

    if failure is not None:
        state.stacks[stack_id] = Stack(stack_id=stack_id, status=CREATE_FAILED,
                                       resources=[], template=template,
                                       failure_reason=failure)
    else:
        state.inventory.free_slots = working
        state.stacks[stack_id] = Stack(stack_id=stack_id,
                                       status=CREATE_COMPLETE,
                                       resources=resources, template=template)
    return stack_id


def stack_get(state: SimState, stack_id: str) -> Stack:
    """Snapshot of one stack; mutating it does not touch the simulator."""
    if stack_id not in state.stacks:
        raise UnknownStack(stack_id)
    return copy.deepcopy(state.stacks[stack_id])


def stack_delete(state: SimState, stack_id: str) -> None:
    """Delete a stack and return its slots. Idempotent: deleting an
    already deleted or failed stack is a no-op."""
    stack = state.stacks.get(stack_id)
    if stack is None:
        raise UnknownStack(stack_id)
    if stack.status in (DELETED, CREATE_FAILED):
        return
    for res in stack.resources:
        if res.type == "compute":
            state.inventory.free_slots[res.server_id] += 1
    stack.status = DELETED


def reconfigure_fpga(state: SimState, stack_id: str, resource_name: str,
                     logic_id: str, known_logic_ids) -> None:
    """Load different logic onto a provisioned FPGA resource.

    The stack must be CREATE_COMPLETE, the resource must be an FPGA
    compute resource, and the logic id must belong to the pattern
    database's logic universe. Nothing else changes.
    """
    stack = state.stacks.get(stack_id)
    if stack is None:
        raise UnknownStack(stack_id)
    if stack.status != CREATE_COMPLETE:
        raise WrongState(f"stack {stack_id!r} is {stack.status}, must be "
                         f"{CREATE_COMPLETE} to reconfigure")
    resource = None
    for res in stack.resources:
        if res.resource_name == resource_name:
            resource = res
            break
    if resource is None:
        raise UnknownResource(stack_id, resource_name)
    if resource.type != "compute" \
            or state.inventory.spec(resource.server_id).kind != FPGA:
        raise NotFpgaResource(resource_name)
    if logic_id not in set(known_logic_ids):
        raise UnknownLogicId(logic_id)
    resource.active_logic_id = logic_id


def check_conservation(state: SimState) -> None:
    """Verify that held plus free slots equal capacity on every server."""
    held = {s.server_id: 0 for s in state.inventory.servers}
    for stack in state.stacks.values():
        if stack.status != CREATE_COMPLETE:
            continue
        for res in stack.resources:
            if res.type == "compute":
                held[res.server_id] += 1
    for server in state.inventory.servers:
        free = state.inventory.free_slots[server.server_id]
        if free < 0 or free + held[server.server_id] != server.capacity_slots:
            raise InternalError(
                f"slot accounting broken on {server.server_id!r}: "
                f"free {free} + held {held[server.server_id]} != "
                f"capacity {server.capacity_slots}")


def state_to_dict(state: SimState) -> dict:
    return {
        "inventory": {
            "servers": inventory_to_dict(state.inventory)["servers"],
            "free_slots": dict(state.inventory.free_slots),
        },
        "next_id": state.next_id,
        "stacks": {sid: _stack_to_dict(stack)
                   for sid, stack in state.stacks.items()},
    }


def dump_state(state: SimState) -> str:
    """Canonical JSON dump of the whole simulator state."""
    return jsonio.dumps(state_to_dict(state))


def load_state(data_or_text) -> SimState:
    data = jsonio.loads(data_or_text) if isinstance(data_or_text, str) \
        else data_or_text
    if not isinstance(data, dict) or set(data) != {"inventory", "next_id",
                                                   "stacks"}:
        raise SchemaError("simulator state must have inventory, next_id "
                          "and stacks")
    inv_data = data["inventory"]
    if not isinstance(inv_data, dict) or set(inv_data) != {"servers",
                                                           "free_slots"}:
        raise SchemaError("simulator inventory must have servers and "
                          "free_slots")
    inventory = parse_inventory({"servers": inv_data["servers"]})
    free = inv_data["free_slots"]
    if set(free) != set(inventory.free_slots):
        raise SchemaError("free_slots does not cover exactly the servers")
    for sid, slots in free.items():
        if not isinstance(slots, int) or isinstance(slots, bool) or slots < 0:
            raise SchemaError(f"free_slots[{sid!r}] must be a non-negative "
                              "integer")
    inventory.free_slots = dict(free)

    next_id = data["next_id"]
    if not isinstance(next_id, int) or next_id < 1:
        raise SchemaError("next_id must be a positive integer")
    state = SimState(inventory=inventory, next_id=next_id)
    if not isinstance(data["stacks"], dict):
        raise SchemaError("stacks must be an object")
    for sid, stack_data in data["stacks"].items():
        state.stacks[sid] = _stack_from_dict(sid, stack_data)
    return state


def _stack_to_dict(stack: Stack) -> dict:
    return {
        "stack_id": stack.stack_id,
        "status": stack.status,
        "failure_reason": stack.failure_reason,
        "resources": [
            {
                "resource_id": r.resource_id,
                "resource_name": r.resource_name,
                "type": r.type,
                "server_id": r.server_id,
                "active_logic_id": r.active_logic_id,
            }
            for r in stack.resources
        ],
        "template": template_to_dict(stack.template),
    }


def _stack_from_dict(stack_id: str, data) -> Stack:
    expected = {"stack_id", "status", "failure_reason", "resources",
                "template"}
    if not isinstance(data, dict) or set(data) != expected:
        raise SchemaError(f"stack {stack_id!r} record is malformed")
    if data["stack_id"] != stack_id:
        raise SchemaError(f"stack {stack_id!r} record names itself "
                          f"{data['stack_id']!r}")
    if data["status"] not in STACK_STATUSES:
        raise SchemaError(f"stack {stack_id!r} has unknown status "
                          f"{data['status']!r}")
    resources = []
    for rd in data["resources"]:
        resources.append(ProvisionedResource(
            resource_id=rd["resource_id"], resource_name=rd["resource_name"],
            type=rd["type"], server_id=rd.get("server_id"),
            active_logic_id=rd.get("active_logic_id")))
    return Stack(stack_id=stack_id, status=data["status"],
                 resources=resources, template=parse_template(data["template"]),
                 failure_reason=data["failure_reason"])
