"""Device-aware placement planning and orchestration templates.

The planner assigns each complete kernel artifact to a server that can
actually run it: GPU kernels go to GPU servers in container mode (VM
hypervisors cannot drive the GPU well enough), FPGA kernels go to
dedicated baremetal FPGA servers, preferring one already configured
with the required logic and falling back to an unconfigured board that
will be configured before the application runs. The host application
itself lands on a CPU server. The resulting environment is described by
a JSON orchestration template that the IaaS simulator consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal

from . import jsonio
from .errors import HeterodeployError, InputError, InternalError, SchemaError
from .extractor import KernelArtifact

CPU = "CPU"
GPU = "GPU"
FPGA = "FPGA"
SERVER_KINDS = (CPU, GPU, FPGA)

VM = "vm"
CONTAINER = "container"
BAREMETAL = "baremetal"
PROVISIONING_MODES = (VM, CONTAINER, BAREMETAL)

DEFAULT_HOST_MODE = CONTAINER

TEMPLATE_VERSION = 1

#: Runtime image per server kind, recorded in template compute resources.
IMAGES = {
    CPU: "app-host",
    GPU: "gpu-offload-runtime",
    FPGA: "fpga-offload-shell",
}

HOST_RESOURCE = "host"
ROUTER_RESOURCE = "r0"
STORAGE_RESOURCE = "s0"


class NoCapacity(HeterodeployError):
    """No free server of the required kind can take the placement."""

    def __init__(self, kind: str):
        super().__init__(f"no free {kind} server can take this placement")
        self.kind = kind


class IncompleteArtifact(InternalError):
    """plan() was handed an artifact whose binding is not complete."""

    def __init__(self, pattern_id: str):
        super().__init__(f"artifact for pattern {pattern_id!r} has an "
                         "incomplete binding and cannot be placed")
        self.pattern_id = pattern_id


class UnknownServer(InputError):
    def __init__(self, server_id: str):
        super().__init__(f"unknown server {server_id!r}")
        self.server_id = server_id


@dataclass
class ServerSpec:
    """Static description of one physical server."""

    server_id: str
    kind: str
    provisioning_modes: list[str]
    configured_logic_ids: list[str]
    capacity_slots: int
    hourly_cost: Decimal


@dataclass
class Inventory:
    """Servers plus the number of free placement slots on each."""

    servers: list[ServerSpec] = field(default_factory=list)
    free_slots: dict[str, int] = field(default_factory=dict)

    def spec(self, server_id: str) -> ServerSpec:
        for s in self.servers:
            if s.server_id == server_id:
                return s
        raise UnknownServer(server_id)


@dataclass
class PlacementDecision:
    """Where one kernel artifact will run."""

    pattern_id: str
    server_id: str
    provisioning_mode: str
    needs_fpga_configuration: bool
    logic_id: str | None


@dataclass
class OrchestrationTemplate:
    """Declarative description of the environment to provision: a map of
    resource name to {"type", "properties"} entries."""

    version: int
    resources: dict[str, dict]


@dataclass
class CostEstimate:
    """Hourly cost of a plan: one line item per distinct server."""

    line_items: list[tuple[str, Decimal]]
    total_hourly: Decimal
    currency: str = "USD"


def load_inventory(path) -> Inventory:
    """Load and validate a server inventory file. All slots start free."""
    data = jsonio.read(path)
    return parse_inventory(data)


def parse_inventory(data) -> Inventory:
    if not isinstance(data, dict):
        raise SchemaError("inventory must be a JSON object")
    unknown = set(data) - {"servers"}
    if unknown:
        raise SchemaError(f"inventory has unknown fields: "
                          f"{', '.join(sorted(unknown))}")
    entries = data.get("servers")
    if not isinstance(entries, list):
        raise SchemaError("'servers' must be a list")
    inv = Inventory()
    for entry in entries:
        server = _parse_server(entry)
        if server.server_id in inv.free_slots:
            raise SchemaError(f"duplicate server id {server.server_id!r}")
        inv.servers.append(server)
        inv.free_slots[server.server_id] = server.capacity_slots
    return inv


def _parse_server(entry) -> ServerSpec:
    if not isinstance(entry, dict):
        raise SchemaError("each server must be a JSON object")
    label = entry.get("server_id") if isinstance(entry.get("server_id"), str) \
        else "<missing id>"
    required = {"server_id", "kind", "provisioning_modes", "capacity_slots",
                "hourly_cost"}
    unknown = set(entry) - required - {"configured_logic_ids"}
    if unknown:
        raise SchemaError(f"server {label!r}: unknown fields: "
                          f"{', '.join(sorted(unknown))}")
    for name in required:
        if name not in entry:
            raise SchemaError(f"server {label!r}: missing field {name!r}")
    server_id = entry["server_id"]
    if not isinstance(server_id, str) or not server_id:
        raise SchemaError("server_id must be a non-empty string")
    kind = entry["kind"]
    if kind not in SERVER_KINDS:
        raise SchemaError(f"server {label!r}: kind must be one of "
                          f"{', '.join(SERVER_KINDS)}, got {kind!r}")
    modes = entry["provisioning_modes"]
    if (not isinstance(modes, list) or not modes
            or any(m not in PROVISIONING_MODES for m in modes)):
        raise SchemaError(f"server {label!r}: provisioning_modes must be a "
                          f"non-empty list drawn from "
                          f"{', '.join(PROVISIONING_MODES)}")
    modes = sorted(set(modes))
    logic_ids = entry.get("configured_logic_ids", [])
    if (not isinstance(logic_ids, list)
            or any(not isinstance(x, str) for x in logic_ids)):
        raise SchemaError(f"server {label!r}: configured_logic_ids must be a "
                          "list of strings")
    logic_ids = sorted(set(logic_ids))
    capacity = entry["capacity_slots"]
    if not isinstance(capacity, int) or isinstance(capacity, bool) or capacity < 1:
        raise SchemaError(f"server {label!r}: capacity_slots must be a "
                          "positive integer")
    cost = entry["hourly_cost"]
    if isinstance(cost, bool) or not isinstance(cost, (int, Decimal)):
        raise SchemaError(f"server {label!r}: hourly_cost must be a number")
    cost = Decimal(cost) if isinstance(cost, int) else cost
    if cost < 0:
        raise SchemaError(f"server {label!r}: hourly_cost must not be negative")

    if kind == FPGA and BAREMETAL not in modes:
        raise SchemaError(f"server {label!r}: FPGA servers must support "
                          "baremetal provisioning")
    if kind != FPGA and logic_ids:
        raise SchemaError(f"server {label!r}: configured_logic_ids is only "
                          "meaningful for FPGA servers")
    if modes == [BAREMETAL] and capacity != 1:
        raise SchemaError(f"server {label!r}: baremetal-only servers have "
                          "exactly one slot")
    return ServerSpec(server_id=server_id, kind=kind, provisioning_modes=modes,
                      configured_logic_ids=logic_ids, capacity_slots=capacity,
                      hourly_cost=cost)


def render_inventory(inv: Inventory) -> str:
    """Serialize an inventory back to its canonical file form."""
    return jsonio.dumps(inventory_to_dict(inv))


def inventory_to_dict(inv: Inventory) -> dict:
    servers = []
    for s in inv.servers:
        entry = {
            "server_id": s.server_id,
            "kind": s.kind,
            "provisioning_modes": list(s.provisioning_modes),
            "capacity_slots": s.capacity_slots,
            "hourly_cost": s.hourly_cost,
        }
        if s.kind == FPGA:
            entry["configured_logic_ids"] = list(s.configured_logic_ids)
        servers.append(entry)
    return {"servers": servers}


def cheapest_eligible(inv: Inventory, free: dict[str, int], kind: str,
                      mode: str, logic_id: str | None = None,
                      require_unconfigured: bool = False) -> ServerSpec | None:
    """Pick the cheapest free server of a kind that supports a mode;
    ties go to the lexicographically smallest server id.

    For FPGA selection, logic_id restricts to servers already configured
    with that logic, while require_unconfigured restricts to servers
    with no configured logic at all.
    """
    eligible = []
    for s in inv.servers:
        if s.kind != kind or mode not in s.provisioning_modes:
            continue
        if free.get(s.server_id, 0) < 1:
            continue
        if logic_id is not None and logic_id not in s.configured_logic_ids:
            continue
        if require_unconfigured and s.configured_logic_ids:
            continue
        eligible.append(s)
    if not eligible:
        return None
    return min(eligible, key=lambda s: (s.hourly_cost, s.server_id))


def plan(artifacts: list[KernelArtifact], inv: Inventory,
         host_mode: str = DEFAULT_HOST_MODE) -> tuple[list[PlacementDecision],
                                                      OrchestrationTemplate,
                                                      CostEstimate]:
    """Assign every artifact and the host application to servers.

    The inventory is not mutated; slot bookkeeping happens on a working
    copy. Raises IncompleteArtifact for artifacts that cannot be placed
    and NoCapacity when the inventory cannot satisfy a placement.
    Assignment processes the host first and then artifacts in pattern-id
    order, matching the order in which the simulator provisions the
    template's resources, so planner and simulator pick the same servers.
    """
    for art in artifacts:
        if not art.binding_complete:
            raise IncompleteArtifact(art.pattern_id)
    if host_mode not in PROVISIONING_MODES:
        raise InputError(f"unknown host provisioning mode {host_mode!r}")

    working = dict(inv.free_slots)
    host = cheapest_eligible(inv, working, CPU, host_mode)
    if host is None:
        raise NoCapacity(CPU)
    working[host.server_id] -= 1

    by_pattern: dict[str, PlacementDecision] = {}
    for art in sorted(artifacts, key=lambda a: a.pattern_id):
        if art.device_target == GPU:
            server = cheapest_eligible(inv, working, GPU, CONTAINER)
            if server is None:
                raise NoCapacity(GPU)
            decision = PlacementDecision(
                pattern_id=art.pattern_id, server_id=server.server_id,
                provisioning_mode=CONTAINER, needs_fpga_configuration=False,
                logic_id=None)
        else:
            if art.logic_id is None:
                raise InternalError(f"FPGA artifact {art.pattern_id!r} has "
                                    "no logic id")
            server = cheapest_eligible(inv, working, FPGA, BAREMETAL,
                                       logic_id=art.logic_id)
            needs_configuration = False
            if server is None:
                server = cheapest_eligible(inv, working, FPGA, BAREMETAL,
                                           require_unconfigured=True)
                needs_configuration = True
            if server is None:
                raise NoCapacity(FPGA)
            decision = PlacementDecision(
                pattern_id=art.pattern_id, server_id=server.server_id,
                provisioning_mode=BAREMETAL,
                needs_fpga_configuration=needs_configuration,
                logic_id=art.logic_id)
        working[server.server_id] -= 1
        by_pattern[art.pattern_id] = decision

    decisions = [by_pattern[a.pattern_id] for a in artifacts]
    template = build_template(decisions, host_mode=host_mode)
    cost = estimate_cost(decisions, inv, host)
    return decisions, template, cost


def estimate_cost(decisions: list[PlacementDecision], inv: Inventory,
                  host_server: ServerSpec) -> CostEstimate:
    """Hourly cost of a set of decisions plus the host server.

    Servers are billed once no matter how many placements they carry.
    """
    by_id = {s.server_id: s for s in inv.servers}
    used: dict[str, ServerSpec] = {host_server.server_id: host_server}
    for d in decisions:
        if d.server_id not in by_id:
            raise UnknownServer(d.server_id)
        used[d.server_id] = by_id[d.server_id]
    line_items = [(sid, used[sid].hourly_cost) for sid in sorted(used)]
    total = sum((cost for _, cost in line_items), Decimal(0))
    return CostEstimate(line_items=line_items, total_hourly=total)


def build_template(decisions: list[PlacementDecision],
                   host_mode: str = DEFAULT_HOST_MODE) -> OrchestrationTemplate:
    """Build the environment template: one compute resource per decision,
    one CPU compute for the host, one router and one storage."""
    resources: dict[str, dict] = {
        HOST_RESOURCE: {
            "type": "compute",
            "properties": {
                "image": IMAGES[CPU],
                "provisioning_mode": host_mode,
                "server_kind": CPU,
            },
        },
        ROUTER_RESOURCE: {"type": "router", "properties": {}},
        STORAGE_RESOURCE: {"type": "storage", "properties": {}},
    }
    for d in decisions:
        kind = FPGA if d.provisioning_mode == BAREMETAL else GPU
        props = {
            "image": IMAGES[kind],
            "provisioning_mode": d.provisioning_mode,
            "server_kind": kind,
        }
        if kind == FPGA:
            props["fpga_logic_id"] = d.logic_id
            if d.needs_fpga_configuration:
                props["configure_before_run"] = True
        resources[f"offload_{d.pattern_id}"] = {"type": "compute",
                                                "properties": props}
    return OrchestrationTemplate(version=TEMPLATE_VERSION, resources=resources)


def template_to_dict(template: OrchestrationTemplate) -> dict:
    return {"version": template.version, "resources": template.resources}


def render_template(template: OrchestrationTemplate) -> str:
    """Canonical JSON text for a template; parse_template() inverts this
    byte-exactly."""
    return jsonio.dumps(template_to_dict(template))


def parse_template(text_or_data) -> OrchestrationTemplate:
    """Parse and validate an orchestration template document."""
    data = jsonio.loads(text_or_data) if isinstance(text_or_data, str) \
        else text_or_data
    if not isinstance(data, dict):
        raise SchemaError("template must be a JSON object")
    unknown = set(data) - {"version", "resources"}
    if unknown:
        raise SchemaError(f"template has unknown fields: "
                          f"{', '.join(sorted(unknown))}")
    if data.get("version") != TEMPLATE_VERSION:
        raise SchemaError(f"unsupported template version "
                          f"{data.get('version')!r}, expected {TEMPLATE_VERSION}")
    resources = data.get("resources")
    if not isinstance(resources, dict) or not resources:
        raise SchemaError("'resources' must be a non-empty object")

    counts = {"router": 0, "storage": 0, "compute": 0}
    for name, entry in resources.items():
        if not isinstance(entry, dict) or set(entry) != {"type", "properties"}:
            raise SchemaError(f"resource {name!r} must have exactly "
                              "'type' and 'properties'")
        rtype = entry["type"]
        if rtype not in counts:
            raise SchemaError(f"resource {name!r}: unknown type {rtype!r}")
        counts[rtype] += 1
        props = entry["properties"]
        if not isinstance(props, dict):
            raise SchemaError(f"resource {name!r}: properties must be an object")
        if rtype in ("router", "storage"):
            if props:
                raise SchemaError(f"resource {name!r}: {rtype} resources carry "
                                  "no properties")
            continue
        _check_compute_props(name, props)
    if counts["router"] != 1 or counts["storage"] != 1:
        raise SchemaError("template must contain exactly one router and one "
                          "storage resource")
    if counts["compute"] < 1:
        raise SchemaError("template must contain at least one compute resource")
    return OrchestrationTemplate(version=TEMPLATE_VERSION, resources=resources)


def _check_compute_props(name: str, props: dict) -> None:
    required = {"image", "provisioning_mode", "server_kind"}
    unknown = set(props) - required - {"fpga_logic_id", "configure_before_run"}
    if unknown:
        raise SchemaError(f"resource {name!r}: unknown properties: "
                          f"{', '.join(sorted(unknown))}")
    for key in required:
        if key not in props or not isinstance(props[key], str):
            raise SchemaError(f"resource {name!r}: property {key!r} must be "
                              "a string")
    if props["provisioning_mode"] not in PROVISIONING_MODES:
        raise SchemaError(f"resource {name!r}: unknown provisioning mode "
                          f"{props['provisioning_mode']!r}")
    # server_kind is deliberately not restricted here: the simulator
    # records an UnknownServerKind failure on the stack instead.
    kind = props["server_kind"]
    logic = props.get("fpga_logic_id")
    configure = props.get("configure_before_run")
    if kind == FPGA:
        if not isinstance(logic, str) or not logic:
            raise SchemaError(f"resource {name!r}: FPGA compute resources "
                              "need an fpga_logic_id")
    elif logic is not None or configure is not None:
        raise SchemaError(f"resource {name!r}: FPGA properties are only "
                          "allowed on FPGA compute resources")
    if configure is not None and configure is not True:
        raise SchemaError(f"resource {name!r}: configure_before_run must be "
                          "true when present")


def decision_to_dict(d: PlacementDecision) -> dict:
    return {
        "pattern_id": d.pattern_id,
        "server_id": d.server_id,
        "provisioning_mode": d.provisioning_mode,
        "needs_fpga_configuration": d.needs_fpga_configuration,
        "logic_id": d.logic_id,
    }


def cost_to_dict(cost: CostEstimate) -> dict:
    return {
        "currency": cost.currency,
        "line_items": [{"server_id": sid, "hourly_cost": c}
                       for sid, c in cost.line_items],
        "total_hourly": cost.total_hourly,
    }
