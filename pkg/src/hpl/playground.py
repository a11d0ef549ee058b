"""Cost-map playground simulation.

The world is a lattice with 110 mm pitch. Nodes sit at integer (col, row)
grid coordinates; segments join axis or diagonal neighbors and carry a
darkness in [0, 1] that prices traversal. Poses use millimeters and
degrees, heading 0 along +x and counter-clockwise positive; every command
lands the robot exactly on a node, so a trajectory is a walk on the
segment graph with an energy budget draining per the ground darkness.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

from .compiler import Arc, MotionCommand, Rotate, Translate
from .errors import DomainError

DEFAULT_PITCH_MM = 110.0
VALID_HEADINGS = tuple(range(0, 360, 45))


class SchemaError(DomainError):
    pass


class DanglingSegment(DomainError):
    pass


class NonNeighborSegment(DomainError):
    pass


class DuplicateSegment(DomainError):
    pass


class BadStart(DomainError):
    pass


class UnknownIcon(DomainError):
    pass


class OffMap(DomainError):
    pass


class RunStatus(Enum):
    COMPLETED = "completed"
    ENERGY_EXHAUSTED = "energy_exhausted"
    OFF_MAP = "off_map"


@dataclass(frozen=True)
class MapNode:
    id: str
    col: int
    row: int
    icon: str | None = None


@dataclass(frozen=True)
class Segment:
    a: str
    b: str
    darkness: float


@dataclass(frozen=True)
class Pose:
    x_mm: float
    y_mm: float
    heading_deg: float


@dataclass(frozen=True)
class EnergyModel:
    initial: float = 100.0
    drain_per_step: float = 10.0  # at darkness 1.0, per full lattice step
    rotation_cost: float = 0.0

    def __post_init__(self):
        if self.initial <= 0:
            raise ValueError("initial energy must be > 0")
        if self.drain_per_step < 0 or self.rotation_cost < 0:
            raise ValueError("costs must be >= 0")


@dataclass(frozen=True)
class TrajectoryPoint:
    pose: Pose
    energy: float
    command_index: int  # -1 for the initial state


@dataclass(frozen=True)
class SimResult:
    trajectory: tuple[TrajectoryPoint, ...]
    status: RunStatus
    final_pose: Pose
    total_cost: float


class PlaygroundMap:
    def __init__(self, pitch_mm: float, nodes: list[MapNode], segments: list[Segment], start_node: str, start_heading: float):
        if pitch_mm <= 0:
            raise SchemaError("pitch_mm must be > 0")
        self.pitch_mm = float(pitch_mm)
        self.nodes = list(nodes)
        self.segments = list(segments)
        self.start_node = start_node
        self.start_heading = float(start_heading)

        self._by_id: dict[str, MapNode] = {}
        for node in nodes:
            if node.id in self._by_id:
                raise SchemaError(f"duplicate node id {node.id!r}")
            self._by_id[node.id] = node
        self._by_grid = {(n.col, n.row): n for n in nodes}
        if len(self._by_grid) != len(nodes):
            raise SchemaError("two nodes share a grid cell")

        self._darkness: dict[frozenset[str], float] = {}
        for seg in segments:
            for end in (seg.a, seg.b):
                if end not in self._by_id:
                    raise DanglingSegment(f"segment references unknown node {end!r}")
            if seg.a == seg.b:
                raise NonNeighborSegment(f"segment joins {seg.a!r} to itself")
            na, nb = self._by_id[seg.a], self._by_id[seg.b]
            dc, dr = abs(na.col - nb.col), abs(na.row - nb.row)
            if max(dc, dr) != 1:
                raise NonNeighborSegment(f"{seg.a!r}-{seg.b!r} are not lattice neighbors")
            if not (0.0 <= seg.darkness <= 1.0):
                raise SchemaError(f"darkness must be in [0, 1], got {seg.darkness}")
            key = frozenset((seg.a, seg.b))
            if key in self._darkness:
                raise DuplicateSegment(f"duplicate segment {seg.a!r}-{seg.b!r}")
            self._darkness[key] = seg.darkness

        if start_node not in self._by_id:
            raise BadStart(f"start node {start_node!r} does not exist")
        if start_heading not in VALID_HEADINGS:
            raise BadStart(f"start heading must be one of {VALID_HEADINGS}")

    def node(self, node_id: str) -> MapNode:
        return self._by_id[node_id]

    def node_at(self, col: int, row: int) -> MapNode | None:
        return self._by_grid.get((col, row))

    def darkness_between(self, a: str, b: str) -> float | None:
        return self._darkness.get(frozenset((a, b)))

    def node_position(self, node: MapNode) -> tuple[float, float]:
        return (node.col * self.pitch_mm, node.row * self.pitch_mm)

    def start_pose(self) -> Pose:
        x, y = self.node_position(self._by_id[self.start_node])
        return Pose(x, y, self.start_heading)

    def node_near(self, x_mm: float, y_mm: float, tol_mm: float = 0.5) -> MapNode | None:
        col = round(x_mm / self.pitch_mm)
        row = round(y_mm / self.pitch_mm)
        node = self.node_at(col, row)
        if node is None:
            return None
        nx, ny = self.node_position(node)
        if math.hypot(nx - x_mm, ny - y_mm) > tol_mm:
            return None
        return node


# --- Map file ---------------------------------------------------------------


def load_map(text: str | bytes) -> PlaygroundMap:
    try:
        doc = json.loads(text)
    except ValueError as exc:
        raise SchemaError(f"map is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("map document must be a JSON object")
    try:
        nodes = [
            MapNode(id=str(n["id"]), col=int(n["col"]), row=int(n["row"]), icon=n.get("icon"))
            for n in doc["nodes"]
        ]
        segments = [
            Segment(a=str(s["a"]), b=str(s["b"]), darkness=float(s["darkness"]))
            for s in doc["segments"]
        ]
        start = doc["start"]
        return PlaygroundMap(
            pitch_mm=float(doc.get("pitch_mm", DEFAULT_PITCH_MM)),
            nodes=nodes,
            segments=segments,
            start_node=str(start["node"]),
            start_heading=float(start["heading"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad map document: {exc}") from None


def map_to_json_dict(pmap: PlaygroundMap) -> dict:
    nodes = []
    for n in pmap.nodes:
        entry: dict = {"id": n.id, "col": n.col, "row": n.row}
        if n.icon is not None:
            entry["icon"] = n.icon
        nodes.append(entry)
    return {
        "pitch_mm": pmap.pitch_mm,
        "nodes": nodes,
        "segments": [{"a": s.a, "b": s.b, "darkness": s.darkness} for s in pmap.segments],
        "start": {"node": pmap.start_node, "heading": pmap.start_heading},
    }


def default_map() -> PlaygroundMap:
    """Bundled 5x5 playground: all axis edges plus a few diagonals, mixed
    ground darkness, icons in the corners and the middle."""
    icons = {(0, 0): "home", (4, 0): "tree", (0, 4): "lake", (4, 4): "volcano", (2, 2): "star"}
    nodes = [
        MapNode(id=f"n{c}{r}", col=c, row=r, icon=icons.get((c, r)))
        for r in range(5)
        for c in range(5)
    ]
    # deterministic mixed darkness pattern; the rim stays cheap, the middle
    # rows cost more, diagonals are expensive shortcuts
    segments = []
    for r in range(5):
        for c in range(4):
            dark = 0.2 if r == 0 else 0.0 if r == 4 else round(0.25 * r, 2)
            segments.append(Segment(a=f"n{c}{r}", b=f"n{c + 1}{r}", darkness=dark))
    for c in range(5):
        for r in range(4):
            dark = 0.0 if c in (0, 4) else round(0.2 + 0.15 * c, 2)
            segments.append(Segment(a=f"n{c}{r}", b=f"n{c}{r + 1}", darkness=dark))
    for c, r in ((0, 0), (1, 1), (2, 2), (3, 3)):
        segments.append(Segment(a=f"n{c}{r}", b=f"n{c + 1}{r + 1}", darkness=1.0))
    for c, r in ((4, 0), (3, 1), (2, 2), (1, 3)):
        segments.append(Segment(a=f"n{c}{r}", b=f"n{c - 1}{r + 1}", darkness=0.75))
    return PlaygroundMap(
        pitch_mm=DEFAULT_PITCH_MM,
        nodes=nodes,
        segments=segments,
        start_node="n00",
        start_heading=0.0,
    )


# --- Kinematics -------------------------------------------------------------


def _land(pmap: PlaygroundMap, pose: Pose, dx_mm: float, dy_mm: float) -> tuple[MapNode, MapNode]:
    """Resolve the (current, landing) node pair for an ideal displacement;
    the landing node is the lattice neighbor the displacement rounds to."""
    here = pmap.node_near(pose.x_mm, pose.y_mm)
    if here is None:
        raise OffMap(f"pose ({pose.x_mm:.1f}, {pose.y_mm:.1f}) is not on a node")
    dcol = round(dx_mm / pmap.pitch_mm)
    drow = round(dy_mm / pmap.pitch_mm)
    target = pmap.node_at(here.col + dcol, here.row + drow)
    if target is None:
        raise OffMap(f"no node at ({here.col + dcol}, {here.row + drow})")
    return here, target


def step(
    pose: Pose,
    cmd: MotionCommand,
    pmap: PlaygroundMap,
    em: EnergyModel = EnergyModel(),
    energy: float | None = None,
) -> tuple[Pose, float, float]:
    """Apply one command: returns (new pose, new energy, cost incurred).

    Translate and Arc must land on a node joined to the current one by a
    segment (OffMap otherwise); their cost is darkness * drain * steps.
    Energy is clamped at zero; a zero result means the budget ran out on
    this command (the command still applies)."""
    if energy is None:
        energy = em.initial
    if energy <= 0:
        raise ValueError("step requires energy > 0")

    if isinstance(cmd, Rotate):
        new_pose = Pose(pose.x_mm, pose.y_mm, (pose.heading_deg + cmd.angle_deg) % 360.0)
        cost = em.rotation_cost
    else:
        if isinstance(cmd, Translate):
            direction = math.radians(pose.heading_deg)
            length = cmd.distance_mm
            new_heading = pose.heading_deg
        else:  # Arc: chord along the mean of old and new heading
            direction = math.radians(pose.heading_deg + cmd.heading_change_deg / 2.0)
            length = cmd.chord_mm
            new_heading = (pose.heading_deg + cmd.heading_change_deg) % 360.0
        dx = length * math.cos(direction)
        dy = length * math.sin(direction)
        here, target = _land(pmap, pose, dx, dy)
        darkness = pmap.darkness_between(here.id, target.id)
        if darkness is None:
            raise OffMap(f"no segment between {here.id!r} and {target.id!r}")
        tx, ty = pmap.node_position(target)
        new_pose = Pose(tx, ty, new_heading)
        cost = darkness * em.drain_per_step * (abs(length) / pmap.pitch_mm)

    new_energy = max(0.0, energy - cost)
    return new_pose, new_energy, cost


def run(commands: list[MotionCommand], pmap: PlaygroundMap, em: EnergyModel = EnergyModel()) -> SimResult:
    """Fold `step` over the commands from the map's start pose; early stop
    on OffMap (command not applied) or on energy exhaustion (command
    applied)."""
    pose = pmap.start_pose()
    energy = em.initial
    trajectory = [TrajectoryPoint(pose=pose, energy=energy, command_index=-1)]
    status = RunStatus.COMPLETED
    total_cost = 0.0
    for i, cmd in enumerate(commands):
        try:
            pose, energy, cost = step(pose, cmd, pmap, em, energy)
        except OffMap:
            status = RunStatus.OFF_MAP
            break
        total_cost += cost
        trajectory.append(TrajectoryPoint(pose=pose, energy=energy, command_index=i))
        if energy <= 0.0:
            status = RunStatus.ENERGY_EXHAUSTED
            break
    return SimResult(
        trajectory=tuple(trajectory),
        status=status,
        final_pose=trajectory[-1].pose,
        total_cost=total_cost,
    )


def reached(result: SimResult, pmap: PlaygroundMap, icon: str) -> bool:
    """Did the run complete on a node carrying `icon` (within 1 mm)?"""
    carriers = [n for n in pmap.nodes if n.icon == icon]
    if not carriers:
        raise UnknownIcon(f"no node carries icon {icon!r}")
    if result.status is not RunStatus.COMPLETED:
        return False
    fx, fy = result.final_pose.x_mm, result.final_pose.y_mm
    return any(
        math.hypot(px - fx, py - fy) <= 1.0
        for px, py in (pmap.node_position(n) for n in carriers)
    )


def result_to_json_dict(result: SimResult) -> dict:
    return {
        "status": result.status.value,
        "final_pose": {
            "x_mm": result.final_pose.x_mm,
            "y_mm": result.final_pose.y_mm,
            "heading_deg": result.final_pose.heading_deg,
        },
        "total_cost": result.total_cost,
        "trajectory": [
            {
                "pose": {"x_mm": p.pose.x_mm, "y_mm": p.pose.y_mm, "heading_deg": p.pose.heading_deg},
                "energy": p.energy,
                "command_index": p.command_index,
            }
            for p in result.trajectory
        ],
    }
