"""Graph and report serialization with atomic file writes."""
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any

import networkx as nx

from app.core.convex import ConvexConfig
from app.core.errors import MatchLoomError
from app.services.compat_service import WitnessKind
from app.services.dcg_service import DCG
from app.services.matching_service import classify_matching, enumerate_matchings, format_matching, parse_matching

logger = logging.getLogger("matchloom.export")

FORMATS = ("json", "dot")


def graph_payload(dcg: DCG) -> dict[str, Any]:
    return {
        "points": dcg.config.size,
        "family": dcg.family.value,
        "vertices": [
            {"id": i, "matching": format_matching(m), "class": classify_matching(m).value}
            for i, m in enumerate(dcg.matchings)
        ],
        "edges": [list(e) for e in dcg.edges()],
    }


def graph_from_payload(payload: dict[str, Any]) -> DCG:
    """Rebuild a DCG from its JSON payload; vertex ids must follow the canonical order."""
    config = ConvexConfig(int(payload["points"]))
    family = WitnessKind.parse(payload["family"])
    canonical = enumerate_matchings(config)
    vertices = sorted(payload["vertices"], key=lambda v: v["id"])
    if len(vertices) != len(canonical):
        raise MatchLoomError(f"expected {len(canonical)} vertices, got {len(vertices)}")
    for vertex, expected in zip(vertices, canonical):
        if parse_matching(vertex["matching"], config.size) != expected:
            raise MatchLoomError(f"vertex {vertex['id']} is out of canonical order")
    graph = nx.Graph()
    for i, m in enumerate(canonical):
        graph.add_node(i, matching=format_matching(m), klass=classify_matching(m).value)
    graph.add_edges_from((int(a), int(b)) for a, b in payload["edges"])
    return DCG(config, family, canonical, graph)


def graph_to_dot(dcg: DCG) -> str:
    lines = [f"graph dcg_{dcg.family.value.lower()}_{dcg.config.size} {{"]
    for i, m in enumerate(dcg.matchings):
        label = f"{format_matching(m)}\\n{classify_matching(m).value}"
        lines.append(f'  {i} [label="{label}"];')
    for a, b in dcg.edges():
        lines.append(f"  {a} -- {b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _fsync_path(path: Path) -> None:
    try:
        fd = os.open(path, os.O_RDONLY)
        try:
            os.fsync(fd)
        finally:
            os.close(fd)
    except OSError:
        logger.debug("fsync skipped for %s", path, exc_info=True)


def write_atomic(target: Path, text: str) -> Path:
    """Write through a temp file in the target directory, then replace the target."""
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    handle = tempfile.NamedTemporaryFile(
        "w", delete=False, dir=target.parent, prefix=f"{target.stem}_", suffix=".tmp", encoding="utf-8"
    )
    temp = Path(handle.name)
    try:
        with handle:
            handle.write(text)
        _fsync_path(temp)
        os.replace(temp, target)
    except Exception:
        logger.debug("Write failed for %s", target, exc_info=True)
        temp.unlink(missing_ok=True)
        raise
    logger.debug("Wrote %s (%d bytes)", target, len(text))
    return target


def export_graph(dcg: DCG, target: Path, fmt: str = "json") -> Path:
    if fmt not in FORMATS:
        raise MatchLoomError(f"unknown export format {fmt!r}; choose from {', '.join(FORMATS)}")
    text = json.dumps(graph_payload(dcg), indent=2) + "\n" if fmt == "json" else graph_to_dot(dcg)
    path = write_atomic(target, text)
    logger.info("Exported %s graph on %d points to %s (%s)", dcg.family.value, dcg.config.size, path, fmt)
    return path


def load_graph(source: Path) -> DCG:
    return graph_from_payload(json.loads(Path(source).read_text(encoding="utf-8")))


def export_report(report: dict[str, Any], target: Path) -> Path:
    path = write_atomic(target, json.dumps(report, indent=2) + "\n")
    logger.info("Wrote report to %s", path)
    return path
