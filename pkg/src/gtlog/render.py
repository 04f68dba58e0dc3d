"""Turn edge relations carrying visual-attribute columns into DOT or JSON.

The first two columns of the relation are the endpoints; attribute columns
are picked up by name. `physics` and `smooth` have no DOT counterpart and
are emitted as a trailing comment on the edge line (JSON carries them as
first-class fields), so no attribute is lost in either format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from typing import Iterable, Optional

from .errors import MissingColumn
from .relation import Relation
from .values import display

DEFAULTS = {
    "arrows": "to",
    "color": "#888",
    "dashes": False,
    "width": 1,
    "physics": True,
    "smooth": False,
}


@dataclass(frozen=True)
class RenderEdge:
    source: str
    target: str
    arrows: str = "to"
    color: str = "#888"
    dashes: bool = False
    width: object = 1
    physics: bool = True
    smooth: bool = False


def to_render_edges(relation: Relation, color_column: Optional[str] = "color",
                    width_column: Optional[str] = "width",
                    extra_columns: Iterable[str] = ("arrows", "dashes",
                                                    "physics", "smooth")) -> list:
    """One RenderEdge per tuple; attributes the relation lacks take defaults.

    Explicitly requested columns must exist; the default extras are used
    opportunistically when present.
    """
    if relation.num_positional < 2:
        raise MissingColumn(
            f"{relation.name} needs two endpoint columns, has {relation.num_positional}")
    available = set(relation.named_attrs)
    mapping = {}
    for attr, column, required in (
            [("color", color_column, color_column != "color"),
             ("width", width_column, width_column != "width")]
            + [(c, c, False) for c in extra_columns]):
        if column is None:
            continue
        if column not in available:
            if required:
                raise MissingColumn(f"{relation.name} has no column {column!r}")
            continue
        mapping[attr] = relation.named_index(column)
    edges = []
    for row in relation.rows:
        attrs = dict(DEFAULTS)
        for attr, col in mapping.items():
            attrs[attr] = row[col]
        edges.append(RenderEdge(display(row[0]), display(row[1]), **attrs))
    return edges


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(edges: Iterable[RenderEdge], node_styles: Optional[dict] = None) -> str:
    """A deterministic DOT digraph; identical edge sets give identical bytes."""
    edges = sorted(edges, key=lambda e: (e.source, e.target))
    nodes = sorted({e.source for e in edges} | {e.target for e in edges}
                   | set(node_styles or ()))
    lines = ["digraph G {"]
    for n in nodes:
        style = (node_styles or {}).get(n)
        if style:
            attrs = ", ".join(f"{k}={_dot_quote(str(v))}" for k, v in sorted(style.items()))
            lines.append(f"  {_dot_quote(n)} [{attrs}];")
        else:
            lines.append(f"  {_dot_quote(n)};")
    for e in edges:
        attrs = [f"color={_dot_quote(str(e.color))}",
                 f"penwidth={display(e.width)}"]
        if e.dashes:
            attrs.append("style=dashed")
        if e.arrows != "to":
            attrs.append(f"dir={_dot_quote(str(e.arrows))}")
        comment = f"  /* physics={display(e.physics)} smooth={display(e.smooth)} */"
        lines.append(f"  {_dot_quote(e.source)} -> {_dot_quote(e.target)} "
                     f"[{', '.join(attrs)}];{comment}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_json_graph(edges: Iterable[RenderEdge]) -> str:
    """{"nodes": [...], "edges": [...]} with all attributes and stable order."""
    edges = sorted(edges, key=lambda e: (e.source, e.target))
    nodes = sorted({e.source for e in edges} | {e.target for e in edges})
    doc = {
        "nodes": [{"id": n} for n in nodes],
        "edges": [asdict(e) for e in edges],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
