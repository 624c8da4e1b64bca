"""PNML ingestion and emission for accepting Petri nets.

Supported subset: places with ``initialMarking``, transitions with ``name``
and the tool-specific invisibility flag, weighted arcs via ``inscription``,
and the ``finalmarkings`` extension. When the document carries no final
markings, a sidecar mapping (``{"final_marking": {place: count}}``) can be
passed in.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from typing import Mapping
from xml.sax.saxutils import escape

from .errors import ParseError, ValidationError
from .petri import SILENT, AcceptingPetriNet

_INVISIBLE_NAMES = {"", "tau", "τ"}


def _strip_ns(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _find(elem: ET.Element, name: str) -> ET.Element | None:
    for child in elem:
        if _strip_ns(child.tag) == name:
            return child
    return None


def _text_of(elem: ET.Element | None, name: str) -> str | None:
    if elem is None:
        return None
    box = _find(elem, name)
    if box is None:
        return None
    text = _find(box, "text")
    if text is None:
        return None
    return (text.text or "").strip()


def _iter_all(root: ET.Element, name: str):
    for elem in root.iter():
        if _strip_ns(elem.tag) == name:
            yield elem


def parse_pnml(
    document: bytes | str,
    final_marking: Mapping[str, int] | None = None,
) -> AcceptingPetriNet:
    """Build an accepting Petri net from a PNML document.

    ``final_marking`` supplies the final marking when the document has no
    ``finalmarkings`` section (e.g. loaded from a sidecar JSON file).
    """
    if isinstance(document, str):
        document = document.encode("utf-8")
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ParseError(f"malformed PNML at line {line}, column {col}: {exc}") from exc

    places: dict[str, int] = {}
    for place in _iter_all(root, "place"):
        pid = place.get("id")
        if pid is None:
            raise ValidationError("place without id attribute")
        tokens = _text_of(place, "initialMarking")
        places[pid] = int(tokens) if tokens else 0

    labels: dict[str, str | None] = {}
    for trans in _iter_all(root, "transition"):
        tid = trans.get("id")
        if tid is None:
            raise ValidationError("transition without id attribute")
        name = _text_of(trans, "name")
        invisible = name is None or name in _INVISIBLE_NAMES
        for tool in _iter_all(trans, "toolspecific"):
            if tool.get("activity") == "$invisible$" or tool.get("invisible") == "true":
                invisible = True
        labels[tid] = SILENT if invisible else name

    arcs: dict[tuple[str, str], int] = {}
    nodes = set(places) | set(labels)
    for arc in _iter_all(root, "arc"):
        src, dst = arc.get("source"), arc.get("target")
        if src not in nodes or dst not in nodes:
            raise ValidationError(f"arc ({src}, {dst}) references an unknown node")
        weight = _text_of(arc, "inscription")
        arcs[(src, dst)] = arcs.get((src, dst), 0) + (int(weight) if weight else 1)

    initial = {p: n for p, n in places.items() if n > 0}
    if not initial:
        raise ValidationError("document defines no initial marking")

    final: dict[str, int] = {}
    for marking in _iter_all(root, "marking"):
        for ref in _iter_all(marking, "place"):
            pid = ref.get("idref")
            if pid not in places:
                raise ValidationError(f"final marking references unknown place {pid!r}")
            text = _find(ref, "text")
            count = int((text.text or "0").strip()) if text is not None else 0
            if count > 0:
                final[pid] = final.get(pid, 0) + count
        break  # only the first final marking is used
    if not final and final_marking:
        unknown = set(final_marking) - set(places)
        if unknown:
            raise ValidationError(f"sidecar final marking on unknown places: {sorted(unknown)}")
        final = {p: int(n) for p, n in final_marking.items() if int(n) > 0}

    try:
        return AcceptingPetriNet(
            places=places,
            transitions=labels,
            arcs=arcs,
            initial_marking=initial,
            final_marking=final,
            labels=labels,
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def emit_pnml(net: AcceptingPetriNet) -> str:
    """Serialize a net back to the supported PNML subset."""
    out = ['<?xml version="1.0" encoding="UTF-8"?>']
    out.append('<pnml><net id="net1" type="http://www.pnml.org/version-2009/grammar/ptnet"><page id="page1">')
    for p in sorted(net.places):
        out.append(f'<place id="{escape(p, {chr(34): "&quot;"})}">')
        tokens = net.initial_marking.get(p, 0)
        if tokens:
            out.append(f"<initialMarking><text>{tokens}</text></initialMarking>")
        out.append("</place>")
    for t in sorted(net.transitions):
        out.append(f'<transition id="{escape(t, {chr(34): "&quot;"})}">')
        label = net.labels[t]
        if label is None:
            out.append('<toolspecific tool="tokenreplay" version="1.0" activity="$invisible$"/>')
        else:
            out.append(f"<name><text>{escape(label)}</text></name>")
        out.append("</transition>")
    for i, ((src, dst), weight) in enumerate(sorted(net.arcs.items())):
        quoted = {chr(34): "&quot;"}
        out.append(f'<arc id="a{i}" source="{escape(src, quoted)}" target="{escape(dst, quoted)}">')
        if weight != 1:
            out.append(f"<inscription><text>{weight}</text></inscription>")
        out.append("</arc>")
    out.append("</page>")
    if net.final_marking:
        out.append("<finalmarkings><marking>")
        for p, n in sorted(net.final_marking.items()):
            out.append(f'<place idref="{escape(p, {chr(34): "&quot;"})}"><text>{n}</text></place>')
        out.append("</marking></finalmarkings>")
    out.append("</net></pnml>")
    return "".join(out)
