"""JSON instance files and deterministic report output.

An instance file is a name-keyed collection::

    {"version": "1",
     "spaces":   {"X": {"atoms": 3, "weights": [1, 1, 0]}},
     "bundles":  {"T": {"space": "X", "dims": [..], "norms": [NormSpec, ..]}},
     "modules":  {"M": {"space": "X", "g": 2, "seminorms": [NormSpec, ..]}},
     "sections": {"s": {"bundle": "T", "vectors": [[..], ..]}},
     "elements": {"e": {"module": "M", "coeffs": [[..], ..]}},
     "fields":   {"f": {"space": "X", "values": [..]}},
     "atom_maps": {"f": {"source": "X", "target": "Y", "image": [..]}}}

A ``space`` entry may be given inline instead of by name. A file holding a
single bare space, bundle or module object is accepted too.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import jsonschema
import numpy as np

from .bundle import Bundle, Section, section, validate_bundle
from .constructions import AtomMap
from .errors import BundleCalcError, InstanceError
from .mspace import MeasureSpace
from .nmodule import Element, PresentedModule
from .norms import NormSpec, PolyGauge, PolyMax, Quadratic, WeightedLp

FORMAT_VERSION = "1"

_number = {"type": "number"}
_vector = {"type": "array", "items": _number}
_matrix = {"type": "array", "items": _vector}
_space = {
    "type": "object",
    "required": ["atoms", "weights"],
    "properties": {
        "atoms": {"type": "integer", "minimum": 1},
        "weights": _vector,
        "labels": {"type": "array", "items": {"type": "string"}},
    },
}
_space_ref = {"oneOf": [{"type": "string"}, _space]}
_norm = {
    "type": "object",
    "required": ["kind"],
    "oneOf": [
        {"properties": {"kind": {"const": "quadratic"}, "G": _matrix}, "required": ["G"]},
        {"properties": {"kind": {"const": "wlp"}, "w": _vector,
                        "p": {"oneOf": [_number, {"const": "inf"}]}}, "required": ["p", "w"]},
        {"properties": {"kind": {"const": "polymax"}, "A": _matrix,
                        "n": {"type": "integer", "minimum": 0}}, "required": ["A"]},
        {"properties": {"kind": {"const": "polygauge"}, "V": _matrix,
                        "n": {"type": "integer", "minimum": 0}}, "required": ["V"]},
    ],
}


def _named(item):
    return {"type": "object", "additionalProperties": item}


SCHEMA = {
    "type": "object",
    "required": ["version"],
    "properties": {
        "version": {"type": "string"},
        "spaces": _named(_space),
        "bundles": _named({"type": "object", "required": ["space", "dims", "norms"],
                           "properties": {"space": _space_ref,
                                          "dims": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                                          "norms": {"type": "array", "items": _norm}}}),
        "modules": _named({"type": "object", "required": ["space", "g", "seminorms"],
                           "properties": {"space": _space_ref,
                                          "g": {"type": "integer", "minimum": 0},
                                          "seminorms": {"type": "array", "items": _norm}}}),
        "sections": _named({"type": "object", "required": ["bundle", "vectors"],
                            "properties": {"bundle": {"type": "string"}, "vectors": _matrix}}),
        "elements": _named({"type": "object", "required": ["module", "coeffs"],
                            "properties": {"module": {"type": "string"}, "coeffs": _matrix}}),
        "fields": _named({"type": "object", "required": ["space", "values"],
                          "properties": {"space": _space_ref, "values": _vector}}),
        "atom_maps": _named({"type": "object", "required": ["source", "target", "image"],
                             "properties": {"source": _space_ref, "target": _space_ref,
                                            "image": {"type": "array",
                                                      "items": {"type": "integer", "minimum": 0}}}}),
    },
}


@dataclass
class InstanceFile:
    version: str = FORMAT_VERSION
    spaces: Dict[str, MeasureSpace] = field(default_factory=dict)
    bundles: Dict[str, Bundle] = field(default_factory=dict)
    modules: Dict[str, PresentedModule] = field(default_factory=dict)
    sections: Dict[str, Tuple[str, Section]] = field(default_factory=dict)
    elements: Dict[str, Tuple[str, Element]] = field(default_factory=dict)
    fields: Dict[str, Tuple[str, np.ndarray]] = field(default_factory=dict)
    atom_maps: Dict[str, AtomMap] = field(default_factory=dict)

    def space_name(self, space: MeasureSpace) -> str:
        for name, sp in self.spaces.items():
            if sp is space:
                return name
        raise KeyError("space is not registered in this instance")


def norm_to_json(spec: NormSpec) -> Dict[str, Any]:
    if isinstance(spec, Quadratic):
        return {"kind": "quadratic", "G": spec.G.tolist()}
    if isinstance(spec, WeightedLp):
        return {"kind": "wlp", "p": "inf" if math.isinf(spec.p) else spec.p, "w": spec.w.tolist()}
    if isinstance(spec, PolyMax):
        return {"kind": "polymax", "A": spec.A.tolist(), "n": spec.dim}
    if isinstance(spec, PolyGauge):
        return {"kind": "polygauge", "V": spec.V.tolist(), "n": spec.dim}
    raise TypeError("not a NormSpec: {!r}".format(spec))


def norm_from_json(obj: Dict[str, Any]) -> NormSpec:
    kind = obj["kind"]
    if kind == "quadratic":
        return Quadratic(obj["G"])
    if kind == "wlp":
        p = math.inf if obj["p"] == "inf" else float(obj["p"])
        return WeightedLp(p, obj["w"])
    if kind == "polymax":
        return PolyMax(obj["A"], n=obj.get("n"))
    if kind == "polygauge":
        return PolyGauge(obj["V"], n=obj.get("n"))
    raise ValueError("unknown norm kind {!r}".format(kind))


def space_to_json(space: MeasureSpace) -> Dict[str, Any]:
    out: Dict[str, Any] = {"atoms": space.atom_count, "weights": space.weights.tolist()}
    if space.labels is not None:
        out["labels"] = list(space.labels)
    return out


def space_from_json(obj: Dict[str, Any]) -> MeasureSpace:
    if len(obj["weights"]) != obj["atoms"]:
        raise ValueError("'atoms' is {} but {} weights were given".format(obj["atoms"], len(obj["weights"])))
    return MeasureSpace(obj["weights"], obj.get("labels"))


def bundle_to_json(b: Bundle, space_ref: Union[str, None] = None) -> Dict[str, Any]:
    return {"space": space_ref if space_ref is not None else space_to_json(b.space),
            "dims": list(b.dims), "norms": [norm_to_json(s) for s in b.norms]}


def module_to_json(M: PresentedModule, space_ref: Union[str, None] = None) -> Dict[str, Any]:
    return {"space": space_ref if space_ref is not None else space_to_json(M.space),
            "g": M.g, "seminorms": [norm_to_json(s) for s in M.seminorms]}


def section_to_json(s: Section, bundle_ref: str) -> Dict[str, Any]:
    return {"bundle": bundle_ref, "vectors": [v.tolist() for v in s.vectors]}


def element_to_json(e: Element, module_ref: str) -> Dict[str, Any]:
    return {"module": module_ref, "coeffs": e.coeffs.tolist()}


def dump_instance(inst: InstanceFile) -> Dict[str, Any]:
    ref = inst.space_name
    out: Dict[str, Any] = {"version": inst.version}
    out["spaces"] = {k: space_to_json(v) for k, v in inst.spaces.items()}
    out["bundles"] = {k: bundle_to_json(b, ref(b.space)) for k, b in inst.bundles.items()}
    out["modules"] = {k: module_to_json(M, ref(M.space)) for k, M in inst.modules.items()}
    out["sections"] = {k: section_to_json(s, bn) for k, (bn, s) in inst.sections.items()}
    out["elements"] = {k: element_to_json(e, mn) for k, (mn, e) in inst.elements.items()}
    out["fields"] = {k: {"space": sn, "values": np.asarray(f).tolist()}
                     for k, (sn, f) in inst.fields.items()}
    out["atom_maps"] = {k: {"source": ref(f.source), "target": ref(f.target), "image": list(f.image)}
                        for k, f in inst.atom_maps.items()}
    return out


def _wrap_bare(obj: Dict[str, Any]) -> Dict[str, Any]:
    if "version" in obj or not isinstance(obj, dict):
        return obj
    if "g" in obj and "seminorms" in obj:
        return {"version": FORMAT_VERSION, "modules": {"main": obj}}
    if "dims" in obj and "norms" in obj:
        return {"version": FORMAT_VERSION, "bundles": {"main": obj}}
    if "atoms" in obj and "weights" in obj:
        return {"version": FORMAT_VERSION, "spaces": {"main": obj}}
    return obj


class _Loader:
    def __init__(self):
        self.errors: List[Tuple[str, str]] = []
        self.inst = InstanceFile()

    def attempt(self, pointer: str, fn, *args):
        try:
            return fn(*args)
        except (BundleCalcError, ValueError, TypeError, KeyError) as exc:
            self.errors.append((pointer, str(exc)))
            return None

    def space(self, ref, pointer: str, owner: str):
        if isinstance(ref, str):
            if ref not in self.inst.spaces:
                raise KeyError("unknown space {!r}".format(ref))
            return self.inst.spaces[ref]
        sp = self.attempt(pointer, space_from_json, ref)
        if sp is not None:
            self.inst.spaces.setdefault(owner, sp)
        return sp


def load_instance(source: Union[str, Path, Dict[str, Any]]) -> InstanceFile:
    """Parse and validate an instance file, or raise InstanceError."""
    if isinstance(source, dict):
        raw = source
    else:
        try:
            raw = json.loads(Path(source).read_text(encoding="utf-8"))
        except OSError as exc:
            raise InstanceError([("", "cannot read {}: {}".format(source, exc))]) from exc
        except json.JSONDecodeError as exc:
            raise InstanceError([("", "invalid JSON: {}".format(exc))]) from exc
    raw = _wrap_bare(raw)
    validator = jsonschema.Draft7Validator(SCHEMA)
    schema_errors = sorted(validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path)))
    if schema_errors:
        raise InstanceError([("/" + "/".join(str(p) for p in e.absolute_path), e.message)
                             for e in schema_errors])

    ld = _Loader()
    inst = ld.inst
    inst.version = raw["version"]
    if inst.version != FORMAT_VERSION:
        ld.errors.append(("/version", "unsupported format version {!r}".format(inst.version)))
    for name, obj in raw.get("spaces", {}).items():
        sp = ld.attempt("/spaces/" + name, space_from_json, obj)
        if sp is not None:
            inst.spaces[name] = sp

    for name, obj in raw.get("bundles", {}).items():
        ptr = "/bundles/" + name
        sp = ld.attempt(ptr + "/space", ld.space, obj["space"], ptr + "/space", name + ".space")
        specs = [ld.attempt("{}/norms/{}".format(ptr, i), norm_from_json, n)
                 for i, n in enumerate(obj["norms"])]
        if sp is None or any(s is None for s in specs):
            continue
        b = Bundle(sp, obj["dims"], specs)
        report = validate_bundle(b)
        for atom, msg in report.problems:
            where = ptr if atom < 0 else "{}/norms/{}".format(ptr, atom)
            ld.errors.append((where, "bundle {!r}: {}".format(name, msg)))
        if report.valid:
            inst.bundles[name] = b

    for name, obj in raw.get("modules", {}).items():
        ptr = "/modules/" + name
        sp = ld.attempt(ptr + "/space", ld.space, obj["space"], ptr + "/space", name + ".space")
        specs = [ld.attempt("{}/seminorms/{}".format(ptr, i), norm_from_json, n)
                 for i, n in enumerate(obj["seminorms"])]
        if sp is None or any(s is None for s in specs):
            continue
        M = ld.attempt(ptr, PresentedModule, sp, obj["g"], specs)
        if M is not None:
            inst.modules[name] = M

    for name, obj in raw.get("sections", {}).items():
        ptr = "/sections/" + name
        b = inst.bundles.get(obj["bundle"])
        if b is None:
            ld.errors.append((ptr + "/bundle", "unresolved bundle {!r}".format(obj["bundle"])))
            continue
        s = ld.attempt(ptr + "/vectors", _section, b, obj["vectors"])
        if s is not None:
            inst.sections[name] = (obj["bundle"], s)

    for name, obj in raw.get("elements", {}).items():
        ptr = "/elements/" + name
        M = inst.modules.get(obj["module"])
        if M is None:
            ld.errors.append((ptr + "/module", "unresolved module {!r}".format(obj["module"])))
            continue
        e = ld.attempt(ptr + "/coeffs", _element, M, obj["coeffs"])
        if e is not None:
            inst.elements[name] = (obj["module"], e)

    for name, obj in raw.get("fields", {}).items():
        ptr = "/fields/" + name
        sp = ld.attempt(ptr + "/space", ld.space, obj["space"], ptr + "/space", name + ".space")
        if sp is None:
            continue
        f = ld.attempt(ptr + "/values", sp.field, obj["values"])
        if f is not None:
            sname = obj["space"] if isinstance(obj["space"], str) else name + ".space"
            inst.fields[name] = (sname, f)

    for name, obj in raw.get("atom_maps", {}).items():
        ptr = "/atom_maps/" + name
        src = ld.attempt(ptr + "/source", ld.space, obj["source"], ptr + "/source", name + ".source")
        tgt = ld.attempt(ptr + "/target", ld.space, obj["target"], ptr + "/target", name + ".target")
        if src is None or tgt is None:
            continue
        f = ld.attempt(ptr + "/image", AtomMap, src, tgt, obj["image"])
        if f is not None:
            inst.atom_maps[name] = f

    if ld.errors:
        raise InstanceError(ld.errors)
    return inst


def _section(b: Bundle, vectors) -> Section:
    return section(b, vectors)


def _element(M: PresentedModule, coeffs) -> Element:
    c = np.array(coeffs, dtype=float)
    if M.g == 0:
        c = c.reshape(M.atom_count, 0)
    if c.shape != (M.atom_count, M.g):
        raise ValueError("coefficients have shape {}, module expects {}".format(c.shape, (M.atom_count, M.g)))
    return Element(c)


def save_instance(inst: InstanceFile, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps(dump_instance(inst)) + "\n", encoding="utf-8")


def _encode(obj: Any, out: List[str]) -> None:
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            out.append(format(x, ".17g"))
        else:
            out.append(json.dumps("inf" if x > 0 else "-inf" if x < 0 else "nan"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj, key=str)):
            if i:
                out.append(",")
            out.append(json.dumps(str(key)) + ":")
            _encode(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, item in enumerate(list(obj)):
            if i:
                out.append(",")
            _encode(item, out)
        out.append("]")
    else:
        raise TypeError("cannot encode {!r}".format(type(obj)))


def dumps(obj: Any) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""
    out: List[str] = []
    _encode(obj, out)
    return "".join(out)
