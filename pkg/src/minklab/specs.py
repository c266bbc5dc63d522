"""Body specifications: small JSON documents describing how to build a body.

Nested combinators (polar, scale, product, free_sum) recurse up to depth 16.
Errors carry a JSONPath-style location so a bad field inside a nested spec
is findable.
"""

import json

import numpy as np

from . import bodies as B
from .errors import BodySpecError, MinklabError

MAX_DEPTH = 16

_KINDS = ("hpoly", "vpoly", "ellipsoid", "pball", "hanner", "random",
          "product", "free_sum", "polar", "scale")


def _need(node: dict, key: str, path: str):
    if key not in node:
        raise BodySpecError(f"{path}.{key}", "missing required field")
    return node[key]


def _number(value, path: str) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise BodySpecError(path, f"expected a number, got {value!r}") from None
    if not np.isfinite(out):
        raise BodySpecError(path, "number must be finite")
    return out


def _integer(value, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise BodySpecError(path, f"expected an integer, got {value!r}")
    return value


def _array(value, path: str, ndim: int) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise BodySpecError(path, "expected a numeric array") from None
    if arr.ndim != ndim:
        raise BodySpecError(path, f"expected a {ndim}-dimensional array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise BodySpecError(path, "array entries must be finite")
    return arr


def _build(node, path: str, depth: int) -> B.ConvexBody:
    if depth > MAX_DEPTH:
        raise BodySpecError(path, f"specs nest deeper than {MAX_DEPTH}")
    if not isinstance(node, dict):
        raise BodySpecError(path, f"expected an object, got {type(node).__name__}")
    kind = _need(node, "kind", path)
    if kind not in _KINDS:
        raise BodySpecError(f"{path}.kind", f"unknown kind {kind!r}; one of {_KINDS}")
    symmetric = node.get("symmetric")
    if symmetric is not None and not isinstance(symmetric, bool):
        raise BodySpecError(f"{path}.symmetric", "must be a boolean")
    try:
        if kind == "hpoly":
            normals = _array(_need(node, "normals", path), f"{path}.normals", 2)
            offsets = _array(_need(node, "offsets", path), f"{path}.offsets", 1)
            return B.hpolytope(normals, offsets, centrally_symmetric=symmetric)
        if kind == "vpoly":
            vertices = _array(_need(node, "vertices", path), f"{path}.vertices", 2)
            recenter = node.get("recenter", False)
            return B.vpolytope(vertices, recenter=recenter, centrally_symmetric=symmetric)
        if kind == "ellipsoid":
            if "semiaxes" in node:
                axes = _array(node["semiaxes"], f"{path}.semiaxes", 1)
                return B.ellipsoid_semiaxes(axes)
            shape = _array(_need(node, "shape", path), f"{path}.shape", 2)
            return B.ellipsoid(shape)
        if kind == "pball":
            p = _integer(_need(node, "p", path), f"{path}.p")
            radius = _number(node.get("radius", 1.0), f"{path}.radius")
            dim = _integer(_need(node, "dim", path), f"{path}.dim")
            return B.pball(p, radius, dim)
        if kind == "hanner":
            tree = _need(node, "tree", path)
            if not isinstance(tree, str):
                raise BodySpecError(f"{path}.tree", "must be a string like '(I x I)'")
            return B.hanner(tree)
        if kind == "random":
            dim = _integer(_need(node, "dim", path), f"{path}.dim")
            points = _integer(_need(node, "points", path), f"{path}.points")
            seed = _integer(node.get("seed", 0), f"{path}.seed")
            return B.random_symmetric_polytope(dim, points, seed)
        if kind == "polar":
            inner = _build(_need(node, "of", path), f"{path}.of", depth + 1)
            return B.polar(inner)
        if kind == "scale":
            inner = _build(_need(node, "of", path), f"{path}.of", depth + 1)
            factor = _number(_need(node, "factor", path), f"{path}.factor")
            if factor <= 0.0:
                raise BodySpecError(f"{path}.factor", "scale factor must be positive")
            return B.scale_body(inner, factor)
        # product / free_sum
        parts = _need(node, "of", path)
        if not isinstance(parts, list) or len(parts) < 2:
            raise BodySpecError(f"{path}.of", "needs a list of at least two specs")
        built = [_build(part, f"{path}.of[{i}]", depth + 1) for i, part in enumerate(parts)]
        combine = B.direct_product if kind == "product" else B.free_sum
        out = built[0]
        for nxt in built[1:]:
            out = combine(out, nxt)
        return out
    except BodySpecError:
        raise
    except MinklabError as err:
        raise BodySpecError(path, str(err)) from err


def parse_body_spec(text) -> B.ConvexBody:
    """Build a body from a JSON string or an already-decoded mapping."""
    if isinstance(text, (str, bytes)):
        try:
            node = json.loads(text)
        except json.JSONDecodeError as err:
            raise BodySpecError("$", f"invalid JSON: {err}") from err
    else:
        node = text
    return _build(node, "$", 0)
