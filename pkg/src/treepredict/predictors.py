"""Build predictors from names and JSON descriptors."""

from __future__ import annotations

from typing import Optional

from .escape import EscapePredictor
from .estimators import KRICHEVSKY, LAPLACE, EstimatorError, from_name
from .prefix_code import LazyCodeTreePredictor, PrefixCode, code_from_dict
from .tree import PredictorTree, TreeError, build_flat, from_nested


class PredictorSpecError(ValueError):
    pass


def predictor_from_descriptor(doc: dict):
    """Inverse of ``predictor.descriptor()``."""
    if not isinstance(doc, dict):
        raise PredictorSpecError("predictor descriptor must be an object")
    kind = doc.get("type")
    try:
        est = from_name(doc.get("estimator", "laplace"))
        if kind == "flat":
            return build_flat(int(doc["alphabet_size"]), est)
        if kind == "tree":
            return from_nested(doc["tree"], est)
        if kind == "escape":
            return EscapePredictor(int(doc["alphabet_size"]), est)
        if kind == "code-tree":
            return LazyCodeTreePredictor(code_from_dict(doc["code"]), est)
    except KeyError as exc:
        raise PredictorSpecError(f"predictor descriptor lacks {exc}") from exc
    except (TreeError, EstimatorError, TypeError) as exc:
        raise PredictorSpecError(str(exc)) from exc
    raise PredictorSpecError(f"unknown predictor type {kind!r}")


def make_predictor(name: str, alphabet_size: Optional[int] = None,
                   tree: Optional[dict] = None, code: Optional[PrefixCode] = None):
    """Resolve a command-line predictor name.

    ``escape`` / ``escape-kt`` need ``alphabet_size``.  Estimator names
    (``laplace``, ``krichevsky``, ``additive:<delta>``) give a tree predictor
    on ``tree`` if given, a code-tree predictor on ``code`` if given, and
    otherwise the flat predictor over ``alphabet_size`` letters.
    """
    key = name.strip().lower()
    if key in ("escape", "escape-kt"):
        if not alphabet_size:
            raise PredictorSpecError(f"predictor {name!r} needs --alphabet-size")
        return EscapePredictor(alphabet_size, KRICHEVSKY if key == "escape-kt" else LAPLACE)
    try:
        est = from_name(key)
    except EstimatorError as exc:
        raise PredictorSpecError(str(exc)) from exc
    if tree is not None and code is not None:
        raise PredictorSpecError("give either a tree or a code, not both")
    if tree is not None:
        try:
            return from_nested(tree, est)
        except TreeError as exc:
            raise PredictorSpecError(f"malformed tree spec: {exc}") from exc
    if code is not None:
        return LazyCodeTreePredictor(code, est)
    if not alphabet_size:
        raise PredictorSpecError(f"predictor {name!r} needs an alphabet size, a tree or a code")
    return build_flat(alphabet_size, est)


__all__ = ["PredictorSpecError", "make_predictor", "predictor_from_descriptor",
           "PredictorTree", "EscapePredictor", "LazyCodeTreePredictor"]
