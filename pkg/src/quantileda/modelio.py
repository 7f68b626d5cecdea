"""Text serialisation of fitted models.

Format (version 1)::

    # quantileda model
    version = 1
    g = 2
    p = 3
    theta_star = 0.14000000000000001
    skew_mode = galton
    standardization = none
    class_names = a,b            (optional)

    [flips]
    1,-1,1
    [scales]
    1,1,1
    [quantiles]
    <g rows of p values>
    [curve]
    <one "theta,psi_n" row per grid level>

Floats carry 17 significant digits, which round-trips IEEE doubles exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .classifier import AccuracyCurve, QuantileModel
from .dataset import fmt_float
from .errors import DataError, InvalidArgumentError
from .scaling import StandardizationMode
from .skewness import SkewnessMode

FORMAT_VERSION = 1
_BLOCKS = ("flips", "scales", "quantiles", "curve")


def _row(values) -> str:
    return ",".join(fmt_float(v) for v in values)


def dumps(model: QuantileModel) -> str:
    std = model.standardization
    lines = [
        "# quantileda model",
        f"version = {FORMAT_VERSION}",
        f"g = {model.g}",
        f"p = {model.p}",
        f"theta_star = {fmt_float(model.theta_star)}",
        f"skew_mode = {model.skew_mode}",
        f"standardization = {'groups' if std.kind == 'group_map' else std}",
    ]
    if std.kind == "group_map":
        lines.append("groups = " + ",".join(std.groups or ()))
    if model.class_names is not None:
        lines.append("class_names = " + ",".join(model.class_names))
    lines += ["", "[flips]", _row(model.flips), "[scales]", _row(model.scales), "[quantiles]"]
    lines += [_row(r) for r in model.quantiles]
    lines.append("[curve]")
    lines += [f"{fmt_float(t)},{fmt_float(s)}" for t, s in zip(model.curve.thetas, model.curve.psi_n)]
    return "\n".join(lines) + "\n"


def loads(text: str) -> QuantileModel:
    header: dict[str, str] = {}
    blocks: dict[str, list[list[float]]] = {}
    current = None
    for num, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            if current not in _BLOCKS:
                raise DataError(f"model line {num}: unknown block [{current}]")
            blocks[current] = []
        elif current is None:
            if "=" not in line:
                raise DataError(f"model line {num}: expected 'key = value'")
            k, v = line.split("=", 1)
            header[k.strip()] = v.strip()
        else:
            try:
                blocks[current].append([float(c) for c in line.split(",")])
            except ValueError:
                raise DataError(f"model line {num}: bad number in [{current}]") from None
    try:
        if int(header["version"]) != FORMAT_VERSION:
            raise DataError(f"unsupported model version {header['version']}")
        g, p = int(header["g"]), int(header["p"])
        theta = float(header["theta_star"])
        skew = SkewnessMode.parse(header["skew_mode"])
        std_text = header["standardization"]
        if std_text == "groups":
            std = StandardizationMode("group_map", tuple(header["groups"].split(",")))
        else:
            std = StandardizationMode.parse(std_text)
    except KeyError as exc:
        raise DataError(f"model header is missing {exc.args[0]!r}") from None
    except (ValueError, InvalidArgumentError) as exc:
        raise DataError(f"bad model header: {exc}") from None
    missing = [b for b in _BLOCKS if b not in blocks]
    if missing:
        raise DataError(f"model is missing block(s): {', '.join(missing)}")
    flips = np.asarray(blocks["flips"][0]) if blocks["flips"] else np.empty(0)
    scales = np.asarray(blocks["scales"][0]) if blocks["scales"] else np.empty(0)
    Q = np.asarray(blocks["quantiles"], dtype=float)
    curve = np.asarray(blocks["curve"], dtype=float).reshape(-1, 2)
    if flips.shape != (p,) or scales.shape != (p,) or Q.shape != (g, p):
        raise DataError("model block dimensions do not match g and p")
    names = tuple(header["class_names"].split(",")) if "class_names" in header else None
    return QuantileModel(
        theta_star=theta,
        quantiles=Q,
        flips=flips,
        scales=scales,
        curve=AccuracyCurve(curve[:, 0], curve[:, 1]),
        skew_mode=skew,
        standardization=std,
        class_names=names,
    )


def save(model: QuantileModel, path: str | Path) -> None:
    Path(path).write_text(dumps(model), encoding="utf-8", newline="\n")


def load(path: str | Path) -> QuantileModel:
    try:
        return loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read model {path}: {exc.strerror}") from None
