"""Python front end for the segq C++ core.

Every function takes a config as a dict (same schema as the CLI JSON files)
or as a path to such a file, and returns plain Python data.
"""

import json
import os

from . import _core
from ._core import InputError, ModelError

__all__ = [
    "InputError",
    "ModelError",
    "load",
    "analyze",
    "depart",
    "channel",
    "evaluate",
    "brute_force",
    "pso",
    "validate",
    "run",
]


def load(path):
    """Reads a config file (JSON, comments allowed) into a dict."""
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    return json.loads(_strip_comments(text))


def _strip_comments(text):
    out, i, in_string = [], 0, False
    while i < len(text):
        ch = text[i]
        if in_string:
            out.append(ch)
            if ch == "\\" and i + 1 < len(text):
                out.append(text[i + 1])
                i += 1
            elif ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
            out.append(ch)
        elif text.startswith("//", i):
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        elif text.startswith("/*", i):
            end = text.find("*/", i + 2)
            i = len(text) if end < 0 else end + 2
            continue
        else:
            out.append(ch)
        i += 1
    return "".join(out)


def _text(config):
    if isinstance(config, (str, os.PathLike)):
        with open(config, encoding="utf-8") as handle:
            return handle.read()
    return json.dumps(config)


def analyze(config):
    return json.loads(_core.analyze(_text(config)))


def depart(config, s_values=()):
    return json.loads(_core.depart(_text(config), list(s_values)))


def channel(config):
    return json.loads(_core.channel(_text(config)))


def evaluate(config, thresholds):
    return json.loads(_core.evaluate(_text(config), list(thresholds)))


def brute_force(config):
    return json.loads(_core.brute_force(_text(config)))


def pso(config, seed=None):
    return json.loads(_core.pso(_text(config), seed))


def validate(config):
    return json.loads(_core.validate(_text(config)))


def run(subcommand, config, out_dir):
    """Runs a CLI subcommand and returns (exit_code, log_text)."""
    return _core.run(subcommand, _text(config), os.fspath(out_dir))
