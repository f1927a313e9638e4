"""Python bindings for the two-photon interference simulator."""

import json as _json

from ._core import *  # noqa: F401,F403
from ._core import run_compare as _run_compare


def compare(config_text, out, force=False):
    """Rates table across pump phases, as a dict."""
    return _json.loads(_run_compare(config_text, out, force))
