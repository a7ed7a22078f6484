"""Bayesian-optimised adaptive MCMC for constrained Boltzmann machines."""

import json
import os
from pathlib import Path

# Installed wheels carry the presets next to the package.
_bundled = Path(__file__).with_name("presets")
if "BAYESMC_PRESET_DIR" not in os.environ and _bundled.is_dir():
    os.environ["BAYESMC_PRESET_DIR"] = str(_bundled)

from ._bayesmc import *  # noqa: E402,F401,F403
from ._bayesmc import (  # noqa: E402
    ExperimentConfig,
    __version__,
    experiment_manifest as _experiment_manifest,
    load_config,
    preset_path,
)


def load_preset(name):
    """Load a bundled experiment preset by name (e.g. ``"grid2d-desk"``)."""
    return load_config(preset_path(name))


def config_dict(config):
    return json.loads(config.to_json())


def config_from_dict(data):
    return ExperimentConfig.from_json(json.dumps(data))


def manifest(config, records=()):
    """Run manifest as a dict; with no records it describes the protocol only."""
    return json.loads(_experiment_manifest(config, list(records)))
