import os
import yaml
from typing import Dict, Any, Optional

DEFAULT_CONFIG_PATH = os.path.join(
    os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))),
    'config', 'config.yaml'
)

DEFAULTS: Dict[str, Any] = {
    'log_level': 'INFO',
    'defaults': {
        'tau': 0.3,
        'cell_size': 0.02,
        'nms_thresh': 0.25,
        'radius': 0.1,
        'box_epsilon': 0.001,
        'thresholds': [0.25] + [round(0.5 + 0.05 * i, 2) for i in range(10)],
    },
}


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_mapping(path: str) -> Dict[str, Any]:
    """Load a YAML (or JSON) file that must contain a mapping."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"Configuration file not found at {path}")

    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ValueError(f"Error parsing configuration file: {str(e)}")

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError("Invalid configuration format")
    return data


def get_config(path: Optional[str] = None) -> Dict[str, Any]:
    """Load configuration, layered over the built-in defaults.

    An explicit path must exist; the default location is optional.
    """
    if path is None:
        if not os.path.exists(DEFAULT_CONFIG_PATH):
            return _merge(DEFAULTS, {})
        path = DEFAULT_CONFIG_PATH
    return _merge(DEFAULTS, load_mapping(path))
