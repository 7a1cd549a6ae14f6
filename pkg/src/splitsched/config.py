"""YAML run configuration.

A config file mirrors SimConfig through named sections (all optional; values
fall back to the defaults baked into SimConfig):

    seed: 1
    users: 2
    frames: 1000
    policy: two_tier          # two_tier|myopic|fixed_split|edge_only|device_only
    fixed_split: 2
    scheduler: {v_outer: 50.0, v_inner: 5.0, eps_conv: 1.0e-6, max_iters: 50,
                q_floor: 1.0e-9, eps_phi: 1.0e-9, p_min: 1.0e-6}
    radio:     {bandwidth_hz: 1.6e6, noise_power: 1.0e-13,
                path_loss_gain: 3.0e-15, fading: rayleigh, p_max: 2.0}
    timing:    {frame_period: 0.3, t_slot: 1.0e-3}
    device:    {frequency: 2.0e9, alpha_eff: 1.0e-28, energy_budget: 0.25}
    edge:      {frequency: 2.0e10}
    task:      {quant_bits: 8, h_threshold_frac: 0.1, kappa: 1.0,
                difficulty_sigma: 0.8, num_classes: 1000}
    profile: default          # default | tiny | inline profile dict

Unknown keys raise, so typos fail loudly.
"""

from dataclasses import fields

import yaml

from .engine import SimConfig
from .profile import default_profile, tiny_profile, profile_from_dict

_TOP_KEYS = {"seed", "users", "frames", "policy", "fixed_split"}

_FIELD_TYPES = {f.name: (f.type if isinstance(f.type, type)
                         else {"int": int, "float": float,
                               "str": str}.get(f.type, None))
                for f in fields(SimConfig)}


def _coerce(name, value):
    # YAML 1.1 reads unsigned-exponent floats like 1.0e7 as strings; cast
    # scalars to the declared field type so the documented schema works
    typ = _FIELD_TYPES.get(name)
    if typ is None or isinstance(value, typ):
        return value
    try:
        return typ(value)
    except (TypeError, ValueError):
        raise ValueError("config value %r for %r is not a valid %s"
                         % (value, name, typ.__name__))

_SECTION_FIELDS = {
    "scheduler": {"v_outer": "v_outer", "v_inner": "v_inner",
                  "eps_conv": "eps_conv", "max_iters": "max_iters",
                  "q_floor": "q_floor", "eps_phi": "eps_phi",
                  "p_min": "p_min"},
    "radio": {"bandwidth_hz": "bandwidth_hz", "noise_power": "noise_power",
              "path_loss_gain": "path_loss_gain", "fading": "fading",
              "p_max": "p_max"},
    "timing": {"frame_period": "frame_period", "t_slot": "t_slot"},
    "device": {"frequency": "device_frequency", "alpha_eff": "alpha_eff",
               "energy_budget": "energy_budget"},
    "edge": {"frequency": "edge_frequency"},
    "task": {"quant_bits": "quant_bits",
             "h_threshold_frac": "h_threshold_frac", "kappa": "kappa",
             "difficulty_sigma": "difficulty_sigma",
             "num_classes": "num_classes"},
}


def config_from_dict(doc):
    """Build (SimConfig, profile) from a parsed config mapping."""
    doc = dict(doc or {})
    kwargs = {}
    profile_spec = doc.pop("profile", "default")
    for key in list(doc):
        if key in _TOP_KEYS:
            kwargs[key] = _coerce(key, doc.pop(key))
    for section, names in _SECTION_FIELDS.items():
        body = doc.pop(section, None)
        if body is None:
            continue
        if not isinstance(body, dict):
            raise ValueError("config section %r must be a mapping" % section)
        for key, value in body.items():
            if key not in names:
                raise ValueError("unknown key %r in section %r"
                                 % (key, section))
            kwargs[names[key]] = _coerce(names[key], value)
    if doc:
        raise ValueError("unknown top-level config keys: %s"
                         % ", ".join(sorted(doc)))

    if profile_spec == "default":
        profile = default_profile()
    elif profile_spec == "tiny":
        profile = tiny_profile()
    elif isinstance(profile_spec, dict):
        profile = profile_from_dict(profile_spec)
    else:
        raise ValueError("profile must be 'default', 'tiny' or a mapping")
    return SimConfig(**kwargs), profile


def load_config(path):
    """Load a YAML config file; returns (SimConfig, profile)."""
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    if doc is not None and not isinstance(doc, dict):
        raise ValueError("config file must contain a mapping")
    return config_from_dict(doc)
