import pytest

from hybridchaos import config_from_dict, load_preset


@pytest.fixture(scope="session")
def case_i():
    return load_preset("case_i")


@pytest.fixture(scope="session")
def case_ii():
    return load_preset("case_ii")


def make_decoupled(base: str, r: float, burn_in: int = 1000,
                   initial=(0.1, 0.2, 0.3, 0.4)):
    """Config whose four coordinates independently iterate one base map:
    alpha = 1, f = identity, g = 0, h = 0 on both branches."""
    part = {
        "alpha": [1, 1],
        "beta": [0, 0],
        "base": [base, base],
        "f": ["p", "p"],
        "g": ["0", "0"],
        "h": ["0", "0"],
    }
    return config_from_dict({
        "r": r,
        "initial": list(initial),
        "burn_in": burn_in,
        "coupling": "current",
        "parts": {c: dict(part) for c in "xyzw"},
    })


def make_config(r: float = 0.5, coupling: str = "current", burn_in: int = 0,
                initial=(0.1, 0.2, 0.3, 0.4), **part_overrides):
    """Minimal valid config; part_overrides patches single slots, keyed
    like g_x=("log(x - 2)", "log(x - 2)")."""
    parts = {}
    for c in "xyzw":
        parts[c] = {
            "alpha": [1, 1],
            "beta": [2, 3],
            "base": ["logistic", "logistic"],
            "f": ["p", "p"],
            "g": ["0", "0"],
            "h": ["p", "p"],
        }
    for key, value in part_overrides.items():
        slot, coord = key.split("_")
        parts[coord][slot] = list(value)
    return config_from_dict({
        "r": r,
        "initial": list(initial),
        "burn_in": burn_in,
        "coupling": coupling,
        "parts": parts,
    })
