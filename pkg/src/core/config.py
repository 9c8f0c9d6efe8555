def commonDefaults():
    return {
        "theta": "2",
        "potential": None,
        "weight": None,
        "alpha": None,
        "precision": 256,
        "out": None,
        "report": None,
        "log_level": "WARNING",
    }


def commandParamConfig():
    """Accepted ranges for numeric options.

    Each item is (name, (min, max), default).
    """
    return [
        ("precision", (64, 4096), 256),
        ("jmax", (1, 60), 10),
        ("n", (1, 200), 5),
        ("k_max", (0, 50), 6),
        ("points", (1, 100000), 100),
        ("grid", (2, 1000000), 400),
        ("nodes", (64, 100000), 512),
        ("el_points", (0, 1000), 30),
        ("sweeps", (2, 10 ** 8), 20000),
        ("burn_in", (0, 10 ** 8), 4000),
        ("thinning", (1, 10 ** 6), 10),
        ("seed", (0, 2 ** 64 - 1), 7),
        ("tol", (0.0, 1.0), 1e-12),
        ("xmax", (0.0, 1e6), 5.0),
        ("c", (0.0, 1e12), 1.0),
        ("c0", (0.0, 1e12), None),
        ("c1", (0.0, 1e12), None),
    ]


def validationDefaults():
    # Checks run by `validate` when --checks is not given
    return {
        "checks": [
            "orthogonality",
            "recurrence",
            "cd",
            "unit_circle",
            "laguerre_c",
            "laguerre_density",
            "mass",
            "transition",
            "euler_lagrange",
            "edge_exponents",
            "critical_rho",
            "oracles",
            "partition_function",
            "two_path_density",
            "resolvent",
        ],
        "optional_checks": ["monte_carlo"],
    }
