def growthProbeDefaults():
    return {
        "probe_min": 2.0,
        "probe_max": 1e8,
        "probe_points": 400,
    }


def oneCutGridDefaults():
    return {
        "grid_min": 1e-6,
        "grid_max": 1e6,
        "grid_points": 2000,
    }


def weightAliases():
    # name -> (potential spec, alpha)
    return {
        "laguerre": ({"kind": "linear", "rho": 1.0}, 0.0),
    }
