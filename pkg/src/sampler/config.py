def samplerDefaults():
    return {
        "proposal_scale": 0.1,
        "target_acceptance": 0.3,
        "tune_interval": 50,
        "scale_bounds": (1e-6, 1e3),
        # initial particles spread evenly over (0, initial_spread]
        "initial_spread": 2.0,
    }
