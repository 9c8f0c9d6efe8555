def tensorRuleDefaults():
    # Per-axis rule for the small partition-function integrals, in hardware doubles
    return {
        "scheme": "gauss_legendre_panels",
        "panel_count": 12,
        "points_per_panel": 16,
        "abs_tol": 1e-12,
        "rel_tol": 1e-10,
        "max_particles": 3,
    }
