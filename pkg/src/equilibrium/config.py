def equilibriumDefaults():
    return {
        "curve_nodes": 512,
        "solve_tol": 1e-10,
        "c_bracket": (1e-8, 1.0),
        # Edge classification
        "critical_rel_tol": 1e-6,
        "negativity_tol": 1e-10,
        "mass_tol": 1e-6,
        "validation_points": 80,
        # Interior points where the quadrature and N_in densities are compared
        "two_path_points": 5,
        "continuation_steps": 8,
    }


def massDensityDefaults():
    # Chebyshev degree for the edge-adapted interpolant of psi on each half of the support
    return {
        "degree": 48,
    }


def eulerLagrangeDefaults():
    return {
        "interior_points": 30,
        "exterior_factors": (1.1, 2.0, 5.0),
    }


def criticalSearchDefaults():
    return {
        "rho_lo": -6.0,
        "rho_hi": 0.0,
        "tol": 1e-6,
        "max_iter": 60,
    }
