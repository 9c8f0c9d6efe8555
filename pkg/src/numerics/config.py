def precisionDefaults():
    return {
        "mantissa_bits": 256,
        "target_tol": 1e-30,
    }


def quadratureDefaults():
    # Arbitrary-precision half-line work (bimoments, inner products)
    return {
        "scheme": "tanh_sinh",
        "panel_count": 32,
        "points_per_panel": 24,
        "abs_tol": 1e-30,
        "rel_tol": 1e-28,
    }


def equilibriumQuadratureDefaults():
    # Hardware-double work on finite intervals
    return {
        "scheme": "gauss_legendre_panels",
        "panel_count": 16,
        "points_per_panel": 20,
        "abs_tol": 1e-13,
        "rel_tol": 1e-11,
    }


def rootDefaults():
    return {
        "bracket_expansions": 60,
        "newton_max_iter": 60,
        "solve_2d_max_iter": 50,
        "fd_step": 1e-7,
    }
